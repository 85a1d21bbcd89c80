"""
Scoring detections
==================

Ground truth for a small two-subset test set, a detector that is good on
one subset and sloppy on the other, and the resulting metrics.
"""

import numpy as np

from augforge.evaluation import Detection, DetectionSet, GroundTruthSet, evaluate, iou
from augforge.imaging import BBox

# two boxes overlapping by half their width
print("IoU of shifted boxes:", iou(BBox(0, 0, 10, 10), BBox(5, 0, 15, 10)))

rng = np.random.default_rng(4)
images, subsets, dets = {}, {}, []
for i in range(20):
    image_id = f"img{i:02d}"
    x, y = rng.uniform(50, 600), rng.uniform(50, 350)
    truth = BBox(x, y, x + 200, y + 150)
    images[image_id] = [truth]
    subsets[image_id] = "lightbox" if i < 10 else "sunlamp"
    # sunlamp images get a much noisier localisation
    jitter = 4.0 if i < 10 else 30.0
    dx, dy = rng.normal(0, jitter, 2)
    dets.append(Detection(image_id, BBox(x + dx, y + dy, x + dx + 200, y + dy + 150), float(rng.uniform(0.5, 1.0))))

report = evaluate(GroundTruthSet(images, subsets), DetectionSet(dets))
for key, value in report.to_dict().items():
    print(f"{key:>10}: {value}")

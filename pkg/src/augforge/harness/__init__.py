from .dataset import DatasetManifest, ManifestError, augment_dataset, load_manifest, write_dataset
from .objectives import (
    DatasetEvalObjective,
    ExternalObjective,
    SurrogateObjective,
    run_external_objective,
    surrogate_objective,
)
from .report import report_study

__all__ = [
    "DatasetEvalObjective",
    "DatasetManifest",
    "ExternalObjective",
    "ManifestError",
    "SurrogateObjective",
    "augment_dataset",
    "load_manifest",
    "report_study",
    "run_external_objective",
    "surrogate_objective",
    "write_dataset",
]

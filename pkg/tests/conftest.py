from __future__ import annotations

import numpy as np
import pytest

from augforge.imaging import BBox, Sample


def boxed_sample(rng: np.random.Generator, width: int = 64, height: int = 48, sample_id: str = "s") -> Sample:
    """Random image whose mask exactly fills one random box."""
    x0 = int(rng.integers(0, width - 8))
    y0 = int(rng.integers(0, height - 8))
    x1 = int(rng.integers(x0 + 4, width + 1))
    y1 = int(rng.integers(y0 + 4, height + 1))
    mask = np.zeros((height, width), dtype=bool)
    mask[y0:y1, x0:x1] = True
    image = rng.random((height, width, 3))
    return Sample(image, mask, (BBox(x0, y0, x1, y1),), sample_id)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def sample(rng) -> Sample:
    return boxed_sample(rng)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"

# acceptance lines collected while the suite runs, printed at the end
ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def toy_dir():
    return DATA / "toy"


@pytest.fixture
def colornames_sample():
    return DATA / "colornames_sample.csv"


@pytest.fixture
def full_colornames_table(tmp_path, colornames_sample):
    """A 32768-row binary table built by tiling the 16-row sample."""
    from corrtrack.features import read_colornames_table, write_colornames_table

    sample = read_colornames_table(colornames_sample)
    table = np.tile(sample, (32768 // 16, 1))
    path = tmp_path / "colornames.bin"
    write_colornames_table(table, path)
    return path


@pytest.fixture(autouse=True)
def _no_colornames_env(monkeypatch):
    monkeypatch.delenv("CORRTRACK_COLORNAMES", raising=False)


def textured_frame(rng, height=120, width=160):
    """Random smooth-ish RGB frame used by several modules' tests."""
    import cv2

    coarse = rng.integers(0, 256, size=(height // 8, width // 8, 3)).astype(np.uint8)
    img = cv2.resize(coarse, (width, height), interpolation=cv2.INTER_NEAREST)
    return img


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

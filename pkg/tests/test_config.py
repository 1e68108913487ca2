import math

import pytest

from corrtrack import RunConfig
from corrtrack.config import VARIANTS
from corrtrack.errors import ConfigError


def test_defaults():
    cfg = RunConfig()
    assert cfg.eta == 0.02 and cfg.lam == 0.01 and cfg.admm_iterations == 4
    assert cfg.uncertainty_threshold == 2.7 and cfg.history_length == 100 and cfg.prior_growth == 1.05
    assert cfg.detector_periods == (math.inf, 250.0, 50.0, 10.0, 1.0)
    assert cfg.detector_scales == (0.5, 0.7, 1.0, 1.2, 1.5, 2.0)
    assert cfg.detector_pairs() == ((0, 1, 2, 3, 4), cfg.detector_scales)


def test_text_round_trip(tmp_path):
    cfg = RunConfig(variant="st-single-scale", eta=0.05, use_gray=False, detector_scales=(0.8, 1.0))
    path = tmp_path / "run.cfg"
    cfg.save(path)
    assert RunConfig.load(path) == cfg


def test_partial_file_keeps_defaults():
    cfg = RunConfig.from_text("# tuned\neta = 0.1\n\n")
    assert cfg.eta == 0.1 and cfg.uncertainty_threshold == 2.7


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError, match=":2: unknown key 'etaa'"):
        RunConfig.from_text("eta = 0.1\netaa = 0.2\n")


@pytest.mark.parametrize("text", ["eta = abc", "use_hog = maybe", "eta 0.1", "eta = 2"])
def test_bad_values(text):
    with pytest.raises(ConfigError):
        RunConfig.from_text(text)


def test_variant_pairs():
    cfg = RunConfig()
    assert cfg.replace(variant="st-multiscale").detector_pairs() == ((4,), cfg.detector_scales)
    assert cfg.replace(variant="st-single-scale").detector_pairs() == ((4,), (1.0,))
    assert cfg.replace(variant="init-single-scale").detector_pairs() == ((0,), (1.0,))
    assert not cfg.replace(variant="short-term").detector_enabled
    assert set(VARIANTS) == {"full", "st-multiscale", "st-single-scale", "init-multiscale",
                             "init-single-scale", "short-term"}


def test_structural_checks():
    with pytest.raises(ConfigError):
        RunConfig(variant="nope")
    with pytest.raises(ConfigError):
        RunConfig(detector_periods=(10.0, 1.0))
    with pytest.raises(ConfigError):
        RunConfig(num_scales=32)
    with pytest.raises(ConfigError):
        RunConfig(use_hog=False, use_colornames=False, use_gray=False)


def test_missing_table_drops_color_names(caplog):
    fcfg = RunConfig().feature_config()
    assert not fcfg.use_colornames and fcfg.use_hog


def test_table_path_enables_color_names(full_colornames_table):
    fcfg = RunConfig(colornames_table=str(full_colornames_table)).feature_config()
    assert fcfg.use_colornames
    assert fcfg.colornames_table_path == str(full_colornames_table)

import math

import numpy as np
import pytest

import corrtrack.detector as detector_mod
from corrtrack.correlation import ResponseMap
from corrtrack.detector import (DetectorSchedule, FilterBank, MotionPrior, detect, is_pristine,
                                prior_density, update_bank)
from corrtrack.errors import ContractViolation
from corrtrack.eval.synthetic import _paste, render_background, render_target
from corrtrack.features import FeatureConfig
from corrtrack.filter_learning import ConstrainedFilter
from corrtrack.short_term import Geometry, TargetState, train_filter

FCFG = FeatureConfig(use_colornames=False)
PERIODS = (math.inf, 250.0, 50.0, 10.0, 1.0)
SIZE = (40, 40)


def scene(seed, centers, frame_size=(480, 320)):
    rng = np.random.default_rng(seed)
    img = render_background(frame_size, rng)
    pattern = render_target(np.random.default_rng(99))
    for cx, cy in centers:
        _paste(img, pattern, int(cx - 20), int(cy - 20))
    return img


@pytest.fixture(scope="module")
def trained():
    first = scene(1, [(120, 100)])
    geom = Geometry.from_target(SIZE)
    state = TargetState((120.0, 100.0), SIZE)
    model = train_filter(first, state, geom, FCFG)
    return geom, state, model


def single_pair():
    return DetectorSchedule((0,), (1.0,))


def test_finds_pasted_target_anywhere(trained):
    geom, state, model = trained
    bank = FilterBank.from_initial(model, PERIODS)
    prior = MotionPrior(state.center, SIZE, delta_t=200)
    img = scene(2, [(360, 230)])
    det = detect(img, bank, single_pair(), prior, state, geom, FCFG)
    assert det is not None
    assert abs(det.state.center[0] - 360) <= geom.cell_size
    assert abs(det.state.center[1] - 230) <= geom.cell_size
    assert det.filter_index == 0 and det.scale_factor == 1.0


def test_prior_breaks_tie_between_two_copies(trained):
    geom, state, model = trained
    bank = FilterBank.from_initial(model, PERIODS)
    img = scene(3, [(100, 100), (380, 220)])
    near_a = detect(img, bank, single_pair(), MotionPrior((110, 110), SIZE), state, geom, FCFG)
    near_b = detect(img, bank, single_pair(), MotionPrior((370, 210), SIZE), state, geom, FCFG)
    assert abs(near_a.state.center[0] - 100) <= geom.cell_size
    assert abs(near_b.state.center[0] - 380) <= geom.cell_size


def test_uniform_response_picks_prior_mean(trained, monkeypatch):
    geom, state, model = trained
    monkeypatch.setattr(detector_mod, "circular_correlate",
                        lambda feats, filt, radius: ResponseMap(np.ones(feats.shape), radius))
    bank = FilterBank.from_initial(model, PERIODS)
    anchor = (250.0, 170.0)
    img = scene(4, [])
    det = detect(img, bank, single_pair(), MotionPrior(anchor, SIZE), state, geom, FCFG)
    assert abs(det.state.center[0] - anchor[0]) <= geom.cell_size / 2
    assert abs(det.state.center[1] - anchor[1]) <= geom.cell_size / 2


def test_small_frame_skips_detection(trained):
    geom, state, model = trained
    bank = FilterBank.from_initial(model, PERIODS)
    sched = single_pair()
    small = np.zeros((40, 40, 3), np.uint8)
    assert detect(small, bank, sched, MotionPrior(state.center, SIZE), state, geom, FCFG) is None
    assert sched.cursor == 0  # single pair cycles back


# -- motion prior ---------------------------------------------------------------

def test_prior_density_values():
    prior = MotionPrior((50.0, 60.0), (10.0, 20.0))
    assert prior_density(prior, (50.0, 60.0)) == 1.0
    assert prior_density(prior, (60.0, 60.0)) == pytest.approx(math.exp(-0.5))
    assert prior_density(prior, (50.0, 80.0)) == pytest.approx(math.exp(-0.5))


def test_prior_widens_with_uncertain_frames():
    prior = MotionPrior((0.0, 0.0), (10.0, 10.0))
    before = prior_density(prior, (30.0, 0.0))
    for _ in range(10):
        prior.tick()
    assert prior.sigmas[0] == pytest.approx(10 * 1.05 ** 10)
    assert prior_density(prior, (30.0, 0.0)) > before
    prior.reset((5, 5), (10, 10))
    assert prior.delta_t == 0


# -- schedule -----------------------------------------------------------------------

def test_schedule_visits_every_pair_once():
    sched = DetectorSchedule(range(5), (0.5, 0.7, 1.0, 1.2, 1.5, 2.0))
    seen = []
    for _ in range(30):
        seen.append(sched.current())
        sched.advance()
    assert len(set(seen)) == 30
    assert seen[:6] == [(0, s) for s in (0.5, 0.7, 1.0, 1.2, 1.5, 2.0)]
    assert sched.cursor == 0


def test_schedule_needs_pairs():
    with pytest.raises(ContractViolation):
        DetectorSchedule((), (1.0,))


# -- filter bank ------------------------------------------------------------------------

def constant_filter(value):
    return ConstrainedFilter(np.full((1, 3, 3), value), np.ones(1))


def test_bank_counters_follow_periods():
    bank = FilterBank.from_initial(constant_filter(0.0), PERIODS)
    fresh = constant_filter(1.0)
    for _ in range(9):
        update_bank(bank, fresh, 0.5)
    assert bank.filters[3].channels.max() == 0.0
    update_bank(bank, fresh, 0.5)
    assert bank.filters[3].channels.max() == 0.5
    assert bank.counters[3] == 0
    assert bank.counters[2] == 10 and bank.counters[1] == 10
    assert bank.filters[0].channels.max() == 0.0


def test_bank_zero_rate_is_noop():
    bank = FilterBank.from_initial(constant_filter(0.0), PERIODS)
    before = bank.snapshot()
    for _ in range(20):
        update_bank(bank, constant_filter(1.0), 0.0)
    assert bank.snapshot() == before


def test_slot_zero_never_changes():
    init = constant_filter(0.3)
    bank = FilterBank.from_initial(init, PERIODS)
    ref = init.copy()
    for i in range(300):
        update_bank(bank, constant_filter(float(i)), 0.02, short_term=constant_filter(float(i)))
    assert is_pristine(bank, ref)
    assert bank.short_term.channels.max() == 299.0


def test_bank_validation():
    with pytest.raises(ContractViolation):
        FilterBank([constant_filter(0)], [1.0])
    with pytest.raises(ContractViolation):
        FilterBank([constant_filter(0)], [math.inf, 1.0])

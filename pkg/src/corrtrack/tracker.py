"""Long-term tracker: short-term DCF, uncertainty test and whole-image re-detection."""
import logging
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .config import RunConfig
from .detector import DetectorSchedule, FilterBank, MotionPrior, detect, update_bank
from .errors import InitializationError, TrackingError
from .features import ImageFrame, as_pixels, load_colornames_table
from .filter_learning import update_filter
from .geometry import center_of, clamp_to_image, is_degenerate
from .short_term import (Geometry, ScaleFilter, TargetState, estimate_scale, localize,
                         train_filter)
from .uncertainty import QualityHistory, is_uncertain, quality, uncertainty_ratio

log = logging.getLogger(__name__)


@dataclass
class FrameRecord:
    """Per-frame diagnostics; one JSON object per line when serialized."""

    frame_index: int
    mode: str
    st_center: Optional[list]
    st_quality: Optional[float]
    det_center: Optional[list]
    det_quality: Optional[float]
    confident: bool
    box: list
    ratio: Optional[float] = None
    detector_filter: Optional[int] = None
    detector_scale: Optional[float] = None

    def to_dict(self):
        return {k: _jsonable(v) for k, v in asdict(self).items()}


def _jsonable(v):
    if isinstance(v, float) and not np.isfinite(v):
        return None if np.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


@dataclass
class TrackerState:
    target: TargetState
    short_term: object
    bank: FilterBank
    scale_filter: ScaleFilter
    history: QualityHistory
    prior: MotionPrior
    schedule: Optional[DetectorSchedule]
    confident: bool
    frame_index: int
    last_quality: float
    anchor_scale: float = 1.0


class LongTermTracker:
    """Tracks one target through occlusion and disappearance.

    >>> tracker = LongTermTracker(RunConfig())
    >>> tracker.init(first_frame, (x, y, w, h))          # doctest: +SKIP
    >>> box, record = tracker.step(next_frame)             # doctest: +SKIP
    """

    def __init__(self, config=None):
        self.config = config or RunConfig()
        self.fcfg = self.config.feature_config()
        self.admm = self.config.admm_config()
        self.ucfg = self.config.uncertainty_config()
        self.table = (load_colornames_table(self.fcfg.colornames_table_path)
                      if self.fcfg.use_colornames else None)
        self.geom = None
        self.state = None
        self.trace = []

    # -- helpers -------------------------------------------------------------

    def _train(self, pixels, target):
        return train_filter(pixels, target, self.geom, self.fcfg, self.admm,
                            self.config.sigma_factor, self.table)

    def _localize(self, pixels, target, model):
        return localize(pixels, target, model, self.geom, self.fcfg,
                        self.config.psr_radius, self.table)

    def _new_scale_filter(self):
        cfg = self.config
        return ScaleFilter(cfg.num_scales, cfg.scale_step, cfg.lam, cfg.scale_template)

    # -- public API ------------------------------------------------------------

    def init(self, frame, box):
        """Learn the initialization model from ``box`` on the first frame."""
        pixels = as_pixels(frame)
        H, W = pixels.shape[:2]
        if is_degenerate(box):
            raise InitializationError(f"degenerate initial box {box}")
        clamped = clamp_to_image(box, W, H)
        if is_degenerate(clamped):
            raise InitializationError(f"initial box {box} does not overlap the image")
        cfg = self.config
        size = (clamped[2], clamped[3])
        self.geom = Geometry.from_target(size, cfg.padding, cfg.template_max_side, cfg.cell_size)
        target = TargetState(center_of(clamped), size, 1.0)

        model = self._train(pixels, target)
        bank = FilterBank.from_initial(model, cfg.detector_periods)
        sf = self._new_scale_filter().learn(pixels, target.center, target.size)
        _, resp = self._localize(pixels, target, model)
        q0 = quality(resp)
        history = QualityHistory(cfg.history_length).record(q0)
        prior = MotionPrior(target.center, target.size, cfg.prior_growth)
        schedule = None
        if cfg.detector_enabled:
            filters, scales = cfg.detector_pairs()
            schedule = DetectorSchedule(filters, scales)
        self.state = TrackerState(target, model, bank, sf, history, prior, schedule,
                                  True, int(getattr(frame, "frame_index", 0)), q0)
        self.initial_model = bank.filters[0]
        rec = FrameRecord(self.state.frame_index, "INIT", list(target.center), q0, None, None,
                          True, list(target.box()), 0.0)
        self.trace = [rec]
        return self.state

    def step(self, frame):
        """Track one frame; returns ``(box, FrameRecord)``."""
        if self.state is None:
            raise TrackingError("tracker not initialized")
        st = self.state
        cfg = self.config
        pixels = as_pixels(frame)
        frame_index = (frame.frame_index if isinstance(frame, ImageFrame)
                       else st.frame_index + 1)

        try:
            st_target, st_resp = self._localize(pixels, st.target, st.short_term)
            st_quality = quality(st_resp)
        except TrackingError as exc:
            log.warning("frame %d: localization failed (%s)", frame_index, exc)
            st.prior.tick()
            st.confident = False
            st.frame_index = frame_index
            rec = FrameRecord(frame_index, "FAIL", None, None, None, None, False,
                              list(st.target.box()), None)
            self.trace.append(rec)
            return st.target.box(), rec

        mode = "ST"
        det = None
        winner, q_win = st_target, st_quality
        if not st.confident and st.schedule is not None:
            # detector sizes are relative to the last confident scale so that
            # uncertain detections cannot compound the scale
            anchor = TargetState(st.prior.anchor, st.prior.base_size, st.anchor_scale)
            det = detect(pixels, st.bank, st.schedule, st.prior, anchor, self.geom,
                         self.fcfg, cfg.psr_radius, self.table)
            if det is not None and det.quality > st_quality:
                scale = float(np.clip(det.state.scale, cfg.scale_min, cfg.scale_max))
                size = (self.geom.base_size[0] * scale, self.geom.base_size[1] * scale)
                winner, q_win = TargetState(det.state.center, size, scale), det.quality
                mode = "DET"

        ratio = uncertainty_ratio(q_win, st.history)
        uncertain = is_uncertain(q_win, st.history, self.ucfg)
        if not uncertain:
            scale = estimate_scale(pixels, winner, st.scale_filter, cfg.scale_min, cfg.scale_max)
            size = (self.geom.base_size[0] * scale, self.geom.base_size[1] * scale)
            winner = TargetState(winner.center, size, scale)
            fresh = self._train(pixels, winner)
            st.short_term = update_filter(st.short_term, fresh, cfg.eta)
            update_bank(st.bank, fresh, cfg.eta, short_term=st.short_term)
            st.scale_filter = st.scale_filter.blend(
                st.scale_filter.learn(pixels, winner.center, winner.size), cfg.eta)
            st.history.record(q_win)
            st.prior.reset(winner.center, winner.size)
            st.anchor_scale = winner.scale
        else:
            st.prior.tick()

        st.target = winner
        st.confident = not uncertain
        st.frame_index = frame_index
        st.last_quality = q_win
        box = winner.box()
        rec = FrameRecord(
            frame_index, mode, list(st_target.center), st_quality,
            list(det.state.center) if det is not None else None,
            det.quality if det is not None else None,
            not uncertain, list(box), ratio,
            det.filter_index if det is not None else None,
            det.scale_factor if det is not None else None)
        self.trace.append(rec)
        return box, rec


def track_sequence(frames, init_box, config=None, tracker=None):
    """Run one-pass tracking; returns ``(boxes, trace)`` with one box per frame."""
    tracker = tracker or LongTermTracker(config)
    boxes = []
    for i, frame in enumerate(frames):
        if i == 0:
            tracker.init(frame, init_box)
            boxes.append(tracker.state.target.box())
        else:
            box, _ = tracker.step(frame)
            boxes.append(box)
    return np.array(boxes, dtype=np.float64).reshape(-1, 4), tracker.trace

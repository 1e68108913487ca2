"""Whole-image re-detection with a bank of filters updated at different periods.

Only one ``(filter, size scale)`` pair is evaluated per frame; the schedule
cycles through all pairs filter-major. The response is multiplied by a
Gaussian random-walk prior around the last confident position whose spread
grows geometrically with the number of uncertain frames.
"""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .correlation import ResponseMap, circular_correlate, refine_peak
from .errors import ContractViolation
from .features import as_pixels, extract_features
from .filter_learning import update_filter
from .short_term import TargetState
from .uncertainty import quality_at


class FilterBank:
    """Detector filters with update periods (``inf`` = never updated).

    Slot 0 holds the initialization model and is never touched. The last
    slot is an alias of the short-term model, refreshed through
    :meth:`set_short_term` instead of the counter rule.
    """

    def __init__(self, filters, periods, counters=None):
        if len(filters) != len(periods):
            raise ContractViolation("one period per filter required")
        if not math.isinf(periods[0]):
            raise ContractViolation("filter 0 must never be updated")
        self.filters = list(filters)
        self.periods = [float(p) for p in periods]
        self.counters = list(counters) if counters is not None else [0] * len(filters)

    @classmethod
    def from_initial(cls, model, periods):
        filters = [model.copy() for _ in periods[:-1]] + [model]
        return cls(filters, periods)

    def __len__(self):
        return len(self.filters)

    @property
    def short_term(self):
        return self.filters[-1]

    def set_short_term(self, model):
        self.filters[-1] = model
        self.counters[-1] = 0

    def snapshot(self):
        """Bytes of all coefficients, weights and counters (for equality tests)."""
        parts = [f.channels.tobytes() + f.weights.tobytes() for f in self.filters]
        return b"".join(parts) + repr(self.counters).encode()

    def copy(self):
        return FilterBank([f.copy() for f in self.filters], self.periods, self.counters)


def update_bank(bank, fresh, eta, short_term=None):
    """Advance per-filter counters and blend ``fresh`` into filters that are due.

    Slot 0 and the aliased last slot are skipped; when ``short_term`` is
    given it becomes the new last slot. ``eta == 0`` leaves the bank as is.
    """
    if eta == 0.0:
        return bank
    for i in range(1, len(bank) - 1):
        period = bank.periods[i]
        if math.isinf(period):
            continue
        bank.counters[i] += 1
        if bank.counters[i] >= period:
            bank.filters[i] = update_filter(bank.filters[i], fresh, eta)
            bank.counters[i] = 0
    if short_term is not None:
        bank.set_short_term(short_term)
    return bank


@dataclass
class MotionPrior:
    """Random-walk position prior anchored at the last confident position."""

    anchor: tuple
    base_size: tuple
    prior_growth: float = 1.05
    delta_t: int = 0

    @property
    def sigmas(self):
        g = self.prior_growth ** self.delta_t
        return (self.base_size[0] * g, self.base_size[1] * g)

    def reset(self, anchor, base_size):
        self.anchor = (float(anchor[0]), float(anchor[1]))
        self.base_size = (float(base_size[0]), float(base_size[1]))
        self.delta_t = 0

    def tick(self):
        self.delta_t += 1


def prior_density(prior, pos):
    """Unnormalized Gaussian density, equal to 1 at the anchor."""
    sx, sy = prior.sigmas
    x = np.asarray(pos[0], dtype=np.float64)
    y = np.asarray(pos[1], dtype=np.float64)
    return np.exp(-((x - prior.anchor[0]) ** 2 / (2 * sx ** 2)
                    + (y - prior.anchor[1]) ** 2 / (2 * sy ** 2)))


@dataclass
class DetectorSchedule:
    """Cursor over ``filter_indices x scales`` in filter-major order."""

    filter_indices: tuple
    scales: tuple
    cursor: int = 0

    def __post_init__(self):
        self.filter_indices = tuple(int(i) for i in self.filter_indices)
        self.scales = tuple(float(s) for s in self.scales)
        if not self.filter_indices or not self.scales:
            raise ContractViolation("detector schedule needs filters and scales")

    @property
    def pairs(self):
        return [(i, s) for i in self.filter_indices for s in self.scales]

    @property
    def cycle_length(self):
        return len(self.filter_indices) * len(self.scales)

    def current(self):
        return self.pairs[self.cursor]

    def advance(self):
        self.cursor = (self.cursor + 1) % self.cycle_length


@dataclass
class Detection:
    state: TargetState
    quality: float
    filter_index: int
    scale_factor: float
    response: ResponseMap = field(repr=False)
    weighted_peak: tuple = (0, 0)


def detect(frame, bank, schedule, prior, current, geom, fcfg, exclusion_radius=5,
           table=None) -> Optional[Detection]:
    """Evaluate the scheduled ``(filter, scale)`` pair on the whole frame.

    The image is resized so the target at ``current.scale * scale_factor``
    appears at template size; the filter is zero padded to the whole plane.
    Returns ``None`` (after advancing the cursor) when the frame is smaller
    than the filter at this scale.
    """
    fi, s = schedule.current()
    schedule.advance()
    filt = bank.filters[fi]
    pixels = as_pixels(frame)
    H, W = pixels.shape[:2]
    cs = geom.cell_size
    k = geom.template_scale / (current.scale * s)
    plane_w = max(1, int(round(W * k / cs)))
    plane_h = max(1, int(round(H * k / cs)))
    fh, fw = filt.shape
    if plane_w < fw or plane_h < fh:
        return None
    feats = extract_features(pixels, (0.0, 0.0, float(W), float(H)), fcfg,
                             (plane_w * cs, plane_h * cs), table)
    resp = circular_correlate(feats, filt, exclusion_radius)

    # image position of the target center for every circular shift
    kx = plane_w * cs / W
    ky = plane_h * cs / H
    tw, th = geom.template_size
    cols = np.arange(plane_w)
    rows = np.arange(plane_h)
    xs = ((tw / 2.0 + cols * cs) % (plane_w * cs)) / kx
    ys = ((th / 2.0 + rows * cs) % (plane_h * cs)) / ky
    prior_plane = prior_density(prior, (xs[None, :], ys[:, None]))
    weighted = resp.values * prior_plane
    peak = np.unravel_index(int(np.argmax(weighted)), weighted.shape)
    peak = (int(peak[0]), int(peak[1]))

    q = quality_at(resp.values, peak, exclusion_radius)
    r, c = refine_peak(resp.values, peak) if min(resp.shape) >= 3 else peak
    cx = ((tw / 2.0 + c * cs) % (plane_w * cs)) / kx
    cy = ((th / 2.0 + r * cs) % (plane_h * cs)) / ky
    new_scale = current.scale * s
    size = (geom.base_size[0] * new_scale, geom.base_size[1] * new_scale)
    state = TargetState((float(cx), float(cy)), size, new_scale)
    return Detection(state, q, fi, s, resp, peak)


def is_pristine(bank, initial):
    """Whether slot 0 still equals the initialization model bit for bit."""
    return bank.filters[0].identical_to(initial)


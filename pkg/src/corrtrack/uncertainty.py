"""Localization quality and the self-adaptive uncertainty test."""
from collections import deque
from dataclasses import dataclass

import numpy as np

from .correlation import DEFAULT_EXCLUSION_RADIUS, ResponseMap, psr_at
from .errors import ContractViolation

QUALITY_EPS = 1e-12


@dataclass(frozen=True)
class UncertaintyConfig:
    uncertainty_threshold: float = 2.7
    history_length: int = 100
    psr_exclusion_radius: int = DEFAULT_EXCLUSION_RADIUS

    def __post_init__(self):
        if not self.uncertainty_threshold > 1:
            raise ContractViolation("uncertainty_threshold must exceed 1")
        if self.history_length < 1:
            raise ContractViolation("history_length must be at least 1")


class QualityHistory:
    """Qualities of the last ``history_length`` confidently tracked frames."""

    def __init__(self, history_length=100, values=()):
        self.history_length = int(history_length)
        self._buf = deque(values, maxlen=self.history_length)

    def __len__(self):
        return len(self._buf)

    @property
    def values(self):
        return list(self._buf)

    @property
    def mean(self):
        if not self._buf:
            return 0.0
        return float(np.mean(self._buf))

    def record(self, q):
        """Push a confident-frame quality, evicting the oldest beyond ``history_length``."""
        self._buf.append(float(q))
        return self

    def copy(self):
        return QualityHistory(self.history_length, self._buf)


def quality(response, exclusion_radius=None):
    """``PSR(r) * max(r)``; zero for a negative maximum.

    With a window that covers the whole plane the PSR is taken as 0.
    """
    if not isinstance(response, ResponseMap):
        response = ResponseMap(np.asarray(response, dtype=np.float64))
    radius = response.exclusion_radius if exclusion_radius is None else exclusion_radius
    return quality_at(response.values, response.peak_pos, radius)


def quality_at(values, pos, exclusion_radius=DEFAULT_EXCLUSION_RADIUS):
    """Quality of the peak hypothesis at ``pos`` (not necessarily the maximum)."""
    peak = float(values[pos])
    if peak < 0:
        return 0.0
    try:
        p = psr_at(values, pos, exclusion_radius)
    except ContractViolation:
        return 0.0
    return max(0.0, p) * peak


def uncertainty_ratio(q_t, history):
    if len(history) == 0:
        return 0.0
    if q_t <= QUALITY_EPS:
        return float("inf")
    return history.mean / q_t


def is_uncertain(q_t, history, cfg=UncertaintyConfig()):
    """True when ``mean(history) / q_t > uncertainty_threshold``; never on an empty history."""
    if len(history) == 0:
        return False
    if q_t <= QUALITY_EPS:
        return True
    return history.mean / q_t > cfg.uncertainty_threshold


def record_confident(history, q_t):
    return history.record(q_t)

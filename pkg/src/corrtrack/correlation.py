"""FFT circular correlation of feature stacks with filters, and peak analysis.

Convention: for a feature plane ``f`` and a filter ``h`` the circular
correlation is

    r[t] = sum_x f[(x + t) mod N] * h[x]

which in the Fourier domain is ``F^-1(F(f) * conj(F(h)))``. A filter
trained so that ``f * h`` peaks at the origin therefore produces a peak at
``t`` when the content has moved by ``t`` cells.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft

from .errors import ContractViolation

DEFAULT_EXCLUSION_RADIUS = 5


@dataclass(frozen=True, eq=False)
class FeatureStack:
    """Real feature channels of shape ``(C, H, W)`` sampled on a cell grid.

    ``region`` is the image rectangle that was actually sampled and
    ``cell_size`` the number of template pixels per cell.
    """

    channels: np.ndarray
    cell_size: int = 1
    region: tuple = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=np.float64)
        if ch.ndim == 2:
            ch = ch[None]
        if ch.ndim != 3 or ch.shape[0] < 1:
            raise ContractViolation("feature stack needs at least one 2-D channel")
        if ch.shape[1] < 1 or ch.shape[2] < 1:
            raise ContractViolation("feature channels must be at least 1x1")
        object.__setattr__(self, "channels", ch)

    @property
    def num_channels(self):
        return self.channels.shape[0]

    @property
    def shape(self):
        """Spatial ``(H, W)`` of every channel."""
        return self.channels.shape[1:]

    def with_channels(self, channels):
        return FeatureStack(channels, self.cell_size, self.region)


@dataclass(frozen=True, eq=False)
class ResponseMap:
    """A correlation response plane with its (tie-broken) maximum."""

    values: np.ndarray
    exclusion_radius: int = DEFAULT_EXCLUSION_RADIUS
    peak_pos: tuple = field(init=False)
    peak_value: float = field(init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.size == 0:
            raise ContractViolation("response must be a non-empty 2-D plane")
        object.__setattr__(self, "values", v)
        # argmax on the flattened row-major plane returns the first maximum,
        # i.e. smallest row then smallest column
        idx = int(np.argmax(v))
        pos = np.unravel_index(idx, v.shape)
        object.__setattr__(self, "peak_pos", (int(pos[0]), int(pos[1])))
        object.__setattr__(self, "peak_value", float(v.flat[idx]))

    @property
    def shape(self):
        return self.values.shape

    @cached_property
    def psr(self):
        """PSR with this map's exclusion radius; 0 when the window covers the plane."""
        try:
            return psr(self, self.exclusion_radius)
        except ContractViolation:
            return 0.0


def _filter_arrays(filt):
    channels = np.asarray(filt.channels, dtype=np.float64)
    if channels.ndim == 2:
        channels = channels[None]
    weights = np.asarray(filt.weights, dtype=np.float64).reshape(-1)
    return channels, weights


def correlate_channels(features, filter_channels):
    """Per-channel circular correlation, returns ``(C, H, W)``.

    Filters smaller than the feature plane are zero padded at the bottom and
    right before transforming.
    """
    f = features.channels if isinstance(features, FeatureStack) else np.asarray(features, dtype=np.float64)
    h = np.asarray(filter_channels, dtype=np.float64)
    if f.ndim == 2:
        f = f[None]
    if h.ndim == 2:
        h = h[None]
    _check_shapes(f, h)
    shape = f.shape[1:]
    fh = scipy.fft.rfft2(f)
    hh = scipy.fft.rfft2(h, s=shape)
    return scipy.fft.irfft2(fh * np.conj(hh), s=shape)


def correlate_arrays(f, h, weights):
    """Weighted channel fusion ``sum_d w_d (f_d * h_d)`` on raw arrays."""
    f = np.asarray(f, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if f.ndim == 2:
        f = f[None]
    if h.ndim == 2:
        h = h[None]
    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    _check_shapes(f, h)
    if weights.shape[0] != f.shape[0]:
        raise ContractViolation(
            f"{weights.shape[0]} weights for {f.shape[0]} channels")
    shape = f.shape[1:]
    fh = scipy.fft.rfft2(f)
    hh = scipy.fft.rfft2(h, s=shape)
    spectrum = np.einsum("c,cij->ij", weights, fh * np.conj(hh))
    return scipy.fft.irfft2(spectrum, s=shape)


def _check_shapes(f, h):
    if f.shape[0] == 0 or f.size == 0:
        raise ContractViolation("empty feature stack")
    if f.shape[0] != h.shape[0]:
        raise ContractViolation(
            f"channel count mismatch: {f.shape[0]} features vs {h.shape[0]} filters")
    if h.shape[1] > f.shape[1] or h.shape[2] > f.shape[2]:
        raise ContractViolation(
            f"filter {h.shape[1:]} larger than feature plane {f.shape[1:]}")


def circular_correlate(features, filt, exclusion_radius=DEFAULT_EXCLUSION_RADIUS):
    """Correlate a feature stack with a weighted multi-channel filter.

    ``filt`` is any object with ``channels`` (``(C, h, w)``) and ``weights``
    (``(C,)``), e.g. a ``ConstrainedFilter``.
    """
    if not isinstance(features, FeatureStack):
        features = FeatureStack(features)
    channels, weights = _filter_arrays(filt)
    values = correlate_arrays(features.channels, channels, weights)
    return ResponseMap(values, exclusion_radius)


def sidelobe_mask(shape, peak_pos, exclusion_radius):
    """Boolean plane that is False inside the wrapped exclusion window."""
    H, W = shape
    r = int(exclusion_radius)
    mask = np.ones(shape, dtype=bool)
    rows = np.arange(peak_pos[0] - r, peak_pos[0] + r + 1) % H
    cols = np.arange(peak_pos[1] - r, peak_pos[1] + r + 1) % W
    mask[np.ix_(rows, cols)] = False
    return mask


def psr_at(values, pos, exclusion_radius=DEFAULT_EXCLUSION_RADIUS):
    """Peak-to-sidelobe ratio of ``values`` treating ``pos`` as the peak."""
    values = np.asarray(values, dtype=np.float64)
    keep = sidelobe_mask(values.shape, pos, exclusion_radius)
    side = values[keep]
    if side.size == 0:
        raise ContractViolation("PSR exclusion window covers the whole response plane")
    std = side.std()
    if std < 1e-12:
        return 0.0
    return float((values[pos] - side.mean()) / std)


def psr(response, exclusion_radius=DEFAULT_EXCLUSION_RADIUS):
    """``(peak - mean(sidelobe)) / std(sidelobe)`` around the response maximum.

    The sidelobe is every cell outside the ``(2r+1)^2`` window centered on
    the peak; the window wraps circularly. A (near) constant sidelobe gives 0.
    """
    if not isinstance(response, ResponseMap):
        response = ResponseMap(response, exclusion_radius)
    return psr_at(response.values, response.peak_pos, exclusion_radius)


def _vertex_offset(left, center, right):
    curvature = left - 2.0 * center + right
    if not curvature < 0.0:
        return 0.0
    off = (left - right) / (2.0 * curvature)
    return float(np.clip(off, -0.5, 0.5))


def refine_peak(values, pos):
    """Quadratic vertex refinement of ``pos`` independently along each axis."""
    values = np.asarray(values, dtype=np.float64)
    H, W = values.shape
    r, c = pos
    dr = _vertex_offset(values[(r - 1) % H, c], values[r, c], values[(r + 1) % H, c])
    dc = _vertex_offset(values[r, (c - 1) % W], values[r, c], values[r, (c + 1) % W])
    return (r + dr, c + dc)


def subgrid_peak(response):
    """Sub-cell peak location ``(row, col)`` of a response of at least 3x3."""
    if not isinstance(response, ResponseMap):
        response = ResponseMap(response)
    H, W = response.shape
    if H < 3 or W < 3:
        raise ContractViolation("sub-grid refinement needs at least a 3x3 response")
    return refine_peak(response.values, response.peak_pos)


def wrap_displacement(pos, shape):
    """Map circular peak coordinates into ``[-N/2, N/2)`` displacements."""
    out = []
    for p, n in zip(pos, shape):
        if p >= n / 2.0:
            p -= n
        out.append(p)
    return tuple(out)

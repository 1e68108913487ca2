"""Short-term component: search-region localization, scale filter, model update."""
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.fft

from .correlation import circular_correlate, subgrid_peak, wrap_displacement
from .errors import ContractViolation, TrackingError
from .features import apply_window, as_pixels, extract_features, sample_region, to_gray
from .filter_learning import AdmmConfig, desired_response, learn_filter, update_filter
from .geometry import rect_from_center
from .segmentation import estimate_mask


@dataclass(frozen=True)
class TargetState:
    """Target center and size in image pixels; ``scale`` is relative to the initial size."""

    center: tuple
    size: tuple
    scale: float = 1.0

    def __post_init__(self):
        if not (self.size[0] > 0 and self.size[1] > 0 and self.scale > 0):
            raise ContractViolation(f"invalid target state {self}")

    def box(self):
        return rect_from_center(self.center, self.size)

    def moved_to(self, center):
        return replace(self, center=(float(center[0]), float(center[1])))


@dataclass(frozen=True)
class Geometry:
    """Fixed template layout derived from the initial target.

    ``template_scale`` maps image pixels at scale 1 to template pixels,
    ``template_size`` is the ``(w, h)`` search template in pixels (a multiple
    of ``cell_size``) and ``base_size`` the initial target size.
    """

    base_size: tuple
    padding: float
    template_scale: float
    template_size: tuple
    cell_size: int

    @classmethod
    def from_target(cls, size, padding=2.0, max_side=100.0, cell_size=4):
        w, h = float(size[0]), float(size[1])
        s0 = min(1.0, max_side / max(w, h))
        tw = max(3, math.ceil(w * (1 + padding) * s0 / cell_size)) * cell_size
        th = max(3, math.ceil(h * (1 + padding) * s0 / cell_size)) * cell_size
        return cls((w, h), float(padding), s0, (tw, th), int(cell_size))

    @property
    def grid_shape(self):
        """``(H, W)`` of the feature plane in cells."""
        return (self.template_size[1] // self.cell_size, self.template_size[0] // self.cell_size)

    def region_size(self, scale):
        """Search region ``(w, h)`` in image pixels at a given scale."""
        return (self.template_size[0] / self.template_scale * scale,
                self.template_size[1] / self.template_scale * scale)

    def search_region(self, center, scale):
        return rect_from_center(center, self.region_size(scale))

    def target_in_template(self):
        """Target rectangle in template pixel coordinates (centered)."""
        tw, th = self.template_size
        w = self.base_size[0] * self.template_scale
        h = self.base_size[1] * self.template_scale
        return ((tw - w) / 2.0, (th - h) / 2.0, w, h)

    def target_area_cells(self):
        _, _, w, h = self.target_in_template()
        return w * h / float(self.cell_size ** 2)


def search_features(frame, state, geom, fcfg, table=None):
    region = geom.search_region(state.center, state.scale)
    return apply_window(extract_features(frame, region, fcfg, geom.template_size, table))


def localize(frame, prev, model, geom, fcfg, exclusion_radius=5, table=None):
    """Move ``prev`` to the maximum of the model response in its search region.

    Returns the shifted state and the raw ``ResponseMap``.
    """
    pixels = as_pixels(frame)
    feats = search_features(pixels, prev, geom, fcfg, table)
    if feats.num_channels != model.num_channels:
        raise TrackingError("feature channels do not match the model")
    resp = circular_correlate(feats, model, exclusion_radius)
    if not np.all(np.isfinite(resp.values)):
        raise TrackingError("non-finite correlation response")
    peak = subgrid_peak(resp)
    dy, dx = wrap_displacement(peak, resp.shape)
    x0, y0, rw, rh = feats.region
    tw, th = geom.template_size
    px = geom.cell_size * rw / tw
    py = geom.cell_size * rh / th
    cx = x0 + rw / 2.0 + dx * px
    cy = y0 + rh / 2.0 + dy * py
    return prev.moved_to((cx, cy)), resp


def train_filter(frame, state, geom, fcfg, admm=AdmmConfig(), sigma_factor=1.0 / 16, table=None):
    """Learn a fresh constrained filter on the current frame at ``state``."""
    pixels = as_pixels(frame)
    feats = search_features(pixels, state, geom, fcfg, table)
    region = feats.region
    target = state.box()
    mask = estimate_mask(pixels, target, region, geom.template_size, geom.cell_size)
    g = desired_response(feats.shape, geom.target_area_cells(), sigma_factor)
    return learn_filter(feats, mask, g, admm)


def update_short_term(model, frame, state, eta, geom, fcfg, admm=AdmmConfig(),
                      sigma_factor=1.0 / 16, table=None):
    """Blend a freshly learned filter into ``model`` with rate ``eta``."""
    if eta == 0.0:
        return model
    fresh = train_filter(frame, state, geom, fcfg, admm, sigma_factor, table)
    return update_filter(model, fresh, eta)


# -- scale estimation --------------------------------------------------------

class ScaleFilter:
    """1-D correlation filter over ``num_scales`` samples spaced by ``step``.

    Each scale sample is the grayscale target patch at size ``size * step^k``
    resampled to ``template x template`` pixels and flattened.
    """

    def __init__(self, num_scales=33, step=1.02, lam=0.01, template=32, sigma=None,
                 numerator=None, denominator=None):
        if num_scales % 2 == 0:
            raise ContractViolation("the number of scales must be odd")
        self.num_scales = num_scales
        self.step = step
        self.lam = lam
        self.template = template
        self.sigma = sigma if sigma is not None else math.sqrt(num_scales) / 4.0
        k = np.arange(num_scales) - num_scales // 2
        self.exponents = k
        self.factors = step ** k.astype(np.float64)
        y = np.exp(-0.5 * (k / self.sigma) ** 2)
        self._g_hat = scipy.fft.fft(y)
        self._window = np.hanning(num_scales + 2)[1:-1] if num_scales > 1 else np.ones(1)
        self.numerator = numerator
        self.denominator = denominator

    @property
    def trained(self):
        return self.numerator is not None

    def samples(self, frame, center, size):
        """Scale feature matrix ``(template^2, num_scales)``."""
        pixels = as_pixels(frame)
        t = self.template
        cols = []
        for f in self.factors:
            w = max(1.0, size[0] * f)
            h = max(1.0, size[1] * f)
            patch, _ = sample_region(pixels, rect_from_center(center, (w, h)), (t, t))
            gray = to_gray(patch)
            cols.append((gray - gray.mean()).ravel())
        return np.stack(cols, axis=1) * self._window[None, :]

    def learn(self, frame, center, size):
        """A new filter trained at the current scale (``self`` is unchanged)."""
        x_hat = scipy.fft.fft(self.samples(frame, center, size), axis=1)
        num = np.conj(self._g_hat)[None, :] * x_hat
        den = np.sum((x_hat * np.conj(x_hat)).real, axis=0)
        return self._with(num, den)

    def blend(self, fresh, eta):
        if eta == 0.0 or not fresh.trained:
            return self
        if not self.trained or eta == 1.0:
            return fresh
        return self._with((1 - eta) * self.numerator + eta * fresh.numerator,
                          (1 - eta) * self.denominator + eta * fresh.denominator)

    def response(self, frame, center, size):
        if not self.trained:
            raise ContractViolation("scale filter is not trained")
        z_hat = scipy.fft.fft(self.samples(frame, center, size), axis=1)
        num = np.sum(np.conj(self.numerator) * z_hat, axis=0)
        return scipy.fft.ifft(num / (self.denominator + self.lam)).real

    def _with(self, num, den):
        return ScaleFilter(self.num_scales, self.step, self.lam, self.template, self.sigma, num, den)


def estimate_scale(frame, state, sf, scale_min=0.2, scale_max=5.0):
    """New scale multiplier ``state.scale * step^k*`` clamped to ``[scale_min, scale_max]``."""
    resp = sf.response(frame, state.center, state.size)
    k = int(sf.exponents[int(np.argmax(resp))])
    return float(np.clip(state.scale * sf.step ** k, scale_min, scale_max))

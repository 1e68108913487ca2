"""Mask-constrained correlation filter learning by ADMM.

For one channel the learner minimizes, over a filter ``h`` supported on the
binary mask ``m``,

    || F(f) * conj(F(h)) - F(g) ||^2 + lambda / 2 * || m * h ||^2

by splitting ``h`` into a Fourier-domain variable ``h_c`` with the
constraint ``h_c = F(m * h)``. Every ADMM round is two closed-form updates
and a multiplier step. Channels are independent and solved together as one
``(C, H, W)`` array. All spectra of real signals are Hermitian, so the
half-spectrum real transforms are used throughout.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft

from .correlation import FeatureStack, correlate_channels
from .errors import ContractViolation
from .segmentation import BinaryMask

WEIGHT_FLOOR = 1e-6


@dataclass(frozen=True)
class AdmmConfig:
    lam: float = 0.01
    mu_init: float = 5.0
    mu_scale: float = 3.0
    mu_max: float = 20.0
    iterations: int = 4

    def __post_init__(self):
        if min(self.lam, self.mu_init, self.mu_scale, self.mu_max) <= 0:
            raise ContractViolation("ADMM parameters must be positive")
        if self.iterations < 1:
            raise ContractViolation("ADMM needs at least one iteration")


@dataclass(frozen=True, eq=False)
class DesiredResponse:
    """Gaussian target output with its peak (value 1) at cell ``(0, 0)``."""

    g: np.ndarray
    sigma: float

    @property
    def shape(self):
        return self.g.shape


def desired_response(shape, target_area_cells, sigma_factor=1.0 / 16):
    """Circularly centered Gaussian of width ``sigma_factor * sqrt(area)``."""
    H, W = shape
    sigma = sigma_factor * np.sqrt(target_area_cells)
    dy = np.arange(H)
    dx = np.arange(W)
    dy = np.minimum(dy, H - dy).astype(np.float64)
    dx = np.minimum(dx, W - dx).astype(np.float64)
    g = np.exp(-(dy[:, None] ** 2 + dx[None, :] ** 2) / (2.0 * sigma ** 2))
    # far tails underflow for narrow Gaussians on large planes
    g = np.maximum(g, np.finfo(np.float64).tiny)
    return DesiredResponse(g, float(sigma))


@dataclass(frozen=True, eq=False)
class ConstrainedFilter:
    """Per-channel filters ``(C, H, W)`` with fusion weights ``(C,)``."""

    channels: np.ndarray
    weights: np.ndarray
    mask: Optional[BinaryMask] = None

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=np.float64)
        if ch.ndim == 2:
            ch = ch[None]
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if ch.ndim != 3 or w.shape[0] != ch.shape[0]:
            raise ContractViolation("filter needs one weight per 2-D channel")
        object.__setattr__(self, "channels", ch)
        object.__setattr__(self, "weights", w)

    @property
    def num_channels(self):
        return self.channels.shape[0]

    @property
    def shape(self):
        return self.channels.shape[1:]

    @property
    def template_size(self):
        """``(W, H)`` in cells."""
        return (self.shape[1], self.shape[0])

    def copy(self):
        mask = None if self.mask is None else BinaryMask(self.mask.cells.copy())
        return ConstrainedFilter(self.channels.copy(), self.weights.copy(), mask)

    def identical_to(self, other):
        """Bit-for-bit equality of coefficients and weights."""
        return (self.channels.shape == other.channels.shape
                and self.channels.tobytes() == other.channels.tobytes()
                and self.weights.tobytes() == other.weights.tobytes())


@dataclass
class AdmmIterate:
    """Diagnostics captured after one ADMM round (summed over channels)."""

    iteration: int
    mu: float
    residual: float
    lagrangian_before: float
    lagrangian_after: float
    lagrangian_end: float


def augmented_lagrangian(f, g, m, hc_hat, h, l_hat, mu, lam):
    """Value of the augmented Lagrangian with full complex spectra.

    ``f`` is ``(C, H, W)``, ``hc_hat`` and ``l_hat`` are full ``fft2``
    spectra of the same shape, ``h`` the spatial filter. Summed over channels.
    """
    f = np.asarray(f, dtype=np.float64)
    fh = np.fft.fft2(f)
    gh = np.fft.fft2(g)
    mh = np.fft.fft2(m * h)
    r = hc_hat - mh
    data = np.sum(np.abs(fh * np.conj(hc_hat) - gh) ** 2)
    reg = lam / 2.0 * np.sum((m * h) ** 2)
    lag = 2.0 * np.sum(np.real(np.conj(l_hat) * r))
    pen = mu * np.sum(np.abs(r) ** 2)
    return float(data + reg + lag + pen)


def _full_spectrum(half, shape):
    # rebuild the full fft2 of a real signal from its rfft2 half
    return np.fft.fft2(scipy.fft.irfft2(half, s=shape))


def learn_filter(features, mask, g, cfg=AdmmConfig(), trace=None):
    """Learn one masked filter per channel; returns a ``ConstrainedFilter``.

    ``trace``, when a list, receives one ``AdmmIterate`` per round (the
    Lagrangian is evaluated with full spectra, which is slow; use for tests).
    """
    f = features.channels if isinstance(features, FeatureStack) else np.asarray(features, dtype=np.float64)
    if f.ndim == 2:
        f = f[None]
    m_mask = mask if isinstance(mask, BinaryMask) else BinaryMask(mask)
    gg = g.g if isinstance(g, DesiredResponse) else np.asarray(g, dtype=np.float64)
    shape = f.shape[1:]
    if m_mask.shape != shape or gg.shape != shape:
        raise ContractViolation(
            f"features {shape}, mask {m_mask.shape} and response {gg.shape} must match")
    m = m_mask.as_float()
    D = shape[0] * shape[1]
    lam = cfg.lam

    fh = scipy.fft.rfft2(f)
    gh = scipy.fft.rfft2(gg)
    fg = fh * np.conj(gh)
    ff = (fh * np.conj(fh)).real

    h = m * scipy.fft.irfft2(fg / (ff + lam), s=shape)
    l_hat = np.zeros_like(fh)
    mu = cfg.mu_init
    hc = None
    for it in range(cfg.iterations):
        mh = scipy.fft.rfft2(h)
        hc_new = (fg + mu * mh - l_hat) / (ff + mu)
        if trace is not None:
            before_hc = _full_spectrum(hc, shape) if hc is not None else np.fft.fft2(h)
            before = augmented_lagrangian(f, gg, m, before_hc, h, _full_spectrum(l_hat, shape), mu, lam)
        h = m * scipy.fft.irfft2(l_hat + mu * hc_new, s=shape) / (lam / (2.0 * D) + mu)
        hc = hc_new
        resid = hc - scipy.fft.rfft2(h)
        if trace is not None:
            hc_full = _full_spectrum(hc, shape)
            after = augmented_lagrangian(f, gg, m, hc_full, h, _full_spectrum(l_hat, shape), mu, lam)
        l_hat = l_hat + mu * resid
        mu_next = min(cfg.mu_scale * mu, cfg.mu_max)
        if trace is not None:
            end = augmented_lagrangian(f, gg, m, hc_full, h, _full_spectrum(l_hat, shape), mu_next, lam)
            res_norm = np.linalg.norm(np.fft.fft2(scipy.fft.irfft2(resid, s=shape)))
            trace.append(AdmmIterate(it, mu, float(res_norm), before, after, end))
        mu = mu_next

    weights = compute_weights(h, f)
    return ConstrainedFilter(h, weights, m_mask)


def compute_weights(filter_channels, features):
    """Normalized per-channel reliability: max of each channel's training response."""
    f = features.channels if isinstance(features, FeatureStack) else np.asarray(features, dtype=np.float64)
    h = np.asarray(filter_channels, dtype=np.float64)
    if f.ndim == 2:
        f = f[None]
    if h.ndim == 2:
        h = h[None]
    if f.shape[0] != h.shape[0]:
        raise ContractViolation("channel counts of filter and features differ")
    resp = correlate_channels(f, h)
    raw = np.maximum(resp.reshape(resp.shape[0], -1).max(axis=1), WEIGHT_FLOOR)
    return raw / raw.sum()


def update_filter(current, fresh, eta):
    """Running average ``(1 - eta) * current + eta * fresh`` of coefficients and weights."""
    if not 0.0 <= eta <= 1.0:
        raise ContractViolation(f"eta must be in [0, 1], got {eta}")
    if current.channels.shape != fresh.channels.shape:
        raise ContractViolation(
            f"filter shapes differ: {current.channels.shape} vs {fresh.channels.shape}")
    if eta == 0.0:
        return current
    if eta == 1.0:
        return fresh.copy()
    channels = (1.0 - eta) * current.channels + eta * fresh.channels
    weights = (1.0 - eta) * current.weights + eta * fresh.weights
    weights = weights / weights.sum()
    mask = _union(current.mask, fresh.mask)
    return ConstrainedFilter(channels, weights, mask)


def _union(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return BinaryMask(a.cells | b.cells)


def pad_filter(filt, shape):
    """Zero-pad filter channels (bottom/right) to a larger ``(H, W)`` plane."""
    H, W = shape
    h, w = filt.shape
    if H < h or W < w:
        raise ContractViolation(f"cannot pad {filt.shape} down to {shape}")
    out = np.zeros((filt.num_channels, H, W))
    out[:, :h, :w] = filt.channels
    mask = None
    if filt.mask is not None:
        cells = np.zeros((H, W), dtype=bool)
        cells[:h, :w] = filt.mask.cells
        mask = BinaryMask(cells)
    return ConstrainedFilter(out, filt.weights.copy(), mask)

"""Region sampling and HOG / color-name / grayscale feature extraction.

Images are ``(H, W, 3)`` uint8 arrays in **RGB** order.
"""
import logging
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional

import cv2
import numpy as np

from .correlation import FeatureStack
from .errors import ConfigError, ContractViolation

log = logging.getLogger(__name__)

HOG_BINS = 18
HOG_CLIP = 0.2
HOG_EPS = 1e-4
COLORNAME_ROWS = 32768
COLORNAME_CHANNELS = 10
COLORNAMES_ENV = "CORRTRACK_COLORNAMES"


@dataclass(frozen=True, eq=False)
class ImageFrame:
    """A video frame; ``pixels`` is ``(H, W, 3)`` uint8 RGB."""

    pixels: np.ndarray
    frame_index: int = 0

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim == 2:
            px = np.repeat(px[:, :, None], 3, axis=2)
        if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ContractViolation(f"expected an (H, W, 3) image, got {px.shape}")
        if px.dtype != np.uint8:
            px = np.clip(np.rint(px), 0, 255).astype(np.uint8)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]


def as_pixels(frame):
    if isinstance(frame, ImageFrame):
        return frame.pixels
    return ImageFrame(frame).pixels


@dataclass(frozen=True)
class FeatureConfig:
    cell_size: int = 4
    use_hog: bool = True
    use_colornames: bool = True
    use_gray: bool = True
    colornames_table_path: Optional[str] = None

    def __post_init__(self):
        if self.cell_size < 1:
            raise ConfigError("cell_size must be >= 1")
        if not (self.use_hog or self.use_colornames or self.use_gray):
            raise ConfigError("at least one feature family must be enabled")

    @property
    def num_channels(self):
        return (HOG_BINS * self.use_hog + COLORNAME_CHANNELS * self.use_colornames
                + 1 * self.use_gray)


# -- color names table ------------------------------------------------------

def read_colornames_table(path):
    """Parse a color-name table file into an ``(rows, 10)`` float array.

    ``.csv``/``.txt`` files hold one comma separated row of 10 probabilities
    per line; anything else is read as little-endian float32 values.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"color-name table not found: {path}")
    if path.suffix.lower() in (".csv", ".txt"):
        rows = []
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                try:
                    vals = [float(v) for v in line.replace(";", ",").split(",")]
                except ValueError as exc:
                    raise ConfigError(f"{path}:{lineno}: {exc}") from None
                if len(vals) != COLORNAME_CHANNELS:
                    raise ConfigError(
                        f"{path}:{lineno}: expected {COLORNAME_CHANNELS} values, got {len(vals)}")
                rows.append(vals)
        table = np.array(rows, dtype=np.float64).reshape(-1, COLORNAME_CHANNELS)
    else:
        raw = np.fromfile(path, dtype="<f4")
        if raw.size % COLORNAME_CHANNELS:
            raise ConfigError(f"{path}: size is not a multiple of {COLORNAME_CHANNELS} floats")
        table = raw.astype(np.float64).reshape(-1, COLORNAME_CHANNELS)
    if np.any(table < 0) or np.any(table.sum(axis=1) > 1 + 1e-6):
        raise ConfigError(f"{path}: rows must be non-negative and sum to at most 1")
    return table


@lru_cache(maxsize=8)
def _load_table(path):
    table = read_colornames_table(path)
    if table.shape[0] != COLORNAME_ROWS:
        raise ConfigError(
            f"{path}: color-name table needs {COLORNAME_ROWS} rows, found {table.shape[0]}")
    table.setflags(write=False)
    return table


def load_colornames_table(path):
    """Load (and cache) a full 32768-row table for 15-bit RGB lookup."""
    return _load_table(str(Path(path).resolve()))


def write_colornames_table(table, path):
    table = np.asarray(table, dtype=np.float64)
    path = Path(path)
    if path.suffix.lower() in (".csv", ".txt"):
        np.savetxt(path, table, delimiter=",", fmt="%.8g")
    else:
        table.astype("<f4").tofile(path)


def resolve_colornames_path(configured=None):
    """Table path from the environment override, else the configured one."""
    env = os.environ.get(COLORNAMES_ENV)
    if env:
        return env
    return configured or None


def colorname_index(pixels):
    px = pixels.astype(np.int32)
    return ((px[..., 0] >> 3) << 10) | ((px[..., 1] >> 3) << 5) | (px[..., 2] >> 3)


# -- sampling -----------------------------------------------------------------

def crop_replicate(pixels, x0, y0, w, h):
    """Integer crop with border replication (works fully outside the image)."""
    H, W = pixels.shape[:2]
    rows = np.clip(np.arange(y0, y0 + h), 0, H - 1)
    cols = np.clip(np.arange(x0, x0 + w), 0, W - 1)
    if 0 <= y0 and y0 + h <= H and 0 <= x0 and x0 + w <= W:
        return pixels[y0:y0 + h, x0:x0 + w]
    return pixels[np.ix_(rows, cols)]


def sample_region(pixels, region, out_size):
    """Sample ``region`` (float rect) resized to ``out_size = (w, h)`` pixels.

    Returns ``(patch, sampled_region)`` where ``sampled_region`` is the
    integer rectangle that was actually cropped.
    """
    x, y, w, h = region
    if not (w > 0 and h > 0):
        raise ContractViolation(f"region must have positive area, got {region}")
    x0 = int(math.floor(x + 0.5))
    y0 = int(math.floor(y + 0.5))
    x1 = max(x0 + 1, int(math.floor(x + w + 0.5)))
    y1 = max(y0 + 1, int(math.floor(y + h + 0.5)))
    crop = crop_replicate(pixels, x0, y0, x1 - x0, y1 - y0)
    ow, oh = int(out_size[0]), int(out_size[1])
    if (x1 - x0, y1 - y0) != (ow, oh):
        shrinking = (x1 - x0) * (y1 - y0) > ow * oh
        interp = cv2.INTER_AREA if shrinking else cv2.INTER_LINEAR
        crop = cv2.resize(np.ascontiguousarray(crop), (ow, oh), interpolation=interp)
    return crop, (float(x0), float(y0), float(x1 - x0), float(y1 - y0))


def to_gray(patch):
    p = patch.astype(np.float64)
    return (0.299 * p[..., 0] + 0.587 * p[..., 1] + 0.114 * p[..., 2]) / 255.0


def cell_mean(plane, cell_size):
    """Average non-overlapping ``cell_size`` blocks over the leading 2 axes."""
    H, W = plane.shape[:2]
    hc, wc = H // cell_size, W // cell_size
    p = plane[:hc * cell_size, :wc * cell_size]
    p = p.reshape(hc, cell_size, wc, cell_size, *plane.shape[2:])
    return p.mean(axis=(1, 3))


# -- HOG ----------------------------------------------------------------------

def image_gradients(gray):
    """Centered differences with replicated borders."""
    p = np.pad(gray, 1, mode="edge")
    gx = p[1:-1, 2:] - p[1:-1, :-2]
    gy = p[2:, 1:-1] - p[:-2, 1:-1]
    return gx, gy


def gradient_histograms(gray, cell_size, n_bins=HOG_BINS):
    """Per-cell histograms of gradient magnitude over contrast-sensitive bins.

    Votes are interpolated linearly between the two nearest orientation bin
    centers and bilinearly between the four nearest cell centers, which keeps
    the histograms stable under sub-cell shifts. Votes falling outside the
    grid are dropped. Returns ``(n_bins, Hc, Wc)``.
    """
    gx, gy = image_gradients(gray)
    mag = np.hypot(gx, gy)
    H, W = gray.shape
    cs = cell_size
    hc, wc = H // cs, W // cs
    # bin k is centered on the direction k * 2 pi / n_bins
    angle = (np.arctan2(gy, gx) % (2.0 * np.pi)) * (n_bins / (2.0 * np.pi))
    b_lo = np.floor(angle).astype(np.int64)
    b_w = angle - b_lo
    b_lo %= n_bins
    b_hi = (b_lo + 1) % n_bins

    # orientation and column votes in one scatter; column cells are offset
    # by one so that the neighbour left of cell 0 has a slot
    u = (np.arange(W) + 0.5) / cs - 0.5
    c_lo = np.floor(u).astype(np.int64)
    c_w = u - c_lo
    wce = wc + 3
    base = (np.arange(H)[:, None] * wce + (c_lo + 1)[None, :]) * n_bins
    left = mag * (1.0 - c_w)[None, :]
    right = mag * c_w[None, :]
    idx = np.concatenate([(base + b_lo).ravel(), (base + b_hi).ravel(),
                          (base + n_bins + b_lo).ravel(), (base + n_bins + b_hi).ravel()])
    wts = np.concatenate([(left * (1.0 - b_w)).ravel(), (left * b_w).ravel(),
                          (right * (1.0 - b_w)).ravel(), (right * b_w).ravel()])
    rows = np.bincount(idx, weights=wts, minlength=H * wce * n_bins).reshape(H, wce, n_bins)

    # row votes: the offset of a pixel row inside its cell fixes both
    # destination cells and their weights
    hp = -(-H // cs)
    blocks = np.zeros((hp * cs, wce, n_bins))
    blocks[:H] = rows
    blocks = blocks.reshape(hp, cs, wce, n_bins)
    out = np.zeros((hp + 3, wce, n_bins))
    for j in range(cs):
        v = (j + 0.5) / cs - 0.5
        d = int(np.floor(v))
        w = v - d
        out[d + 1:d + 1 + hp] += (1.0 - w) * blocks[:, j]
        out[d + 2:d + 2 + hp] += w * blocks[:, j]
    return out[1:hc + 1, 1:wc + 1].transpose(2, 0, 1)


def hog_features(gray, cell_size, n_bins=HOG_BINS, clip=HOG_CLIP):
    """Block-normalized, truncated orientation channels ``(n_bins, Hc, Wc)``.

    Every cell is normalized by the four 2x2 blocks that contain it, the
    normalized values are truncated at ``clip`` and averaged over blocks.
    """
    hist = gradient_histograms(gray, cell_size, n_bins)
    energy = np.pad((hist ** 2).sum(axis=0), 1, mode="edge")
    block = energy[:-1, :-1] + energy[1:, :-1] + energy[:-1, 1:] + energy[1:, 1:]
    inv = 1.0 / np.sqrt(block + HOG_EPS)
    out = np.zeros_like(hist)
    for n in (inv[:-1, :-1], inv[1:, :-1], inv[:-1, 1:], inv[1:, 1:]):
        out += np.minimum(hist * n, clip)
    return out * 0.25


# -- extraction ---------------------------------------------------------------

def patch_features(patch, config, table=None):
    """Feature channels of an RGB patch whose sides are multiples of the cell."""
    cs = config.cell_size
    chans = []
    gray = to_gray(patch)
    if config.use_hog:
        chans.append(hog_features(gray, cs))
    if config.use_colornames:
        if table is None:
            raise ConfigError("color-name features enabled but no table available")
        probs = np.asarray(table)[colorname_index(patch)]
        chans.append(cell_mean(probs, cs).transpose(2, 0, 1))
    if config.use_gray:
        g = cell_mean(gray, cs)
        chans.append((g - g.mean())[None])
    return np.concatenate(chans, axis=0)


def template_for(config, region, template_size=None):
    if template_size is None:
        cs = config.cell_size
        w = max(1, math.ceil(region[2] / cs)) * cs
        h = max(1, math.ceil(region[3] / cs)) * cs
        return (w, h)
    return (int(template_size[0]), int(template_size[1]))


def extract_features(frame, region, config, template_size=None, table=None):
    """Feature stack for ``region`` resized to ``template_size = (w, h)`` px.

    ``template_size`` must be a multiple of the cell size; by default the
    region size rounded up to whole cells is used. The color-name table is
    loaded from ``config.colornames_table_path`` unless passed explicitly.
    """
    pixels = as_pixels(frame)
    if config.use_colornames and table is None:
        if not config.colornames_table_path:
            raise ConfigError("use_colornames is set but no color-name table path was given")
        table = load_colornames_table(config.colornames_table_path)
    tw, th = template_for(config, region, template_size)
    cs = config.cell_size
    if tw % cs or th % cs:
        raise ContractViolation(f"template {tw}x{th} is not a multiple of cell size {cs}")
    patch, sampled = sample_region(pixels, region, (tw, th))
    return FeatureStack(patch_features(patch, config, table), cs, sampled)


@lru_cache(maxsize=64)
def hann_2d(height, width):
    win = np.outer(np.hanning(height), np.hanning(width))
    win.setflags(write=False)
    return win


def apply_window(features):
    """Multiply every channel by a 2-D Hann window of matching size."""
    H, W = features.shape
    return features.with_channels(features.channels * hann_2d(H, W))


def colornames_available(path):
    if not path:
        return False
    try:
        load_colornames_table(path)
    except ConfigError as exc:
        log.warning("color-name table unusable (%s); continuing with HOG and gray", exc)
        return False
    return True

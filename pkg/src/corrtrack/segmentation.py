"""Foreground mask estimation from color histograms.

The mask constrains the support of the learned filter. A pixel is labelled
foreground when its color posterior, computed from foreground/background
RGB histograms and an Epanechnikov spatial prior around the target,
exceeds 0.5.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ContractViolation
from .features import as_pixels, cell_mean, sample_region

HIST_BINS = 16
MIN_FOREGROUND_FRACTION = 0.05
MIN_COMPONENT_FRACTION = 0.10
_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """0/1 mask at feature-grid resolution, shape ``(H, W)``."""

    cells: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.cells)
        if c.ndim != 2:
            raise ContractViolation("mask must be 2-D")
        if c.dtype != bool:
            if not np.all((c == 0) | (c == 1)):
                raise ContractViolation("mask values must be 0 or 1")
            c = c.astype(bool)
        object.__setattr__(self, "cells", c)

    @property
    def shape(self):
        return self.cells.shape

    @property
    def foreground_fraction(self):
        return float(self.cells.mean())

    def as_float(self):
        return self.cells.astype(np.float64)

    def __eq__(self, other):
        return isinstance(other, BinaryMask) and np.array_equal(self.cells, other.cells)


def rectangle_mask(shape, target):
    """Cells whose centers fall inside ``target`` (grid units ``(x, y, w, h)``).

    A target smaller than one cell still covers the cell containing its
    center, so the result is never empty.
    """
    H, W = shape
    x, y, w, h = target
    cy = np.arange(H) + 0.5
    cx = np.arange(W) + 0.5
    rows = (cy >= y) & (cy <= y + h)
    cols = (cx >= x) & (cx <= x + w)
    cells = rows[:, None] & cols[None, :]
    if not cells.any():
        r = int(np.clip(math.floor(y + h / 2.0), 0, H - 1))
        c = int(np.clip(math.floor(x + w / 2.0), 0, W - 1))
        cells[r, c] = True
    return BinaryMask(cells)


def sanitize_mask(mask, target):
    """Keep the largest 8-connected component, or fall back to the target box.

    The fallback triggers when less than 5% of the grid is foreground or the
    largest component covers less than 10% of the grid-projected target.
    The foreground fraction is measured on the kept component, so a
    sanitized mask is a fixed point. ``target`` is given in grid (cell) units.
    """
    rect = rectangle_mask(mask.shape, target)
    labels, n = ndimage.label(mask.cells, structure=_EIGHT_CONNECTED)
    if n == 0:
        return rect
    sizes = np.bincount(labels.ravel(), minlength=n + 1)
    sizes[0] = 0
    largest = int(np.argmax(sizes))
    if (sizes[largest] < MIN_FOREGROUND_FRACTION * labels.size
            or sizes[largest] < MIN_COMPONENT_FRACTION * rect.cells.sum()):
        return rect
    return BinaryMask(labels == largest)


def color_bin_index(pixels):
    shift = 8 - int(math.log2(HIST_BINS))
    p = pixels.astype(np.int32) >> shift
    return (p[..., 0] * HIST_BINS + p[..., 1]) * HIST_BINS + p[..., 2]


def epanechnikov_prior(shape, target):
    """Kernel ``max(0, 1 - r^2)`` on the ellipse circumscribing ``target``.

    ``shape`` is ``(H, W)`` in pixels; ``target`` is in the same pixel grid.
    """
    H, W = shape
    x, y, w, h = target
    cx, cy = x + w / 2.0, y + h / 2.0
    ax = max(w, 1e-9) / math.sqrt(2.0)
    ay = max(h, 1e-9) / math.sqrt(2.0)
    px = (np.arange(W) + 0.5 - cx) / ax
    py = (np.arange(H) + 0.5 - cy) / ay
    return np.maximum(0.0, 1.0 - (py[:, None] ** 2 + px[None, :] ** 2))


def foreground_posterior(patch, target):
    """Per-pixel foreground probability of ``patch`` given ``target`` in patch pixels."""
    H, W = patch.shape[:2]
    idx = color_bin_index(patch)
    inside = rectangle_mask((H, W), target).cells
    n_bins = HIST_BINS ** 3
    fg = np.bincount(idx[inside], minlength=n_bins) + 1.0
    bg = np.bincount(idx[~inside], minlength=n_bins) + 1.0
    p_fg = (fg / fg.sum())[idx]
    p_bg = (bg / bg.sum())[idx]
    prior = 0.5 * epanechnikov_prior((H, W), target)
    num = p_fg * prior
    return num / (num + p_bg * (1.0 - prior))


def estimate_mask(frame, target, region, template_size, cell_size):
    """Binary support mask on the feature grid of ``region``.

    ``target`` and ``region`` are image rectangles; the region is sampled at
    ``template_size = (w, h)`` pixels exactly like the feature extractor, so
    the mask grid is ``(h // cell_size, w // cell_size)``.
    """
    if not (region[2] > 0 and region[3] > 0):
        raise ContractViolation(f"degenerate region {region}")
    if not (target[2] > 0 and target[3] > 0):
        raise ContractViolation(f"degenerate target {target}")
    pixels = as_pixels(frame)
    tw, th = int(template_size[0]), int(template_size[1])
    patch, sampled = sample_region(pixels, region, (tw, th))
    sx = tw / sampled[2]
    sy = th / sampled[3]
    t_px = ((target[0] - sampled[0]) * sx, (target[1] - sampled[1]) * sy,
            target[2] * sx, target[3] * sy)
    post = foreground_posterior(patch, t_px)
    votes = cell_mean((post > 0.5).astype(np.float64), cell_size)
    raw = BinaryMask(votes > 0.5)
    t_grid = tuple(v / cell_size for v in t_px)
    return sanitize_mask(raw, t_grid)

"""Axis-aligned rectangle helpers.

Rectangles are ``(x, y, w, h)`` tuples in image pixels, with ``(x, y)`` the
top-left corner. Pixel ``j`` covers the interval ``[j, j + 1)``, so the
center of a rectangle is ``(x + w / 2, y + h / 2)``.
"""
import math

import numpy as np


def center_of(rect):
    x, y, w, h = rect
    return (x + w / 2.0, y + h / 2.0)


def rect_from_center(center, size):
    cx, cy = center
    w, h = size
    return (cx - w / 2.0, cy - h / 2.0, float(w), float(h))


def is_degenerate(rect):
    x, y, w, h = rect
    vals = (x, y, w, h)
    return any(not math.isfinite(v) for v in vals) or w <= 0 or h <= 0


def intersect(a, b):
    """Intersection rectangle of ``a`` and ``b`` (zero size when disjoint)."""
    x0 = max(a[0], b[0])
    y0 = max(a[1], b[1])
    x1 = min(a[0] + a[2], b[0] + b[2])
    y1 = min(a[1] + a[3], b[1] + b[3])
    return (x0, y0, max(0.0, x1 - x0), max(0.0, y1 - y0))


def clamp_to_image(rect, width, height):
    return intersect(rect, (0.0, 0.0, float(width), float(height)))


def as_rect_array(rects):
    arr = np.asarray(rects, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, 4)
    if arr.shape[-1] != 4:
        raise ValueError("rectangles must have 4 components")
    return arr

"""One-pass evaluation measures: overlap, center error, success and precision curves."""
from dataclasses import dataclass

import numpy as np

SUCCESS_THRESHOLDS = np.linspace(0.0, 1.0, 101)
PRECISION_THRESHOLDS = np.arange(0, 51, dtype=np.float64)
PRECISION_AT = 20.0


def overlap(a, b):
    """Intersection over union of two ``(x, y, w, h)`` rectangles.

    Degenerate (non-finite or non-positive size) rectangles give 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(overlaps(a[None], b[None])[0])


def overlaps(pred, gt):
    """Vectorized IoU of row-aligned rectangle arrays."""
    pred = np.asarray(pred, dtype=np.float64).reshape(-1, 4)
    gt = np.asarray(gt, dtype=np.float64).reshape(-1, 4)
    valid = (np.isfinite(pred).all(axis=1) & np.isfinite(gt).all(axis=1)
             & (pred[:, 2] > 0) & (pred[:, 3] > 0) & (gt[:, 2] > 0) & (gt[:, 3] > 0))
    out = np.zeros(len(pred))
    p, g = pred[valid], gt[valid]
    iw = np.minimum(p[:, 0] + p[:, 2], g[:, 0] + g[:, 2]) - np.maximum(p[:, 0], g[:, 0])
    ih = np.minimum(p[:, 1] + p[:, 3], g[:, 1] + g[:, 3]) - np.maximum(p[:, 1], g[:, 1])
    inter = np.clip(iw, 0, None) * np.clip(ih, 0, None)
    union = p[:, 2] * p[:, 3] + g[:, 2] * g[:, 3] - inter
    out[valid] = inter / union
    return out


def center_errors(pred, gt):
    pred = np.asarray(pred, dtype=np.float64).reshape(-1, 4)
    gt = np.asarray(gt, dtype=np.float64).reshape(-1, 4)
    pc = pred[:, :2] + pred[:, 2:] / 2.0
    gc = gt[:, :2] + gt[:, 2:] / 2.0
    return np.hypot(pc[:, 0] - gc[:, 0], pc[:, 1] - gc[:, 1])


def success_curve(ious):
    """Fraction of frames with overlap strictly above each threshold."""
    ious = np.asarray(ious, dtype=np.float64)
    if ious.size == 0:
        return np.zeros_like(SUCCESS_THRESHOLDS)
    return (ious[None, :] > SUCCESS_THRESHOLDS[:, None]).mean(axis=1)


def precision_curve(errors):
    """Fraction of frames with center error at most each threshold."""
    errors = np.asarray(errors, dtype=np.float64)
    if errors.size == 0:
        return np.zeros_like(PRECISION_THRESHOLDS)
    return (errors[None, :] <= PRECISION_THRESHOLDS[:, None]).mean(axis=1)


@dataclass
class EvalResult:
    """Per-frame measures (NaN where excluded) and the summary curves."""

    overlaps: np.ndarray
    center_errors: np.ndarray
    success: np.ndarray
    precision: np.ndarray

    @property
    def auc(self):
        return float(np.mean(self.success))

    @property
    def precision_at_20(self):
        return float(self.precision[int(np.searchsorted(PRECISION_THRESHOLDS, PRECISION_AT))])


def evaluate(pred, gt):
    """Score predicted boxes against ground truth.

    Frames where the target is absent are left out of the success curve. For
    precision they count as a miss (infinite error) when the tracker reported
    a box and are left out when it reported none (a NaN row).
    """
    pred = np.asarray(pred, dtype=np.float64).reshape(-1, 4)
    gt = np.asarray(gt, dtype=np.float64).reshape(-1, 4)
    if len(pred) != len(gt):
        raise ValueError(f"{len(pred)} predictions for {len(gt)} ground-truth frames")
    gt_ok = np.isfinite(gt).all(axis=1) & (gt[:, 2] > 0) & (gt[:, 3] > 0)
    reported = np.isfinite(pred).all(axis=1)

    ious = np.full(len(gt), np.nan)
    ious[gt_ok] = overlaps(pred[gt_ok], gt[gt_ok])

    errs = np.full(len(gt), np.nan)
    present = gt_ok & reported
    errs[present] = center_errors(pred[present], gt[present])
    errs[gt_ok & ~reported] = np.inf
    errs[~gt_ok & reported] = np.inf

    return EvalResult(ious, errs, success_curve(ious[gt_ok]),
                      precision_curve(errs[~np.isnan(errs)]))

"""Field-of-view reduction: crop every frame around the initial target position."""
import numpy as np

from ..errors import ContractViolation
from ..geometry import center_of
from .sequence import Sequence


def crop_window(image_size, center, fraction):
    """Integer ``(x, y, w, h)`` window of ``fraction`` of the image per axis.

    The window is centered at ``center`` and shifted to lie inside the image.
    """
    if not (0.0 < fraction <= 1.0):
        raise ContractViolation(f"crop fraction must be in (0, 1], got {fraction}")
    W, H = image_size
    w = max(1, min(W, int(round(fraction * W))))
    h = max(1, min(H, int(round(fraction * H))))
    x = int(round(center[0] - w / 2.0))
    y = int(round(center[1] - h / 2.0))
    x = min(max(x, 0), W - w)
    y = min(max(y, 0), H - h)
    return (x, y, w, h)


def crop_groundtruth(gt, window):
    """Translate rectangles into window coordinates.

    Rectangles are translated, not clipped. Frames whose rectangle has no
    visible intersection with the window become absent (NaN rows).
    """
    gt = np.array(gt, dtype=np.float64).reshape(-1, 4)
    x, y, w, h = window
    out = gt.copy()
    out[:, 0] -= x
    out[:, 1] -= y
    ok = np.isfinite(gt).all(axis=1) & (gt[:, 2] > 0) & (gt[:, 3] > 0)
    ix = np.minimum(out[:, 0] + out[:, 2], w) - np.maximum(out[:, 0], 0)
    iy = np.minimum(out[:, 1] + out[:, 3], h) - np.maximum(out[:, 1], 0)
    visible = ok & (ix > 0) & (iy > 0)
    out[~visible] = np.nan
    return out


def crop_experiment(seq, fraction=0.4):
    """A new sequence with every frame cropped to ``fraction`` of its size."""
    if not (0.0 < fraction <= 1.0):
        raise ContractViolation(f"crop fraction must be in (0, 1], got {fraction}")
    first = seq.frame(0).pixels
    H, W = first.shape[:2]
    init = seq.groundtruth[0]
    if not np.isfinite(init).all():
        raise ContractViolation("the target must be visible in the first frame")
    x, y, w, h = crop_window((W, H), center_of(init), fraction)
    images = [np.ascontiguousarray(seq.frame(i).pixels[y:y + h, x:x + w])
              for i in range(len(seq))]
    attrs = dict(seq.attributes)
    attrs.update(crop_fraction=fraction, crop_window=[x, y, w, h])
    return Sequence(seq.name, crop_groundtruth(seq.groundtruth, (x, y, w, h)),
                    images=images, attributes=attrs)

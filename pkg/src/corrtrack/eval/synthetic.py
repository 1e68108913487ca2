"""Scripted synthetic sequences with exact ground truth.

A script is a JSON object::

    {
      "name": "occlusion",
      "num_frames": 120,
      "frame_size": [640, 360],
      "target_size": [40, 40],
      "seed": 7,
      "keyframes": [{"frame": 0, "center": [200, 180], "scale": 1.0}, ...],
      "occlusions": [[40, 69]]
    }

Target center and scale are linearly interpolated between keyframes and
held constant outside them. Occlusion intervals are inclusive frame ranges;
during an interval the target is hidden behind a uniform occluder placed
where the target was at the start of the interval, and the ground truth is
``NaN``.
"""
import json
from pathlib import Path

import cv2
import numpy as np

from ..errors import ConfigError
from .sequence import Sequence

DEFAULT_FRAME_SIZE = (640, 360)
TARGET_BLOCKS = 5
OCCLUDER_MARGIN = 1.4
OCCLUDER_GRAY = 128


def _require(cond, msg):
    if not cond:
        raise ConfigError(f"synthetic script: {msg}")


def _pair(value, key, positive=True):
    _require(isinstance(value, (list, tuple)) and len(value) == 2, f"{key} must be a pair")
    try:
        a, b = float(value[0]), float(value[1])
    except (TypeError, ValueError):
        raise ConfigError(f"synthetic script: {key} must be numeric") from None
    _require(np.isfinite(a) and np.isfinite(b), f"{key} must be finite")
    if positive:
        _require(a > 0 and b > 0, f"{key} must be positive")
    return (a, b)


def validate_script(script):
    """Normalized copy of ``script``; raises ``ConfigError`` when malformed."""
    _require(isinstance(script, dict), "top level must be an object")
    known = {"name", "num_frames", "frame_size", "target_size", "seed", "keyframes",
             "occlusions", "texture_contrast"}
    unknown = set(script) - known
    _require(not unknown, f"unknown keys {sorted(unknown)}")
    for key in ("num_frames", "target_size", "keyframes"):
        _require(key in script, f"missing {key!r}")
    n = script["num_frames"]
    _require(isinstance(n, int) and not isinstance(n, bool) and n > 0,
             "num_frames must be a positive integer")
    W, H = (int(v) for v in _pair(script.get("frame_size", DEFAULT_FRAME_SIZE), "frame_size"))
    tw, th = _pair(script["target_size"], "target_size")
    seed = script.get("seed", 0)
    _require(isinstance(seed, int) and not isinstance(seed, bool) and seed >= 0,
             "seed must be a non-negative integer")

    kfs = script["keyframes"]
    _require(isinstance(kfs, list) and kfs, "keyframes must be a non-empty list")
    keyframes = []
    for kf in kfs:
        _require(isinstance(kf, dict) and "frame" in kf and "center" in kf,
                 "each keyframe needs 'frame' and 'center'")
        f = kf["frame"]
        _require(isinstance(f, int) and 0 <= f < n, f"keyframe frame {f!r} out of range")
        scale = float(kf.get("scale", 1.0))
        _require(scale > 0, "keyframe scale must be positive")
        keyframes.append({"frame": f, "center": _pair(kf["center"], "center", False),
                          "scale": scale})
    frames = [k["frame"] for k in keyframes]
    _require(frames == sorted(frames) and len(set(frames)) == len(frames),
             "keyframes must have strictly increasing frames")

    occlusions = []
    for occ in script.get("occlusions", []):
        _require(isinstance(occ, (list, tuple)) and len(occ) == 2, "occlusion must be [start, end]")
        a, b = occ
        _require(isinstance(a, int) and isinstance(b, int) and 0 < a <= b < n,
                 f"occlusion {occ!r} out of range (frame 0 must be visible)")
        occlusions.append((a, b))

    contrast = float(script.get("texture_contrast", 1.0))
    _require(contrast >= 0, "texture_contrast must be non-negative")
    return {"name": str(script.get("name", "synthetic")), "num_frames": n,
            "frame_size": (W, H), "target_size": (tw, th), "seed": seed,
            "keyframes": keyframes, "occlusions": occlusions, "texture_contrast": contrast}


def load_script(path):
    path = Path(path)
    try:
        script = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return validate_script(script)


def trajectory(script):
    """Per-frame ``(cx, cy, scale)`` array interpolated from the keyframes."""
    s = validate_script(script)
    n = s["num_frames"]
    t = np.arange(n, dtype=np.float64)
    kf = s["keyframes"]
    ft = np.array([k["frame"] for k in kf], dtype=np.float64)
    cx = np.interp(t, ft, [k["center"][0] for k in kf])
    cy = np.interp(t, ft, [k["center"][1] for k in kf])
    sc = np.interp(t, ft, [k["scale"] for k in kf])
    return np.stack([cx, cy, sc], axis=1)


def render_background(size, rng, contrast=1.0):
    """Smooth low-contrast color texture with a little fine grain."""
    W, H = size
    coarse = rng.uniform(-1.0, 1.0, size=(max(2, H // 24), max(2, W // 24), 3))
    smooth = cv2.resize(coarse.astype(np.float32), (W, H), interpolation=cv2.INTER_CUBIC)
    grain = rng.normal(0.0, 1.0, size=(H, W, 3)).astype(np.float32)
    img = 120.0 + contrast * (30.0 * smooth + 3.0 * grain)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def render_target(rng, blocks=TARGET_BLOCKS, cell=8):
    """Block pattern of saturated random colors, ``blocks*cell`` pixels square."""
    hues = rng.integers(0, 180, size=(blocks, blocks))
    sat = rng.integers(180, 256, size=(blocks, blocks))
    val = rng.choice(np.array([60, 140, 230]), size=(blocks, blocks))
    hsv = np.stack([hues, sat, val], axis=-1).astype(np.uint8)
    rgb = cv2.cvtColor(hsv, cv2.COLOR_HSV2RGB)
    return np.kron(rgb, np.ones((cell, cell, 1), dtype=np.uint8))


def _paste(img, patch, x, y):
    H, W = img.shape[:2]
    ph, pw = patch.shape[:2]
    x0, y0 = max(x, 0), max(y, 0)
    x1, y1 = min(x + pw, W), min(y + ph, H)
    if x1 <= x0 or y1 <= y0:
        return
    img[y0:y1, x0:x1] = patch[y0 - y:y1 - y, x0 - x:x1 - x]


def _placed_rect(center, size):
    w = max(1, int(round(size[0])))
    h = max(1, int(round(size[1])))
    x = int(round(center[0] - w / 2.0))
    y = int(round(center[1] - h / 2.0))
    return x, y, w, h


def generate_synthetic(script):
    """Render a deterministic sequence from a script (dict or validated script)."""
    s = validate_script(script)
    rng = np.random.default_rng(s["seed"])
    background = render_background(s["frame_size"], rng, s["texture_contrast"])
    pattern = render_target(rng)
    traj = trajectory(s)
    tw, th = s["target_size"]
    occluded = np.zeros(s["num_frames"], dtype=bool)
    occluder_at = {}
    for a, b in s["occlusions"]:
        occluded[a:b + 1] = True
        cx, cy, sc = traj[a]
        rect = _placed_rect((cx, cy), (tw * sc * OCCLUDER_MARGIN, th * sc * OCCLUDER_MARGIN))
        for f in range(a, b + 1):
            occluder_at[f] = rect

    W, H = s["frame_size"]
    images, gt = [], []
    for f in range(s["num_frames"]):
        img = background.copy()
        if occluded[f]:
            ox, oy, ow, oh = occluder_at[f]
            _paste(img, np.full((oh, ow, 3), OCCLUDER_GRAY, dtype=np.uint8), ox, oy)
            gt.append([np.nan] * 4)
        else:
            cx, cy, sc = traj[f]
            x, y, w, h = _placed_rect((cx, cy), (tw * sc, th * sc))
            _paste(img, cv2.resize(pattern, (w, h), interpolation=cv2.INTER_NEAREST), x, y)
            ix = min(x + w, W) - max(x, 0)
            iy = min(y + h, H) - max(y, 0)
            gt.append([x, y, w, h] if ix > 0 and iy > 0 else [np.nan] * 4)
        images.append(img)
    attrs = {"synthetic": True, "seed": s["seed"], "occlusions": [list(o) for o in s["occlusions"]]}
    return Sequence(s["name"], np.array(gt, dtype=np.float64), images=images, attributes=attrs)


# -- scripted suites used by the acceptance tests and examples ---------------

def occlusion_script(seed=3, onset=40, length=30, num_frames=110):
    """Slow drift, then a full occlusion while the target holds still."""
    return {
        "name": "occlusion", "num_frames": num_frames, "frame_size": [640, 360],
        "target_size": [40, 40], "seed": seed,
        "keyframes": [{"frame": 0, "center": [260, 180]},
                      {"frame": onset - 1, "center": [300, 190]},
                      {"frame": onset + length, "center": [300, 190]},
                      {"frame": num_frames - 1, "center": [330, 200]}],
        "occlusions": [[onset, onset + length - 1]],
    }


def redetection_script(seed=5, onset=40, length=30, tail=50, displacement=3.0):
    """Full occlusion after which the target reappears ``displacement`` widths away."""
    w = 40
    reappear = onset + length
    x0, y0 = 200, 180
    x1 = x0 + displacement * w
    return {
        "name": "redetection", "num_frames": reappear + tail, "frame_size": [640, 360],
        "target_size": [w, w], "seed": seed,
        "keyframes": [{"frame": 0, "center": [x0 - 20, y0]},
                      {"frame": onset - 1, "center": [x0, y0]},
                      {"frame": reappear - 1, "center": [x0, y0]},
                      {"frame": reappear, "center": [x1, y0 + 10]},
                      {"frame": reappear + tail - 1, "center": [x1 + 25, y0 + 20]}],
        "occlusions": [[onset, reappear - 1]],
    }


def ablation_suite():
    """Five sequences mixing occlusions, displaced reappearance and scale change."""
    scripts = []
    specs = [
        # (seed, size, start, occlusion, jump (dx, dy), scale after)
        (11, (40, 40), (160, 170), (35, 64), (120, 10), 1.0),
        (12, (48, 36), (420, 180), (30, 54), (-110, 30), 1.3),
        (13, (36, 44), (300, 120), (40, 59), (60, 90), 0.8),
        (14, (40, 40), (220, 220), (30, 69), (150, -40), 1.2),
        (15, (44, 44), (480, 150), (45, 64), (-90, 60), 1.0),
    ]
    for seed, size, (x, y), (a, b), (dx, dy), s_after in specs:
        n = b + 60
        scripts.append({
            "name": f"suite{seed}", "num_frames": n, "frame_size": [640, 360],
            "target_size": list(size), "seed": seed,
            "keyframes": [{"frame": 0, "center": [x, y], "scale": 1.0},
                          {"frame": a - 1, "center": [x + 15, y + 8], "scale": 1.1},
                          {"frame": b + 1, "center": [x + 15 + dx, y + 8 + dy], "scale": s_after},
                          {"frame": n - 1, "center": [x + 35 + dx, y + dy], "scale": s_after * 1.1}],
            "occlusions": [[a, b]],
        })
    return scripts

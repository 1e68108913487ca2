"""Sequence directories: ``img/`` frames plus ``groundtruth.txt``.

Ground truth has one ``x,y,w,h`` rectangle per line (commas, tabs or spaces
separate values). ``NaN,NaN,NaN,NaN`` or a zero-size rectangle marks a frame
where the target is absent.
"""
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import cv2
import numpy as np

from ..errors import FormatError
from ..features import ImageFrame

IMAGE_DIR = "img"
GROUNDTRUTH = "groundtruth.txt"
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".ppm", ".tif", ".tiff")
_SEP = re.compile(r"[,\s;]+")


@dataclass
class Sequence:
    name: str
    groundtruth: np.ndarray
    frames: Optional[List[Path]] = None
    images: Optional[List[np.ndarray]] = field(default=None, repr=False)
    attributes: dict = field(default_factory=dict)

    def __post_init__(self):
        gt = np.asarray(self.groundtruth, dtype=np.float64).reshape(-1, 4)
        self.groundtruth = gt
        n = self.images if self.images is not None else self.frames
        if n is None:
            raise FormatError(f"sequence {self.name!r} has neither frame files nor images")
        if len(n) != len(gt):
            raise FormatError(
                f"sequence {self.name!r}: {len(gt)} ground-truth rows for {len(n)} frames")
        finite = np.isfinite(gt).all(axis=1)
        if np.any(gt[finite][:, 2:] < 0):
            raise FormatError(f"sequence {self.name!r}: negative rectangle size")

    def __len__(self):
        return len(self.groundtruth)

    @property
    def absent(self):
        """Boolean per frame: target not visible."""
        gt = self.groundtruth
        bad = ~np.isfinite(gt).all(axis=1)
        zero = np.zeros(len(gt), dtype=bool)
        zero[~bad] = (gt[~bad, 2] <= 0) | (gt[~bad, 3] <= 0)
        return bad | zero

    @property
    def init_box(self):
        return tuple(float(v) for v in self.groundtruth[0])

    def frame(self, i):
        if self.images is not None:
            return ImageFrame(self.images[i], i)
        return ImageFrame(read_image(self.frames[i]), i)

    def iter_frames(self):
        for i in range(len(self)):
            yield self.frame(i)


def read_image(path):
    img = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if img is None:
        raise OSError(f"cannot read image {path}")
    return cv2.cvtColor(img, cv2.COLOR_BGR2RGB)


def write_image(path, pixels):
    ok = cv2.imwrite(str(path), cv2.cvtColor(np.ascontiguousarray(pixels), cv2.COLOR_RGB2BGR))
    if not ok:
        raise OSError(f"cannot write image {path}")


def parse_boxes(text, source="<boxes>"):
    """Rectangles from text, one per non-empty line; NaN rows are kept."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        parts = [p for p in _SEP.split(line) if p]
        if len(parts) != 4:
            raise FormatError(f"expected 4 values, got {len(parts)}", source, lineno)
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise FormatError(f"non-numeric value in {line!r}", source, lineno) from None
    return np.array(rows, dtype=np.float64).reshape(-1, 4)


def read_boxes(path):
    path = Path(path)
    return parse_boxes(path.read_text(), str(path))


def format_box(box):
    if not np.all(np.isfinite(box)):
        return "NaN,NaN,NaN,NaN"
    return ",".join(f"{v:.2f}" for v in box)


def write_boxes(path, boxes):
    Path(path).write_text("".join(format_box(b) + "\n" for b in np.asarray(boxes).reshape(-1, 4)))


def list_images(folder):
    return sorted(p for p in Path(folder).iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)


def load_sequence(directory):
    """Read and validate a sequence directory."""
    directory = Path(directory)
    img_dir = directory / IMAGE_DIR
    gt_path = directory / GROUNDTRUTH
    if not img_dir.is_dir():
        raise FormatError(f"missing image folder {img_dir}")
    if not gt_path.is_file():
        raise FormatError(f"missing ground-truth file {gt_path}")
    frames = list_images(img_dir)
    gt = read_boxes(gt_path)
    if len(gt) != len(frames):
        line = min(len(gt), len(frames)) + 1
        raise FormatError(
            f"{len(gt)} ground-truth rows but {len(frames)} images", str(gt_path), line)
    for p in frames:
        if not p.is_file():
            raise OSError(f"unreadable image {p}")
    return Sequence(directory.name, gt, frames=frames)


def write_sequence(seq, directory):
    """Write frames as PNG files and the ground truth to ``directory``."""
    directory = Path(directory)
    img_dir = directory / IMAGE_DIR
    img_dir.mkdir(parents=True, exist_ok=True)
    for i in range(len(seq)):
        write_image(img_dir / f"{i + 1:05d}.png", seq.frame(i).pixels)
    write_boxes(directory / GROUNDTRUTH, seq.groundtruth)
    return directory


def is_sequence_dir(path):
    path = Path(path)
    return (path / IMAGE_DIR).is_dir() and (path / GROUNDTRUTH).is_file()


def find_sequences(root):
    """A single sequence directory, or every sequence directly under ``root``."""
    root = Path(root)
    if is_sequence_dir(root):
        return [root]
    if not root.is_dir():
        raise FormatError(f"not a directory: {root}")
    return sorted(p for p in root.iterdir() if p.is_dir() and is_sequence_dir(p))

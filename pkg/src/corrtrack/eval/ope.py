"""One-pass evaluation: initialize on the first frame, never reset."""
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..config import RunConfig
from ..tracker import LongTermTracker
from .metrics import EvalResult, evaluate


@dataclass
class OpeRun:
    """Boxes, diagnostics and timing for one tracker on one sequence."""

    name: str
    boxes: np.ndarray
    trace: list
    result: EvalResult
    seconds: float
    frames: int
    timing: dict = field(default_factory=dict)

    @property
    def fps(self):
        return self.frames / self.seconds if self.seconds > 0 else float("inf")


def run_ope(config, sequence, tracker=None):
    """Track ``sequence`` once from its first ground-truth box and score it.

    The timer covers tracker work only; image decoding is excluded.
    """
    config = config or RunConfig()
    tracker = tracker or LongTermTracker(config)
    boxes = []
    elapsed = 0.0
    for i in range(len(sequence)):
        frame = sequence.frame(i)
        t0 = time.perf_counter()
        if i == 0:
            tracker.init(frame, sequence.init_box)
            box = tracker.state.target.box()
        else:
            box, _ = tracker.step(frame)
        elapsed += time.perf_counter() - t0
        boxes.append(box)
    boxes = np.array(boxes, dtype=np.float64).reshape(-1, 4)
    result = evaluate(boxes, sequence.groundtruth)
    n = len(sequence)
    timing = {"frames": n, "seconds": elapsed, "fps": n / elapsed if elapsed > 0 else None}
    return OpeRun(sequence.name, boxes, tracker.trace, result, elapsed, n, timing)


def run_many(config, sequences, workers=1):
    """``run_ope`` over several sequences; each sequence runs sequentially."""
    sequences = list(sequences)
    if workers <= 1 or len(sequences) <= 1:
        return [run_ope(config, s) for s in sequences]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: run_ope(config, s), sequences))


def oracle_boxes(sequence):
    """Boxes of a tracker that reports the ground truth (NaN when absent)."""
    return np.array(sequence.groundtruth, dtype=np.float64)

"""Dataset I/O, one-pass evaluation, field-of-view cropping and synthetic sequences."""
from .crop import crop_experiment, crop_window
from .metrics import EvalResult, evaluate, overlap
from .ope import run_ope
from .sequence import Sequence, load_sequence, write_sequence
from .synthetic import generate_synthetic

__all__ = ["crop_experiment", "crop_window", "EvalResult", "evaluate", "overlap", "run_ope",
           "Sequence", "load_sequence", "write_sequence", "generate_synthetic"]

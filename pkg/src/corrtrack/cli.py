"""Command-line entry points: ``corrtrack track|eval|synth|crop``."""
import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import cv2
import numpy as np

from .config import VARIANTS, RunConfig
from .errors import CorrTrackError
from .eval.crop import crop_experiment
from .eval.metrics import evaluate
from .eval.ope import run_ope
from .eval.plots import write_report
from .eval.sequence import (find_sequences, load_sequence, read_boxes, write_boxes,
                            write_image, write_sequence)
from .eval.synthetic import generate_synthetic, load_script

log = logging.getLogger("corrtrack")

CONFIG_NAME = "run_config.cfg"
TIMING_NAME = "timing.json"


def _prepare_out(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write_test"
    probe.write_text("")
    probe.unlink()
    return out


def _load_config(path, variant=None):
    if path is None:
        cfg = RunConfig()
        print("no config given; using defaults", file=sys.stderr)
    elif not Path(path).is_file():
        cfg = RunConfig()
        print(f"config {path} not found; using defaults", file=sys.stderr)
    else:
        cfg = RunConfig.load(path)
    if variant is not None:
        cfg = cfg.replace(variant=variant)
    return cfg


def _draw_overlay(seq, boxes, out_dir):
    out_dir.mkdir(parents=True, exist_ok=True)
    for i in range(len(seq)):
        img = seq.frame(i).pixels.copy()
        gt = seq.groundtruth[i]
        if np.all(np.isfinite(gt)):
            x, y, w, h = (int(round(v)) for v in gt)
            cv2.rectangle(img, (x, y), (x + w - 1, y + h - 1), (0, 255, 0), 1)
        if np.all(np.isfinite(boxes[i])):
            x, y, w, h = (int(round(v)) for v in boxes[i])
            cv2.rectangle(img, (x, y), (x + w - 1, y + h - 1), (255, 0, 0), 2)
        write_image(out_dir / f"{i + 1:05d}.png", img)


def _track_one(cfg, seq_dir, out, overlay):
    seq = load_sequence(seq_dir)
    run = run_ope(cfg, seq)
    write_boxes(out / f"{seq.name}.txt", run.boxes)
    with open(out / f"{seq.name}.trace.jsonl", "w") as fh:
        for rec in run.trace:
            fh.write(json.dumps(rec.to_dict()) + "\n")
    if overlay:
        _draw_overlay(seq, run.boxes, out / "overlay" / seq.name)
    return seq.name, run


def cmd_track(args):
    cfg = _load_config(args.config, args.variant)
    out = _prepare_out(args.out)
    cfg.save(out / CONFIG_NAME)
    seq_dirs = find_sequences(args.seq)
    if not seq_dirs:
        raise CorrTrackError(f"no sequences found under {args.seq}")
    if args.workers > 1 and len(seq_dirs) > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            runs = list(pool.map(lambda d: _track_one(cfg, d, out, args.overlay), seq_dirs))
    else:
        runs = [_track_one(cfg, d, out, args.overlay) for d in seq_dirs]
    timing = {}
    for name, run in runs:
        timing[name] = run.timing
        print(f"{name}: {run.frames} frames, {run.fps:.1f} fps, "
              f"AUC {run.result.auc:.3f}", file=sys.stderr)
    total_frames = sum(r.frames for _, r in runs)
    total_s = sum(r.seconds for _, r in runs)
    timing["_total"] = {"frames": total_frames, "seconds": total_s,
                        "fps": total_frames / total_s if total_s > 0 else None}
    (out / TIMING_NAME).write_text(json.dumps(timing, indent=2) + "\n")
    print(f"total: {timing['_total']['fps']:.1f} fps", file=sys.stderr)
    return 0


def _result_sets(results_dir):
    """``{tracker name: directory}``; subdirectories holding box files are trackers."""
    root = Path(results_dir)
    if not root.is_dir():
        raise CorrTrackError(f"results directory {root} does not exist")
    subs = {p.name: p for p in sorted(root.iterdir())
            if p.is_dir() and any(p.glob("*.txt"))}
    if any(root.glob("*.txt")):
        subs = {root.name: root, **subs}
    if not subs:
        raise CorrTrackError(f"no result files in {root}")
    return subs


def cmd_eval(args):
    out = _prepare_out(args.out)
    seq_dirs = find_sequences(args.dataset)
    if not seq_dirs:
        raise CorrTrackError(f"no sequences found under {args.dataset}")
    sequences = [load_sequence(d) for d in seq_dirs]
    results = {}
    for tracker, folder in _result_sets(args.results).items():
        missing = [s.name for s in sequences if not (folder / f"{s.name}.txt").is_file()]
        if missing:
            raise CorrTrackError(f"{tracker}: missing results for {', '.join(missing)}")
        results[tracker] = [evaluate(read_boxes(folder / f"{s.name}.txt"), s.groundtruth)
                            for s in sequences]
    summary = write_report(out, results)
    for name, row in summary.items():
        print(f"{name}: AUC {row['auc']:.4f}  precision@20 {row['precision@20']:.4f}")
    return 0


def cmd_synth(args):
    seq = generate_synthetic(load_script(args.script))
    out = _prepare_out(args.out)
    write_sequence(seq, out)
    print(f"wrote {len(seq)} frames to {out}", file=sys.stderr)
    return 0


def cmd_crop(args):
    if not (0.0 < args.fraction <= 1.0):
        raise CorrTrackError(f"fraction must be in (0, 1], got {args.fraction}")
    out = _prepare_out(args.out)
    seq_dirs = find_sequences(args.dataset)
    if not seq_dirs:
        raise CorrTrackError(f"no sequences found under {args.dataset}")
    single = len(seq_dirs) == 1 and Path(args.dataset).resolve() == seq_dirs[0].resolve()
    for d in seq_dirs:
        cropped = crop_experiment(load_sequence(d), args.fraction)
        write_sequence(cropped, out if single else out / cropped.name)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="corrtrack", description="Long-term correlation filter tracker")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("track", help="run one-pass tracking on a sequence or dataset")
    t.add_argument("--seq", required=True, help="sequence directory or folder of sequences")
    t.add_argument("--config", help="flat key = value config file (optional)")
    t.add_argument("--out", required=True, help="output directory")
    t.add_argument("--overlay", action="store_true", help="write annotated frames")
    t.add_argument("--workers", type=int, default=1, help="sequences tracked in parallel")
    t.add_argument("--variant", choices=sorted(VARIANTS), help="override the config variant")
    t.set_defaults(func=cmd_track)

    e = sub.add_parser("eval", help="score result box files against ground truth")
    e.add_argument("--results", required=True,
                   help="folder of <sequence>.txt files, or of one such folder per tracker")
    e.add_argument("--dataset", required=True, help="sequence directory or folder of sequences")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("synth", help="render a synthetic sequence from a JSON script")
    s.add_argument("--script", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    c = sub.add_parser("crop", help="crop sequences around the initial target position")
    c.add_argument("--dataset", required=True)
    c.add_argument("--fraction", type=float, default=0.4)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_crop)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CorrTrackError, OSError, ValueError) as exc:
        print(f"corrtrack {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

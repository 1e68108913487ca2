import json

import numpy as np
import pytest

from corrtrack.cli import main
from corrtrack.eval.sequence import load_sequence, read_boxes, write_boxes
from corrtrack.eval.synthetic import occlusion_script


def test_track_toy(toy_dir, tmp_path, capsys):
    out = tmp_path / "res"
    assert main(["track", "--seq", str(toy_dir), "--out", str(out)]) == 0
    assert "using defaults" in capsys.readouterr().err
    boxes = read_boxes(out / "toy.txt")
    assert boxes.shape == (3, 4)
    trace = (out / "toy.trace.jsonl").read_text().splitlines()
    assert json.loads(trace[0])["mode"] == "INIT"
    timing = json.loads((out / "timing.json").read_text())
    assert timing["toy"]["frames"] == 3 and timing["_total"]["fps"] > 0
    assert (out / "run_config.cfg").is_file()


def test_track_is_reproducible(toy_dir, tmp_path):
    for name in ("a", "b"):
        assert main(["track", "--seq", str(toy_dir), "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a" / "toy.txt").read_bytes() == (tmp_path / "b" / "toy.txt").read_bytes()


def test_track_with_config_and_overlay(toy_dir, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("use_colornames = false\n")
    out = tmp_path / "res"
    assert main(["track", "--seq", str(toy_dir), "--config", str(cfg), "--out", str(out),
                 "--overlay", "--variant", "short-term"]) == 0
    assert len(list((out / "overlay" / "toy").glob("*.png"))) == 3
    assert "variant = short-term" in (out / "run_config.cfg").read_text()


def test_missing_config_file_uses_defaults(toy_dir, tmp_path, capsys):
    assert main(["track", "--seq", str(toy_dir), "--config", str(tmp_path / "none.cfg"),
                 "--out", str(tmp_path / "o")]) == 0
    assert "not found; using defaults" in capsys.readouterr().err


def test_unwritable_output_fails(toy_dir, tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["track", "--seq", str(toy_dir), "--out", str(blocker / "sub")]) != 0
    assert "error" in capsys.readouterr().err


def test_bad_config_fails(toy_dir, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("nonsense = 1\n")
    assert main(["track", "--seq", str(toy_dir), "--config", str(cfg),
                 "--out", str(tmp_path / "o")]) == 1


def test_eval_oracle_and_two_trackers(toy_dir, tmp_path, capsys):
    seq = load_sequence(toy_dir)
    res = tmp_path / "results"
    (res / "oracle").mkdir(parents=True)
    (res / "shifted").mkdir()
    write_boxes(res / "oracle" / "toy.txt", seq.groundtruth)
    write_boxes(res / "shifted" / "toy.txt", seq.groundtruth + 4)
    out = tmp_path / "report"
    assert main(["eval", "--results", str(res), "--dataset", str(toy_dir), "--out", str(out)]) == 0
    assert "oracle: AUC 0.9901" in capsys.readouterr().out
    svg = (out / "success.svg").read_text()
    assert svg.count("<polyline") == 2
    assert 'data-label="oracle"' in svg and 'data-label="shifted"' in svg


def test_eval_empty_results(toy_dir, tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    assert main(["eval", "--results", str(tmp_path / "empty"), "--dataset", str(toy_dir),
                 "--out", str(tmp_path / "o")]) == 1
    assert "no result files" in capsys.readouterr().err


def test_eval_missing_sequence(toy_dir, tmp_path, capsys):
    res = tmp_path / "r"
    res.mkdir()
    write_boxes(res / "other.txt", np.zeros((3, 4)))
    assert main(["eval", "--results", str(res), "--dataset", str(toy_dir),
                 "--out", str(tmp_path / "o")]) == 1
    assert "missing results for toy" in capsys.readouterr().err


def test_synth_is_byte_identical(tmp_path):
    script = tmp_path / "s.json"
    script.write_text(json.dumps(occlusion_script(num_frames=6, onset=2, length=2)))
    for name in ("a", "b"):
        assert main(["synth", "--script", str(script), "--out", str(tmp_path / name)]) == 0
    for sub in ("groundtruth.txt", "img/00001.png", "img/00004.png"):
        assert (tmp_path / "a" / sub).read_bytes() == (tmp_path / "b" / sub).read_bytes()
    assert np.isnan(read_boxes(tmp_path / "a" / "groundtruth.txt")[2]).all()


def test_crop(tmp_path):
    script = tmp_path / "s.json"
    script.write_text(json.dumps(occlusion_script(num_frames=6, onset=2, length=2)))
    main(["synth", "--script", str(script), "--out", str(tmp_path / "seq")])
    assert main(["crop", "--dataset", str(tmp_path / "seq"), "--out", str(tmp_path / "c")]) == 0
    seq = load_sequence(tmp_path / "c")
    assert seq.frame(0).pixels.shape == (144, 256, 3)


@pytest.mark.parametrize("fraction", ["0", "1.5"])
def test_crop_bad_fraction(toy_dir, tmp_path, fraction):
    assert main(["crop", "--dataset", str(toy_dir), "--fraction", fraction,
                 "--out", str(tmp_path / "c")]) == 1

import csv
import json
import math

import numpy as np
import pytest

from rowtrack.cli import main
from rowtrack.mask import Mask, save_mask


def make_line_mask(path, x=256, size=512):
    grid = np.zeros((size, size), dtype=np.uint8)
    grid[:, x - 1 : x + 2] = 1
    save_mask(Mask(grid), path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ------------------------------------------------------------------ detect

def test_detect_clean_mask(tmp_path):
    m = tmp_path / "a.pgm"
    make_line_mask(m)
    out = tmp_path / "det.csv"
    assert main(["detect", str(m), "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 1
    assert abs(float(rows[0]["delta_theta"])) < 0.5
    assert rows[0]["no_detection"] == "0"


def test_detect_many_masks_in_input_order(tmp_path):
    paths = []
    for i, x in enumerate((140, 200, 256, 300, 340, 180, 220, 260)):
        p = tmp_path / f"m{i}.pgm"
        make_line_mask(p, x=x)
        paths.append(str(p))
    out = tmp_path / "det.csv"
    assert main(["detect", *paths, "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [r["mask"] for r in rows] == paths


def test_detect_no_detection_is_not_an_error(tmp_path):
    p = tmp_path / "empty.pgm"
    save_mask(Mask(np.zeros((512, 512), dtype=np.uint8)), p)
    out = tmp_path / "det.csv"
    assert main(["detect", str(p), "--out", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0]["no_detection"] == "1"
    assert rows[0]["anchor_x"] == ""


def test_detect_corrupt_file_processes_others(tmp_path, capsys):
    good = tmp_path / "good.pgm"
    make_line_mask(good)
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P6\n16 16\n255\n" + bytes(768))
    out = tmp_path / "det.csv"
    rc = main(["detect", str(good), str(bad), "--out", str(out)])
    assert rc == 2
    assert "bad.pgm" in capsys.readouterr().err
    rows = read_csv(out)
    assert len(rows) == 1 and rows[0]["mask"] == str(good)


def test_detect_missing_file(tmp_path, capsys):
    rc = main(["detect", str(tmp_path / "nope.pgm"), "--out", str(tmp_path / "o.csv")])
    assert rc == 2
    assert "nope.pgm" in capsys.readouterr().err


def test_unknown_config_key_names_it(tmp_path, capsys):
    m = tmp_path / "a.pgm"
    make_line_mask(m)
    rc = main(["detect", str(m), "--out", str(tmp_path / "o.csv"), "--set", "scan.bogus=1"])
    assert rc == 1
    assert "scan.bogus" in capsys.readouterr().err


def test_scan_override_applies(tmp_path):
    m = tmp_path / "a.pgm"
    make_line_mask(m, x=80)  # outside the default anchor range
    out = tmp_path / "o.csv"
    assert main(["detect", str(m), "--out", str(out)]) == 0
    assert read_csv(out)[0]["no_detection"] == "1"
    assert main(["detect", str(m), "--out", str(out), "--set", "scan.anchor_x_min_frac=0.05"]) == 0
    assert read_csv(out)[0]["no_detection"] == "0"


# ---------------------------------------------------------------- generate

def test_generate_writes_masks_and_gt(tmp_path):
    out = tmp_path / "gen"
    assert main(["generate", "--out-dir", str(out), "--frames", "4", "--seed", "5"]) == 0
    masks = sorted(out.glob("frame_*.pgm"))
    assert len(masks) == 4
    gt = read_csv(out / "ground_truth.csv")
    assert len(gt) == 4
    assert (out / "field_config.txt").exists()


def test_generate_config_roundtrip(tmp_path):
    out1 = tmp_path / "g1"
    assert main(["generate", "--out-dir", str(out1), "--frames", "2", "--seed", "1",
                 "--set", "field.row_spacing=0.75"]) == 0
    out2 = tmp_path / "g2"
    assert main(["generate", "--out-dir", str(out2), "--frames", "2", "--seed", "1",
                 "--config", str(out1 / "field_config.txt")]) == 0
    for a, b in zip(sorted(out1.glob("*.pgm")), sorted(out2.glob("*.pgm"))):
        assert a.read_bytes() == b.read_bytes()


def test_generate_poses_file(tmp_path):
    poses = tmp_path / "poses.csv"
    poses.write_text("x,y,theta_deg\n0.5,0.0,0.0\n1.0,0.01,2.0\n")
    out = tmp_path / "gen"
    assert main(["generate", "--out-dir", str(out), "--poses-file", str(poses), "--seed", "2"]) == 0
    assert len(list(out.glob("frame_*.pgm"))) == 2


# ---------------------------------------------------------------- simulate

def test_simulate_writes_outputs(tmp_path):
    out = tmp_path / "sim"
    rc = main(["simulate", "--out-dir", str(out), "--trials", "2", "--seed", "7",
               "--set", "trial.frames_max=60", "--set", "trial.run_exit=false"])
    assert rc == 0
    assert len(list(out.glob("trial_*.csv"))) == 2
    summary = json.loads((out / "summary.json").read_text())
    assert summary["schema_version"] == 1
    assert summary["trials"] == 2


def test_simulate_deterministic_bytes(tmp_path):
    args = ["simulate", "--trials", "2", "--seed", "11",
            "--set", "trial.frames_max=50", "--set", "trial.run_exit=false"]
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    assert main(args + ["--out-dir", str(out1)]) == 0
    assert main(args + ["--out-dir", str(out2)]) == 0
    for f1 in sorted(out1.iterdir()):
        f2 = out2 / f1.name
        assert f1.read_bytes() == f2.read_bytes()


def test_simulate_single_frame_edge(tmp_path):
    out = tmp_path / "sim"
    rc = main(["simulate", "--out-dir", str(out), "--trials", "1", "--seed", "3",
               "--set", "trial.frames_max=1", "--set", "trial.run_exit=false"])
    assert rc == 0
    assert json.loads((out / "summary.json").read_text())["trials"] == 1


def test_invalid_trial_config_value(tmp_path, capsys):
    rc = main(["simulate", "--out-dir", str(tmp_path / "x"), "--set", "trial.dt=0"])
    assert rc == 1


# ---------------------------------------------------------------- evaluate

def write_eval_fixture(tmp_path, det_rows, gt_rows, labels=None):
    det = tmp_path / "det.csv"
    with open(det, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mask", "anchor_x", "n", "pr_x", "b_x", "c_x",
                    "delta_theta", "delta_p", "line_score", "no_detection"])
        w.writerows(det_rows)
    gt = tmp_path / "gt.csv"
    with open(gt, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame", "mask", "width", "height",
                    "gt_anchor_x", "gt_pr_x", "gt_visible", "gt_eor_y"])
        w.writerows(gt_rows)
    lab = None
    if labels is not None:
        lab = tmp_path / "labels.csv"
        with open(lab, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["frame", "class_id", "categories"])
            w.writerows(labels)
    return det, gt, lab


def test_evaluate_identical_scores_one(tmp_path):
    theta = math.degrees(math.atan2(10.0, 511.0))
    det_rows = [[f"f{i}.pgm", 250, 0, 260, 204, 358, repr(theta), 4.0, 100, 0] for i in range(3)]
    gt_rows = [[f"f{i}", f"f{i}.pgm", 512, 512, 250.0, 260.0, 1, ""] for i in range(3)]
    det, gt, _ = write_eval_fixture(tmp_path, det_rows, gt_rows)
    out = tmp_path / "eval"
    assert main(["evaluate", "--detections", str(det), "--ground-truth", str(gt),
                 "--out-dir", str(out), "--no-strict-labels"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["epsilon"] == pytest.approx(1.0, abs=1e-9)


def test_evaluate_worked_example(tmp_path):
    # Detected lines differ from truth by (10 deg, 0 px) and (20 deg, 50 px).
    det_rows = [
        ["f0.pgm", 250, 0, 300, 204, 358, 10.0, 0, 100, 0],
        ["f1.pgm", 250, 0, 350, 204, 358, 20.0, 0, 100, 0],
    ]
    gt_rows = [
        ["f0", "f0.pgm", 512, 512, 300.0, 300.0, 1, ""],
        ["f1", "f1.pgm", 512, 512, 300.0, 300.0, 1, ""],
    ]
    det, gt, _ = write_eval_fixture(tmp_path, det_rows, gt_rows)
    out = tmp_path / "eval"
    assert main(["evaluate", "--detections", str(det), "--ground-truth", str(gt),
                 "--out-dir", str(out), "--no-strict-labels"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["epsilon"] == pytest.approx(0.375, abs=1e-9)


def test_evaluate_key_mismatch_names_frame(tmp_path, capsys):
    det_rows = [["f0.pgm", 250, 0, 300, 204, 358, 1.0, 0, 100, 0]]
    gt_rows = [["other", "other.pgm", 512, 512, 300.0, 300.0, 1, ""]]
    det, gt, _ = write_eval_fixture(tmp_path, det_rows, gt_rows)
    rc = main(["evaluate", "--detections", str(det), "--ground-truth", str(gt),
               "--out-dir", str(tmp_path / "eval"), "--no-strict-labels"])
    assert rc == 1
    assert "f0" in capsys.readouterr().err


def test_evaluate_missing_label_strict(tmp_path, capsys):
    det_rows = [["f0.pgm", 250, 0, 300, 204, 358, 1.0, 0, 100, 0]]
    gt_rows = [["f0", "f0.pgm", 512, 512, 300.0, 300.0, 1, ""]]
    labels = [["f0", "1", ""]]
    det, gt, lab = write_eval_fixture(tmp_path, det_rows, gt_rows, labels)
    rc = main(["evaluate", "--detections", str(det), "--ground-truth", str(gt),
               "--labels", str(lab), "--out-dir", str(tmp_path / "eval")])
    assert rc == 1


def test_evaluate_per_category_outputs(tmp_path):
    det_rows = [
        ["f0.pgm", 250, 0, 305, 204, 358, 2.0, 0, 100, 0],
        ["f1.pgm", 250, 0, 300, 204, 358, 0.0, 0, 100, 0],
    ]
    gt_rows = [
        ["f0", "f0.pgm", 512, 512, 300.0, 300.0, 1, ""],
        ["f1", "f1.pgm", 512, 512, 300.0, 300.0, 1, ""],
    ]
    labels = [["f0", "1", "a;b"], ["f1", "2", "b"]]
    det, gt, lab = write_eval_fixture(tmp_path, det_rows, gt_rows, labels)
    out = tmp_path / "eval"
    assert main(["evaluate", "--detections", str(det), "--ground-truth", str(gt),
                 "--labels", str(lab), "--mode", "fixed", "--out-dir", str(out)]) == 0
    per_cat = {r["category"]: float(r["epsilon"]) for r in read_csv(out / "per_category.csv")}
    assert set(per_cat) == {"a", "b"}
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary["per_class"]) == {"1", "2"}


def test_end_to_end_generate_detect_evaluate(tmp_path):
    gen = tmp_path / "gen"
    assert main(["generate", "--out-dir", str(gen), "--frames", "6", "--seed", "5",
                 "--x-end", "1.8", "--set", "field.width_jitter=3,4"]) == 0
    masks = sorted(str(p) for p in gen.glob("frame_*.pgm"))
    det = tmp_path / "det.csv"
    assert main(["detect", *masks, "--out", str(det)]) == 0
    out = tmp_path / "eval"
    assert main(["evaluate", "--detections", str(det),
                 "--ground-truth", str(gen / "ground_truth.csv"),
                 "--mode", "fixed", "--out-dir", str(out), "--no-strict-labels"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["epsilon"] > 0.95

"""Command-line interface: detect, simulate, generate, evaluate.

Exit codes are a stable contract: 0 success, 1 validation error, 2 I/O
error. All output files are written atomically (temp file then rename)
and numeric fields use fixed 6-decimal formatting so outputs diff
cleanly between runs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from rowtrack import _config
from rowtrack.field import generate_field, render_mask
from rowtrack.mask import MaskError, load_mask, save_mask
from rowtrack.metrics import FrameError, epsilon as epsilon_report
from rowtrack.scan import detect
from rowtrack.sim import RobotPose, run_batch

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


class _CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; our contract reserves 2 for I/O.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _CliError(message, EXIT_VALIDATION)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _round_floats(obj, places: int = 6):
    if isinstance(obj, float):
        return round(obj, places)
    if isinstance(obj, dict):
        return {k: _round_floats(v, places) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round_floats(v, places) for v in obj]
    return obj


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    _atomic_write_text(path, buf.getvalue())


def _write_json(path: Path, payload: dict) -> None:
    _atomic_write_text(path, json.dumps(_round_floats(payload), indent=2, sort_keys=True) + "\n")


def _collect_overrides(args) -> dict[str, str]:
    overrides: dict[str, str] = {}
    if getattr(args, "config", None):
        overrides.update(_config.load_config_file(args.config))
    for item in getattr(args, "set", None) or []:
        ns, field_name, value = _config.parse_override(item)
        overrides[f"{ns}.{field_name}"] = value
    return overrides


def _build_configs(args) -> dict:
    try:
        return _config.build_configs(_collect_overrides(args))
    except _config.ConfigError as exc:
        raise _CliError(str(exc), EXIT_VALIDATION)
    except FileNotFoundError as exc:
        raise _CliError(str(exc), EXIT_IO)


def _frame_key(path: str) -> str:
    return Path(path).stem


# ---------------------------------------------------------------- detect

DETECT_HEADER = [
    "mask", "anchor_x", "n", "pr_x", "b_x", "c_x",
    "delta_theta", "delta_p", "line_score", "no_detection",
]


def cmd_detect(args) -> int:
    configs = _build_configs(args)
    scan_cfg = configs["scan"]
    missing = [p for p in args.masks if not os.path.isfile(p)]
    if missing:
        for p in missing:
            print(f"error: no such file: {p}", file=sys.stderr)
        return EXIT_IO

    rows: list[list] = []
    failures: list[tuple[str, str]] = []
    for path in args.masks:
        try:
            mask = load_mask(path)
        except (MaskError, OSError) as exc:
            failures.append((path, str(exc)))
            continue
        det = detect(mask, scan_cfg)
        if det.ok:
            rows.append([
                path, det.anchor.a_x, det.anchor.n, det.row.p_r.x,
                det.row.b_x, det.row.c_x, det.error.delta_theta,
                det.error.delta_p, det.row.line_score, False,
            ])
        else:
            rows.append([path, None, None, None, None, None, None, None, None, True])

    _write_csv(Path(args.out), DETECT_HEADER, rows)
    for path, msg in failures:
        print(f"error: {path}: {msg}", file=sys.stderr)
    return EXIT_IO if failures else EXIT_OK


# -------------------------------------------------------------- generate

GT_HEADER = [
    "frame", "mask", "width", "height",
    "gt_anchor_x", "gt_pr_x", "gt_visible", "gt_eor_y",
]


def _generate_poses(args, field_spec, rng) -> list[RobotPose]:
    if args.poses_file:
        poses = []
        with open(args.poses_file, "r", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                poses.append(
                    RobotPose(
                        x=float(row["x"]),
                        y=float(row["y"]),
                        theta=math.radians(float(row["theta_deg"])),
                    )
                )
        if not poses:
            raise _CliError("pose file contains no rows", EXIT_VALIDATION)
        return poses
    x_end = args.x_end if args.x_end is not None else max(args.x_start, field_spec.row_length - 4.0)
    xs = np.linspace(args.x_start, x_end, args.frames)
    poses = []
    for x in xs:
        y = float(rng.uniform(-args.lateral_jitter, args.lateral_jitter)) if args.lateral_jitter else 0.0
        th = float(rng.uniform(-args.heading_jitter_deg, args.heading_jitter_deg)) if args.heading_jitter_deg else 0.0
        poses.append(RobotPose(x=float(x), y=y, theta=math.radians(th)))
    return poses


def cmd_generate(args) -> int:
    configs = _build_configs(args)
    field_spec, cam = configs["field"], configs["cam"]
    if args.seed is not None:
        field_spec = replace(field_spec, seed=args.seed)
    rng = np.random.default_rng(field_spec.seed)
    poses = _generate_poses(args, field_spec, rng)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fld = generate_field(field_spec)

    gt_rows = []
    for i, pose in enumerate(poses):
        name = f"frame_{i:03d}.pgm"
        mask, gt = render_mask(fld, pose, cam)
        save_mask(mask, out_dir / name)
        gt_rows.append([
            f"frame_{i:03d}", name, cam.image_w, cam.image_h,
            gt.anchor_x_gt, gt.pr_x_gt, gt.visible, gt.eor_y_gt,
        ])
    _write_csv(out_dir / "ground_truth.csv", GT_HEADER, gt_rows)
    configs["field"] = field_spec
    _atomic_write_text(out_dir / "field_config.txt", _config.dump_configs(configs, ("field", "cam")))
    print(f"wrote {len(poses)} mask/ground-truth pairs to {out_dir}")
    return EXIT_OK


# -------------------------------------------------------------- simulate

TRIAL_HEADER = [
    "frame", "phase", "x", "y", "theta", "omega", "detected",
    "anchor_x", "anchor_n", "pr_x", "b_x", "c_x", "line_score",
    "delta_theta_deg", "delta_p_px", "gt_anchor_x", "gt_pr_x", "gt_eor_y",
    "epsilon", "eor_filtered_y", "eor_triggered",
]


def cmd_simulate(args) -> int:
    configs = _build_configs(args)
    trial = configs["trial"]
    if args.trials is not None:
        trial = replace(trial, trials=args.trials)
    if args.seed is not None:
        trial = replace(trial, seed=args.seed)

    logs, summary = run_batch(
        configs["field"], configs["cam"], configs["scan"],
        configs["ctrl"], configs["exit"], trial,
    )

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, lg in enumerate(logs):
        rows = [
            [
                f.frame, f.phase, f.x, f.y, f.theta, f.omega, f.detected,
                f.anchor_x, f.anchor_n, f.pr_x, f.b_x, f.c_x, f.line_score,
                f.delta_theta_deg, f.delta_p_px, f.gt_anchor_x, f.gt_pr_x,
                f.gt_eor_y, f.epsilon, f.eor_filtered_y, f.eor_triggered,
            ]
            for f in lg.frames
        ]
        _write_csv(out_dir / f"trial_{i:03d}.csv", TRIAL_HEADER, rows)

    summary_payload = {"schema_version": 1, **summary}
    _write_json(out_dir / "summary.json", summary_payload)

    def show(v, unit=""):
        return "n/a" if v is None else f"{v:.4f}{unit}"

    print(f"trials: {summary['trials']}  aborted: {summary['aborted']}  exits: {summary['exits_executed']}")
    print(f"mean epsilon first 10 frames: {show(summary['mean_start_epsilon'])}")
    print(f"mean epsilon last 10 frames:  {show(summary['mean_end_epsilon'])}")
    print(f"terminal heading offset: mean {show(summary['heading_offset_deg_mean'], ' deg')}, "
          f"max {show(summary['heading_offset_deg_max'], ' deg')}")
    print(f"terminal displacement:   mean {show(summary['displacement_cm_mean'], ' cm')}, "
          f"max {show(summary['displacement_cm_max'], ' cm')}")
    return EXIT_OK


# -------------------------------------------------------------- evaluate

def _read_csv_dict(path: str) -> list[dict]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise _CliError(str(exc), EXIT_IO)


def cmd_evaluate(args) -> int:
    det_rows = _read_csv_dict(args.detections)
    gt_rows = _read_csv_dict(args.ground_truth)

    gt_by_key = {r["frame"]: r for r in gt_rows}
    det_by_key = {}
    for r in det_rows:
        det_by_key[_frame_key(r["mask"])] = r

    for key in det_by_key:
        if key not in gt_by_key:
            raise _CliError(f"frame {key!r} has no ground-truth row", EXIT_VALIDATION)
    for key in gt_by_key:
        if key not in det_by_key:
            raise _CliError(f"frame {key!r} has no detection row", EXIT_VALIDATION)

    labels_by_key: dict[str, dict] = {}
    if args.labels:
        for r in _read_csv_dict(args.labels):
            labels_by_key[r["frame"]] = r
        for key in det_by_key:
            if key not in labels_by_key:
                raise _CliError(f"frame {key!r} has no label row", EXIT_VALIDATION)

    keys = sorted(det_by_key)
    raw: list[tuple[str, float | None, float | None]] = []
    for key in keys:
        det, gt = det_by_key[key], gt_by_key[key]
        h = int(gt["height"])
        if det["no_detection"] == "1" or gt["gt_visible"] != "1":
            raw.append((key, None, None))
            continue
        gt_theta = math.degrees(
            math.atan2(float(gt["gt_pr_x"]) - float(gt["gt_anchor_x"]), h - 1)
        )
        raw.append((
            key,
            abs(float(det["delta_theta"]) - gt_theta),
            abs(float(det["pr_x"]) - float(gt["gt_pr_x"])),
        ))

    if args.mode == "fixed":
        tmax, pmax = args.theta_max, args.p_max
    else:
        tmax = max((t for _, t, _ in raw if t is not None), default=0.0) or 1.0
        pmax = max((p for _, _, p in raw if p is not None), default=0.0) or 1.0

    frames = []
    per_frame_rows = []
    for key, t, p in raw:
        # Failed detections score at both normalizers (epsilon contribution 0).
        t_eff = tmax if t is None else t
        p_eff = pmax if p is None else p
        cats: frozenset = frozenset()
        class_id = None
        if key in labels_by_key:
            lab = labels_by_key[key]
            cats = frozenset(c for c in lab.get("categories", "").split(";") if c)
            if lab.get("class_id"):
                class_id = int(lab["class_id"])
        frames.append(FrameError(t_eff, p_eff, category_ids=cats, class_id=class_id))
        per_frame_rows.append([key, t_eff, p_eff])

    if args.labels and args.strict_labels:
        for key, f in zip(keys, frames):
            if not f.category_ids:
                raise _CliError(f"frame {key!r} carries no category label", EXIT_VALIDATION)

    report = epsilon_report(frames, mode=args.mode, theta_max=tmax, p_max=pmax)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "overall.csv",
               ["n", "epsilon", "theta_max_used", "p_max_used"],
               [[report.n, report.epsilon, report.theta_max_used, report.p_max_used]])
    _write_csv(out_dir / "frame_errors.csv",
               ["frame", "delta_theta_abs", "delta_p_abs"], per_frame_rows)
    if report.per_class:
        _write_csv(out_dir / "per_class.csv", ["class_id", "epsilon"],
                   [[cid, eps] for cid, eps in report.per_class.items()])
    if report.per_category:
        _write_csv(out_dir / "per_category.csv", ["category", "epsilon"],
                   [[cat, eps] for cat, eps in report.per_category.items()])
    _write_json(out_dir / "summary.json", {
        "schema_version": 1,
        "mode": args.mode,
        "n": report.n,
        "epsilon": report.epsilon,
        "theta_max_used": report.theta_max_used,
        "p_max_used": report.p_max_used,
        "per_class": {str(k): v for k, v in report.per_class.items()},
        "per_category": dict(report.per_category),
    })
    print(f"overall epsilon: {report.epsilon:.6f} over {report.n} frames")
    return EXIT_OK


# ------------------------------------------------------------------ main

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--set", action="append", metavar="NS.KEY=VALUE",
                   help="config override, e.g. scan.s=0.2 (repeatable)")
    p.add_argument("--config", help="flat key=value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rowtrack", description="Crop row tracking toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect the central row in mask files")
    p.add_argument("masks", nargs="+", help="input PGM mask files")
    p.add_argument("--out", required=True, help="output CSV path")
    _add_common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("generate", help="render synthetic masks plus ground truth")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--frames", type=int, default=10)
    p.add_argument("--x-start", type=float, default=0.2)
    p.add_argument("--x-end", type=float, default=None)
    p.add_argument("--heading-jitter-deg", type=float, default=0.0)
    p.add_argument("--lateral-jitter", type=float, default=0.0)
    p.add_argument("--poses-file", help="CSV with x,y,theta_deg columns")
    p.add_argument("--seed", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="run closed-loop servoing trials")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="score detections against ground truth")
    p.add_argument("--detections", required=True)
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--labels", default=None)
    p.add_argument("--mode", choices=["dataset-max", "fixed"], default="dataset-max")
    p.add_argument("--theta-max", type=float, default=20.0)
    p.add_argument("--p-max", type=float, default=256.0)
    p.add_argument("--strict-labels", action="store_true", default=True)
    p.add_argument("--no-strict-labels", dest="strict_labels", action="store_false")
    p.add_argument("--out-dir", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

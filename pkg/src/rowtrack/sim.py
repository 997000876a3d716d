"""Closed-loop trial runner: unicycle robot, per-frame render/detect/steer.

Each servo frame renders the field from the current pose, runs the
detector, scores it against analytic ground truth and steers. Once the
filtered end-of-row estimate enters the trigger band the loop hands over
to the open-loop exit manoeuvre, which halts the robot and records the
terminal heading and displacement offsets.

The wheel command is the negative of the steering law output: with this
camera a row appearing right of centre produces positive errors, and
correcting toward it is a clockwise turn, negative in the
counter-clockwise-positive convention used by the kinematics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from rowtrack import eor as eor_mod
from rowtrack.control import ControllerConfig, ExitConfig, clamp_omega, exit_omega, steer
from rowtrack.field import (
    CameraSpec,
    FieldSpec,
    generate_field,
    nearest_row_index,
    offset_from_row,
    render_mask,
)
from rowtrack.metrics import frame_epsilon
from rowtrack.scan import ScanConfig, detect

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RobotPose:
    x: float
    y: float
    theta: float  # radians, 0 = along-row, counter-clockwise positive


@dataclass(frozen=True)
class TrialConfig:
    frames_max: int = 200
    dt: float = 0.1
    initial_heading_deg: float = 20.0  # headings drawn uniformly in +-this
    trials: int = 20
    seed: int = 0
    miss_abort: int = 10  # consecutive detection misses before giving up
    eor_beta: float = 0.8
    omega_capture_frames: int = 100  # window for the captured exit omega
    settle_epsilon: float = 0.80
    run_exit: bool = True

    def __post_init__(self):
        if self.frames_max < 1:
            raise ValueError("frames_max must be >= 1")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.miss_abort < 1:
            raise ValueError("miss_abort must be >= 1")


@dataclass(frozen=True)
class FrameRecord:
    frame: int
    phase: str  # "servo" or "exit"
    x: float
    y: float
    theta: float
    omega: float
    detected: bool
    anchor_x: int | None = None
    anchor_n: int | None = None
    pr_x: int | None = None
    b_x: int | None = None
    c_x: int | None = None
    line_score: int | None = None
    delta_theta_deg: float | None = None
    delta_p_px: float | None = None
    gt_anchor_x: float | None = None
    gt_pr_x: float | None = None
    gt_eor_y: float | None = None
    epsilon: float | None = None
    eor_filtered_y: float | None = None
    eor_triggered: bool = False


@dataclass
class TrialLog:
    frames: list[FrameRecord] = field(default_factory=list)
    aborted: bool = False
    exit_executed: bool = False
    trigger_frame: int | None = None
    final_heading_offset_deg: float | None = None
    final_displacement_m: float | None = None
    initial_heading_deg: float = 0.0

    def servo_epsilons(self) -> list[float]:
        return [f.epsilon for f in self.frames if f.phase == "servo" and f.epsilon is not None]

    def settle_frame(self, threshold: float = 0.80) -> int | None:
        """First servo frame index from which the score stays at or above threshold."""
        eps = self.servo_epsilons()
        if not eps:
            return None
        k = len(eps)
        for i in range(len(eps) - 1, -1, -1):
            if eps[i] < threshold:
                break
            k = i
        return k if k < len(eps) else None


def wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    t = theta % TWO_PI
    if t > math.pi:
        t -= TWO_PI
    return t


def step_kinematics(pose: RobotPose, v: float, omega: float, dt: float) -> RobotPose:
    """Forward-Euler unicycle step; heading wraps to (-pi, pi]."""
    return RobotPose(
        x=pose.x + v * math.cos(pose.theta) * dt,
        y=pose.y + v * math.sin(pose.theta) * dt,
        theta=wrap_angle(pose.theta + omega * dt),
    )


def _tracking_epsilon(det, gt, image_h: int, image_w: int) -> float:
    """Per-frame score of how well the robot is tracking its row.

    Scores the true row line's angle from vertical and its bottom-edge
    offset from the desired column, with the fixed live normalizers; a
    failed detection or an invisible row scores 0 (both terms at their
    maxima). This is the quantity whose curve rises as servoing settles.
    """
    if not det.ok or not gt.visible:
        return 0.0
    gt_theta = gt.delta_theta_deg(image_h)
    return frame_epsilon(
        abs(gt_theta),
        abs(gt.pr_x_gt - image_w / 2.0),
        theta_max=20.0,
        p_max=image_w / 2.0,
    )


def run_trial(
    field_spec: FieldSpec,
    cam: CameraSpec,
    scan_cfg: ScanConfig,
    ctrl: ControllerConfig,
    exit_cfg: ExitConfig,
    trial: TrialConfig,
    seed: int | np.random.SeedSequence | None = None,
    initial_heading_deg: float | None = None,
) -> TrialLog:
    """One closed-loop run down a freshly generated row, exit included.

    initial_heading_deg pins the starting heading instead of drawing it,
    handy for replaying a specific trial.
    """
    rng = np.random.default_rng(trial.seed if seed is None else seed)
    drawn = rng.uniform(-trial.initial_heading_deg, trial.initial_heading_deg)
    theta0 = math.radians(drawn if initial_heading_deg is None else initial_heading_deg)
    fld = generate_field(replace(field_spec, seed=int(rng.integers(2**31))))

    start_row = nearest_row_index(fld, 0.0, 0.0)
    pose = RobotPose(x=0.0, y=fld.rows[start_row].offset, theta=theta0)

    log = TrialLog(initial_heading_deg=math.degrees(theta0))
    h = scan_cfg.roi_height(cam.image_h)
    eor_state = eor_mod.EorState(beta=trial.eor_beta)
    seen_top_band = False
    thetas: list[float] = []  # heading history, for the exit omega capture
    miss_streak = 0
    omega_eor = None

    for k in range(trial.frames_max):
        mask, gt = render_mask(fld, pose, cam)
        det = detect(mask, scan_cfg)

        if det.ok:
            miss_streak = 0
            eps_k = _tracking_epsilon(det, gt, cam.image_h, cam.image_w)
            applied = -clamp_omega(steer(det.error, ctrl), ctrl)
            if det.anchor.n == 0:
                # Row top is back in the top band: not near the end, re-arm.
                seen_top_band = True
                eor_state = eor_mod.reset(eor_state)
            elif seen_top_band:
                m = eor_mod.eor_scan(mask, det.anchor.n + 1, h)
                if m is not None:
                    eor_state = eor_mod.update(eor_state, m, h, n=det.anchor.n)
        else:
            miss_streak += 1
            eps_k = 0.0
            applied = 0.0

        thetas.append(pose.theta)

        log.frames.append(
            FrameRecord(
                frame=k,
                phase="servo",
                x=pose.x,
                y=pose.y,
                theta=pose.theta,
                omega=applied,
                detected=det.ok,
                anchor_x=det.anchor.a_x if det.ok else None,
                anchor_n=det.anchor.n if det.ok else None,
                pr_x=det.row.p_r.x if det.ok else None,
                b_x=det.row.b_x if det.ok else None,
                c_x=det.row.c_x if det.ok else None,
                line_score=det.row.line_score if det.ok else None,
                delta_theta_deg=det.error.delta_theta if det.ok else None,
                delta_p_px=det.error.delta_p if det.ok else None,
                gt_anchor_x=gt.anchor_x_gt,
                gt_pr_x=gt.pr_x_gt,
                gt_eor_y=gt.eor_y_gt,
                epsilon=eps_k,
                eor_filtered_y=eor_state.filtered_y,
                eor_triggered=eor_state.triggered,
            )
        )

        pose = step_kinematics(pose, ctrl.v, applied, trial.dt)

        if eor_state.triggered:
            # Captured steering rate: net heading change over the recent
            # window. Immune to single-frame command noise, which a 20 s
            # open-loop extrapolation would amplify into meters of drift.
            k0 = max(0, len(thetas) - trial.omega_capture_frames)
            span = (len(thetas) - 1 - k0) * trial.dt
            if span > 0:
                omega_eor = wrap_angle(thetas[-1] - thetas[k0]) / span
            else:
                omega_eor = applied
            log.trigger_frame = k
            break
        if miss_streak >= trial.miss_abort:
            log.aborted = True
            break

    if omega_eor is not None and trial.run_exit:
        ecfg = replace(exit_cfg, omega_eor=omega_eor)
        i = 0
        base = len(log.frames)
        while True:
            cmd = exit_omega(i * trial.dt, ecfg)
            if cmd.halt:
                break
            log.frames.append(
                FrameRecord(
                    frame=base + i,
                    phase="exit",
                    x=pose.x,
                    y=pose.y,
                    theta=pose.theta,
                    omega=cmd.omega,
                    detected=False,
                    eor_triggered=True,
                )
            )
            pose = step_kinematics(pose, ctrl.v, cmd.omega, trial.dt)
            i += 1

        row = fld.rows[nearest_row_index(fld, pose.x, pose.y)]
        tangent_angle = math.atan2(row.end_tangent[1], row.end_tangent[0])
        log.exit_executed = True
        log.final_heading_offset_deg = abs(math.degrees(wrap_angle(pose.theta - tangent_angle)))
        log.final_displacement_m = offset_from_row(row, pose.x, pose.y)

    return log


def _mean(values) -> float | None:
    values = [v for v in values if v is not None]
    return sum(values) / len(values) if values else None


def summarize(logs: list[TrialLog], trial: TrialConfig) -> dict:
    """Aggregate statistics over a batch of trial logs."""
    starts, ends, settles = [], [], []
    for lg in logs:
        eps = lg.servo_epsilons()
        if lg.aborted or len(eps) < 20:
            continue
        starts.append(sum(eps[:10]) / 10)
        ends.append(sum(eps[-10:]) / 10)
    for lg in logs:
        settles.append(lg.settle_frame(trial.settle_epsilon))

    headings = [lg.final_heading_offset_deg for lg in logs if lg.exit_executed]
    disps = [lg.final_displacement_m for lg in logs if lg.exit_executed]

    summary = {
        "trials": len(logs),
        "aborted": sum(1 for lg in logs if lg.aborted),
        "exits_executed": sum(1 for lg in logs if lg.exit_executed),
        "mean_start_epsilon": _mean(starts),
        "mean_end_epsilon": _mean(ends),
        "epsilon_improvement": (
            _mean(ends) - _mean(starts) if starts and ends else None
        ),
        "settled_by_frame_80": sum(1 for s in settles if s is not None and s <= 80),
        "heading_offset_deg_mean": _mean(headings),
        "heading_offset_deg_max": max(headings) if headings else None,
        "displacement_cm_mean": _mean([d * 100 for d in disps]) if disps else None,
        "displacement_cm_max": max(d * 100 for d in disps) if disps else None,
        "per_trial": [
            {
                "initial_heading_deg": lg.initial_heading_deg,
                "servo_frames": len(lg.servo_epsilons()),
                "aborted": lg.aborted,
                "exit_executed": lg.exit_executed,
                "trigger_frame": lg.trigger_frame,
                "settle_frame": lg.settle_frame(trial.settle_epsilon),
                "final_heading_offset_deg": lg.final_heading_offset_deg,
                "final_displacement_cm": (
                    lg.final_displacement_m * 100
                    if lg.final_displacement_m is not None
                    else None
                ),
            }
            for lg in logs
        ],
    }
    return summary


def run_batch(
    field_spec: FieldSpec,
    cam: CameraSpec,
    scan_cfg: ScanConfig,
    ctrl: ControllerConfig,
    exit_cfg: ExitConfig,
    trial: TrialConfig,
) -> tuple[list[TrialLog], dict]:
    """Independent trials with seeds derived from the master seed."""
    root = np.random.SeedSequence(trial.seed)
    logs = [
        run_trial(field_spec, cam, scan_cfg, ctrl, exit_cfg, trial, seed=child)
        for child in root.spawn(trial.trials)
    ]
    return logs, summarize(logs, trial)

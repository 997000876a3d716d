"""Crop row tracking toolkit.

Detection of the central crop row in binary masks, end-of-row detection,
proportional visual servoing with a timed exit manoeuvre, a synthetic
field simulator and an epsilon-score evaluation harness.
"""

from rowtrack._kernels import BACKEND as KERNEL_BACKEND
from rowtrack.control import ControllerConfig, ExitCommand, ExitConfig, exit_omega, steer
from rowtrack.eor import EorState, eor_scan
from rowtrack.field import CameraSpec, Field, FieldSpec, GroundTruthRow, generate_field, render_mask
from rowtrack.mask import ImagePoint, Mask, column_sum, load_mask, save_mask
from rowtrack.metrics import EpsilonReport, FrameError, epsilon, frame_epsilon, per_category_report
from rowtrack.scan import (
    AnchorResult,
    CentralRow,
    Detection,
    ScanConfig,
    TrackingError,
    anchor_scan,
    compute_bc,
    detect,
    line_scan,
    rasterize_segment,
    tracking_error,
)
from rowtrack.sim import RobotPose, TrialConfig, TrialLog, run_batch, run_trial, step_kinematics

__version__ = "0.1.0"

__all__ = [
    "AnchorResult",
    "CameraSpec",
    "CentralRow",
    "ControllerConfig",
    "Detection",
    "EorState",
    "EpsilonReport",
    "ExitCommand",
    "ExitConfig",
    "Field",
    "FieldSpec",
    "FrameError",
    "GroundTruthRow",
    "ImagePoint",
    "KERNEL_BACKEND",
    "Mask",
    "RobotPose",
    "ScanConfig",
    "TrackingError",
    "TrialConfig",
    "TrialLog",
    "anchor_scan",
    "column_sum",
    "compute_bc",
    "detect",
    "eor_scan",
    "epsilon",
    "exit_omega",
    "frame_epsilon",
    "generate_field",
    "line_scan",
    "load_mask",
    "per_category_report",
    "rasterize_segment",
    "render_mask",
    "run_batch",
    "run_trial",
    "save_mask",
    "steer",
    "step_kinematics",
    "tracking_error",
]

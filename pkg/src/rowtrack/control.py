"""Steering laws: proportional row following and the timed exit manoeuvre.

steer() is the raw proportional law and is exactly linear in both error
components; the simulator applies the sign convention (its camera puts a
rightward-leaning row at positive error, which needs a clockwise turn)
and the omega_max clamp when driving the robot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from rowtrack.scan import TrackingError


@dataclass(frozen=True)
class ControllerConfig:
    """Gains for the proportional steering law.

    alpha scales the blended error into rad/s; w1 weighs the angle error
    (per degree), w2 the bottom-point displacement (per pixel). v is the
    constant forward speed. Defaults settle a 20 degree initial heading
    within about 50 control frames on the default simulated camera.
    """

    alpha: float = 0.007
    w1: float = 1.0
    w2: float = 1.5
    v: float = 0.3
    omega_max: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.w1 < 0 or self.w2 < 0 or self.w1 + self.w2 <= 0:
            raise ValueError("weights must be non-negative with a positive sum")
        if self.v <= 0:
            raise ValueError("forward speed must be positive")
        if self.omega_max <= 0:
            raise ValueError("omega_max must be positive")


@dataclass(frozen=True)
class ExitConfig:
    """Open-loop exit manoeuvre: omega decays exponentially, halt at t_e."""

    lam: float = 0.01
    t_e: float = 20.0
    omega_eor: float = 0.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("decay constant must be >= 0")
        if self.t_e <= 0:
            raise ValueError("manoeuvre duration must be positive")


class ExitCommand(NamedTuple):
    omega: float
    halt: bool


def steer(err: TrackingError, cfg: ControllerConfig | None = None) -> float:
    """alpha * (w1 * delta_theta + w2 * delta_p), unclamped."""
    cfg = cfg or ControllerConfig()
    return cfg.alpha * (cfg.w1 * err.delta_theta + cfg.w2 * err.delta_p)


def clamp_omega(omega: float, cfg: ControllerConfig) -> float:
    return max(-cfg.omega_max, min(cfg.omega_max, omega))


def exit_omega(t: float, cfg: ExitConfig) -> ExitCommand:
    """Angular velocity t seconds into the exit manoeuvre.

    Before t_e: omega_eor * exp(-lam * t), robot still driving forward.
    From t_e on: full halt (zero angular and zero linear velocity).
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if t >= cfg.t_e:
        return ExitCommand(omega=0.0, halt=True)
    return ExitCommand(omega=cfg.omega_eor * math.exp(-cfg.lam * t), halt=False)

"""Detection performance score and per-category aggregation.

The score charges each frame half its normalized angle error and half
its normalized displacement error; a perfect detector scores 1, a
detector pinned at both normalizers scores 0. Normalizers either come
from the data (maximum observed error per term) or are fixed up front,
which keeps per-frame scores comparable across a live run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

DEFAULT_THETA_MAX = 20.0  # degrees
DEFAULT_P_MAX = 256.0  # pixels, half of the default 512 image width


@dataclass(frozen=True)
class FrameError:
    delta_theta_abs: float
    delta_p_abs: float
    category_ids: frozenset = frozenset()
    class_id: int | None = None

    def __post_init__(self):
        if self.delta_theta_abs < 0 or self.delta_p_abs < 0:
            raise ValueError("errors must be non-negative")
        object.__setattr__(self, "category_ids", frozenset(self.category_ids))


@dataclass(frozen=True)
class EpsilonReport:
    epsilon: float
    n: int
    theta_max_used: float
    p_max_used: float
    per_class: dict = field(default_factory=dict)
    per_category: dict = field(default_factory=dict)


def frame_epsilon(
    delta_theta_abs: float,
    delta_p_abs: float,
    theta_max: float = DEFAULT_THETA_MAX,
    p_max: float = DEFAULT_P_MAX,
) -> float:
    """Single-frame score with ratios saturated at 1 so the result stays in [0, 1]."""
    rt = min(delta_theta_abs / theta_max, 1.0)
    rp = min(delta_p_abs / p_max, 1.0)
    return 1.0 - 0.5 * (rt + rp)


def epsilon(
    frames,
    mode: str = "dataset-max",
    theta_max: float = DEFAULT_THETA_MAX,
    p_max: float = DEFAULT_P_MAX,
) -> EpsilonReport:
    """Aggregate score over a frame set.

    mode "dataset-max" takes each normalizer as the maximum observed error
    of that term (1 when every error is zero, avoiding 0/0); mode "fixed"
    uses the supplied normalizers and saturates ratios at 1. Class scores
    average the frame scores of each class; category scores average the
    class scores of the classes labelled with that category.
    """
    frames = list(frames)
    if not frames:
        raise ValueError("epsilon requires at least one frame")
    if mode == "dataset-max":
        tm = max((f.delta_theta_abs for f in frames), default=0.0) or 1.0
        pm = max((f.delta_p_abs for f in frames), default=0.0) or 1.0
    elif mode == "fixed":
        if theta_max <= 0 or p_max <= 0:
            raise ValueError("fixed normalizers must be positive")
        tm, pm = theta_max, p_max
    else:
        raise ValueError(f"unknown mode {mode!r}")

    scores = [frame_epsilon(f.delta_theta_abs, f.delta_p_abs, tm, pm) for f in frames]
    overall = sum(scores) / len(scores)

    by_class: dict[int, list[float]] = {}
    class_categories: dict[int, set] = {}
    for f, s in zip(frames, scores):
        if f.class_id is None:
            continue
        by_class.setdefault(f.class_id, []).append(s)
        class_categories.setdefault(f.class_id, set()).update(f.category_ids)

    per_class = {cid: sum(v) / len(v) for cid, v in sorted(by_class.items())}

    by_category: dict[str, list[float]] = {}
    for cid, eps_c in per_class.items():
        for cat in class_categories[cid]:
            by_category.setdefault(cat, []).append(eps_c)
    per_category = {cat: sum(v) / len(v) for cat, v in sorted(by_category.items())}

    return EpsilonReport(
        epsilon=overall,
        n=len(frames),
        theta_max_used=tm,
        p_max_used=pm,
        per_class=per_class,
        per_category=per_category,
    )


def per_category_report(
    frames,
    mode: str = "dataset-max",
    theta_max: float = DEFAULT_THETA_MAX,
    p_max: float = DEFAULT_P_MAX,
    strict: bool = True,
) -> EpsilonReport:
    """epsilon() with label validation: every frame needs a category label."""
    frames = list(frames)
    if strict:
        for i, f in enumerate(frames):
            if not f.category_ids:
                raise ValueError(f"frame {i} carries no category label")
    return epsilon(frames, mode=mode, theta_max=theta_max, p_max=p_max)

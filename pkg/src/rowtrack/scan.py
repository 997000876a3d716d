"""Central crop row detection on binary masks.

Two-step scan: an anchor scan locates the top of the central row by a
column-sum argmax over a horizontal band, then a line scan picks the
bottom-edge point whose connecting line collects the highest pixel sum
inside a triangular window. Both argmaxes break ties toward the smaller
coordinate, so results are fully deterministic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from rowtrack import _kernels
from rowtrack.mask import ImagePoint, Mask

_EPS = 1e-9


def _ifloor(v: float) -> int:
    # Floor with a dust tolerance so decimal fractions of integer sizes
    # (0.4 * 512 and friends) floor to their exact mathematical value.
    return math.floor(v + _EPS)


@dataclass(frozen=True)
class ScanConfig:
    """Tuning knobs for the two scan stages.

    s: band height as a fraction of image height (band height h = floor(s*H)).
    anchor_x_min_frac / anchor_x_max_frac: column search range as width fractions.
    anchor_threshold_frac: minimum column score, as a fraction of h, for a
        valid anchor. Low enough by default to accept rows slanted across
        the band, where the best column holds only part of the band rows.
    n_max: how many times the band may shift down by h before giving up.
    pr_min_frac / pr_max_frac / pr_offset_frac: bottom-window rule constants.
    """

    s: float = 0.2
    anchor_x_min_frac: float = 0.2
    anchor_x_max_frac: float = 0.7
    anchor_threshold_frac: float = 0.15
    n_max: int = 2
    pr_offset_frac: float = 0.2
    pr_min_frac: float = 0.4
    pr_max_frac: float = 0.9

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise ValueError("s must be in (0, 1)")
        if not self.anchor_x_min_frac < self.anchor_x_max_frac <= 1.0:
            raise ValueError("anchor column fractions must satisfy min < max <= 1")
        if not 0.0 < self.anchor_threshold_frac <= 1.0:
            raise ValueError("anchor_threshold_frac must be in (0, 1]")
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")

    def roi_height(self, image_height: int) -> int:
        return max(1, _ifloor(self.s * image_height))


@dataclass(frozen=True)
class AnchorResult:
    a_x: int
    n: int
    valid: bool
    score: int


@dataclass(frozen=True)
class CentralRow:
    anchor: ImagePoint  # projected to the top edge, y == 0
    p_r: ImagePoint  # bottom edge, y == H - 1
    b_x: int
    c_x: int
    line_score: int


@dataclass(frozen=True)
class TrackingError:
    delta_theta: float  # degrees from image vertical, positive: P_r right of anchor
    delta_p: float  # pixels, P_r column minus desired column


@dataclass(frozen=True)
class Detection:
    anchor: AnchorResult
    row: CentralRow | None = None
    error: TrackingError | None = None

    @property
    def ok(self) -> bool:
        return self.row is not None


def _warn_non_square(mask: Mask) -> None:
    if mask.width != mask.height:
        warnings.warn(
            "scan window rules assume square images; behaviour on "
            f"{mask.width}x{mask.height} masks uses height-based windows "
            "clamped to the image width",
            stacklevel=3,
        )


def anchor_scan(mask: Mask, cfg: ScanConfig | None = None) -> AnchorResult:
    """Find the central row's top column by column-sum argmax.

    Scans the band rows [n*h, (n+1)*h). If the winning score is below
    anchor_threshold_frac * h the band shifts down by h, at most n_max
    times. Returns valid=False (with n == n_max) when every band fails.
    """
    cfg = cfg or ScanConfig()
    h = cfg.roi_height(mask.height)
    x_lo = _ifloor(cfg.anchor_x_min_frac * mask.width)
    x_hi = min(_ifloor(cfg.anchor_x_max_frac * mask.width), mask.width - 1)
    threshold = cfg.anchor_threshold_frac * h

    best_x, best_score = x_lo, 0
    for n in range(cfg.n_max + 1):
        y0 = n * h
        y1 = min((n + 1) * h, mask.height)
        if y0 >= mask.height:
            break
        sums = _kernels.column_sums(mask.pixels, y0, y1, x_lo, x_hi + 1)
        i = int(sums.argmax())  # first maximum: smallest column wins ties
        best_x, best_score = x_lo + i, int(sums[i])
        if best_score >= threshold:
            return AnchorResult(a_x=best_x, n=n, valid=True, score=best_score)
    return AnchorResult(a_x=best_x, n=cfg.n_max, valid=False, score=best_score)


def rasterize_segment(p0: ImagePoint, p1: ImagePoint) -> list[ImagePoint]:
    """One pixel per row from p0 down to p1, round-half-up interpolation."""
    if p0.y > p1.y:
        raise ValueError("p0 must not be below p1")
    dy = p1.y - p0.y
    if dy == 0:
        return [ImagePoint(p0.x, p0.y)]
    dx = p1.x - p0.x
    pts = []
    for y in range(p0.y, p1.y + 1):
        x = p0.x + (2 * dx * (y - p0.y) + dy) // (2 * dy)
        pts.append(ImagePoint(x, y))
    return pts


def compute_bc(
    anchor: AnchorResult, mask_height: int, cfg: ScanConfig | None = None, mask_width: int | None = None
) -> tuple[int, int]:
    """Bottom search window [B, C] for a given anchor column.

    B is pr_min_frac*H unless the anchor sits right of (pr_min + offset)*H,
    in which case B trails the anchor by offset*H; symmetrically C is
    pr_max_frac*H once the anchor passes (pr_max - offset)*H. Products are
    floored; the result is clamped into [0, W-1] and kept ordered.
    """
    cfg = cfg or ScanConfig()
    if not anchor.valid:
        raise ValueError("compute_bc requires a valid anchor")
    h = float(mask_height)
    w = mask_width if mask_width is not None else mask_height
    a = anchor.a_x

    if a <= (cfg.pr_min_frac + cfg.pr_offset_frac) * h + _EPS:
        b = _ifloor(cfg.pr_min_frac * h)
    else:
        b = _ifloor(a - cfg.pr_offset_frac * h)
    if a >= (cfg.pr_max_frac - cfg.pr_offset_frac) * h - _EPS:
        c = _ifloor(cfg.pr_max_frac * h)
    else:
        c = _ifloor(a + cfg.pr_offset_frac * h)

    b = max(0, min(b, w - 1))
    c = max(0, min(c, w - 1))
    # Degenerate configs can invert the window; collapse onto C.
    if b > c:
        b = c
    return b, c


def line_scan(mask: Mask, anchor: AnchorResult, cfg: ScanConfig | None = None) -> CentralRow:
    """Pick the bottom-edge point maximizing the pixel sum along the row line.

    The scored path starts at the top edge: column a_x runs vertically down
    to the top of the anchor band (rows [0, n*h)), then continues as the
    rasterized segment to the candidate bottom point. The vertical part is
    shared by all candidates, so it never changes the argmax; it keeps the
    reported line_score consistent with a full-height row line.
    """
    cfg = cfg or ScanConfig()
    if not anchor.valid:
        raise ValueError("line_scan requires a valid anchor")
    h = cfg.roi_height(mask.height)
    ay = min(anchor.n * h, mask.height - 1)
    b, c = compute_bc(anchor, mask.height, cfg, mask_width=mask.width)
    scores = _kernels.line_scores(mask.pixels, anchor.a_x, ay, b, c)
    i = int(scores.argmax())  # ties: smallest candidate column
    return CentralRow(
        anchor=ImagePoint(anchor.a_x, 0),
        p_r=ImagePoint(b + i, mask.height - 1),
        b_x=b,
        c_x=c,
        line_score=int(scores[i]),
    )


def tracking_error(row: CentralRow, mask: Mask, desired_x: float | None = None) -> TrackingError:
    """Angle from vertical (degrees) and bottom-point offset (pixels)."""
    if desired_x is None:
        desired_x = mask.width / 2
    dx = row.p_r.x - row.anchor.x
    dy = row.p_r.y - row.anchor.y
    theta = math.degrees(math.atan2(dx, dy)) if (dx or dy) else 0.0
    return TrackingError(delta_theta=theta, delta_p=float(row.p_r.x) - float(desired_x))


def detect(mask: Mask, cfg: ScanConfig | None = None, desired_x: float | None = None) -> Detection:
    """Full pipeline: anchor scan, window rule, line scan, tracking error.

    A failed anchor scan yields Detection(ok=False); no exception is raised
    for masks with nothing to detect.
    """
    cfg = cfg or ScanConfig()
    _warn_non_square(mask)
    anchor = anchor_scan(mask, cfg)
    if not anchor.valid:
        return Detection(anchor=anchor)
    row = line_scan(mask, anchor, cfg)
    err = tracking_error(row, mask, desired_x)
    return Detection(anchor=anchor, row=row, error=err)

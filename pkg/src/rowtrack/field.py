"""Parametric synthetic crop fields rendered to binary masks.

World frame: ground plane, x along the row direction, y to the left,
units in meters. The camera sits above the robot origin, pitched down;
rows are drawn as thick polylines through a pinhole model, weeds as
filled discs. Ground truth for the row nearest the image centre comes
from the projected centerline, not from the rasterized pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import cv2
import numpy as np

from rowtrack.mask import Mask

Z_NEAR = 0.05  # meters in front of the lens; geometry closer than this is clipped
_SAMPLE_STEP = 0.25  # meters between centerline samples
_CHUNK_LEN = 0.5  # meters of row sharing one rendered width


@dataclass(frozen=True)
class FieldSpec:
    num_rows: int = 5
    row_spacing: float = 0.5
    row_length: float = 6.0
    curvature: float = 0.0  # 1/m, 0 = straight
    gap_rate: float = 0.0  # expected gaps per meter of row
    gap_length: float = 0.5  # meters removed per gap
    weed_density: float = 0.0  # blobs per square meter
    width_jitter: tuple[int, int] = (3, 8)  # rendered line width range, pixels
    seed: int = 0

    def __post_init__(self):
        if self.num_rows < 1:
            raise ValueError("num_rows must be >= 1")
        if self.row_spacing <= 0 or self.row_length <= 0:
            raise ValueError("row_spacing and row_length must be positive")
        lo, hi = self.width_jitter
        if not (1 <= lo <= hi <= 16):
            raise ValueError("width_jitter must satisfy 1 <= min <= max <= 16")
        if self.gap_rate < 0 or self.gap_length < 0 or self.weed_density < 0:
            raise ValueError("rates, lengths and densities must be >= 0")

    def row_offset(self, i: int) -> float:
        return (i - (self.num_rows - 1) / 2.0) * self.row_spacing


@dataclass(frozen=True)
class CameraSpec:
    height_m: float = 0.7
    tilt_deg: float = 35.0
    focal_px: float = 370.0
    image_w: int = 512
    image_h: int = 512

    def __post_init__(self):
        if self.height_m <= 0:
            raise ValueError("camera height must be positive")
        if not 0 < self.tilt_deg < 90:
            raise ValueError("tilt must be in (0, 90) degrees")
        if self.focal_px <= 0:
            raise ValueError("focal length must be positive")
        if self.image_w < 16 or self.image_h < 16:
            raise ValueError("image must be at least 16x16")

    @property
    def cx(self) -> float:
        return (self.image_w - 1) / 2.0

    @property
    def cy(self) -> float:
        return (self.image_h - 1) / 2.0


@dataclass(frozen=True)
class GroundTruthRow:
    anchor_x_gt: float | None
    pr_x_gt: float | None
    visible: bool
    eor_y_gt: float | None

    def delta_theta_deg(self, image_h: int) -> float | None:
        if not self.visible:
            return None
        return math.degrees(
            math.atan2(self.pr_x_gt - self.anchor_x_gt, image_h - 1)
        )


class Segment(NamedTuple):
    points: np.ndarray  # (M, 2) world coordinates
    width_px: int


@dataclass(frozen=True)
class RowGeometry:
    offset: float
    centerline: np.ndarray  # (N, 2), ungapped, used for ground truth
    segments: tuple[Segment, ...]  # gapped, used for rendering
    end_point: np.ndarray  # (2,) far end of the row
    end_tangent: np.ndarray  # (2,) unit direction at the far end


@dataclass(frozen=True)
class Field:
    spec: FieldSpec
    rows: tuple[RowGeometry, ...]
    weeds: np.ndarray  # (M, 3): world x, world y, disc radius in pixels


def _arc_points(spec: FieldSpec, offset: float, s: np.ndarray) -> np.ndarray:
    k = spec.curvature
    if abs(k) < 1e-12:
        return np.column_stack([s, np.full_like(s, offset)])
    # Concentric arcs: shared centre at (0, 1/k), tangent +x at s = 0.
    r = 1.0 / k - offset
    phi = k * s
    return np.column_stack([r * np.sin(phi), 1.0 / k - r * np.cos(phi)])


def _end_tangent(spec: FieldSpec) -> np.ndarray:
    phi = spec.curvature * spec.row_length
    return np.array([math.cos(phi), math.sin(phi)])


def _keep_intervals(length: float, gaps: list[tuple[float, float]]) -> list[tuple[float, float]]:
    cuts = sorted(gaps)
    keep = []
    pos = 0.0
    for g0, g1 in cuts:
        g0, g1 = max(0.0, g0), min(length, g1)
        if g0 > pos:
            keep.append((pos, g0))
        pos = max(pos, g1)
    if pos < length:
        keep.append((pos, length))
    return [(a, b) for a, b in keep if b - a > 1e-6]


def _sample_range(a: float, b: float) -> np.ndarray:
    n = max(2, int(math.ceil((b - a) / _SAMPLE_STEP)) + 1)
    return np.linspace(a, b, n)


def generate_field(spec: FieldSpec) -> Field:
    """Build row geometry and weed placement, fully determined by spec.seed."""
    rng = np.random.default_rng(spec.seed)
    length = spec.row_length
    rows = []
    for i in range(spec.num_rows):
        offset = spec.row_offset(i)
        centerline = _arc_points(spec, offset, _sample_range(0.0, length))

        gaps: list[tuple[float, float]] = []
        if spec.gap_rate > 0 and spec.gap_length > 0:
            count = int(rng.poisson(spec.gap_rate * length))
            starts = np.sort(rng.uniform(0.0, length, size=count))
            gaps = [(float(g), float(g) + spec.gap_length) for g in starts]

        segments = []
        for a, b in _keep_intervals(length, gaps):
            n_chunks = max(1, int(math.ceil((b - a) / _CHUNK_LEN)))
            edges = np.linspace(a, b, n_chunks + 1)
            for j in range(n_chunks):
                width = int(rng.integers(spec.width_jitter[0], spec.width_jitter[1] + 1))
                pts = _arc_points(spec, offset, _sample_range(edges[j], edges[j + 1]))
                segments.append(Segment(points=pts, width_px=width))

        rows.append(
            RowGeometry(
                offset=offset,
                centerline=centerline,
                segments=tuple(segments),
                end_point=_arc_points(spec, offset, np.array([length]))[0],
                end_tangent=_end_tangent(spec),
            )
        )

    ys = [spec.row_offset(i) for i in range(spec.num_rows)]
    y_lo = min(ys) - spec.row_spacing / 2.0
    y_hi = max(ys) + spec.row_spacing / 2.0
    area = length * (y_hi - y_lo)
    if spec.weed_density > 0 and area > 0:
        count = int(rng.poisson(spec.weed_density * area))
        wx = rng.uniform(0.0, length, size=count)
        wy = rng.uniform(y_lo, y_hi, size=count)
        wr = rng.integers(2, 11, size=count).astype(np.float64)
        weeds = np.column_stack([wx, wy, wr])
    else:
        weeds = np.zeros((0, 3))

    return Field(spec=spec, rows=tuple(rows), weeds=weeds)


class _CameraFrame:
    """Precomputed world-to-image transform for one robot pose."""

    def __init__(self, pose, cam: CameraSpec):
        self.cam = cam
        self.cos_t = math.cos(pose.theta)
        self.sin_t = math.sin(pose.theta)
        self.px = pose.x
        self.py = pose.y
        tilt = math.radians(cam.tilt_deg)
        self.sin_tilt = math.sin(tilt)
        self.cos_tilt = math.cos(tilt)

    def to_camera(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        dx = pts[:, 0] - self.px
        dy = pts[:, 1] - self.py
        fwd = self.cos_t * dx + self.sin_t * dy
        left = -self.sin_t * dx + self.cos_t * dy
        x_cam = -left
        y_cam = self.cam.height_m * self.cos_tilt - fwd * self.sin_tilt
        z_cam = self.cam.height_m * self.sin_tilt + fwd * self.cos_tilt
        return x_cam, y_cam, z_cam

    def project(self, x_cam, y_cam, z_cam) -> tuple[np.ndarray, np.ndarray]:
        u = self.cam.cx + self.cam.focal_px * x_cam / z_cam
        v = self.cam.cy + self.cam.focal_px * y_cam / z_cam
        return u, v


def _draw_polyline(canvas, frame: _CameraFrame, pts: np.ndarray, width: int) -> None:
    x, y, z = frame.to_camera(pts)
    for i in range(len(pts) - 1):
        z0, z1 = z[i], z[i + 1]
        if z0 < Z_NEAR and z1 < Z_NEAR:
            continue
        p0 = np.array([x[i], y[i], z0])
        p1 = np.array([x[i + 1], y[i + 1], z1])
        if z0 < Z_NEAR:
            t = (Z_NEAR - z0) / (z1 - z0)
            p0 = p0 + t * (p1 - p0)
        elif z1 < Z_NEAR:
            t = (Z_NEAR - z1) / (z0 - z1)
            p1 = p1 + t * (p0 - p1)
        u0, v0 = frame.project(p0[0], p0[1], p0[2])
        u1, v1 = frame.project(p1[0], p1[1], p1[2])
        if not (np.isfinite(u0) and np.isfinite(v0) and np.isfinite(u1) and np.isfinite(v1)):
            continue
        cv2.line(
            canvas,
            (int(round(u0 * 16)), int(round(v0 * 16))),
            (int(round(u1 * 16)), int(round(v1 * 16))),
            1,
            thickness=width,
            lineType=cv2.LINE_8,
            shift=4,
        )


def _interp_u_at_v(u: np.ndarray, v: np.ndarray, v_query: float) -> float:
    """Piecewise-linear u(v) with straight-line extrapolation past the ends."""
    order = np.argsort(v)
    v_s, u_s = v[order], u[order]
    if v_query <= v_s[0]:
        i0, i1 = 0, 1
    elif v_query >= v_s[-1]:
        i0, i1 = len(v_s) - 2, len(v_s) - 1
    else:
        i1 = int(np.searchsorted(v_s, v_query))
        i0 = i1 - 1
    dv = v_s[i1] - v_s[i0]
    if abs(dv) < 1e-12:
        return float(u_s[i0])
    t = (v_query - v_s[i0]) / dv
    return float(u_s[i0] + t * (u_s[i1] - u_s[i0]))


def _row_trace(frame: _CameraFrame, row: RowGeometry) -> tuple[np.ndarray, np.ndarray] | None:
    x, y, z = frame.to_camera(row.centerline)
    vis = z >= Z_NEAR
    if vis.sum() < 2:
        return None
    u, v = frame.project(x[vis], y[vis], z[vis])
    return u, v


def ground_truth(field: Field, pose, cam: CameraSpec) -> GroundTruthRow:
    """Analytic top/bottom-edge intersections for the row nearest image centre."""
    frame = _CameraFrame(pose, cam)
    best = None
    best_dist = math.inf
    for row in field.rows:
        trace = _row_trace(frame, row)
        if trace is None:
            continue
        u, v = trace
        u_bottom = _interp_u_at_v(u, v, cam.image_h - 1.0)
        if not math.isfinite(u_bottom):
            continue
        dist = abs(u_bottom - cam.cx)
        if dist < best_dist:
            best_dist = dist
            best = (row, u, v, u_bottom)

    if best is None:
        return GroundTruthRow(None, None, False, None)

    row, u, v, u_bottom = best
    anchor_u = _interp_u_at_v(u, v, 0.0)
    eor_y = None
    xe, ye, ze = frame.to_camera(row.end_point[None, :])
    if ze[0] >= Z_NEAR:
        _, v_end = frame.project(xe[0], ye[0], ze[0])
        if 0.0 <= float(v_end) < cam.image_h:
            eor_y = float(v_end)
    return GroundTruthRow(
        anchor_x_gt=float(anchor_u),
        pr_x_gt=float(u_bottom),
        visible=True,
        eor_y_gt=eor_y,
    )


def nearest_row_index(field: Field, x: float, y: float) -> int:
    """Row whose sampled centerline passes closest to (x, y)."""
    best_i, best_d = 0, math.inf
    p = np.array([x, y])
    for i, row in enumerate(field.rows):
        d = float(np.min(np.linalg.norm(row.centerline - p, axis=1)))
        if d < best_d:
            best_i, best_d = i, d
    return best_i


def offset_from_row(row: RowGeometry, x: float, y: float) -> float:
    """Perpendicular distance from (x, y) to the row's end-tangent line.

    Measures how far the robot sits from the row centerline extension,
    which is the relevant offset once the robot has driven past the end.
    """
    rel = np.array([x, y]) - row.end_point
    tx, ty = row.end_tangent
    return abs(tx * rel[1] - ty * rel[0])


def render_mask(field: Field, pose, cam: CameraSpec) -> tuple[Mask, GroundTruthRow]:
    """Rasterize the field for one camera pose; also returns ground truth."""
    frame = _CameraFrame(pose, cam)
    canvas = np.zeros((cam.image_h, cam.image_w), dtype=np.uint8)

    for row in field.rows:
        for seg in row.segments:
            _draw_polyline(canvas, frame, seg.points, seg.width_px)

    if len(field.weeds):
        wx, wy, wz = frame.to_camera(field.weeds[:, :2])
        u, v = frame.project(wx, wy, wz)
        for j in range(len(field.weeds)):
            if wz[j] < Z_NEAR:
                continue
            if not (np.isfinite(u[j]) and np.isfinite(v[j])):
                continue
            r = field.weeds[j, 2]
            if u[j] < -4 * cam.image_w or u[j] > 5 * cam.image_w:
                continue
            if v[j] < -4 * cam.image_h or v[j] > 5 * cam.image_h:
                continue
            cv2.circle(
                canvas,
                (int(round(u[j] * 16)), int(round(v[j] * 16))),
                int(round(r * 16)),
                1,
                thickness=-1,
                lineType=cv2.LINE_8,
                shift=4,
            )

    return Mask(canvas), ground_truth(field, pose, cam)

"""Box-filter keypoint detection, Haar descriptors, matching and the
weighted-centroid scale pre-estimation.

Everything runs on an integral image so detection and description cost a
constant number of table lookups per sample regardless of filter size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .media import rect_sum

# filter side lengths per octave; scale = 1.2 * size / 9
_OCTAVES = ((9, 15, 21, 27), (15, 27, 39, 51), (27, 51, 75, 99))

DESCRIPTOR_DIM = 64


@dataclass
class Keypoint:
    x: float
    y: float
    scale: float
    response: float
    orientation: float = 0.0
    orientation_valid: bool = True


@dataclass
class MatchPairs:
    """One-to-one matches between a previous and a latter keypoint set."""

    pairs: list[tuple[int, int, float]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.pairs)


def _box(ii: np.ndarray, row, col, nrows: int, ncols: int):
    return rect_sum(ii, row, col, row + nrows, col + ncols)


def _hessian_det(ii: np.ndarray, size: int) -> np.ndarray:
    """Approximated det(Hessian) response of one box-filter size, full grid."""
    h, w = ii.shape[0] - 1, ii.shape[1] - 1
    lobe = size // 3
    b = (size - 1) // 2
    inv = 1.0 / (size * size)

    # full-grid box sums by shifted slices of a padded integral image; the
    # padded band only feeds the border rows/cols that get zeroed below
    m = size + 1
    pad = np.pad(ii, m, mode="edge")

    def box(dr, dc, nrows, ncols):
        return (
            pad[m + dr + nrows : m + dr + nrows + h, m + dc + ncols : m + dc + ncols + w]
            - pad[m + dr : m + dr + h, m + dc + ncols : m + dc + ncols + w]
            - pad[m + dr + nrows : m + dr + nrows + h, m + dc : m + dc + w]
            + pad[m + dr : m + dr + h, m + dc : m + dc + w]
        )

    dxx = box(-lobe + 1, -b, 2 * lobe - 1, size) - 3.0 * box(
        -lobe + 1, -(lobe // 2), 2 * lobe - 1, lobe
    )
    dyy = box(-b, -lobe + 1, size, 2 * lobe - 1) - 3.0 * box(
        -(lobe // 2), -lobe + 1, lobe, 2 * lobe - 1
    )
    dxy = (
        box(-lobe, 1, lobe, lobe)
        + box(1, -lobe, lobe, lobe)
        - box(-lobe, -lobe, lobe, lobe)
        - box(1, 1, lobe, lobe)
    )
    det = (dxx * inv) * (dyy * inv) - 0.81 * (dxy * inv) ** 2

    # invalidate the band where the filter footprint leaves the image
    m = b + 1
    det[:m, :] = 0.0
    det[-m:, :] = 0.0
    det[:, :m] = 0.0
    det[:, -m:] = 0.0
    return det


def detect_keypoints(
    ii: np.ndarray, threshold: float = 1e-4, max_points: int = 200, octaves: int = 3
) -> list[Keypoint]:
    """Local maxima of the box-filter Hessian pyramid.

    Up to 3 octaves x 4 intervals, 3x3x3 non-max suppression on the middle
    intervals of each octave, strongest max_points kept. Fewer octaves trade
    the largest (costliest) filter sizes for speed.
    """
    h, w = ii.shape[0] - 1, ii.shape[1] - 1
    if h < 15 or w < 15:
        raise ValueError(f"image {h}x{w} too small for the 15px box filter")

    det_cache: dict[int, np.ndarray] = {}

    def det_of(size: int) -> np.ndarray:
        if size not in det_cache:
            det_cache[size] = _hessian_det(ii, size)
        return det_cache[size]

    found: dict[tuple[int, int, int], Keypoint] = {}
    for octave in _OCTAVES[: max(1, octaves)]:
        if octave[-1] > min(h, w):
            continue
        dets = [det_of(s) for s in octave]
        for i in (1, 2):
            d = dets[i]
            core = d[1:-1, 1:-1]
            is_max = core > threshold
            for dd in (dets[i - 1], dets[i + 1], d):
                for dy in (0, 1, 2):
                    for dx in (0, 1, 2):
                        if dd is d and dy == 1 and dx == 1:
                            continue
                        is_max &= core > dd[dy : dy + h - 2, dx : dx + w - 2]
            ys, xs = np.nonzero(is_max)
            ys += 1
            xs += 1
            size = octave[i]
            for y, x in zip(ys, xs):
                key = (int(y), int(x), size)
                if key not in found:
                    found[key] = Keypoint(
                        x=float(x), y=float(y), scale=1.2 * size / 9.0, response=float(d[y, x])
                    )
    kps = sorted(found.values(), key=lambda k: -k.response)
    return kps[:max_points]


def _haar_x(ii: np.ndarray, y, x, size: int):
    """Right-half minus left-half sum over a size x size square at (y, x)."""
    half = size // 2
    return _box(ii, y - half, x, half * 2, half) - _box(ii, y - half, x - half, half * 2, half)


def _haar_y(ii: np.ndarray, y, x, size: int):
    half = size // 2
    return _box(ii, y, x - half, half, half * 2) - _box(ii, y - half, x - half, half, half * 2)


def assign_orientation(ii: np.ndarray, kp: Keypoint) -> Keypoint:
    """Dominant direction of Haar responses in a 6-scale radius.

    A pi/3 window slides over the response angles; the longest summed
    vector wins. Keypoints whose sample ring leaves the image keep
    orientation 0 and are flagged.
    """
    h, w = ii.shape[0] - 1, ii.shape[1] - 1
    s = max(1, int(round(kp.scale)))
    grid = np.arange(-6, 7)
    gi, gj = np.meshgrid(grid, grid, indexing="ij")
    ring = (gi * gi + gj * gj) <= 36
    gi, gj = gi[ring], gj[ring]
    ys = np.rint(kp.y + gi * s).astype(np.int64)
    xs = np.rint(kp.x + gj * s).astype(np.int64)
    ok = (ys - 2 * s >= 0) & (ys + 2 * s < h) & (xs - 2 * s >= 0) & (xs + 2 * s < w)
    if not ok.any():
        kp.orientation = 0.0
        kp.orientation_valid = False
        return kp
    gi, gj, ys, xs = gi[ok], gj[ok], ys[ok], xs[ok]
    g = np.exp(-(gi * gi + gj * gj) / (2.0 * 2.5 * 2.5))
    res_x = g * _haar_x(ii, ys, xs, 4 * s)
    res_y = g * _haar_y(ii, ys, xs, 4 * s)
    angles = np.arctan2(res_y, res_x) % (2.0 * math.pi)
    best_len, best_ang = -1.0, 0.0
    for start in np.arange(0.0, 2.0 * math.pi, math.pi / 18.0):
        diff = (angles - start) % (2.0 * math.pi)
        inside = diff < math.pi / 3.0
        sx, sy = res_x[inside].sum(), res_y[inside].sum()
        ln = sx * sx + sy * sy
        if ln > best_len:
            best_len = ln
            best_ang = math.atan2(sy, sx) % (2.0 * math.pi)
    kp.orientation = float(best_ang)
    kp.orientation_valid = True
    return kp


def describe_keypoints(ii: np.ndarray, kps: list[Keypoint]) -> np.ndarray:
    """Descriptors for a whole keypoint list at once, shape (n, 64).

    Each row is 4x4 subregions x (sum dx, sum dy, sum |dx|, sum |dy|) of
    oriented Haar responses over a 20-scale window, L2-normalized. Samples
    falling outside the image read clamped (edge-replicated) sums.
    """
    n = len(kps)
    if n == 0:
        return np.zeros((0, DESCRIPTOR_DIM))
    s = np.maximum(1, np.rint([k.scale for k in kps]).astype(np.int64))[:, None, None]
    ang = np.array([k.orientation for k in kps])
    co = np.cos(ang)[:, None, None]
    si = np.sin(ang)[:, None, None]
    kx = np.array([k.x for k in kps])[:, None, None]
    ky = np.array([k.y for k in kps])[:, None, None]

    # sample offsets in keypoint-aligned units, 20x20 grid of unit steps
    u = np.arange(-10, 10) + 0.5
    uu, vv = np.meshgrid(u, u, indexing="ij")  # uu: along-orientation rows
    # rotate into image coordinates
    xi = np.rint(kx + s * (vv * co - uu * si)).astype(np.int64)
    yi = np.rint(ky + s * (vv * si + uu * co)).astype(np.int64)

    half = s  # Haar size is 2 * s
    dx = _box(ii, yi - half, xi, 2 * half, half) - _box(ii, yi - half, xi - half, 2 * half, half)
    dy = _box(ii, yi, xi - half, half, 2 * half) - _box(ii, yi - half, xi - half, half, 2 * half)
    # rotate responses back into the keypoint frame
    rdx = co * dx + si * dy
    rdy = -si * dx + co * dy
    g = np.exp(-(uu * uu + vv * vv) / (2.0 * 3.3 * 3.3))
    rdx *= g
    rdy *= g

    bx = rdx.reshape(n, 4, 5, 4, 5)
    by = rdy.reshape(n, 4, 5, 4, 5)
    desc = np.stack(
        [
            bx.sum(axis=(2, 4)),
            by.sum(axis=(2, 4)),
            np.abs(bx).sum(axis=(2, 4)),
            np.abs(by).sum(axis=(2, 4)),
        ],
        axis=-1,
    ).reshape(n, DESCRIPTOR_DIM)
    norms = np.linalg.norm(desc, axis=1, keepdims=True)
    return desc / np.where(norms > 0, norms, 1.0)


def describe_keypoint(ii: np.ndarray, kp: Keypoint) -> np.ndarray:
    """Single-keypoint convenience wrapper around describe_keypoints."""
    return describe_keypoints(ii, [kp])[0]


def detect_and_describe(
    ii: np.ndarray,
    threshold: float = 1e-4,
    max_points: int = 200,
    upright: bool = False,
    octaves: int = 3,
) -> tuple[list[Keypoint], np.ndarray]:
    """Convenience pipeline: detect, orient (unless upright), describe."""
    kps = detect_keypoints(ii, threshold, max_points, octaves)
    if not upright:
        for kp in kps:
            assign_orientation(ii, kp)
    return kps, describe_keypoints(ii, kps)


def match_keypoints(desc_prev: np.ndarray, desc_next: np.ndarray, ratio: float = 0.7) -> MatchPairs:
    """Nearest neighbor by Euclidean distance, Lowe ratio test, mutual-best
    cross-check; returns one-to-one pairs (prev index, next index, distance)."""
    m, n = len(desc_prev), len(desc_next)
    if m == 0 or n == 0:
        return MatchPairs()
    d2 = (
        (desc_prev**2).sum(axis=1)[:, None]
        + (desc_next**2).sum(axis=1)[None, :]
        - 2.0 * desc_prev @ desc_next.T
    )
    d = np.sqrt(np.maximum(d2, 0.0))

    best_fwd = d.argmin(axis=1)
    best_bwd = d.argmin(axis=0)
    pairs = []
    for i in range(m):
        j = int(best_fwd[i])
        if int(best_bwd[j]) != i:
            continue
        if n >= 2:
            row = d[i].copy()
            row[j] = np.inf
            second = row.min()
            if second <= 0 or d[i, j] >= ratio * second:
                continue
        pairs.append((i, j, float(d[i, j])))
    return MatchPairs(pairs)


def keypoint_weights(
    response: np.ndarray,
    points_xy: list[tuple[float, float]],
    origin_xy: tuple[float, float],
    cell_size: float,
    eps: float = 1e-6,
) -> np.ndarray:
    """Filter-response weight of each keypoint.

    response is the normalized response in centered layout covering the
    patch's cell grid; origin_xy is the patch's top-left pixel. Points
    outside the grid get the floor weight.
    """
    rows, cols = response.shape
    ox, oy = origin_xy
    w = np.full(len(points_xy), eps)
    for k, (x, y) in enumerate(points_xy):
        r = int((y - oy) / cell_size)
        c = int((x - ox) / cell_size)
        if 0 <= r < rows and 0 <= c < cols:
            w[k] = max(float(response[r, c]), eps)
    return w


def weighted_centroid(points_xy, weights) -> tuple[float, float]:
    """Weight-averaged position of a point set."""
    pts = np.asarray(points_xy, dtype=np.float64)
    ws = np.asarray(weights, dtype=np.float64)
    if pts.size == 0:
        raise ValueError("empty point list")
    total = ws.sum()
    if total <= 0:
        raise ValueError("weights must sum to a positive value")
    c = (pts * ws[:, None]).sum(axis=0) / total
    return float(c[0]), float(c[1])


def estimate_scale(
    m_prev: tuple[float, float],
    c_prev: tuple[float, float],
    m_next: tuple[float, float],
    c_next: tuple[float, float],
    n_matches: int = 4,
    clamp: tuple[float, float] = (0.8, 1.25),
) -> float:
    """Scale ratio of centroid-to-center distances between adjacent frames.

    Degenerate geometry (centroid on the center, or fewer than 4 matches)
    falls back to 1.0; the result is clamped so one frame can never change
    the box size by more than the clamp range.
    """
    if n_matches < 4:
        return 1.0
    dp = math.hypot(m_prev[0] - c_prev[0], m_prev[1] - c_prev[1])
    dl = math.hypot(m_next[0] - c_next[0], m_next[1] - c_next[1])
    if dp < 1.0:
        return 1.0
    return float(min(max(dl / dp, clamp[0]), clamp[1]))

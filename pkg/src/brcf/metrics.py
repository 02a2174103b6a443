"""Tracking evaluation metrics and restricted-zone alarm geometry.

Success counts frames whose overlap is strictly above a threshold and
precision counts frames whose center error is strictly below one, so ties
at a threshold count against the tracker.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boxes import BBox, center_distance, iou

SUCCESS_THRESHOLDS = tuple(round(0.05 * i, 2) for i in range(21))  # 0 .. 1
PRECISION_THRESHOLDS = tuple(range(51))  # 0 .. 50 px


@dataclass
class EvalRecord:
    """Per-frame comparison of a prediction against ground truth."""

    sequence: str
    frame: int
    pred: BBox
    truth: BBox
    elapsed_ms: float = 0.0
    iou: float = field(init=False)
    distance: float = field(init=False)

    def __post_init__(self):
        self.iou = iou(self.pred, self.truth)
        self.distance = center_distance(self.pred, self.truth)

    def to_dict(self) -> dict:
        return {
            "sequence": self.sequence,
            "frame": self.frame,
            "pred": [self.pred.cx, self.pred.cy, self.pred.w, self.pred.h],
            "truth": [self.truth.cx, self.truth.cy, self.truth.w, self.truth.h],
            "iou": self.iou,
            "distance": self.distance,
            "elapsed_ms": self.elapsed_ms,
        }


def success_curve(records, thresholds=SUCCESS_THRESHOLDS):
    """[(threshold, fraction of records with IoU > threshold)] and mean IoU."""
    if not records:
        raise ValueError("empty record set")
    ious = np.array([r.iou for r in records])
    pts = [(float(t), float((ious > t).mean())) for t in thresholds]
    return pts, float(ious.mean())


def precision_curve(records, thresholds=PRECISION_THRESHOLDS):
    """[(threshold, fraction of records with distance < threshold)] and mean distance."""
    if not records:
        raise ValueError("empty record set")
    d = np.array([r.distance for r in records])
    pts = [(float(t), float((d < t).mean())) for t in thresholds]
    return pts, float(d.mean())


def curve_average(points) -> float:
    """Mean rate over a curve's threshold grid (the usual scalar summary)."""
    return float(np.mean([rate for _, rate in points]))


@dataclass
class Zone:
    """Restricted polygon with alarm distance thresholds.

    Levels count thresholds the distance has dropped below; thresholds must
    be strictly decreasing so levels partition distance space.
    """

    vertices: list[tuple[float, float]]
    thresholds: list[float]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise ValueError("zone polygon needs at least 3 vertices")
        if any(t <= 0 for t in self.thresholds):
            raise ValueError("thresholds must be positive")
        if any(a <= b for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be strictly decreasing")
        # reject degenerate (zero-area) polygons
        area = 0.0
        n = len(self.vertices)
        for i in range(n):
            x1, y1 = self.vertices[i]
            x2, y2 = self.vertices[(i + 1) % n]
            area += x1 * y2 - x2 * y1
        if abs(area) < 1e-12:
            raise ValueError("degenerate polygon")

    @property
    def max_level(self) -> int:
        return len(self.thresholds)


def parse_zone(line: str) -> Zone:
    """One polygon per line: ``x1,y1 x2,y2 ... | t1,t2,...,tL``."""
    poly_s, _, thr_s = line.partition("|")
    verts = []
    for tok in poly_s.split():
        xs, ys = tok.split(",")
        verts.append((float(xs), float(ys)))
    thresholds = [float(t) for t in thr_s.split(",") if t.strip()]
    return Zone(verts, thresholds)


def load_zones(path: str) -> list[Zone]:
    zones = []
    with open(path) as f:
        for line in f:
            line = line.split("#", 1)[0].strip()
            if line:
                zones.append(parse_zone(line))
    return zones


def _point_in_polygon(x: float, y: float, verts) -> bool:
    inside = False
    n = len(verts)
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) / (y2 - y1) * (x2 - x1)
            if x < xc:
                inside = not inside
    return inside


def _seg_point_dist(px, py, ax, ay, bx, by) -> float:
    vx, vy = bx - ax, by - ay
    ln2 = vx * vx + vy * vy
    if ln2 == 0:
        return math.hypot(px - ax, py - ay)
    t = max(0.0, min(1.0, ((px - ax) * vx + (py - ay) * vy) / ln2))
    return math.hypot(px - (ax + t * vx), py - (ay + t * vy))


def _segments_intersect(p1, p2, p3, p4) -> bool:
    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    d1 = cross(p3, p4, p1)
    d2 = cross(p3, p4, p2)
    d3 = cross(p1, p2, p3)
    d4 = cross(p1, p2, p4)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True

    def on_seg(a, b, c):
        return (
            min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])
        )

    for d, a, b, c in ((d1, p3, p4, p1), (d2, p3, p4, p2), (d3, p1, p2, p3), (d4, p1, p2, p4)):
        if d == 0 and on_seg(a, b, c):
            return True
    return False


def _seg_seg_dist(p1, p2, p3, p4) -> float:
    if _segments_intersect(p1, p2, p3, p4):
        return 0.0
    return min(
        _seg_point_dist(*p1, *p3, *p4),
        _seg_point_dist(*p2, *p3, *p4),
        _seg_point_dist(*p3, *p1, *p2),
        _seg_point_dist(*p4, *p1, *p2),
    )


def zone_distance(box: BBox, zone: Zone) -> float:
    """Nearest distance from the box to the zone boundary, 0 on contact.

    Contact means the rectangle overlaps or contains part of the polygon,
    or sits fully inside it.
    """
    corners = [(box.x1, box.y1), (box.x2, box.y1), (box.x2, box.y2), (box.x1, box.y2)]
    verts = zone.vertices
    if any(_point_in_polygon(x, y, verts) for x, y in corners):
        return 0.0
    if any(box.x1 <= x <= box.x2 and box.y1 <= y <= box.y2 for x, y in verts):
        return 0.0
    rect_edges = [(corners[i], corners[(i + 1) % 4]) for i in range(4)]
    n = len(verts)
    poly_edges = [(verts[i], verts[(i + 1) % n]) for i in range(n)]
    best = math.inf
    for r1, r2 in rect_edges:
        for q1, q2 in poly_edges:
            best = min(best, _seg_seg_dist(r1, r2, q1, q2))
            if best == 0.0:
                return 0.0
    return best


def zone_alarm(distance: float, zone: Zone) -> int:
    """Alarm level: how many thresholds the distance is strictly below."""
    if distance < 0:
        raise ValueError("distance must be >= 0")
    return sum(1 for t in zone.thresholds if distance < t)

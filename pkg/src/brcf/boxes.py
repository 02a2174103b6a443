"""Axis-aligned bounding boxes in center form and the metrics defined on them."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BBox:
    """Box as (center x, center y, width, height) in pixels."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box dimensions must be positive, got w={self.w}, h={self.h}")
        if not all(math.isfinite(v) for v in (self.cx, self.cy, self.w, self.h)):
            raise ValueError("box fields must be finite")

    @property
    def x1(self) -> float:
        return self.cx - self.w / 2.0

    @property
    def y1(self) -> float:
        return self.cy - self.h / 2.0

    @property
    def x2(self) -> float:
        return self.cx + self.w / 2.0

    @property
    def y2(self) -> float:
        return self.cy + self.h / 2.0

    @classmethod
    def from_corner(cls, x: float, y: float, w: float, h: float) -> "BBox":
        """Build from top-left corner form (the ground-truth file convention)."""
        return cls(x + w / 2.0, y + h / 2.0, float(w), float(h))

    def to_corner(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.w, self.h)

    def scaled(self, s: float) -> "BBox":
        """Same center, width and height multiplied by s."""
        return BBox(self.cx, self.cy, self.w * s, self.h * s)

    def shifted(self, dx: float, dy: float) -> "BBox":
        return BBox(self.cx + dx, self.cy + dy, self.w, self.h)

    def clamped_center(self, frame_w: int, frame_h: int) -> "BBox":
        """Clamp the center into the frame, keeping the size."""
        cx = min(max(self.cx, 0.0), frame_w - 1.0)
        cy = min(max(self.cy, 0.0), frame_h - 1.0)
        return BBox(cx, cy, self.w, self.h)


def iou(a: BBox, b: BBox) -> float:
    """Intersection area over union area, in [0, 1]."""
    ix = min(a.x2, b.x2) - max(a.x1, b.x1)
    iy = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    union = a.w * a.h + b.w * b.h - inter
    return inter / union


def center_distance(a: BBox, b: BBox) -> float:
    """Euclidean distance between box centers in pixels."""
    return math.hypot(a.cx - b.cx, a.cy - b.cy)

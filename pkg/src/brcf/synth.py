"""Deterministic synthetic sequences with analytic ground truth.

A textured rectangle moves and scales over a textured background following
a fixed per-frame schedule; (spec, seed) reproduce frames bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from .boxes import BBox


@dataclass
class MotionSpec:
    frame_w: int = 320
    frame_h: int = 240
    n_frames: int = 100
    start: BBox = None  # type: ignore[assignment]
    velocity: tuple[float, float] = (0.0, 0.0)  # px/frame
    scale_rate: float = 1.0  # multiplicative, per frame
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.start is None:
            self.start = BBox(self.frame_w / 4.0, self.frame_h / 2.0, 40, 40)


def ground_truth(spec: MotionSpec) -> list[BBox]:
    """Analytic per-frame boxes of the motion program."""
    out = []
    for t in range(spec.n_frames):
        s = spec.scale_rate**t
        b = BBox(
            spec.start.cx + spec.velocity[0] * t,
            spec.start.cy + spec.velocity[1] * t,
            spec.start.w * s,
            spec.start.h * s,
        )
        if b.x1 < 0 or b.y1 < 0 or b.x2 > spec.frame_w or b.y2 > spec.frame_h:
            raise ValueError(f"target leaves the frame at t={t}: {b}")
        out.append(b)
    return out


def _textures(spec: MotionSpec) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(spec.seed)
    bg = rng.integers(60, 120, size=(spec.frame_h, spec.frame_w, 3), dtype=np.uint8)
    bg = cv2.GaussianBlur(bg, (0, 0), 3)
    # high-res target texture, resampled down to the current box size each frame
    side = int(4 * max(spec.start.w, spec.start.h) * max(spec.scale_rate, 1.0) ** spec.n_frames)
    side = min(max(side, 64), 2048)
    tex = rng.integers(0, 255, size=(side, side, 3), dtype=np.uint8)
    tex = cv2.GaussianBlur(tex, (0, 0), 1.5)
    # brighten so the target separates from the dimmer background
    tex = np.clip(tex.astype(np.int64) + 80, 0, 255).astype(np.uint8)
    return bg, tex


def synth_sequence(spec: MotionSpec):
    """Yield (frame, ground-truth box) pairs for the motion program."""
    boxes = ground_truth(spec)
    bg, tex = _textures(spec)
    noise_rng = np.random.default_rng(spec.seed + 1)
    for t, b in enumerate(boxes):
        frame = bg.copy()
        x1, y1 = int(round(b.x1)), int(round(b.y1))
        x2, y2 = int(round(b.x2)), int(round(b.y2))
        w, h = max(x2 - x1, 1), max(y2 - y1, 1)
        target = cv2.resize(tex, (w, h), interpolation=cv2.INTER_AREA)
        frame[y1 : y1 + h, x1 : x1 + w] = target
        if spec.noise_sigma > 0:
            noise = noise_rng.normal(0.0, spec.noise_sigma, size=frame.shape)
            frame = np.clip(frame.astype(np.float64) + noise, 0, 255).astype(np.uint8)
        yield frame, b

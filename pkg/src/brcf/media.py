"""Frame/sequence ingestion, patch extraction and integral images.

Frames are numpy uint8 arrays, shape (H, W, 3) for color or (H, W) for gray,
row-major, RGB channel order.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

import cv2
import numpy as np

from .boxes import BBox

# ITU-R BT.601 luminance weights, fixed for determinism.
_GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])

_IMAGE_EXTS = (".png", ".ppm", ".pgm", ".jpg", ".jpeg", ".bmp")


@dataclass
class Sequence:
    """An ordered frame list plus per-frame ground-truth boxes.

    Frames are loaded lazily by index; ground truth may cover only a prefix
    of the sequence but always includes frame 1.
    """

    frame_paths: list[str]
    ground_truth: list[BBox]
    fps: float = 25.0
    _cache: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.frame_paths)

    def frame(self, i: int) -> np.ndarray:
        img = cv2.imread(self.frame_paths[i], cv2.IMREAD_UNCHANGED)
        if img is None:
            raise IOError(f"cannot read frame {self.frame_paths[i]}")
        if img.ndim == 3:
            img = cv2.cvtColor(img, cv2.COLOR_BGR2RGB)
        return img

    def frames(self):
        for i in range(len(self)):
            yield self.frame(i)


@dataclass
class Patch:
    """A padded crop around a target box.

    pixels has shape (TH + 2P, TW + 2P[, 3]); (ox, oy) is the frame
    coordinate of the patch's top-left pixel (may be negative when the
    window leaves the frame and edge replication kicks in).
    """

    pixels: np.ndarray
    ox: int
    oy: int
    box: BBox
    padding: int

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def load_sequence(path: str) -> Sequence:
    """Load a sequence directory: img/ with numbered frames + groundtruth_rect.txt.

    Ground-truth lines are comma-separated ``x,y,w,h`` with (x, y) the
    top-left corner; they are converted to center form.
    """
    if not os.path.isdir(path):
        raise FileNotFoundError(f"sequence directory not found: {path}")
    img_dir = os.path.join(path, "img")
    if not os.path.isdir(img_dir):
        img_dir = path
    names = sorted(n for n in os.listdir(img_dir) if n.lower().endswith(_IMAGE_EXTS))
    if not names:
        raise FileNotFoundError(f"no frames found under {img_dir}")
    frame_paths = [os.path.join(img_dir, n) for n in names]

    gt_path = os.path.join(path, "groundtruth_rect.txt")
    if not os.path.isfile(gt_path):
        raise FileNotFoundError(f"missing ground truth: {gt_path}")
    boxes = []
    with open(gt_path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            parts = [float(v) for v in re.split(r"[,\s\t]+", line)]
            if len(parts) != 4:
                raise ValueError(f"unparsable ground-truth line: {line!r}")
            boxes.append(BBox.from_corner(*parts))
    if not boxes:
        raise ValueError("ground-truth file has no boxes; frame 1 must be annotated")
    if len(boxes) > len(frame_paths):
        raise ValueError("more ground-truth boxes than frames")

    seq = Sequence(frame_paths=frame_paths, ground_truth=boxes)
    first = seq.frame(0)
    h, w = first.shape[:2]
    b = boxes[0]
    if b.cx < 0 or b.cy < 0 or b.cx >= w or b.cy >= h:
        raise ValueError(f"frame-1 box center {b.cx, b.cy} outside {w}x{h} frame")
    return seq


def to_grayscale(frame: np.ndarray) -> np.ndarray:
    """BT.601 luminance, rounded to uint8. Gray input is returned unchanged."""
    if frame.ndim == 2:
        return frame
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) frame, got shape {frame.shape}")
    lum = frame.astype(np.float64) @ _GRAY_WEIGHTS
    return np.rint(lum).astype(np.uint8)


def extract_patch(frame: np.ndarray, box: BBox, padding: int) -> Patch:
    """Crop a (TH+2P) x (TW+2P) window centered on the box.

    Out-of-frame pixels are filled by edge replication so that border
    cells see no artificial gradients.
    """
    if box.w < 1 or box.h < 1:
        raise ValueError("box dimensions must be >= 1 pixel")
    if padding < 0:
        raise ValueError("padding must be >= 0")
    tw, th = int(round(box.w)), int(round(box.h))
    w, h = tw + 2 * padding, th + 2 * padding
    ox = int(round(box.cx)) - w // 2
    oy = int(round(box.cy)) - h // 2

    fh, fw = frame.shape[:2]
    xs = np.clip(np.arange(ox, ox + w), 0, fw - 1)
    ys = np.clip(np.arange(oy, oy + h), 0, fh - 1)
    pixels = frame[np.ix_(ys, xs)]
    return Patch(pixels=np.ascontiguousarray(pixels), ox=ox, oy=oy, box=box, padding=padding)


def default_padding(box: BBox) -> int:
    """Search-window padding: ~2.5x the target's linear size overall."""
    return max(1, int(round(0.75 * np.sqrt(box.w * box.h))))


def integral_image(gray: np.ndarray) -> np.ndarray:
    """(H+1) x (W+1) cumulative-sum table; row 0 and column 0 are zero."""
    if gray.ndim != 2:
        raise ValueError("integral image needs a single-channel input")
    ii = np.zeros((gray.shape[0] + 1, gray.shape[1] + 1), dtype=np.float64)
    np.cumsum(np.cumsum(gray, axis=0, dtype=np.float64), axis=1, out=ii[1:, 1:])
    return ii


def rect_sum(ii: np.ndarray, y1, x1, y2, x2):
    """Sum of pixels in rows [y1, y2) x cols [x1, x2) via 4 lookups.

    Accepts scalars or equal-shaped index arrays (clipped to the table).
    """
    h, w = ii.shape
    y1 = np.clip(y1, 0, h - 1)
    y2 = np.clip(y2, 0, h - 1)
    x1 = np.clip(x1, 0, w - 1)
    x2 = np.clip(x2, 0, w - 1)
    return ii[y2, x2] - ii[y1, x2] - ii[y2, x1] + ii[y1, x1]

"""Linear bounding-box regressor over HOG features of a canonical patch.

Four independent ridge regressions (center x/y offsets normalized by box
size, log width/height ratios) solved by batch gradient descent; trained
offline on jittered samples and fine-tuned on the first frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import cv2
import numpy as np

from .boxes import BBox, iou
from .features import fhog
from .media import extract_patch

WEIGHTS_HEADER = "BRCF-REG-1"

CANONICAL_SIZE = 64  # sample boxes are resized to this square before HOG
_LOG_CLAMP = 0.4  # bound on the log-scale outputs before exp


def regression_targets(s: BBox, r: BBox) -> tuple[float, float, float, float]:
    """Size-normalized offsets and log size ratios from sample box S to real box R."""
    return (
        (r.cx - s.cx) / s.w,
        (r.cy - s.cy) / s.h,
        math.log(r.w / s.w),
        math.log(r.h / s.h),
    )


def apply_targets(s: BBox, t: tuple[float, float, float, float]) -> BBox:
    """Inverse of regression_targets: move/resize S by the target tuple."""
    tx, ty, tw, th = t
    return BBox(s.cx + tx * s.w, s.cy + ty * s.h, s.w * math.exp(tw), s.h * math.exp(th))


def sample_training_boxes(
    r: BBox, n: int, iou_min: float = 0.6, rng: np.random.Generator | None = None
) -> list[BBox]:
    """Jittered boxes around R with IoU >= iou_min, deterministic given the rng."""
    if rng is None:
        rng = np.random.default_rng(0)
    out: list[BBox] = []
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 200 * n:
            raise RuntimeError(f"rejection sampling failed for box {r} at iou_min={iou_min}")
        dx = rng.uniform(-0.15, 0.15) * r.w
        dy = rng.uniform(-0.15, 0.15) * r.h
        sw = r.w * rng.uniform(0.85, 1.18)
        sh = r.h * rng.uniform(0.85, 1.18)
        s = BBox(r.cx + dx, r.cy + dy, sw, sh)
        if iou(s, r) >= iou_min:
            out.append(s)
    return out


def box_features(frame: np.ndarray, box: BBox, cell_size: int = 8) -> np.ndarray:
    """Flattened HOG of the box's crop resized to the canonical square."""
    patch = extract_patch(frame, box, padding=0).pixels
    patch = cv2.resize(patch, (CANONICAL_SIZE, CANONICAL_SIZE), interpolation=cv2.INTER_LINEAR)
    return fhog(patch, cell_size).ravel()


@dataclass
class RegressorWeights:
    """The four weight vectors plus the feature standardization statistics."""

    w_x: np.ndarray
    w_y: np.ndarray
    w_w: np.ndarray
    w_h: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    lam: float = 1.0

    @property
    def dim(self) -> int:
        return self.w_x.size

    def standardize(self, f: np.ndarray) -> np.ndarray:
        return (f - self.mean) / self.std

    @classmethod
    def zeros(cls, dim: int) -> "RegressorWeights":
        z = np.zeros(dim)
        return cls(z.copy(), z.copy(), z.copy(), z.copy(), np.zeros(dim), np.ones(dim))


@dataclass
class TrainingPair:
    sample: BBox
    truth: BBox
    feature: np.ndarray
    targets: tuple[float, float, float, float] = field(init=False)

    def __post_init__(self):
        self.targets = regression_targets(self.sample, self.truth)


def train_regressor(
    pairs: list[TrainingPair],
    lam: float = 1.0,
    lr: float | None = None,
    iters: int = 500,
    warm_start: RegressorWeights | None = None,
) -> RegressorWeights:
    """Batch gradient descent on the four ridge problems from zero init.

    Features are standardized per dimension (statistics stored with the
    weights). lr=None picks a step below the Hessian spectral bound
    2*(sigma_max(F)^2 + lam), which guarantees descent. Raises if the loss
    increases for 10 straight iterations, a sign the learning rate is too
    large.
    """
    if not pairs:
        raise ValueError("need at least one training pair")
    if lr is not None and lr <= 0:
        raise ValueError("lr must be > 0")
    F_raw = np.stack([p.feature for p in pairs])
    if warm_start is not None:
        mean, std = warm_start.mean, warm_start.std
    else:
        mean = F_raw.mean(axis=0)
        std = F_raw.std(axis=0)
        std[std < 1e-8] = 1.0
    F = (F_raw - mean) / std
    T = np.array([p.targets for p in pairs])  # (n, 4)
    if lr is None:
        gram = F @ F.T  # n x n, cheap for the small sample counts used here
        sigma2 = float(np.linalg.eigvalsh(gram)[-1])
        lr = 0.9 / (2.0 * (sigma2 + lam))

    W = np.zeros((F.shape[1], 4))
    if warm_start is not None:
        W = np.stack([warm_start.w_x, warm_start.w_y, warm_start.w_w, warm_start.w_h], axis=1)
    prev_loss = np.inf
    rising = 0
    for _ in range(iters):
        pred = F @ W
        err = pred - T
        grad = 2.0 * F.T @ err + 2.0 * lam * W
        W -= lr * grad
        loss = float((err * err).sum() + lam * (W * W).sum())
        if loss > prev_loss:
            rising += 1
            if rising >= 10:
                raise RuntimeError("BGD diverging; lower the learning rate")
        else:
            rising = 0
        prev_loss = loss
    return RegressorWeights(W[:, 0], W[:, 1], W[:, 2], W[:, 3], mean, std, lam)


def predict_deltas(weights: RegressorWeights, feature: np.ndarray) -> tuple[float, float, float, float]:
    """Raw regressor outputs (sigma_x, sigma_y, sigma_w, sigma_h) for one feature."""
    if feature.size != weights.dim:
        raise ValueError(f"feature length {feature.size} != weight length {weights.dim}")
    f = weights.standardize(feature)
    return (
        float(weights.w_x @ f),
        float(weights.w_y @ f),
        float(weights.w_w @ f),
        float(weights.w_h @ f),
    )


def apply_regressor(
    weights: RegressorWeights,
    feature: np.ndarray,
    p_pre: BBox,
    literal_form: bool = False,
) -> BBox:
    """Refine a pre-estimated box by the regressor outputs.

    Default form inverts the training targets: offsets scale with box
    width/height. The literal form that multiplies the offsets by the
    center coordinates instead is kept behind a flag for comparison.
    """
    sx, sy, sw, sh = predict_deltas(weights, feature)
    sw = min(max(sw, -_LOG_CLAMP), _LOG_CLAMP)
    sh = min(max(sh, -_LOG_CLAMP), _LOG_CLAMP)
    if literal_form:
        return BBox(
            p_pre.cx + sx * p_pre.cx,
            p_pre.cy + sy * p_pre.cy,
            p_pre.w * math.exp(sw),
            p_pre.h * math.exp(sh),
        )
    return BBox(
        p_pre.cx + sx * p_pre.w,
        p_pre.cy + sy * p_pre.h,
        p_pre.w * math.exp(sw),
        p_pre.h * math.exp(sh),
    )


def save_regressor(weights: RegressorWeights, path: str) -> None:
    """Versioned text format: header, dim/lambda, then the six vectors."""
    with open(path, "w") as f:
        f.write(f"{WEIGHTS_HEADER}\n")
        f.write(f"{weights.dim} {weights.lam}\n")
        for v in (weights.mean, weights.std, weights.w_x, weights.w_y, weights.w_w, weights.w_h):
            f.write(" ".join(repr(float(x)) for x in v) + "\n")


def load_regressor(path: str) -> RegressorWeights:
    with open(path) as f:
        header = f.readline().strip()
        if header != WEIGHTS_HEADER:
            raise ValueError(f"bad weights file header {header!r}, expected {WEIGHTS_HEADER!r}")
        dim_s, lam_s = f.readline().split()
        dim = int(dim_s)
        vecs = []
        for _ in range(6):
            v = np.array([float(x) for x in f.readline().split()])
            if v.size != dim:
                raise ValueError("weight vector length does not match header dim")
            vecs.append(v)
    mean, std, wx, wy, ww, wh = vecs
    return RegressorWeights(wx, wy, ww, wh, mean, std, float(lam_s))

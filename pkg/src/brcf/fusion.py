"""Self-selective fusion of the three sub-model responses.

Each response is scored by how far it strays from an ideal Gaussian bump at
its own peak (KL divergence); per-frame weights are inverse to that score
and smoothed over time so one bad frame cannot drift the ensemble.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_EPS_NORM = 1e-8  # additive floor before sum-normalizing a response
KL_FLOOR = 1e-6  # avoids 1/KL blow-up when a sub-model is near-perfect


def normalize_response(resp: np.ndarray) -> np.ndarray:
    """Shift to nonnegative, add a small floor, normalize to a distribution."""
    p = resp - resp.min() + _EPS_NORM
    return p / p.sum()


def ideal_response(peak: tuple[int, int], rows: int, cols: int, sigma: float) -> np.ndarray:
    """Gaussian bump at the given (row, col) peak, circular, normalized to sum 1."""
    py, px = peak
    if not (0 <= py < rows and 0 <= px < cols):
        raise ValueError(f"peak {peak} outside {rows}x{cols} grid")
    # circular distance of each index to the peak
    ddy = np.abs((np.arange(rows) - py + rows // 2) % rows - rows // 2)[:, None]
    ddx = np.abs((np.arange(cols) - px + cols // 2) % cols - cols // 2)[None, :]
    g = np.exp(-(ddx * ddx + ddy * ddy) / (2.0 * sigma * sigma)) + _EPS_NORM
    return g / g.sum()


def kl_divergence(r: np.ndarray, r_pred: np.ndarray) -> float:
    """KL(R || R_pred) with natural log; both must be strictly positive."""
    if r.shape != r_pred.shape:
        raise ValueError(f"shape mismatch: {r.shape} vs {r_pred.shape}")
    return float((r * np.log(r / r_pred)).sum())


def compute_frame_weights(kl_hog: float, kl_ch: float, kl_lh: float) -> tuple[float, float, float]:
    """Per-frame reliabilities: inverse-KL, normalized to sum 1."""
    inv = np.array([1.0 / max(k, KL_FLOOR) for k in (kl_hog, kl_ch, kl_lh)])
    eta = inv / inv.sum()
    return float(eta[0]), float(eta[1]), float(eta[2])


@dataclass
class FusionWeights:
    """Smoothed sub-model weights (HOG, CH, LH); they always sum to 1."""

    hog: float = 1.0 / 3.0
    ch: float = 1.0 / 3.0
    lh: float = 1.0 / 3.0
    frame: int = 0

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.hog, self.ch, self.lh)


def update_weights(w: FusionWeights, eta: tuple[float, float, float], lam_w: float) -> FusionWeights:
    """Exponential smoothing of the fusion weights; the first frame adopts
    eta outright."""
    if not 0.0 <= lam_w <= 1.0:
        raise ValueError("lam_w must be in [0, 1]")
    if w.frame == 0:
        return FusionWeights(*eta, frame=1)
    new = tuple((1.0 - lam_w) * a + lam_w * e for a, e in zip(w.as_tuple(), eta))
    return FusionWeights(*new, frame=w.frame + 1)


def fuse_responses(
    r_hog: np.ndarray, r_ch: np.ndarray, r_lh: np.ndarray, w: FusionWeights
) -> np.ndarray:
    """Element-wise weighted sum of the three raw responses."""
    if not (r_hog.shape == r_ch.shape == r_lh.shape):
        raise ValueError("response dimensions differ")
    return w.hog * r_hog + w.ch * r_ch + w.lh * r_lh

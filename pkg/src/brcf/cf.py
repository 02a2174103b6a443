"""Kernelized correlation-filter engine.

Feature maps are float64 arrays of shape (rows, cols, channels) or
(rows, cols). Label and kernel maps use wrap-around layout: the zero-shift
entry sits at index (0, 0) and negative shifts wrap to the high end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def circular_offsets(n: int) -> np.ndarray:
    """Signed shift offset of each index in wrap-around layout."""
    d = np.arange(n)
    return (d + n // 2) % n - n // 2


def gaussian_label(rows: int, cols: int, sigma: float) -> np.ndarray:
    """Gaussian regression target over circular shifts, peak 1 at zero shift."""
    if rows < 1 or cols < 1 or sigma <= 0:
        raise ValueError("need rows, cols >= 1 and sigma > 0")
    dy = circular_offsets(rows)[:, None]
    dx = circular_offsets(cols)[None, :]
    return np.exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma))


def apply_local_region_mask(m: np.ndarray, p_cells: int) -> np.ndarray:
    """Zero every entry whose circular shift offset lies outside [-P, P].

    This restricts training to the hard shifts near the target, discarding
    the wrapped samples that split the target across the patch edge.
    """
    rows, cols = m.shape[:2]
    if 2 * p_cells + 1 > min(rows, cols):
        raise ValueError(f"local region P={p_cells} does not fit a {rows}x{cols} map")
    keep_y = np.abs(circular_offsets(rows)) <= p_cells
    keep_x = np.abs(circular_offsets(cols)) <= p_cells
    return m * (keep_y[:, None] & keep_x[None, :])


def _as3d(x: np.ndarray) -> np.ndarray:
    return x[:, :, None] if x.ndim == 2 else x


def kernel_correlation(x: np.ndarray, z: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian kernel map k[i] = kappa(x, cshift(z, i)) over all 2D shifts.

    Computed with per-channel FFTs; equals exp(-||x - cshift(z, i)||^2 /
    (sigma^2 * N)) with N the total element count.
    """
    if x.shape != z.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {z.shape}")
    x3, z3 = _as3d(x), _as3d(z)
    xf = np.fft.fft2(x3, axes=(0, 1))
    zf = np.fft.fft2(z3, axes=(0, 1))
    corr = np.fft.ifft2((xf * np.conj(zf)).sum(axis=2)).real
    n = x3.size
    d = (x3 * x3).sum() + (z3 * z3).sum() - 2.0 * corr
    return np.exp(-np.maximum(d, 0.0) / (sigma * sigma * n))


@dataclass
class FilterModel:
    """One trained sub-model: dual parameters in the frequency domain plus
    the spatial template it correlates against."""

    c_hat: np.ndarray  # complex (rows, cols)
    template: np.ndarray  # float (rows, cols[, channels])
    label: np.ndarray  # float (rows, cols), already masked
    lam: float
    sigma_k: float
    p_cells: int

    @property
    def grid(self) -> tuple[int, int]:
        return self.c_hat.shape


def train_filter(
    x: np.ndarray,
    label: np.ndarray,
    lam: float,
    sigma_k: float,
    p_cells: int | None = None,
) -> FilterModel:
    """Frequency-domain ridge regression: c_hat = y_hat / (kxx_hat + lam).

    When p_cells is given, both the self-correlation kernel map and the
    label are zeroed outside the [-P, P] shift window before transforming.
    """
    if lam <= 0:
        raise ValueError("lam must be > 0")
    kxx = kernel_correlation(x, x, sigma_k)
    y = label
    if p_cells is not None:
        kxx = apply_local_region_mask(kxx, p_cells)
        y = apply_local_region_mask(y, p_cells)
    c_hat = np.fft.fft2(y) / (np.fft.fft2(kxx) + lam)
    return FilterModel(
        c_hat=c_hat,
        template=x.copy(),
        label=y,
        lam=lam,
        sigma_k=sigma_k,
        p_cells=p_cells if p_cells is not None else max(y.shape),
    )


def detect(model: FilterModel, z: np.ndarray) -> np.ndarray:
    """Response map over circular shifts; argmax gives the translation.

    The cross-correlation kernel is restricted to the same [-P, P] shift
    window the model was trained on, so classifier parameters only ever
    meet the shifts they were fit to.
    """
    if _as3d(z).shape != _as3d(model.template).shape:
        raise ValueError(f"grid mismatch: {z.shape} vs {model.template.shape}")
    kzx = kernel_correlation(z, model.template, model.sigma_k)
    if 2 * model.p_cells + 1 <= min(kzx.shape):
        kzx = apply_local_region_mask(kzx, model.p_cells)
    return np.fft.ifft2(np.fft.fft2(kzx) * model.c_hat).real


def response_peak(resp: np.ndarray) -> tuple[int, int, float]:
    """(dy, dx, peak value) of a response map, wrap-around mapped to signed shifts."""
    idx = int(np.argmax(resp))
    py, px = np.unravel_index(idx, resp.shape)
    rows, cols = resp.shape
    dy = py - rows if py > rows // 2 else py
    dx = px - cols if px > cols // 2 else px
    return int(dy), int(dx), float(resp[py, px])


def update_model(model: FilterModel, new: FilterModel, alpha: float, first_frame: bool = False,
                 literal_additive: bool = False) -> FilterModel:
    """Running model update.

    Frame 1 replaces the model wholesale. Later frames blend the dual
    parameters and template as (1 - alpha) * old + alpha * new; the literal
    additive form old + alpha * new (which grows without bound) is kept
    behind a flag for fidelity experiments.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    if first_frame:
        return new
    if literal_additive:
        c_hat = model.c_hat + alpha * new.c_hat
        template = model.template + alpha * new.template
    else:
        c_hat = (1.0 - alpha) * model.c_hat + alpha * new.c_hat
        template = (1.0 - alpha) * model.template + alpha * new.template
    return FilterModel(
        c_hat=c_hat,
        template=template,
        label=model.label,
        lam=model.lam,
        sigma_k=model.sigma_k,
        p_cells=model.p_cells,
    )


def default_label_sigma(target_rows: float, target_cols: float) -> float:
    """Label bandwidth proportional to the target's size in cells."""
    return 0.1 * float(np.sqrt(target_rows * target_cols))

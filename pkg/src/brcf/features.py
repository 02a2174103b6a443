"""Per-cell feature extractors feeding the three correlation-filter sub-models.

All three extractors share one cell grid: a patch of H x W pixels with cell
size c yields a (H//c, W//c, channels) float64 map, so the resulting filter
responses can be fused point-wise.
"""

from __future__ import annotations

import numpy as np

FHOG_CHANNELS = 31
LBP_CHANNELS = 59

_N_SENSITIVE = 18  # contrast-sensitive orientation bins over [0, 2pi)
_TRUNCATION = 0.2
_TEXTURE_GAIN = 0.2357  # 1/sqrt(18), Felzenszwalb's texture-channel gain


def _pixel_gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference gradients; for color, the max-magnitude channel wins."""
    f = img.astype(np.float64)
    if f.ndim == 2:
        f = f[:, :, None]
    gx = np.empty_like(f)
    gy = np.empty_like(f)
    gx[:, 1:-1] = f[:, 2:] - f[:, :-2]
    gx[:, 0] = f[:, 1] - f[:, 0]
    gx[:, -1] = f[:, -1] - f[:, -2]
    gy[1:-1] = f[2:] - f[:-2]
    gy[0] = f[1] - f[0]
    gy[-1] = f[-1] - f[-2]
    mag2 = gx * gx + gy * gy
    pick = mag2.argmax(axis=2)
    ii, jj = np.indices(pick.shape)
    return gx[ii, jj, pick], gy[ii, jj, pick]


def fhog(patch: np.ndarray, cell_size: int = 4) -> np.ndarray:
    """31-channel Felzenszwalb HOG map.

    Channels 0..17 are contrast-sensitive orientations, 18..26 contrast
    insensitive, 27..30 the four normalization (texture) channels. Cells are
    block-normalized against their four diagonal 2x2 neighborhoods with
    truncation at 0.2.
    """
    h, w = patch.shape[:2]
    rows, cols = h // cell_size, w // cell_size
    if rows < 1 or cols < 1:
        raise ValueError(f"patch {h}x{w} smaller than one {cell_size}px cell")

    gx, gy = _pixel_gradients(patch)
    mag = np.hypot(gx, gy)
    ang = np.arctan2(gy, gx) % (2.0 * np.pi)
    b = np.minimum((ang / (2.0 * np.pi / _N_SENSITIVE)).astype(np.int64), _N_SENSITIVE - 1)

    # Bilinear spatial interpolation of each pixel's vote into the cell grid.
    ys, xs = np.indices((h, w))
    cy = (ys + 0.5) / cell_size - 0.5
    cx = (xs + 0.5) / cell_size - 0.5
    y0 = np.floor(cy).astype(np.int64)
    x0 = np.floor(cx).astype(np.int64)
    wy1 = cy - y0
    wx1 = cx - x0

    hist = np.zeros((rows, cols, _N_SENSITIVE))
    for dy, wyy in ((0, 1.0 - wy1), (1, wy1)):
        for dx, wxx in ((0, 1.0 - wx1), (1, wx1)):
            yy = y0 + dy
            xx = x0 + dx
            ok = (yy >= 0) & (yy < rows) & (xx >= 0) & (xx < cols)
            np.add.at(hist, (yy[ok], xx[ok], b[ok]), (mag * wyy * wxx)[ok])

    c9 = hist[:, :, :9] + hist[:, :, 9:]
    energy = (c9 * c9).sum(axis=2)
    ep = np.pad(energy, 1, mode="edge")
    out = np.zeros((rows, cols, FHOG_CHANNELS))
    # The four 2x2 block energies around each cell (diagonal neighborhoods).
    blocks = (
        ep[:-2, :-2] + ep[:-2, 1:-1] + ep[1:-1, :-2] + ep[1:-1, 1:-1],
        ep[:-2, 1:-1] + ep[:-2, 2:] + ep[1:-1, 1:-1] + ep[1:-1, 2:],
        ep[1:-1, :-2] + ep[1:-1, 1:-1] + ep[2:, :-2] + ep[2:, 1:-1],
        ep[1:-1, 1:-1] + ep[1:-1, 2:] + ep[2:, 1:-1] + ep[2:, 2:],
    )
    for k, e in enumerate(blocks):
        n = 1.0 / np.sqrt(e + 1e-10)
        hs = np.minimum(hist * n[:, :, None], _TRUNCATION)
        hi = np.minimum(c9 * n[:, :, None], _TRUNCATION)
        out[:, :, :18] += 0.5 * hs
        out[:, :, 18:27] += 0.5 * hi
        out[:, :, 27 + k] = _TEXTURE_GAIN * hs.sum(axis=2)
    return out


def color_hist(patch: np.ndarray, cell_size: int = 4, bins_per_channel: int = 4) -> np.ndarray:
    """Per-cell joint RGB histogram, bins_per_channel**3 channels, cell sums 1."""
    if patch.ndim != 3 or patch.shape[2] != 3:
        raise ValueError("color histogram needs a 3-channel patch")
    h, w = patch.shape[:2]
    rows, cols = h // cell_size, w // cell_size
    if rows < 1 or cols < 1:
        raise ValueError(f"patch {h}x{w} smaller than one {cell_size}px cell")
    b = bins_per_channel
    q = (patch.astype(np.int64) * b) // 256
    joint = (q[:, :, 0] * b + q[:, :, 1]) * b + q[:, :, 2]

    ph, pw = rows * cell_size, cols * cell_size
    joint = joint[:ph, :pw]
    cell = (np.arange(ph)[:, None] // cell_size) * cols + np.arange(pw)[None, :] // cell_size
    flat = np.bincount((cell * (b**3) + joint).ravel(), minlength=rows * cols * b**3)
    hist = flat.reshape(rows, cols, b**3).astype(np.float64)
    return hist / hist.sum(axis=2, keepdims=True)


# Uniform LBP(8,1): bit i set when the i'th clockwise neighbor >= center.
_LBP_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))


def _uniform_lbp_table() -> np.ndarray:
    """Map the 256 LBP codes to 59 bins: 58 uniform patterns + 1 catch-all."""
    table = np.full(256, LBP_CHANNELS - 1, dtype=np.int64)
    nxt = 0
    for code in range(256):
        bits = [(code >> i) & 1 for i in range(8)]
        transitions = sum(bits[i] != bits[(i + 1) % 8] for i in range(8))
        if transitions <= 2:
            table[code] = nxt
            nxt += 1
    assert nxt == 58
    return table


_LBP_TABLE = _uniform_lbp_table()


def lbp_code_of_constant() -> int:
    """The bin a constant region falls into (all neighbors >= center)."""
    return int(_LBP_TABLE[255])


def lbp_hist(patch: np.ndarray, cell_size: int = 4) -> np.ndarray:
    """Per-cell histogram of uniform LBP(8,1) codes, 59 channels, cell sums 1.

    Border pixels are skipped; a cell with no interior pixels (possible only
    for cell_size 1) gets a uniform distribution.
    """
    if patch.ndim != 2:
        raise ValueError("LBP needs a grayscale patch")
    h, w = patch.shape
    if h < 3 or w < 3:
        raise ValueError("patch smaller than 3x3")
    rows, cols = h // cell_size, w // cell_size
    if rows < 1 or cols < 1:
        raise ValueError(f"patch {h}x{w} smaller than one {cell_size}px cell")

    center = patch[1:-1, 1:-1].astype(np.int64)
    code = np.zeros_like(center)
    for bit, (dy, dx) in enumerate(_LBP_OFFSETS):
        nb = patch[1 + dy : h - 1 + dy, 1 + dx : w - 1 + dx].astype(np.int64)
        code |= (nb >= center).astype(np.int64) << bit
    bins = _LBP_TABLE[code]

    ys = np.arange(1, h - 1)[:, None] + np.zeros((1, w - 2), dtype=np.int64)
    xs = np.arange(1, w - 1)[None, :] + np.zeros((h - 2, 1), dtype=np.int64)
    cy = ys // cell_size
    cx = xs // cell_size
    ok = (cy < rows) & (cx < cols)
    cell = cy[ok] * cols + cx[ok]
    flat = np.bincount(cell * LBP_CHANNELS + bins[ok], minlength=rows * cols * LBP_CHANNELS)
    hist = flat.reshape(rows, cols, LBP_CHANNELS).astype(np.float64)
    sums = hist.sum(axis=2, keepdims=True)
    empty = sums[:, :, 0] == 0
    if empty.any():
        hist[empty] = 1.0 / LBP_CHANNELS
        sums = hist.sum(axis=2, keepdims=True)
    return hist / sums


def hann_window(rows: int, cols: int) -> np.ndarray:
    """2D cosine taper applied to feature maps before the FFT."""
    return np.outer(np.hanning(rows), np.hanning(cols))

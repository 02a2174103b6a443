"""Per-frame tracking loop: three-feature detection, KL-weighted fusion,
keypoint scale pre-estimation, box regression, and model updates.

A plain single-feature fixed-size baseline ("kcf" mode) shares the same
interface for speed/quality comparisons.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, fields, replace

import cv2
import numpy as np

from . import cf, features, fusion, keypoints, regression
from .boxes import BBox
from .media import extract_patch, integral_image, to_grayscale


class TrackingLost(Exception):
    """Raised when the tracked box collapses or otherwise becomes unusable."""


@dataclass
class TrackerConfig:
    cell_size: int = 4
    padding_factor: float = 0.75  # patch padding = factor * sqrt(w*h) pixels
    sigma_k: float = 0.5
    sigma_label_factor: float = 0.1
    lambda_: float = 1e-4
    alpha: float = 0.02
    lambda_w: float = 0.025
    p_cells: int = 0  # 0 = derive from the patch padding
    bins_per_channel: int = 4
    surf_threshold: float = 1e-5
    surf_max_points: int = 80
    surf_octaves: int = 1  # patches are small; the larger filters add little
    ratio_test: float = 0.7
    upright_keypoints: bool = True
    scale_clamp: tuple[float, float] = (0.95, 1.05)
    regressor: str = ""  # path to pre-trained weights, optional
    finetune_samples: int = 64
    finetune_iters: int = 50
    regressor_lr: float = 0.0  # 0 = auto step from the Hessian bound
    regressor_lambda: float = 1.0
    mode: str = "brcf"  # brcf | kcf
    seed: int = 0
    literal_update: bool = False  # unbounded additive model update
    literal_regressor: bool = False  # multiply offsets by center coordinates
    max_grid: int = 48  # cap on model grid cells per axis

    @classmethod
    def from_file(cls, path: str) -> "TrackerConfig":
        """Parse a ``key = value`` text file; unknown keys are rejected."""
        values = {}
        types = {f.name: f.type for f in fields(cls)}
        defaults = cls()
        with open(path) as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                key, _, raw = line.partition("=")
                key = key.strip()
                raw = raw.strip()
                if key == "lambda":
                    key = "lambda_"
                if key not in types:
                    raise ValueError(f"unknown config key {key!r}")
                cur = getattr(defaults, key)
                if isinstance(cur, bool):
                    values[key] = raw.lower() in ("1", "true", "yes", "on")
                elif isinstance(cur, int):
                    values[key] = int(raw)
                elif isinstance(cur, float):
                    values[key] = float(raw)
                elif isinstance(cur, tuple):
                    values[key] = tuple(float(v) for v in raw.split(","))
                else:
                    values[key] = raw
        return replace(defaults, **values)


@dataclass
class FrameResult:
    frame: int
    box: BBox
    kl: tuple[float, float, float]
    weights: tuple[float, float, float]
    scale: float
    deltas: tuple[float, float, float, float]
    peak: float
    elapsed_ms: float
    scale_ms: float = 0.0

    def to_dict(self) -> dict:
        return {
            "frame": self.frame,
            "box": [self.box.cx, self.box.cy, self.box.w, self.box.h],
            "kl_hog": self.kl[0],
            "kl_ch": self.kl[1],
            "kl_lh": self.kl[2],
            "w_hog": self.weights[0],
            "w_ch": self.weights[1],
            "w_lh": self.weights[2],
            "scale": self.scale,
            "deltas": list(self.deltas),
            "peak": self.peak,
            "elapsed_ms": self.elapsed_ms,
            "scale_ms": self.scale_ms,
        }


def _ensure_color(frame: np.ndarray) -> np.ndarray:
    if frame.ndim == 2:
        return np.repeat(frame[:, :, None], 3, axis=2)
    return frame


class Tracker:
    """Owns the models, fusion weights, regressor and per-frame state."""

    def __init__(self, config: TrackerConfig | None = None):
        self.cfg = config or TrackerConfig()
        if self.cfg.mode not in ("brcf", "kcf"):
            raise ValueError(f"unknown mode {self.cfg.mode!r}")
        self.rng = np.random.default_rng(self.cfg.seed)
        self.t = 0

    # -- feature plumbing ---------------------------------------------------

    def _extract_patch(self, frame: np.ndarray, box: BBox):
        pad = max(1, int(round(self.cfg.padding_factor * np.sqrt(box.w * box.h))))
        return extract_patch(frame, box, pad)

    def _resize_to_grid(self, pixels: np.ndarray) -> np.ndarray:
        return cv2.resize(pixels, (self.model_w, self.model_h), interpolation=cv2.INTER_LINEAR)

    def _feature_maps(self, pixels: np.ndarray) -> dict[str, np.ndarray]:
        color = _ensure_color(self._resize_to_grid(pixels))
        gray = to_grayscale(color)
        c = self.cfg.cell_size
        maps = {"hog": features.fhog(color, c)}
        if self.cfg.mode == "brcf":
            maps["ch"] = features.color_hist(color, c, self.cfg.bins_per_channel)
            maps["lh"] = features.lbp_hist(gray, c)
        win = self.window[:, :, None]
        # unit-RMS normalization keeps the Gaussian kernel (and lambda) in the
        # same operating regime for all three feature types
        out = {}
        for k, v in maps.items():
            rms = np.sqrt((v * v).mean())
            out[k] = (v / rms if rms > 1e-12 else v) * win
        return out

    # -- lifecycle ----------------------------------------------------------

    def init(self, frame: np.ndarray, box: BBox) -> FrameResult:
        """Train all models on the first frame; the box is ground truth here."""
        h, w = frame.shape[:2]
        if not (0 <= box.cx < w and 0 <= box.cy < h) or box.w < 2 or box.h < 2:
            raise ValueError(f"degenerate or out-of-frame initial box {box}")
        t0 = time.perf_counter()
        self.frame_shape = (h, w)
        self.box = box

        patch = self._extract_patch(frame, box)
        # freeze the model grid to the first frame's patch, capped for cost
        scale_cap = min(1.0, self.cfg.max_grid * self.cfg.cell_size / max(patch.height, patch.width))
        self.model_h = max(2 * self.cfg.cell_size, int(patch.height * scale_cap) // self.cfg.cell_size * self.cfg.cell_size)
        self.model_w = max(2 * self.cfg.cell_size, int(patch.width * scale_cap) // self.cfg.cell_size * self.cfg.cell_size)
        rows, cols = self.model_h // self.cfg.cell_size, self.model_w // self.cfg.cell_size
        self.window = features.hann_window(rows, cols)

        tgt_cells_y = box.h / patch.height * rows
        tgt_cells_x = box.w / patch.width * cols
        self.sigma_label = max(
            self.cfg.sigma_label_factor * np.sqrt(tgt_cells_x * tgt_cells_y), 0.5
        )
        self.label = cf.gaussian_label(rows, cols, self.sigma_label)

        if self.cfg.mode == "brcf":
            if self.cfg.p_cells > 0:
                p = self.cfg.p_cells
            else:
                pad_cells = (patch.width - box.w) / 2.0 / patch.width * cols
                p = max(1, int(pad_cells))
            self.p_cells = min(p, (min(rows, cols) - 1) // 2)
        else:
            self.p_cells = None  # full window: plain baseline

        maps = self._feature_maps(patch.pixels)
        self.models = {
            k: cf.train_filter(x, self.label, self.cfg.lambda_, self.cfg.sigma_k, self.p_cells)
            for k, x in maps.items()
        }
        self.weights = fusion.FusionWeights(frame=1)

        if self.cfg.mode == "brcf":
            warm = regression.load_regressor(self.cfg.regressor) if self.cfg.regressor else None
            samples = regression.sample_training_boxes(
                box, self.cfg.finetune_samples, rng=self.rng
            )
            color = _ensure_color(frame)
            pairs = [
                regression.TrainingPair(s, box, regression.box_features(color, s))
                for s in samples
            ]
            self.regressor = regression.train_regressor(
                pairs,
                lam=self.cfg.regressor_lambda,
                lr=self.cfg.regressor_lr or None,
                iters=self.cfg.finetune_iters,
                warm_start=warm,
            )
            self._cache_keypoints(frame, box, response=None)

        self.t = 1
        elapsed = (time.perf_counter() - t0) * 1000.0
        return FrameResult(
            frame=1,
            box=box,
            kl=(0.0, 0.0, 0.0),
            weights=self.weights.as_tuple(),
            scale=1.0,
            deltas=(0.0, 0.0, 0.0, 0.0),
            peak=1.0,
            elapsed_ms=elapsed,
        )

    def _cache_keypoints(self, frame: np.ndarray, box: BBox, response: np.ndarray | None):
        """Detect keypoints in the padded patch and weight them by the response."""
        patch = self._extract_patch(frame, box)
        gray = to_grayscale(_ensure_color(patch.pixels))
        if min(gray.shape) < 15:
            self.kp_cache = ([], np.zeros((0, keypoints.DESCRIPTOR_DIM)), patch, np.zeros(0))
            return
        ii = integral_image(gray)
        kps, descs = keypoints.detect_and_describe(
            ii, self.cfg.surf_threshold, self.cfg.surf_max_points,
            self.cfg.upright_keypoints, self.cfg.surf_octaves,
        )
        if response is not None and kps:
            centered = np.fft.fftshift(response)
            cell_px = self.cfg.cell_size * patch.width / self.model_w
            w = keypoints.keypoint_weights(
                fusion.normalize_response(centered),
                [(k.x, k.y) for k in kps],
                (0.0, 0.0),
                cell_px,
            )
        else:
            w = np.ones(len(kps))
        self.kp_cache = (kps, descs, patch, w)

    def step(self, frame: np.ndarray) -> FrameResult:
        """Track one frame; returns diagnostics and advances the state."""
        if self.t < 1:
            raise RuntimeError("tracker not initialized")
        if frame.shape[:2] != self.frame_shape:
            raise ValueError(f"frame size {frame.shape[:2]} != {self.frame_shape}")
        t0 = time.perf_counter()
        self.t += 1
        cfgm = self.cfg.mode

        # 1-2) detect with the current models at the previous box
        patch = self._extract_patch(frame, self.box)
        maps = self._feature_maps(patch.pixels)
        resps = {k: cf.detect(self.models[k], x) for k, x in maps.items()}

        if cfgm == "brcf":
            # 3) reliability scoring and fusion with the current weights
            rows, cols = self.label.shape
            kls = {}
            for k, r in resps.items():
                pred = fusion.normalize_response(r)
                py, px = np.unravel_index(np.argmax(r), r.shape)
                ideal = fusion.ideal_response((int(py), int(px)), rows, cols, self.sigma_label)
                kls[k] = fusion.kl_divergence(ideal, pred)
            eta = fusion.compute_frame_weights(kls["hog"], kls["ch"], kls["lh"])
            fused = fusion.fuse_responses(resps["hog"], resps["ch"], resps["lh"], self.weights)
        else:
            kls = {"hog": 0.0, "ch": 0.0, "lh": 0.0}
            eta = (1.0, 0.0, 0.0)
            fused = resps["hog"]

        # 4) translate by the fused peak offset (cells -> frame pixels)
        dy, dx, peak = cf.response_peak(fused)
        px_per_cell_x = self.cfg.cell_size * patch.width / self.model_w
        px_per_cell_y = self.cfg.cell_size * patch.height / self.model_h
        box = self.box.shifted(dx * px_per_cell_x, dy * px_per_cell_y)
        box = box.clamped_center(self.frame_shape[1], self.frame_shape[0])

        scale = 1.0
        deltas = (0.0, 0.0, 0.0, 0.0)
        scale_ms = 0.0
        if cfgm == "brcf":
            # 5) keypoint scale pre-estimation against the cached frame
            ts0 = time.perf_counter()
            prev_kps, prev_descs, prev_patch, prev_w = self.kp_cache
            cur_patch = self._extract_patch(frame, box)
            gray = to_grayscale(_ensure_color(cur_patch.pixels))
            cur_kps: list = []
            cur_descs = np.zeros((0, keypoints.DESCRIPTOR_DIM))
            if min(gray.shape) >= 15:
                ii = integral_image(gray)
                cur_kps, cur_descs = keypoints.detect_and_describe(
                    ii, self.cfg.surf_threshold, self.cfg.surf_max_points,
                    self.cfg.upright_keypoints, self.cfg.surf_octaves,
                )
            pairs = keypoints.match_keypoints(prev_descs, cur_descs, self.cfg.ratio_test)
            centered = fusion.normalize_response(np.fft.fftshift(fused))
            cell_px = self.cfg.cell_size * cur_patch.width / self.model_w
            cur_w = keypoints.keypoint_weights(
                centered, [(k.x, k.y) for k in cur_kps], (0.0, 0.0), cell_px
            )
            if len(pairs) >= 4:
                p_idx = [i for i, _, _ in pairs.pairs]
                l_idx = [j for _, j, _ in pairs.pairs]
                m_p = keypoints.weighted_centroid(
                    [(prev_kps[i].x, prev_kps[i].y) for i in p_idx], prev_w[p_idx]
                )
                m_l = keypoints.weighted_centroid(
                    [(cur_kps[j].x, cur_kps[j].y) for j in l_idx], cur_w[l_idx]
                )
                c_p = ((prev_patch.width - 1) / 2.0, (prev_patch.height - 1) / 2.0)
                c_l = ((cur_patch.width - 1) / 2.0, (cur_patch.height - 1) / 2.0)
                scale = keypoints.estimate_scale(
                    m_p, c_p, m_l, c_l, len(pairs), self.cfg.scale_clamp
                )
            box = box.scaled(scale)
            # reuse this frame's keypoints for the next adjacent-frame match;
            # the translated box is close enough to the final one that a
            # second detection pass is not worth its cost
            self.kp_cache = (cur_kps, cur_descs, cur_patch, cur_w)
            scale_ms = (time.perf_counter() - ts0) * 1000.0

            # 6) box regression fine-tune
            feat = regression.box_features(_ensure_color(frame), box)
            deltas = regression.predict_deltas(self.regressor, feat)
            box = regression.apply_regressor(
                self.regressor, feat, box, self.cfg.literal_regressor
            )
            box = box.clamped_center(self.frame_shape[1], self.frame_shape[0])

        if box.w < 2 or box.h < 2:
            raise TrackingLost(f"box collapsed at frame {self.t}: {box}")

        # 7) retrain at the final box, blend models, update weights
        new_patch = self._extract_patch(frame, box)
        new_maps = self._feature_maps(new_patch.pixels)
        for k, x in new_maps.items():
            fresh = cf.train_filter(x, self.label, self.cfg.lambda_, self.cfg.sigma_k, self.p_cells)
            self.models[k] = cf.update_model(
                self.models[k], fresh, self.cfg.alpha, literal_additive=self.cfg.literal_update
            )
        if cfgm == "brcf":
            self.weights = fusion.update_weights(self.weights, eta, self.cfg.lambda_w)

        self.box = box
        elapsed = (time.perf_counter() - t0) * 1000.0
        return FrameResult(
            frame=self.t,
            box=box,
            kl=(kls["hog"], kls["ch"], kls["lh"]),
            weights=self.weights.as_tuple(),
            scale=scale,
            deltas=deltas,
            peak=peak,
            elapsed_ms=elapsed,
            scale_ms=scale_ms,
        )


def track_sequence(frames, init_box: BBox, config: TrackerConfig | None = None):
    """Run a tracker over an iterable of frames; yields one FrameResult each."""
    tracker = Tracker(config)
    it = iter(frames)
    first = next(it)
    yield tracker.init(first, init_box)
    for frame in it:
        yield tracker.step(frame)

"""Acceptance gate: the twelve release criteria, one pass/fail line each.

Run with ``pytest -v tests/test_acceptance.py -s`` to see the lines as they
are produced; without -s they appear in the captured output of failures.
"""

import json
import math
import time
import warnings

import numpy as np
import pytest

from brcf import cli, fusion, keypoints, metrics, regression
from brcf.boxes import BBox, center_distance, iou
from brcf.cf import detect, gaussian_label, kernel_correlation, train_filter
from brcf.synth import MotionSpec, synth_sequence
from brcf.tracker import TrackerConfig, track_sequence

from test_cf import brute_force_kernel


def _report(num, desc, ok, detail=""):
    line = f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'}: {desc}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def _run(spec, mode, seed=0):
    frames = [f for f, _ in synth_sequence(spec)]
    gts = [b for _, b in synth_sequence(spec)]
    t0 = time.perf_counter()
    results = list(track_sequence(frames, gts[0], TrackerConfig(mode=mode, seed=seed)))
    elapsed = time.perf_counter() - t0
    return results, gts, elapsed


@pytest.fixture(scope="module")
def translation_run():
    spec = MotionSpec(frame_w=440, frame_h=240, n_frames=100,
                      start=BBox(60, 120, 40, 40), velocity=(3.0, 0.0))
    return _run(spec, "brcf")


@pytest.fixture(scope="module")
def growth_runs():
    spec = MotionSpec(n_frames=120, start=BBox(160, 120, 40, 40), scale_rate=1.005)
    return {mode: _run(spec, mode) for mode in ("brcf", "kcf")}


@pytest.fixture(scope="module")
def speed_runs():
    spec = MotionSpec(frame_w=320, frame_h=240, n_frames=200,
                      start=BBox(60, 120, 40, 40), velocity=(1.0, 0.0))
    return {mode: _run(spec, mode) for mode in ("brcf", "kcf")}


@pytest.fixture(scope="module")
def bench_report(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("bench"))
    assert cli.main(["bench", "--frames", "100", "--out", out]) == 0
    with open(f"{out}/bench.json") as f:
        return {r["method"]: r for r in json.load(f)}


def test_criterion_01_kernel_oracle():
    rng = np.random.default_rng(0)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(5):
        x = rng.normal(size=(8, 8, 3))
        z = rng.normal(size=(8, 8, 3))
        k = kernel_correlation(x, z, 0.5)
        worst = max(worst, float(np.abs(k - brute_force_kernel(x, z, 0.5)).max()))
    elapsed = time.perf_counter() - t0
    _report(1, "FFT kernel correlation matches brute-force cyclic shifts",
            worst < 1e-9 and elapsed < 1.0,
            f"max err {worst:.2e}, {elapsed:.2f} s")


def test_criterion_02_dense_ridge():
    rng = np.random.default_rng(1)
    worst = 0.0
    for rows, cols in ((4, 4), (6, 6), (8, 8)):
        x = rng.normal(size=(rows, cols, 2))
        y = gaussian_label(rows, cols, 1.0)
        lam = 1e-3
        model = train_filter(x, y, lam, 0.5)
        kxx = kernel_correlation(x, x, 0.5)
        n = rows * cols
        K = np.zeros((n, n))
        for i in range(n):
            iy, ix = divmod(i, cols)
            for j in range(n):
                jy, jx = divmod(j, cols)
                K[i, j] = kxx[(jy - iy) % rows, (jx - ix) % cols]
        a = np.linalg.solve(K + lam * np.eye(n), y.ravel())
        c = np.fft.ifft2(model.c_hat).real.ravel()
        worst = max(worst, float(np.abs(a - c).max() / np.abs(a).max()))
    _report(2, "frequency-domain training matches dense circulant ridge solve",
            worst < 1e-6, f"max rel err {worst:.2e}")


def test_criterion_03_detection_equivariance():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(8, 8, 3))
    model = train_filter(x, gaussian_label(8, 8, 1.0), 1e-4, 0.5)
    exact = all(
        np.unravel_index(np.argmax(detect(model, np.roll(x, (dy, dx), axis=(0, 1)))), (8, 8))
        == (dy, dx)
        for dy in range(8)
        for dx in range(8)
    )
    _report(3, "argmax moves by exactly the template shift, all 64 shifts", exact)


def test_criterion_04_fusion_invariants(speed_runs):
    results, _, _ = speed_runs["brcf"]
    sums_ok = all(abs(sum(r.weights) - 1.0) < 1e-12 for r in results)
    kl_ok = all(k >= 0 for r in results for k in r.kl)
    r_self = fusion.normalize_response(np.random.default_rng(3).normal(size=(8, 8)))
    kl_self = fusion.kl_divergence(r_self, r_self)
    eta = fusion.compute_frame_weights(1.0, 2.0, 4.0)
    hand1 = max(abs(a - b) for a, b in zip(eta, (4 / 7, 2 / 7, 1 / 7))) < 1e-12
    w = fusion.update_weights(fusion.FusionWeights(frame=1), (0.6, 0.3, 0.1), 0.5)
    hand2 = max(abs(a - b) for a, b in zip(
        w.as_tuple(), (0.5 / 3 + 0.3, 0.5 / 3 + 0.15, 0.5 / 3 + 0.05))) < 1e-12
    _report(4, "fusion invariants over a 200-frame run + hand arithmetic",
            sums_ok and kl_ok and kl_self == 0.0 and hand1 and hand2,
            f"{len(results)} frames")


def test_criterion_05_scale_estimation():
    pts = np.array([(10.0, 4.0), (20.0, 8.0), (14.0, 30.0), (40.0, 22.0)])
    c = np.array([16.0, 16.0])
    w = np.array([1.0, 2.0, 0.5, 1.5])
    m_prev = keypoints.weighted_centroid([tuple(p) for p in pts], w)
    worst = 0.0
    for s in (0.9, 1.1):
        scaled = c + s * (pts - c)
        m_next = keypoints.weighted_centroid([tuple(p) for p in scaled], w)
        est = keypoints.estimate_scale(m_prev, tuple(c), m_next, tuple(c),
                                       n_matches=4, clamp=(0.1, 10.0))
        worst = max(worst, abs(est - s))
    degenerate = keypoints.estimate_scale((16.0, 16.0), (16.0, 16.0),
                                          (20.0, 16.0), (16.0, 16.0), 4) == 1.0
    _report(5, "analytic keypoint scaling recovered to 1e-9, degenerate -> 1.0",
            worst < 1e-9 and degenerate, f"max err {worst:.2e}")


def test_criterion_06_regression():
    rng = np.random.default_rng(4)
    # (a) target/inverse round trip
    rt = 0.0
    for _ in range(20):
        s = BBox(*rng.uniform(20, 80, 2), *rng.uniform(5, 40, 2))
        r = BBox(*rng.uniform(20, 80, 2), *rng.uniform(5, 40, 2))
        back = regression.apply_targets(s, regression.regression_targets(s, r))
        rt = max(rt, abs(back.cx - r.cx), abs(back.cy - r.cy),
                 abs(back.w - r.w), abs(back.h - r.h))
    # (b) analytic gradient vs central finite differences
    F = rng.normal(size=(10, 6))
    T = rng.normal(size=(10, 4))
    W = rng.normal(size=(6, 4))
    lam = 0.7

    def loss(Wm):
        err = F @ Wm - T
        return (err * err).sum() + lam * (Wm * Wm).sum()

    grad = 2.0 * F.T @ (F @ W - T) + 2.0 * lam * W
    eps = 1e-6
    gerr = 0.0
    for idx in [(0, 0), (2, 1), (5, 3)]:
        Wp, Wm = W.copy(), W.copy()
        Wp[idx] += eps
        Wm[idx] -= eps
        fd = (loss(Wp) - loss(Wm)) / (2 * eps)
        gerr = max(gerr, abs(grad[idx] - fd) / max(abs(fd), 1.0))
    # (c) trained weights vs closed-form ridge
    feats = rng.normal(size=(24, 12))
    targs = rng.normal(size=(24, 4)) * 0.1
    pairs = []
    for i in range(24):
        p = regression.TrainingPair(BBox(10, 10, 5, 5), BBox(10, 10, 5, 5), feats[i])
        p.targets = tuple(targs[i])
        pairs.append(p)
    w = regression.train_regressor(pairs, lam=0.5, iters=4000)
    Fs = (feats - w.mean) / w.std
    W_star = np.linalg.solve(Fs.T @ Fs + 0.5 * np.eye(12), Fs.T @ targs)
    W_got = np.stack([w.w_x, w.w_y, w.w_w, w.w_h], axis=1)
    cf_err = float(np.abs(W_got - W_star).max())
    # (d) planted-solution recovery; plant in standardized space since the
    # model has no bias term to absorb a raw-space offset
    w_true = rng.normal(size=(12, 4)) * 0.3
    planted_T = (feats - feats.mean(axis=0)) / feats.std(axis=0) @ w_true
    pairs2 = []
    for i in range(24):
        p = regression.TrainingPair(BBox(10, 10, 5, 5), BBox(10, 10, 5, 5), feats[i])
        p.targets = tuple(planted_T[i])
        pairs2.append(p)
    w2 = regression.train_regressor(pairs2, lam=1e-6, iters=6000)
    preds = np.stack([regression.predict_deltas(w2, f) for f in feats])
    planted_err = float(np.abs(preds - planted_T).max())
    _report(6, "regression round trip / gradient / ridge / planted solution",
            rt < 1e-12 and gerr < 1e-5 and cf_err < 1e-3 and planted_err < 1e-3,
            f"rt {rt:.1e}, grad {gerr:.1e}, ridge {cf_err:.1e}, planted {planted_err:.1e}")


def test_criterion_07_translation(translation_run):
    results, gts, elapsed = translation_run
    mean_iou = float(np.mean([iou(r.box, g) for r, g in zip(results, gts)]))
    mean_err = float(np.mean([center_distance(r.box, g) for r, g in zip(results, gts)]))
    _report(7, "translation: mean IoU >= 0.8, center error <= 2 px, < 30 s",
            mean_iou >= 0.8 and mean_err <= 2.0 and elapsed < 30.0,
            f"IoU {mean_iou:.3f}, err {mean_err:.2f} px, {elapsed:.1f} s")


def test_criterion_08_scale_gap(growth_runs):
    means = {}
    for mode, (results, gts, _) in growth_runs.items():
        means[mode] = float(np.mean([iou(r.box, g) for r, g in zip(results, gts)]))
    gap = means["brcf"] - means["kcf"]
    _report(8, "growing target: BRCF mean IoU beats fixed-size baseline by >= 0.10",
            gap >= 0.10, f"brcf {means['brcf']:.3f}, kcf {means['kcf']:.3f}, gap {gap:.3f}")


def test_criterion_09_speed_ordering(speed_runs):
    fps = {m: len(r[0]) / r[2] for m, r in speed_runs.items()}
    ordering = fps["kcf"] > fps["brcf"]
    if fps["brcf"] < 25.0:
        warnings.warn(f"soft criterion missed: BRCF at {fps['brcf']:.1f} FPS (< 25)")
    _report(9, "KCF baseline runs faster than BRCF (soft: BRCF >= 25 FPS)",
            ordering, f"kcf {fps['kcf']:.1f} FPS, brcf {fps['brcf']:.1f} FPS")


def test_criterion_10_scale_cost(bench_report):
    r = bench_report["brcf"]
    _report(10, "bench: scale stage trains nothing, prediction < 40% of frame time",
            r["scale_train_ms"] == 0.0 and r["scale_fraction"] < 0.40,
            f"train {r['scale_train_ms']} ms, predict {r['scale_predict_ms']:.2f} ms, "
            f"{100 * r['scale_fraction']:.1f}% of {r['frame_ms']:.2f} ms")


def test_criterion_11_evaluation_protocol():
    truth = BBox(100, 100, 20, 20)
    # ten records with known overlaps 0.0 .. 0.9 and distances 0 .. 9
    recs = []
    for k in range(10):
        target = k / 10
        d = 20 * (1 - target) / (1 + target)
        pred = BBox(100 + d, 100, 20, 20)
        recs.append(metrics.EvalRecord("s", k, pred, truth))
    pts, _ = metrics.success_curve(recs, thresholds=(0.25, 0.55, 0.85))
    exact = (
        pts[0][1] == sum(r.iou > 0.25 for r in recs) / 10
        and pts[1][1] == sum(r.iou > 0.55 for r in recs) / 10
        and pts[2][1] == sum(r.iou > 0.85 for r in recs) / 10
    )
    ppts, _ = metrics.precision_curve(recs, thresholds=(2.0, 5.0))
    exact = exact and all(
        p[1] == sum(r.distance < p[0] for r in recs) / 10 for p in ppts
    )
    rng = np.random.default_rng(5)
    rand = [metrics.EvalRecord("r", i, BBox(100 + rng.uniform(0, 30), 100, 20, 20), truth)
            for i in range(40)]
    srates = [r for _, r in metrics.success_curve(rand)[0]]
    prates = [r for _, r in metrics.precision_curve(rand)[0]]
    mono = all(a >= b for a, b in zip(srates, srates[1:])) and all(
        a <= b for a, b in zip(prates, prates[1:]))
    _report(11, "success/precision curves match counted fractions, monotone", exact and mono)


def test_criterion_12_zone_alarms():
    zone = metrics.Zone([(200, 80), (300, 80), (300, 180), (200, 180)], [60.0, 30.0, 10.0])
    inside = metrics.zone_distance(BBox(250, 130, 10, 10), zone) == 0.0
    contact_max = metrics.zone_alarm(0.0, zone) == 3
    far = metrics.zone_alarm(100.0, zone) == 0
    # a trajectory approaching the zone: levels never decrease, then trigger
    levels = []
    for cx in range(40, 260, 5):
        d = metrics.zone_distance(BBox(cx, 130, 16, 12), zone)
        levels.append(metrics.zone_alarm(d, zone))
    mono = all(a <= b for a, b in zip(levels, levels[1:]))
    triggered = levels[-1] == zone.max_level
    # Lipschitz sanity on the distance itself
    d0 = metrics.zone_distance(BBox(100, 130, 16, 12), zone)
    d1 = metrics.zone_distance(BBox(101, 130, 16, 12), zone)
    lip = abs(d1 - d0) <= math.sqrt(2) + 1e-9
    _report(12, "zone distance/alarm examples and approach monotonicity",
            inside and contact_max and far and mono and triggered and lip,
            f"levels {min(levels)}->{max(levels)}")

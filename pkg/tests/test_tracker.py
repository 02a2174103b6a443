import numpy as np
import pytest

from brcf.boxes import BBox, center_distance
from brcf.synth import MotionSpec, synth_sequence
from brcf.tracker import Tracker, TrackerConfig, TrackingLost, track_sequence


def _frames(spec):
    return [f for f, _ in synth_sequence(spec)], [b for _, b in synth_sequence(spec)]


def test_init_state():
    frames, gts = _frames(MotionSpec(n_frames=1))
    tr = Tracker(TrackerConfig())
    res = tr.init(frames[0], gts[0])
    assert res.frame == 1
    assert res.box == gts[0]
    assert res.weights == (1 / 3, 1 / 3, 1 / 3)
    assert tr.t == 1


def test_init_self_detection_within_one_cell():
    frames, gts = _frames(MotionSpec(n_frames=1))
    tr = Tracker(TrackerConfig())
    tr.init(frames[0], gts[0])
    res = tr.step(frames[0])
    cell = tr.cfg.cell_size
    assert abs(res.box.cx - gts[0].cx) <= cell
    assert abs(res.box.cy - gts[0].cy) <= cell


def test_static_scene_drift_below_one_pixel():
    frames, gts = _frames(MotionSpec(n_frames=1, seed=5))
    tr = Tracker(TrackerConfig())
    tr.init(frames[0], gts[0])
    box = gts[0]
    for _ in range(10):
        box = tr.step(frames[0]).box
    assert center_distance(box, gts[0]) < 1.0


def test_determinism_bit_identical():
    spec = MotionSpec(n_frames=15, velocity=(2.0, 1.0), noise_sigma=2.0, seed=7)
    frames, gts = _frames(spec)
    runs = []
    for _ in range(2):
        results = list(track_sequence(frames, gts[0], TrackerConfig(seed=3)))
        runs.append([(r.box, r.kl, r.weights, r.scale, r.deltas, r.peak) for r in results])
    assert runs[0] == runs[1]


def test_box_validity_and_weight_conservation():
    spec = MotionSpec(n_frames=25, velocity=(2.0, 0.5), seed=2)
    frames, gts = _frames(spec)
    h, w = frames[0].shape[:2]
    for r in track_sequence(frames, gts[0], TrackerConfig()):
        assert r.box.w >= 2 and r.box.h >= 2
        assert 0 <= r.box.cx < w and 0 <= r.box.cy < h
        assert abs(sum(r.weights) - 1.0) < 1e-12
        assert all(k >= 0 for k in r.kl)


def test_kcf_mode_fixed_size():
    spec = MotionSpec(n_frames=20, velocity=(2.0, 0.0), scale_rate=1.004, seed=1)
    frames, gts = _frames(spec)
    results = list(track_sequence(frames, gts[0], TrackerConfig(mode="kcf")))
    assert all(r.box.w == gts[0].w and r.box.h == gts[0].h for r in results)
    assert all(r.scale == 1.0 and r.deltas == (0.0, 0.0, 0.0, 0.0) for r in results)


def test_step_before_init_raises():
    with pytest.raises(RuntimeError):
        Tracker(TrackerConfig()).step(np.zeros((240, 320, 3), dtype=np.uint8))


def test_frame_size_mismatch_raises():
    frames, gts = _frames(MotionSpec(n_frames=1))
    tr = Tracker(TrackerConfig())
    tr.init(frames[0], gts[0])
    with pytest.raises(ValueError):
        tr.step(np.zeros((100, 100, 3), dtype=np.uint8))


def test_degenerate_init_box_raises():
    frames, _ = _frames(MotionSpec(n_frames=1))
    tr = Tracker(TrackerConfig())
    with pytest.raises(ValueError):
        tr.init(frames[0], BBox(1000, 1000, 40, 40))


def test_unknown_mode_raises():
    with pytest.raises(ValueError):
        Tracker(TrackerConfig(mode="dsst"))


def test_pretrained_regressor_loads(tmp_path):
    from brcf import regression

    frames, gts = _frames(MotionSpec(n_frames=1))
    rng = np.random.default_rng(0)
    pairs = [
        regression.TrainingPair(s, gts[0], regression.box_features(frames[0], s))
        for s in regression.sample_training_boxes(gts[0], 16, rng=rng)
    ]
    w = regression.train_regressor(pairs, iters=50)
    path = str(tmp_path / "reg.txt")
    regression.save_regressor(w, path)
    tr = Tracker(TrackerConfig(regressor=path))
    tr.init(frames[0], gts[0])
    res = tr.step(frames[0])
    assert res.box.w > 0


def test_config_from_file(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text(
        "cell_size = 8\n"
        "lambda = 0.001  # alias for lambda_\n"
        "mode = kcf\n"
        "upright_keypoints = false\n"
        "scale_clamp = 0.9,1.1\n"
        "\n"
    )
    cfg = TrackerConfig.from_file(str(path))
    assert cfg.cell_size == 8
    assert cfg.lambda_ == 0.001
    assert cfg.mode == "kcf"
    assert cfg.upright_keypoints is False
    assert cfg.scale_clamp == (0.9, 1.1)


def test_config_unknown_key(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text("no_such_option = 1\n")
    with pytest.raises(ValueError):
        TrackerConfig.from_file(str(path))


def test_tracking_lost_on_tiny_box():
    # a near-degenerate start with an aggressive literal regressor shrink is
    # hard to force; instead check the exception type exists and the guard
    # path triggers when the box collapses
    frames, gts = _frames(MotionSpec(n_frames=2, seed=9))
    tr = Tracker(TrackerConfig())
    tr.init(frames[0], gts[0])
    tr.box = BBox(gts[0].cx, gts[0].cy, 2.2, 2.2)
    with pytest.raises((TrackingLost, ValueError)):
        for _ in range(20):
            tr.step(frames[1])
            tr.box = tr.box.scaled(0.5)

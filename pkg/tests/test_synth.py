import numpy as np
import pytest

from brcf.boxes import BBox
from brcf.synth import MotionSpec, ground_truth, synth_sequence


def test_static_ground_truth():
    spec = MotionSpec(n_frames=10)
    boxes = ground_truth(spec)
    assert len(boxes) == 10
    assert all(b == boxes[0] for b in boxes)


def test_translation_is_arithmetic():
    spec = MotionSpec(n_frames=20, velocity=(3.0, 0.0))
    boxes = ground_truth(spec)
    xs = [b.cx for b in boxes]
    diffs = np.diff(xs)
    assert np.allclose(diffs, 3.0)
    assert all(b.cy == boxes[0].cy for b in boxes)


def test_geometric_growth():
    spec = MotionSpec(n_frames=121, start=BBox(160, 120, 40, 40), scale_rate=1.005)
    boxes = ground_truth(spec)
    assert boxes[-1].w == pytest.approx(40 * 1.005**120)
    assert boxes[-1].w / boxes[0].w == pytest.approx(1.819, abs=5e-3)


def test_leaving_frame_raises():
    spec = MotionSpec(n_frames=200, velocity=(5.0, 0.0))
    with pytest.raises(ValueError, match="leaves the frame"):
        ground_truth(spec)


def test_bit_reproducible():
    spec = MotionSpec(n_frames=5, velocity=(1.0, 0.5), noise_sigma=3.0, seed=42)
    a = [f.copy() for f, _ in synth_sequence(spec)]
    b = [f.copy() for f, _ in synth_sequence(spec)]
    for fa, fb in zip(a, b):
        assert np.array_equal(fa, fb)
    c = [f.copy() for f, _ in synth_sequence(MotionSpec(n_frames=5, velocity=(1.0, 0.5), noise_sigma=3.0, seed=43))]
    assert not np.array_equal(a[0], c[0])


def test_frames_match_ground_truth():
    spec = MotionSpec(n_frames=8, velocity=(2.0, 1.0))
    gts = ground_truth(spec)
    for (frame, box), gt in zip(synth_sequence(spec), gts):
        assert frame.shape == (240, 320, 3)
        assert frame.dtype == np.uint8
        assert box == gt
        # target texture is brighter than the background on average
        x1, y1, x2, y2 = int(box.x1), int(box.y1), int(box.x2), int(box.y2)
        inside = frame[y1:y2, x1:x2].mean()
        assert inside > frame.mean()

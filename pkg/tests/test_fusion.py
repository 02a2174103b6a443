import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from brcf.fusion import (
    FusionWeights,
    compute_frame_weights,
    fuse_responses,
    ideal_response,
    kl_divergence,
    normalize_response,
    update_weights,
)


def test_frame_weights_hand_case():
    eta = compute_frame_weights(1.0, 2.0, 4.0)
    assert abs(eta[0] - 4 / 7) < 1e-12
    assert abs(eta[1] - 2 / 7) < 1e-12
    assert abs(eta[2] - 1 / 7) < 1e-12
    assert abs(sum(eta) - 1.0) < 1e-12


def test_frame_weights_floor():
    eta = compute_frame_weights(0.0, 1.0, 1.0)
    assert eta[0] > 0.99  # the near-zero KL model dominates
    assert abs(sum(eta) - 1.0) < 1e-12


def test_update_weights_hand_case():
    w = FusionWeights(frame=1)  # (1/3, 1/3, 1/3)
    out = update_weights(w, (0.6, 0.3, 0.1), 0.5)
    assert abs(out.hog - (0.5 / 3 + 0.3)) < 1e-12
    assert abs(out.ch - (0.5 / 3 + 0.15)) < 1e-12
    assert abs(out.lh - (0.5 / 3 + 0.05)) < 1e-12
    assert out.frame == 2


def test_update_weights_first_frame_adopts_eta():
    out = update_weights(FusionWeights(frame=0), (0.5, 0.3, 0.2), 0.025)
    assert out.as_tuple() == (0.5, 0.3, 0.2)
    with pytest.raises(ValueError):
        update_weights(FusionWeights(frame=1), (0.5, 0.3, 0.2), 1.5)


def test_kl_known_value():
    r = np.array([0.5, 0.5])
    p = np.array([0.9, 0.1])
    assert kl_divergence(r, p) == pytest.approx(np.log(5 / 3), abs=1e-12)


def test_kl_identity_zero_and_shape():
    r = normalize_response(np.random.default_rng(0).normal(size=(8, 8)))
    assert kl_divergence(r, r) == 0.0
    with pytest.raises(ValueError):
        kl_divergence(np.ones(3) / 3, np.ones(4) / 4)


@given(st.lists(st.floats(min_value=0.01, max_value=10.0), min_size=4, max_size=16))
def test_kl_nonnegative(vals):
    v = np.array(vals)
    half = len(vals) // 2
    r = normalize_response(v[:half])
    p = normalize_response(v[len(vals) - half :])
    assert kl_divergence(r, p) >= -1e-12


def test_normalize_response():
    r = np.array([[-3.0, 1.0], [0.0, 2.0]])
    p = normalize_response(r)
    assert p.sum() == pytest.approx(1.0)
    assert (p > 0).all()
    assert p.argmax() == r.argmax()


def test_ideal_response():
    g = ideal_response((3, 5), 10, 12, 1.5)
    assert g.sum() == pytest.approx(1.0)
    assert np.unravel_index(np.argmax(g), g.shape) == (3, 5)
    # circular: peak at a corner still sums to 1 with wrapped tails
    g0 = ideal_response((0, 0), 10, 12, 1.5)
    assert g0[9, 0] == pytest.approx(g0[1, 0])
    with pytest.raises(ValueError):
        ideal_response((10, 0), 10, 12, 1.5)


@given(st.integers(0, 1000))
def test_weights_sum_preserved(seed):
    rng = np.random.default_rng(seed)
    w = FusionWeights(frame=1)
    for _ in range(5):
        kls = rng.uniform(0.01, 5.0, size=3)
        eta = compute_frame_weights(*kls)
        w = update_weights(w, eta, 0.025)
        assert abs(sum(w.as_tuple()) - 1.0) < 1e-12


def test_fuse_responses():
    a = np.full((4, 4), 1.0)
    b = np.full((4, 4), 2.0)
    c = np.full((4, 4), 4.0)
    w = FusionWeights(0.5, 0.25, 0.25, frame=1)
    assert np.allclose(fuse_responses(a, b, c, w), 2.0)
    with pytest.raises(ValueError):
        fuse_responses(a, b, np.zeros((5, 4)), w)

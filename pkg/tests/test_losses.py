import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ebeam_mdp.losses import (LossReport, compose, dose_loss, l2_loss, overlap_area,
                              overlap_loss, pvb_loss, sparsity_loss)
from ebeam_mdp.model import LossWeights

from conftest import interior_params
from gradcheck import fd_param_grad, max_rel_err


def raster_overlap(params, grid):
    """Pairwise overlap by painting every shot as a pixel mask."""
    masks = []
    for x, y, w, h, _, _ in params.astype(int):
        m = np.zeros((grid, grid), bool)
        m[y:y + h, x:x + w] = True
        masks.append(m)
    total = 0.0
    for k in range(len(masks)):
        for p in range(k + 1, len(masks)):
            total += np.sum(masks[k] & masks[p]) * params[k, 5] * params[p, 5]
    return total


integer_shots = st.lists(
    st.tuples(st.integers(0, 30), st.integers(0, 30), st.integers(1, 12), st.integers(1, 12),
              st.floats(0.5, 2.0), st.sampled_from([0.0, 1.0])),
    min_size=0, max_size=8)


@settings(max_examples=200)
@given(integer_shots)
def test_overlap_equals_raster_oracle(rows):
    p = np.array(rows, dtype=np.float64).reshape(-1, 6)
    assert overlap_loss(p)[0] == raster_overlap(p, 48)


@given(integer_shots, st.randoms())
def test_overlap_permutation_invariant(rows, rnd):
    p = np.array(rows, dtype=np.float64).reshape(-1, 6)
    perm = list(range(len(p)))
    rnd.shuffle(perm)
    assert overlap_loss(p[perm])[0] == pytest.approx(overlap_loss(p)[0], abs=1e-9)


def test_overlap_area_symmetric_zero_diagonal(rng):
    p = interior_params(rng, 6, 64, size=(10, 30))
    a = overlap_area(p)
    assert np.array_equal(a, a.T) and not np.diag(a).any()


def test_sparsity_and_dose_linearity(rng):
    p = interior_params(rng, 5, 64)
    for k in range(5):
        scaled = p.copy()
        scaled[k, 4] *= 3.0
        base_k = p[k, 2] * p[k, 3] * p[k, 4] * p[k, 5]
        assert dose_loss(scaled)[0] - dose_loss(p)[0] == pytest.approx(2 * base_k, rel=1e-12)
        scaled = p.copy()
        scaled[k, 5] *= 2.0
        assert sparsity_loss(scaled)[0] - sparsity_loss(p)[0] == pytest.approx(p[k, 5], rel=1e-12)


def test_shot_loss_gradients_finite_difference(rng):
    for _ in range(10):
        # real-valued interior configurations avoid edge-coincidence kinks
        p = interior_params(rng, 5, 40, margin=2, size=(6, 18))
        for fn in (sparsity_loss, dose_loss, overlap_loss):
            g = fn(p)[1]
            assert max_rel_err(g, fd_param_grad(lambda q: fn(q)[0], p), floor=1e-6) <= 1e-4


def test_overlap_tie_subgradient():
    p = np.array([[0, 0, 4, 4, 1, 1], [0, 0, 4, 4, 1, 1]], dtype=np.float64)
    value, g = overlap_loss(p)
    assert value == 16.0
    # coincident edges share the derivative evenly
    np.testing.assert_allclose(g[:, 2], [2.0, 2.0])
    np.testing.assert_allclose(g[:, 0], [0.0, 0.0])


def test_l2_and_pvb():
    a, b = np.zeros((4, 4)), np.ones((4, 4))
    v, g = l2_loss(a, b)
    assert v == 16.0 and np.all(g == -2.0)
    with pytest.raises(ValueError, match="dimension mismatch"):
        l2_loss(a, np.zeros((3, 4)))
    v, (gi, gn, go) = pvb_loss(a, a, b)
    assert v == 16.0 and np.all(gi == -2.0) and not gn.any() and np.all(go == 2.0)
    assert pvb_loss(b, b, b)[0] == 0.0


def test_compose_weights_and_csv():
    w = LossWeights(alpha=2, beta=3, gamma=0.5, delta=0.1, epsilon=0.25)
    r = compose(w, l2=1.0, sparsity=2.0, dose=10.0, overlap=4.0)
    assert r.total == pytest.approx(2 + 1 + 1 + 1)
    assert r.pvb is None and r.csv_row(1, 0.5)[3] == ""
    r = compose(w, l2=1.0, sparsity=2.0, dose=10.0, overlap=4.0, pvb=1.0)
    assert r.total == pytest.approx(8.0)
    assert isinstance(r, LossReport) and r.csv_row(3, 0.5)[0] == "3"

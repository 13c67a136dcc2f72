"""Exactness of the coordinate operators: vec order, commutation, pair
rotation, projectors, skew basis, exponential and reorthogonalization."""

import numpy as np
import pytest

from orthnewton.operators import (
    SQRT2,
    antisym_projector,
    antisym_slots,
    commutation_matrix,
    coords_from_skew,
    diag_projector,
    expm_skew,
    ortho_drift,
    pair_rotation,
    random_orthogonal,
    reorthogonalize,
    skew_from_coords,
    skew_pairs,
    sym_projector,
    sym_slots,
    unvec,
    vec,
)

ORDERS = range(2, 9)


def random_skew(n, seed):
    s = np.random.default_rng(seed).standard_normal((n, n))
    return 0.5 * (s - s.T)


def test_vec_is_column_major():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert vec(a).tolist() == [1.0, 3.0, 2.0, 4.0]
    assert np.array_equal(unvec(vec(a)), a)


def test_vec_slot_semantics():
    # slot k*n + l holds entry (row l, col k)
    n = 4
    a = np.random.default_rng(0).standard_normal((n, n))
    v = vec(a)
    for k in range(n):
        for l in range(n):
            assert v[k * n + l] == a[l, k]


def test_vec_rejects_nonsquare():
    with pytest.raises(ValueError):
        vec(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        unvec(np.zeros(5))


@pytest.mark.parametrize("n", ORDERS)
def test_commutation_transposes(n):
    k = commutation_matrix(n)
    a = np.random.default_rng(n).standard_normal((n, n))
    assert np.array_equal(k @ vec(a), vec(a.T))
    assert np.array_equal(k @ k, np.eye(n * n))


def test_commutation_swaps_kron_factors():
    n = 3
    rng = np.random.default_rng(7)
    a, b = rng.standard_normal((2, n, n))
    k = commutation_matrix(n)
    np.testing.assert_allclose(k @ np.kron(a, b) @ k, np.kron(b, a),
                               rtol=0, atol=1e-14)


def test_pair_rotation_worked_example():
    # n=2 skew [[0, d], [-d, 0]] maps to (0, 0, sqrt(2) d, 0): the lone
    # antisymmetric slot is 2, the paired symmetric slot 1 cancels exactly.
    d = 0.37
    delta = np.array([[0.0, d], [-d, 0.0]])
    out = (pair_rotation(2) + diag_projector(2)) @ vec(delta)
    assert out[2] == pytest.approx(SQRT2 * d, abs=1e-15)
    assert out[0] == 0.0 and out[1] == 0.0 and out[3] == 0.0


@pytest.mark.parametrize("n", ORDERS)
def test_pair_rotation_plus_diag_is_orthogonal(n):
    q = pair_rotation(n) + diag_projector(n)
    assert np.abs(q.T @ q - np.eye(n * n)).max() <= 1e-12


@pytest.mark.parametrize("n", ORDERS)
def test_projector_algebra(n):
    ps, pa, pd = sym_projector(n), antisym_projector(n), diag_projector(n)
    assert np.array_equal(ps + pa, np.eye(n * n))
    assert np.array_equal(ps @ ps, ps)
    assert np.array_equal(pa @ pa, pa)
    assert np.array_equal(ps @ pa, np.zeros((n * n, n * n)))
    # the diagonal slots sit inside the symmetric set
    assert np.array_equal(ps @ pd, pd)
    assert int(np.trace(ps)) == n * (n + 1) // 2
    assert int(np.trace(pa)) == n * (n - 1) // 2


@pytest.mark.parametrize("n", ORDERS)
def test_antisym_annihilates_diag_completion(n):
    # P_A (H + P_D) = P_A H exactly: the diagonal slots are symmetric slots
    h, pd, pa = pair_rotation(n), diag_projector(n), antisym_projector(n)
    assert np.array_equal(pa @ (h + pd), pa @ h)


@pytest.mark.parametrize("n", ORDERS)
def test_skew_has_no_symmetric_component(n):
    # the paired +-x entries cancel; fused multiply-adds in the matmul
    # leave at most one rounding of a single product behind
    skew = random_skew(n, seed=n)
    out = (pair_rotation(n) + diag_projector(n)) @ vec(skew)
    assert np.abs(out[sym_slots(n)]).max() <= 1e-15 * np.abs(skew).max()


@pytest.mark.parametrize("n", ORDERS)
def test_rotated_skew_matches_basis_coords(n):
    # the antisymmetric slots of (H+P_D) vec(Delta), in ascending slot
    # order, are the coordinates of Delta in the G_p basis
    delta = random_skew(n, seed=100 + n)
    out = (pair_rotation(n) + diag_projector(n)) @ vec(delta)
    np.testing.assert_allclose(out[antisym_slots(n)], coords_from_skew(delta),
                               rtol=0, atol=1e-15)


def test_slot_layouts():
    assert antisym_slots(3) == [3, 6, 7]
    assert sym_slots(3) == [0, 1, 2, 4, 5, 8]
    assert skew_pairs(3) == [(1, 0), (2, 0), (2, 1)]


@pytest.mark.parametrize("n", ORDERS)
def test_skew_coords_roundtrip(n):
    pairs = skew_pairs(n)
    y = np.random.default_rng(3 * n).standard_normal(len(pairs))
    delta = skew_from_coords(y, n)
    assert np.array_equal(delta, -delta.T)
    np.testing.assert_allclose(coords_from_skew(delta), y, rtol=0, atol=1e-15)
    # unit coordinate -> unit Frobenius norm basis matrix
    for p, (i, j) in enumerate(pairs):
        g = skew_from_coords(np.eye(len(pairs))[p], n)
        assert np.linalg.norm(g) == pytest.approx(1.0, abs=1e-15)
        assert g[j, i] == pytest.approx(1.0 / SQRT2, abs=1e-15)


def test_expm_skew_planar_rotation():
    th = 0.83
    d = np.array([[0.0, -th], [th, 0.0]])
    expected = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    np.testing.assert_allclose(expm_skew(d), expected, rtol=0, atol=1e-14)


@pytest.mark.parametrize("n", ORDERS)
def test_expm_skew_is_orthogonal(n):
    d = 2.0 * random_skew(n, seed=50 + n)
    q = expm_skew(d)
    assert ortho_drift(q) <= 1e-12
    assert np.linalg.det(q) == pytest.approx(1.0, abs=1e-10)
    assert np.array_equal(expm_skew(np.zeros((n, n))), np.eye(n))


def test_expm_skew_rejects_bad_input():
    with pytest.raises(ValueError):
        expm_skew(np.array([[0.0, 1.0], [1.0, 0.0]]))  # symmetric
    with pytest.raises(ValueError):
        expm_skew(np.array([[0.0, np.nan], [-np.nan, 0.0]]))
    with pytest.raises(ValueError):
        expm_skew(np.zeros((2, 3)))


def test_reorthogonalize_polar_projection():
    rng = np.random.default_rng(11)
    q = random_orthogonal(4, seed=5)
    noisy = q + 1e-6 * rng.standard_normal((4, 4))
    fixed = reorthogonalize(noisy)
    assert ortho_drift(fixed) <= 1e-14
    assert np.abs(fixed - q).max() <= 1e-5
    with pytest.raises(ValueError):
        reorthogonalize(np.array([[1.0, 1.0], [1.0, 1.0]]))  # rank one


def test_random_orthogonal_seeded():
    a = random_orthogonal(5, seed=9)
    b = random_orthogonal(5, seed=9)
    assert np.array_equal(a, b)
    assert ortho_drift(a) <= 1e-13
    assert not np.allclose(a, random_orthogonal(5, seed=10))


def test_order_validation():
    for bad in (0, -1, 2.5):
        with pytest.raises(ValueError):
            commutation_matrix(bad)

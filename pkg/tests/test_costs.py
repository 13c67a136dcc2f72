"""Cost families and their moment statistics, checked against hand-rolled
loop oracles, finite differences of the defining callables, and integer
datasets whose moments are exact in floating point."""

import numpy as np
import pytest

from orthnewton.costs import (
    CompositeCost,
    SeparableCost,
    cost_value,
    evaluate,
    kurtosis,
    make_neg_kurtosis,
    make_neg_kurtosis_squared,
)


def r_oracle(dfv, y):
    """R[k, i] = mean_s df_i(y_i) y_k by explicit loops."""
    n, t = y.shape
    r = np.zeros((n, n))
    for i in range(n):
        for k in range(n):
            r[k, i] = sum(dfv[i, s] * y[k, s] for s in range(t)) / t
    return r


def u_oracle(d2fv, y):
    """U[i, k, l] = mean_s d2f_i(y_i) y_k y_l by explicit loops."""
    n, t = y.shape
    u = np.zeros((n, n, n))
    for i in range(n):
        for k in range(n):
            for l in range(n):
                u[i, k, l] = sum(d2fv[i, s] * y[k, s] * y[l, s]
                                 for s in range(t)) / t
    return u


def test_kurtosis_exact_values():
    # +-1 two-point: m2 = m4 = 1 exactly, kurtosis exactly -2
    assert kurtosis(np.array([1.0, -1.0, 1.0, -1.0])) == -2.0
    # scaling by a power of two keeps it exact
    assert kurtosis(np.array([2.0, -2.0, 2.0, -2.0])) == -2.0
    # [+-2 once, six zeros]: m2 = 8/8 = 1, m4 = 32/8 = 4, kurtosis exactly 1
    assert kurtosis(np.array([2.0, -2.0, 0, 0, 0, 0, 0, 0])) == 1.0


def test_kurtosis_reference_distributions():
    rng = np.random.default_rng(4)
    assert kurtosis(rng.standard_normal(200000)) == pytest.approx(0.0, abs=0.05)
    assert kurtosis(rng.uniform(-1, 1, 200000)) == pytest.approx(-1.2, abs=0.02)
    assert kurtosis(rng.laplace(0, 1, 200000)) == pytest.approx(3.0, abs=0.15)


def test_kurtosis_degenerate_channel():
    with pytest.raises(ValueError, match="degenerate"):
        kurtosis(np.zeros(10))
    with pytest.raises(ValueError, match="degenerate"):
        kurtosis(np.full(10, 1e-9))
    with pytest.raises(ValueError):
        kurtosis(np.array([1.0]))


def test_neg_kurtosis_value_is_minus_kurtosis_at_unit_power():
    # f(y) = 3 - y^4 averages to -kurtosis exactly when E(y^2) = 1
    y = np.array([[1.0, -1.0, 1.0, -1.0],
                  [2.0, -2.0, 0.0, 0.0]])  # powers 1 and 2
    cost = make_neg_kurtosis()
    f = cost_value(cost, y)
    # channel 1: m4 = 1 -> 2; channel 2: m2 = 2, m4 = 8 -> 3 - 8 = -5
    assert f == 2.0 + (-5.0)
    # at unit power the identity with kurtosis() is exact
    assert 3.0 - np.mean(y[0] ** 4) == -kurtosis(y[0])


def test_neg_kurtosis_squared_value():
    # g(u) = -u^2 on u = mean(y^4) - 3
    y = np.array([[1.0, -1.0, 1.0, -1.0],
                  [2.0, -2.0, 0.0, 0.0]])
    f = cost_value(make_neg_kurtosis_squared(), y)
    assert f == -((1.0 - 3.0) ** 2) + -((8.0 - 3.0) ** 2)


@pytest.mark.parametrize("factory", [make_neg_kurtosis, make_neg_kurtosis_squared])
def test_builtin_derivatives_match_finite_differences(factory):
    cost = factory()
    grid = np.linspace(-2.0, 2.0, 17)
    h = 1e-6
    fd_df = (cost.f(grid + h) - cost.f(grid - h)) / (2 * h)
    np.testing.assert_allclose(cost.df(grid), fd_df, rtol=1e-7, atol=1e-7)
    fd_d2f = (cost.df(grid + h) - cost.df(grid - h)) / (2 * h)
    np.testing.assert_allclose(cost.d2f(grid), fd_d2f, rtol=1e-6, atol=1e-6)
    if isinstance(cost, CompositeCost):
        fd_dg = (cost.g(grid + h) - cost.g(grid - h)) / (2 * h)
        np.testing.assert_allclose(cost.dg(grid), fd_dg, rtol=1e-7, atol=1e-7)
        fd_d2g = (cost.dg(grid + h) - cost.dg(grid - h)) / (2 * h)
        np.testing.assert_allclose(cost.d2g(grid), fd_d2g, rtol=1e-6, atol=1e-6)


def test_separable_statistics_match_loop_oracle():
    rng = np.random.default_rng(21)
    y = rng.standard_normal((3, 40))
    cost = make_neg_kurtosis()
    ev = evaluate(cost, y)
    np.testing.assert_allclose(ev.r, r_oracle(cost.df(y), y), rtol=0, atol=1e-13)
    np.testing.assert_allclose(ev.u, u_oracle(cost.d2f(y), y), rtol=0, atol=1e-12)


def test_composite_statistics_match_chain_rule_oracle():
    rng = np.random.default_rng(22)
    y = rng.standard_normal((3, 40))
    cost = make_neg_kurtosis_squared()
    ev = evaluate(cost, y)
    means = np.mean(cost.f(y), axis=1)
    gp, gpp = cost.dg(means), cost.d2g(means)
    r_in = r_oracle(cost.df(y), y)
    u_in = u_oracle(cost.d2f(y), y)
    n = y.shape[0]
    r_expect = np.zeros((n, n))
    u_expect = np.zeros((n, n, n))
    for i in range(n):
        for k in range(n):
            r_expect[k, i] = gp[i] * r_in[k, i]
            for l in range(n):
                u_expect[i, k, l] = (gp[i] * u_in[i, k, l]
                                     + gpp[i] * r_in[k, i] * r_in[l, i])
    np.testing.assert_allclose(ev.r, r_expect, rtol=0, atol=1e-12)
    np.testing.assert_allclose(ev.u, u_expect, rtol=0, atol=1e-11)


def test_composite_chain_rule_against_finite_differences():
    # independent confirmation: R must be the gradient of F(diag-free
    # perturbation), probed channel per channel through the full composite
    rng = np.random.default_rng(23)
    y = rng.standard_normal((2, 300))
    cost = make_neg_kurtosis_squared()
    ev = evaluate(cost, y)
    h = 1e-6
    for i in range(2):
        for k in range(2):
            # perturb channel i by h * y_k: dF/dh = R[k, i] at h = 0
            yp, ym = y.copy(), y.copy()
            yp[i] = y[i] + h * y[k]
            ym[i] = y[i] - h * y[k]
            fd = (cost_value(cost, yp) - cost_value(cost, ym)) / (2 * h)
            assert fd == pytest.approx(ev.r[k, i], rel=1e-6, abs=1e-8)


def test_u_blocks_are_symmetric():
    # symmetric up to the roundoff of the two product orderings
    rng = np.random.default_rng(24)
    y = rng.standard_normal((4, 60))
    for cost in (make_neg_kurtosis(), make_neg_kurtosis_squared()):
        ev = evaluate(cost, y)
        gap = np.abs(ev.u - np.transpose(ev.u, (0, 2, 1))).max()
        assert gap <= 1e-13 * np.abs(ev.u).max()


def test_cost_value_bitwise_matches_evaluate():
    rng = np.random.default_rng(25)
    y = rng.standard_normal((3, 101))
    for cost in (make_neg_kurtosis(), make_neg_kurtosis_squared()):
        assert cost_value(cost, y) == evaluate(cost, y).f


def test_per_channel_callables_match_shared():
    y = np.random.default_rng(26).standard_normal((3, 30))
    shared = make_neg_kurtosis()
    split = SeparableCost(
        f=[shared.f] * 3, df=[shared.df] * 3, d2f=[shared.d2f] * 3)
    assert cost_value(split, y) == cost_value(shared, y)
    ev_a, ev_b = evaluate(split, y), evaluate(shared, y)
    assert np.array_equal(ev_a.r, ev_b.r) and np.array_equal(ev_a.u, ev_b.u)


def test_per_channel_callables_length_checked():
    y = np.random.default_rng(27).standard_normal((3, 30))
    f = make_neg_kurtosis()
    bad = SeparableCost(f=[f.f] * 2, df=[f.df] * 2, d2f=[f.d2f] * 2)
    with pytest.raises(ValueError, match="channel functions"):
        cost_value(bad, y)


def test_input_validation():
    cost = make_neg_kurtosis()
    with pytest.raises(ValueError):
        cost_value(cost, np.zeros(5))  # not 2-D
    with pytest.raises(ValueError):
        cost_value(cost, np.zeros((2, 1)))  # single sample
    with pytest.raises(ValueError, match="non-finite"):
        cost_value(cost, np.array([[1.0, np.inf], [0.0, 1.0]]))


def test_nonfinite_statistic_raises():
    huge = np.full((2, 4), 1e200)
    with np.errstate(over="ignore"):
        with pytest.raises(ValueError, match="non-finite statistic"):
            cost_value(make_neg_kurtosis(), huge)

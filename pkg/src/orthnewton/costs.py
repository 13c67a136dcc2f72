"""Sample-moment cost models over multichannel data.

A cost assigns to an n-by-t sample matrix Y the scalar
F(Y) = sum_i E_s[f_i(Y[i, s])] for separable costs, or
F(Y) = sum_i g(E_s[f_i(Y[i, s])]) for composite costs, where E_s is the
uniform sample mean.  Evaluation also produces the moment statistics
consumed by the second-order model:

    R[k, i] = E_s[f_i'(Y[i, s]) * Y[k, s]]
    U[i, k, l] = E_s[f_i''(Y[i, s]) * Y[k, s] * Y[l, s]]

with each U[i] symmetric.  For composite costs the chain rule folds the
outer derivatives into effective R and U so downstream consumers never
distinguish the two families.
"""

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

ChannelFn = Union[Callable[[np.ndarray], np.ndarray], Sequence[Callable]]


@dataclass(frozen=True)
class SeparableCost:
    """Per-channel marginal contrast f with first and second derivatives.

    Each of f, df, d2f is either a single vectorized callable applied to
    every channel or a sequence of per-channel callables of length n.
    """

    f: ChannelFn
    df: ChannelFn
    d2f: ChannelFn
    name: str = "custom"


@dataclass(frozen=True)
class CompositeCost:
    """Outer function g applied to the per-channel mean of an inner f."""

    f: ChannelFn
    df: ChannelFn
    d2f: ChannelFn
    g: Callable[[np.ndarray], np.ndarray]
    dg: Callable[[np.ndarray], np.ndarray]
    d2g: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"


@dataclass(frozen=True)
class CostEvaluation:
    """Cost value plus the moment statistics of the second-order model."""

    f: float
    r: np.ndarray  # (n, n)
    u: np.ndarray  # (n, n, n), u[i] symmetric


def _check_samples(samples: np.ndarray) -> np.ndarray:
    y = np.asarray(samples, dtype=float)
    if y.ndim != 2:
        raise ValueError(f"expected an (n, t) sample matrix, got shape {y.shape}")
    if y.shape[1] < 2:
        raise ValueError("need at least two samples per channel")
    if not np.all(np.isfinite(y)):
        raise ValueError("non-finite samples")
    return y


def _apply(fn: ChannelFn, y: np.ndarray) -> np.ndarray:
    """Apply a shared callable or per-channel callables row-wise."""
    if callable(fn):
        return np.asarray(fn(y), dtype=float)
    if len(fn) != y.shape[0]:
        raise ValueError(f"got {len(fn)} channel functions for {y.shape[0]} channels")
    return np.vstack([np.asarray(f(y[i]), dtype=float) for i, f in enumerate(fn)])


def cost_value(cost, samples: np.ndarray) -> float:
    """F(Y) alone, sharing the arithmetic of :func:`evaluate` exactly."""
    y = _check_samples(samples)
    channel_means = np.mean(_apply(cost.f, y), axis=1)
    if isinstance(cost, CompositeCost):
        value = float(np.sum(np.asarray(cost.g(channel_means), dtype=float)))
    else:
        value = float(np.sum(channel_means))
    if not np.isfinite(value):
        raise ValueError("non-finite statistic")
    return value


def evaluate(cost, samples: np.ndarray) -> CostEvaluation:
    """Cost value and the moment statistics R and U at the given samples."""
    y = _check_samples(samples)
    n, t = y.shape
    dfv = _apply(cost.df, y)
    d2fv = _apply(cost.d2f, y)
    r_inner = y @ dfv.T / t
    u_inner = np.einsum("is,ks,ls->ikl", d2fv, y, y) / t

    if isinstance(cost, CompositeCost):
        channel_means = np.mean(_apply(cost.f, y), axis=1)
        f_val = float(np.sum(np.asarray(cost.g(channel_means), dtype=float)))
        gp = np.asarray(cost.dg(channel_means), dtype=float)
        gpp = np.asarray(cost.d2g(channel_means), dtype=float)
        r = r_inner * gp[np.newaxis, :]
        # columns of r_inner are the inner gradients; their outer products
        # carry the second-order effect of the outer function
        cols = r_inner.T  # cols[i] = r_inner[:, i]
        u = gp[:, None, None] * u_inner + gpp[:, None, None] * (
            cols[:, :, None] * cols[:, None, :]
        )
    else:
        f_val = float(np.sum(np.mean(_apply(cost.f, y), axis=1)))
        r = r_inner
        u = u_inner

    if not (np.isfinite(f_val) and np.all(np.isfinite(r)) and np.all(np.isfinite(u))):
        raise ValueError("non-finite statistic")
    return CostEvaluation(f=f_val, r=r, u=u)


def kurtosis(x: np.ndarray) -> float:
    """Excess kurtosis E(x^4)/E(x^2)^2 - 3 with uniform sample moments."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("expected a one-dimensional sample vector")
    m2 = float(np.mean(x * x))
    if m2 <= 1e-12:
        raise ValueError("degenerate channel: second moment below 1e-12")
    return float(np.mean(x**4)) / (m2 * m2) - 3.0


def make_neg_kurtosis() -> SeparableCost:
    """Cost -kappa per channel, in the unit-variance form f(y) = -(y^4 - 3)."""
    return SeparableCost(
        f=lambda y: 3.0 - y**4,
        df=lambda y: -4.0 * y**3,
        d2f=lambda y: -12.0 * y**2,
        name="neg_kurtosis",
    )


def make_neg_kurtosis_squared() -> CompositeCost:
    """Cost -kappa^2 per channel: inner f(y) = y^4 - 3, outer g(u) = -u^2."""
    return CompositeCost(
        f=lambda y: y**4 - 3.0,
        df=lambda y: 4.0 * y**3,
        d2f=lambda y: 12.0 * y**2,
        g=lambda u: -(u * u),
        dg=lambda u: -2.0 * u,
        d2g=lambda u: -2.0 * np.ones_like(u),
        name="neg_kurtosis_squared",
    )

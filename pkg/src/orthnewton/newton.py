"""Assembly and solution of the second-order model step on the skew subspace.

The cost admits the expansion (Delta skew, D = exp(Delta))

    F(D Y) = F + tr(Delta R) + tr(Delta^2 R)/2
             + (1/2) sum_{i,k,l} Delta[i,k] Delta[i,l] U[i,k,l] + O(Delta^3)

whose gradient in vec coordinates is vec(R) + W vec(Delta) with

    W = (R' kron I + I kron R)/2 + blockdiag(U[0..n-1]) K,

K the commutation matrix.  Rotating by the pair rotation and restricting to
the antisymmetric slots gives a reduced n_a = n(n-1)/2 linear system; the
remaining n(n+1)/2 symmetric slots decouple as an identity block.  The
reduced block stored here is the second-derivative (Hessian) matrix of
F(exp(.)Y) in the sqrt(2)-scaled skew coordinates, so adding lambda >= 0 to
its diagonal interpolates between the Newton step and a short gradient
descent step.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .operators import (
    antisym_projector,
    antisym_slots,
    commutation_matrix,
    pair_rotation,
    skew_from_coords,
    skew_pairs,
    sym_projector,
    vec,
)

# Reduced systems with condition estimates beyond this are refused.
CONDITION_LIMIT = 1e12

# Reduced right-hand sides below this norm short-circuit to a zero step.
STATIONARY_RHS = 1e-14


class SolverError(RuntimeError):
    """Raised when the reduced system cannot be solved reliably."""

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True)
class NewtonSystem:
    """Assembled model system at one iterate.

    m_red is the undamped curvature block on the antisymmetric slots and
    rhs_red the matching negative-gradient right-hand side; m_full is the
    damped n^2 x n^2 operator, a direct sum of m_red + lam*I and
    (1 + lam)*I on the symmetric slots.
    """

    n: int
    lam: float
    w: np.ndarray
    m_full: np.ndarray
    m_red: np.ndarray
    rhs_red: np.ndarray


@dataclass(frozen=True)
class SparsityReport:
    """Structure counts of the undamped reduced block."""

    n: int
    antisym_size: int
    sym_size: int
    nnz_offdiag: int
    bound: int


def build_model_operator(ev) -> np.ndarray:
    """The n^2 x n^2 operator W mapping vec(Delta) to the model gradient shift."""
    r = np.asarray(ev.r, dtype=float)
    u = np.asarray(ev.u, dtype=float)
    n = r.shape[0]
    eye_n = np.eye(n)
    w = 0.5 * (np.kron(r.T, eye_n) + np.kron(eye_n, r))
    w += scipy.linalg.block_diag(*u) @ commutation_matrix(n)
    return w


def reduced_gradient(r: np.ndarray) -> np.ndarray:
    """Gradient of F(exp(.)Y) at zero in the sqrt(2)-scaled skew coordinates.

    Component p for the pair (i, j), i > j, is (R[i,j] - R[j,i])/sqrt(2).
    """
    r = np.asarray(r, dtype=float)
    n = r.shape[0]
    return np.array([(r[i, j] - r[j, i]) / np.sqrt(2.0) for i, j in skew_pairs(n)])


def assemble(ev, lam: float = 0.0) -> NewtonSystem:
    """Build the damped model system from one cost evaluation."""
    if lam < 0.0 or not np.isfinite(lam):
        raise ValueError(f"damping parameter must be finite and >= 0, got {lam}")
    r = np.asarray(ev.r, dtype=float)
    n = r.shape[0]
    w = build_model_operator(ev)
    h = pair_rotation(n)
    hwh = h @ w @ h.T
    pa = antisym_projector(n)
    a_idx = antisym_slots(n)
    # negated so the block is the second derivative of the cost along the
    # skew coordinates: +lam then damps toward gradient descent
    m_red = -hwh[np.ix_(a_idx, a_idx)]
    m_full = -(pa @ hwh @ pa) + sym_projector(n) + lam * np.eye(n * n)
    rhs_red = (h @ vec(r))[a_idx]
    return NewtonSystem(n=n, lam=float(lam), w=w, m_full=m_full, m_red=m_red, rhs_red=rhs_red)


def solve_step(system: NewtonSystem) -> np.ndarray:
    """Solve the reduced system and return the exactly-skew step matrix.

    Returns the zero matrix when the right-hand side is already below the
    stationarity floor; raises :class:`SolverError` when the damped block's
    condition estimate exceeds 1e12 or the solve is otherwise unreliable.
    """
    n = system.n
    rhs = system.rhs_red
    if np.linalg.norm(rhs) < STATIONARY_RHS:
        return np.zeros((n, n))
    m = system.m_red + system.lam * np.eye(len(rhs))
    cond = float(np.linalg.cond(m))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SolverError(
            f"reduced system is ill-conditioned (estimate {cond:.3e})",
            condition=cond,
        )
    y = np.linalg.solve(m, rhs)
    y += np.linalg.solve(m, rhs - m @ y)  # one refinement pass
    if not np.all(np.isfinite(y)):
        raise SolverError("non-finite solution from the reduced solve", condition=cond)
    return skew_from_coords(y, n)


def model_value(ev, delta: np.ndarray) -> float:
    """Second-order model of F(exp(Delta) Y) around the evaluated iterate."""
    delta = np.asarray(delta, dtype=float)
    r = np.asarray(ev.r, dtype=float)
    u = np.asarray(ev.u, dtype=float)
    value = ev.f
    value += float(np.trace(delta @ r))
    value += 0.5 * float(np.trace(delta @ delta @ r))
    value += 0.5 * float(np.einsum("ik,il,ikl->", delta, delta, u))
    return value


def sparsity_report(system: NewtonSystem) -> SparsityReport:
    """Count off-diagonal nonzeros of the undamped reduced block."""
    if system.lam != 0.0:
        raise ValueError("sparsity_report expects an undamped system (lam = 0)")
    n = system.n
    off = system.m_red.copy()
    np.fill_diagonal(off, 0.0)
    return SparsityReport(
        n=n,
        antisym_size=n * (n - 1) // 2,
        sym_size=n * (n + 1) // 2,
        nnz_offdiag=int(np.count_nonzero(off)),
        bound=n * (n - 1) * (n - 2),
    )

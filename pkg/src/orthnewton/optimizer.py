"""Iterative minimization over the orthogonal group in exponential coordinates.

Each outer iteration solves the second-order model on the skew subspace and
applies the multiplicative update C <- exp(Delta) C.  Two modes:

* pure Newton: the undamped step is always applied;
* Levenberg-Marquardt: a candidate computed at the current damping lambda is
  accepted only if the cost does not increase (ties accept); on rejection
  lambda is multiplied by alpha and the candidate recomputed, on acceptance
  lambda decays by 1/alpha and carries over to the next iteration.

The run is fully deterministic given its inputs: no randomness is consumed.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .costs import cost_value, evaluate
from .newton import SolverError, assemble, solve_step
from .operators import ORTHO_DRIFT_LIMIT, expm_skew, ortho_drift, reorthogonalize

PURE_NEWTON = "pure_newton"
LEVENBERG_MARQUARDT = "levenberg_marquardt"

STEP_TOL = "step_tol"
COST_TOL = "cost_tol"
MAX_ITER = "max_iter"
LAMBDA_OVERFLOW = "lambda_overflow"
SOLVER_FAILURE = "solver_failure"

FAILURE_TERMINATIONS = (LAMBDA_OVERFLOW, SOLVER_FAILURE)


@dataclass(frozen=True)
class OptimizerConfig:
    """Loop controls; defaults follow the damped-Newton recipe lambda0 = 50,
    alpha = 10 with tolerance-based stopping."""

    mode: str = LEVENBERG_MARQUARDT
    lambda0: float = 50.0
    alpha: float = 10.0
    lambda_min: float = 1e-12
    lambda_max: float = 1e12
    max_iter: int = 200
    max_inner: int = 60
    tol_step: float = 1e-10
    tol_cost: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (PURE_NEWTON, LEVENBERG_MARQUARDT):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not (self.alpha > 1.0):
            raise ValueError("alpha must exceed 1")
        if not (0.0 <= self.lambda_min <= self.lambda0 <= self.lambda_max):
            raise ValueError("need 0 <= lambda_min <= lambda0 <= lambda_max")
        if self.max_iter < 1 or self.max_inner < 1:
            raise ValueError("iteration limits must be positive")
        if self.tol_step < 0.0 or self.tol_cost < 0.0:
            raise ValueError("tolerances must be nonnegative")


@dataclass(frozen=True)
class IterationRecord:
    """One accepted outer iteration."""

    t: int
    f: float
    step_norm: float
    lam: float
    rejected: int
    ortho_drift: float


@dataclass(frozen=True)
class RunResult:
    c_final: np.ndarray
    y_final: np.ndarray
    trace: list[IterationRecord] = field(default_factory=list)
    termination: str = MAX_ITER


def lm_inner_step(cost, y: np.ndarray, ev, lam: float):
    """One damped candidate: returns (delta, f_new, accepted), mutating nothing.

    Solver errors propagate; the caller owns lambda escalation.
    """
    system = assemble(ev, lam)
    delta = solve_step(system)
    f_new = cost_value(cost, expm_skew(delta) @ y)
    accepted = math.isfinite(f_new) and f_new <= ev.f
    return delta, f_new, accepted


def check_convergence(trace: list[IterationRecord], config: OptimizerConfig):
    """Termination reason implied by the trace so far, or None to continue."""
    if not trace:
        return None
    if trace[-1].step_norm < config.tol_step:
        return STEP_TOL
    if len(trace) >= 2 and abs(trace[-1].f - trace[-2].f) < config.tol_cost:
        return COST_TOL
    if trace[-1].t + 1 >= config.max_iter:
        return MAX_ITER
    return None


def run(cost, x: np.ndarray, c0: np.ndarray | None = None,
        config: OptimizerConfig | None = None) -> RunResult:
    """Minimize the cost over orthogonal C acting on the sample matrix x."""
    config = config or OptimizerConfig()
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if c0 is None:
        c = np.eye(n)
    else:
        c = np.asarray(c0, dtype=float)
        if c.shape != (n, n):
            raise ValueError(f"c0 has shape {c.shape}, expected {(n, n)}")
        if ortho_drift(c) > 1e-8:
            raise ValueError("c0 is not orthogonal")
    y = c @ x
    ev = evaluate(cost, y)
    lam = config.lambda0
    trace: list[IterationRecord] = []
    termination = MAX_ITER

    for t in range(config.max_iter):
        if config.mode == PURE_NEWTON:
            try:
                delta = solve_step(assemble(ev, 0.0))
                d = expm_skew(delta)
                y_new = d @ y
                ev_new = evaluate(cost, y_new)
            except (SolverError, ValueError):
                termination = SOLVER_FAILURE
                break
            lam_used, rejected = 0.0, 0
        else:
            rejected = 0
            accepted = False
            while True:
                try:
                    delta, f_new, accepted = lm_inner_step(cost, y, ev, lam)
                except (SolverError, ValueError):
                    accepted = False
                if accepted:
                    break
                rejected += 1
                lam = lam * config.alpha
                if lam > config.lambda_max or rejected >= config.max_inner:
                    break
            if not accepted:
                termination = LAMBDA_OVERFLOW
                break
            lam_used = lam
            d = expm_skew(delta)
            y_new = d @ y
            ev_new = evaluate(cost, y_new)
            lam = max(lam / config.alpha, config.lambda_min)

        c = d @ c
        y = y_new
        ev = ev_new
        drift = ortho_drift(c)
        if drift > ORTHO_DRIFT_LIMIT:
            c = reorthogonalize(c)
            y = c @ x
            ev = evaluate(cost, y)
            drift = ortho_drift(c)
        trace.append(IterationRecord(
            t=t,
            f=ev.f,
            step_norm=float(np.linalg.norm(delta)),
            lam=lam_used,
            rejected=rejected,
            ortho_drift=drift,
        ))
        reason = check_convergence(trace, config)
        if reason is not None:
            termination = reason
            break

    return RunResult(c_final=c, y_final=y, trace=trace, termination=termination)

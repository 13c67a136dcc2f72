"""Vectorization, projection and rotation operators on n^2-dimensional
coordinate space, plus the skew matrix exponential and polar
reorthogonalization.

Square matrices are flattened column-major ("vec" order): slot k*n + l holds
entry (row l, column k), zero-based.  Under the pair rotation built here, the
strict-upper-triangle slots of a rotated vector carry the antisymmetric
combinations (A[j,i] - A[i,j])/sqrt(2) and the remaining slots carry the
symmetric combinations; a skew matrix is therefore described by the
n*(n-1)/2 coordinates on the antisymmetric slots alone.
"""

import numpy as np
import scipy.linalg

SQRT2 = float(np.sqrt(2.0))

# Frobenius drift beyond which an orthogonal iterate gets reprojected.
ORTHO_DRIFT_LIMIT = 1e-10


def vec(a: np.ndarray) -> np.ndarray:
    """Column-major flattening of a square matrix into a length n^2 vector."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a.flatten(order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vec`; the input length must be a perfect square."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got shape {v.shape}")
    n = int(round(np.sqrt(v.size)))
    if n * n != v.size:
        raise ValueError(f"length {v.size} is not a perfect square")
    return v.reshape((n, n), order="F")


def commutation_matrix(n: int) -> np.ndarray:
    """Permutation K with K @ vec(A) = vec(A.T).  K is its own inverse."""
    _check_order(n)
    idx = np.arange(n * n)
    k = np.zeros((n * n, n * n))
    k[(idx % n) * n + idx // n, idx] = 1.0
    return k


def pair_rotation(n: int) -> np.ndarray:
    """Aggregate of pi/4 rotations acting on each (upper, lower) slot pair.

    For every column i > row j the 2x2 block on slots
    (i*n + j, j*n + i) is [[1, -1], [1, 1]]/sqrt(2), rows in that order,
    so the upper slot of the rotated vector receives the antisymmetric
    combination and the lower slot the symmetric one.  All diagonal-entry
    slots are left as zero rows; adding :func:`diag_projector` completes
    the map to an orthogonal matrix.
    """
    _check_order(n)
    h = np.zeros((n * n, n * n))
    c = 1.0 / SQRT2
    for i in range(n):
        for j in range(i):
            upper = i * n + j  # slot of entry (row j, col i)
            lower = j * n + i  # slot of entry (row i, col j)
            h[upper, upper] = c
            h[upper, lower] = -c
            h[lower, upper] = c
            h[lower, lower] = c
    return h


def diag_projector(n: int) -> np.ndarray:
    """Orthogonal projector onto the diagonal-entry slots."""
    _check_order(n)
    p = np.zeros((n * n, n * n))
    for i in range(n):
        p[i * n + i, i * n + i] = 1.0
    return p


def sym_projector(n: int) -> np.ndarray:
    """Projector onto the lower-triangle-plus-diagonal slots.

    After the pair rotation these slots carry the symmetric combinations.
    Its trace is n*(n+1)/2.
    """
    _check_order(n)
    p = np.zeros((n * n, n * n))
    for s in sym_slots(n):
        p[s, s] = 1.0
    return p


def antisym_projector(n: int) -> np.ndarray:
    """Complement of :func:`sym_projector`: the strict-upper-triangle slots.

    After the pair rotation these slots carry the antisymmetric combinations.
    Its trace is n*(n-1)/2.
    """
    return np.eye(n * n) - sym_projector(n)


def antisym_slots(n: int) -> list[int]:
    """Vec slots of strict-upper-triangle entries, ascending slot order."""
    _check_order(n)
    return [i * n + j for i in range(n) for j in range(i)]


def sym_slots(n: int) -> list[int]:
    """Vec slots of lower-triangle and diagonal entries, ascending order."""
    _check_order(n)
    return [i * n + j for i in range(n) for j in range(i, n)]


def skew_pairs(n: int) -> list[tuple[int, int]]:
    """Index pairs (i, j) with i > j, aligned with :func:`antisym_slots`.

    Pair p corresponds to the orthonormal skew basis matrix
    G_p = (E[j,i] - E[i,j]) / sqrt(2).
    """
    _check_order(n)
    return [(i, j) for i in range(n) for j in range(i)]


def skew_from_coords(y: np.ndarray, n: int) -> np.ndarray:
    """Skew matrix sum_p y[p] * G_p; exactly antisymmetric by construction."""
    y = np.asarray(y, dtype=float)
    pairs = skew_pairs(n)
    if y.shape != (len(pairs),):
        raise ValueError(f"expected {len(pairs)} coordinates, got shape {y.shape}")
    delta = np.zeros((n, n))
    for p, (i, j) in enumerate(pairs):
        c = y[p] / SQRT2
        delta[j, i] = c
        delta[i, j] = -c
    return delta


def coords_from_skew(delta: np.ndarray) -> np.ndarray:
    """Coordinates of a skew matrix in the G_p basis (inverse of skew_from_coords)."""
    delta = np.asarray(delta, dtype=float)
    n = delta.shape[0]
    return np.array([(delta[j, i] - delta[i, j]) / SQRT2 for i, j in skew_pairs(n)])


def expm_skew(delta: np.ndarray) -> np.ndarray:
    """Matrix exponential of a skew-symmetric matrix.

    The result is orthogonal with determinant +1; orthogonality holds to
    1e-12 in Frobenius norm for ||delta||_F up to about 10.
    """
    delta = np.asarray(delta, dtype=float)
    if delta.ndim != 2 or delta.shape[0] != delta.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {delta.shape}")
    if not np.all(np.isfinite(delta)):
        raise ValueError("non-finite entries in the step matrix")
    scale = 1.0 + np.abs(delta).max()
    if np.abs(delta + delta.T).max() > 1e-10 * scale:
        raise ValueError("step matrix is not skew-symmetric")
    return scipy.linalg.expm(delta)


def reorthogonalize(c: np.ndarray) -> np.ndarray:
    """Nearest orthogonal matrix (polar factor) of a full-rank square matrix."""
    c = np.asarray(c, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("non-finite entries")
    u, s, vt = np.linalg.svd(c)
    if s[-1] <= 1e-12 * s[0]:
        raise ValueError("rank-deficient matrix has no unique polar factor")
    return u @ vt


def ortho_drift(c: np.ndarray) -> float:
    """Frobenius distance of C'C from the identity."""
    c = np.asarray(c, dtype=float)
    return float(np.linalg.norm(c.T @ c - np.eye(c.shape[0])))


def random_orthogonal(n: int, seed) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian, sign-fixed R)."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.where(np.diag(r) >= 0.0, 1.0, -1.0)


def _check_order(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"matrix order must be a positive integer, got {n!r}")

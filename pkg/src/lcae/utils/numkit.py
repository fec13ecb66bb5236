"""
Dense numerical kernels every other module builds on.

A "Mat" here is a two-dimensional float64 numpy array with samples stored
as columns (X = [x_1 | ... | x_N]). The helpers below validate that shape
contract at module boundaries and provide the closed-form solves the
trainer is made of: regularized least squares for weight blocks, stacked
least squares for proxy blocks, sigmoid/logit and power iteration.
"""

import logging
from typing import Sequence, Tuple

import numpy as np
from scipy import linalg as sla
from scipy.special import expit
from scipy.special import logit as _logit

from lcae.utils.errors import NumericError, ShapeError
from lcae.workers.cpu import map_column_chunks

logger = logging.getLogger(__name__)

DEFAULT_RIDGE = 1e-8
LOGIT_EPS = 1e-6
NORMAL_EQ_TOL = 1e-8
POWER_MAX_ITERS = 1000
POWER_TOL = 1e-8

# expit saturates to exactly 0.0 / 1.0 in float64; keep outputs open.
_SIGMOID_LO = np.finfo(np.float64).tiny
_SIGMOID_HI = 1.0 - 2.0 ** -53

Block = Tuple[np.ndarray, np.ndarray, float]


def as_mat(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float64 array; vectors become columns."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got {arr.ndim}-D")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains NaN or Inf")
    return arr


def append_bias_row(X: np.ndarray) -> np.ndarray:
    """Stack a constant-1 feature under the samples: [X; 1ᵀ]."""
    X = np.asarray(X, dtype=np.float64)
    return np.vstack([X, np.ones((1, X.shape[1]))])


def fro2(M: np.ndarray) -> float:
    """Squared Frobenius norm."""
    return float(np.sum(np.square(M)))


def sigmoid(v) -> np.ndarray:
    """Elementwise 1/(1+e^-v), strictly inside (0, 1)."""
    v = np.asarray(v, dtype=np.float64)
    return np.clip(expit(v), _SIGMOID_LO, _SIGMOID_HI)


def logit(v, eps: float = LOGIT_EPS) -> np.ndarray:
    """
    Elementwise ln(u/(1-u)) with u = clamp(v, eps, 1-eps).

    Proxy targets such as Z1 - B1 leave (0, 1) mid-iteration; the clamp
    keeps every output finite.
    """
    if not 0.0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 0.5), got {eps}")
    v = np.asarray(v, dtype=np.float64)
    return _logit(np.clip(v, eps, 1.0 - eps))


def _cholesky(G: np.ndarray, hint: str):
    try:
        factor = sla.cho_factor(G, lower=True, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"normal equations are singular ({e}); {hint}") from e

    diag = np.abs(np.diag(factor[0]))
    q = G.shape[0]
    if q and diag.min() ** 2 <= q * np.finfo(np.float64).eps * diag.max() ** 2:
        raise NumericError(f"normal equations are numerically singular; {hint}")
    return factor


def _check_normal_equations(G: np.ndarray, X: np.ndarray, R: np.ndarray, what: str):
    if not logger.isEnabledFor(logging.DEBUG):
        return
    scale = max(np.linalg.norm(R), np.finfo(np.float64).tiny)
    residual = np.linalg.norm(G @ X - R) / scale
    logger.debug(f"{what}: normal-equation residual {residual:.3e}")
    if residual > NORMAL_EQ_TOL:
        logger.warning(f"{what}: normal-equation residual {residual:.3e} exceeds {NORMAL_EQ_TOL}")


def ridge_lstsq_left(Y, Z, delta: float = DEFAULT_RIDGE) -> np.ndarray:
    """
    Solve min_W ||Y - W Z||_F^2 + delta ||W||_F^2 for W (p×q).

    Uses the normal equations W (Z Zᵀ + delta I) = Y Zᵀ with a Cholesky
    factorization.
    """
    Y = as_mat(Y, "Y")
    Z = as_mat(Z, "Z")
    if Y.shape[1] != Z.shape[1]:
        raise ShapeError(f"Y has {Y.shape[1]} columns but Z has {Z.shape[1]}")
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")

    G = Z @ Z.T
    if delta:
        G[np.diag_indices_from(G)] += delta
    R = Z @ Y.T

    factor = _cholesky(G, "pass delta > 0" if not delta else "increase delta")
    Wt = sla.cho_solve(factor, R, check_finite=False)
    _check_normal_equations(G, Wt, R, "ridge_lstsq_left")
    return Wt.T


def stacked_ridge_solve(
    blocks: Sequence[Block],
    ridge: float = 0.0,
    threads: int = 1,
) -> np.ndarray:
    """
    Solve min_Z sum_i w_i ||C_i - A_i Z||_F^2 (+ ridge ||Z||_F^2).

    Equivalent to least squares on the vertical stack of sqrt(w_i) A_i and
    sqrt(w_i) C_i, solved through (sum w_i A_iᵀA_i) Z = sum w_i A_iᵀC_i.
    Weights are rescaled by their maximum before accumulation, so a single
    block gives the same answer for every w.
    """
    if not blocks:
        raise ShapeError("stacked_ridge_solve needs at least one block")

    prepared = []
    for i, (A, C, w) in enumerate(blocks):
        A = as_mat(A, f"A[{i}]")
        C = as_mat(C, f"C[{i}]")
        w = float(w)
        if not w > 0:
            raise ValueError(f"block {i} weight must be > 0, got {w}")
        if A.shape[0] != C.shape[0]:
            raise ShapeError(f"block {i}: A has {A.shape[0]} rows but C has {C.shape[0]}")
        prepared.append((A, C, w))

    q = prepared[0][0].shape[1]
    n_cols = prepared[0][1].shape[1]
    for i, (A, C, _) in enumerate(prepared):
        if A.shape[1] != q:
            raise ShapeError(f"block {i}: A has {A.shape[1]} columns, expected {q}")
        if C.shape[1] != n_cols:
            raise ShapeError(f"block {i}: C has {C.shape[1]} columns, expected {n_cols}")

    w_max = max(w for _, _, w in prepared)
    G = np.zeros((q, q))
    R = np.zeros((q, n_cols))
    for A, C, w in prepared:
        s = w / w_max
        G += s * (A.T @ A)
        R += s * (A.T @ C)
    if ridge:
        G[np.diag_indices_from(G)] += ridge

    factor = _cholesky(G, "add an identity block or a ridge")
    Z = map_column_chunks(
        lambda rhs: sla.cho_solve(factor, rhs, check_finite=False), R, threads
    )
    _check_normal_equations(G, Z, R, "stacked_ridge_solve")
    return Z


def max_eig_sym(A) -> float:
    """
    Largest eigenvalue of AᵀA by power iteration.
    Starts from the normalized all-ones vector; stops when successive
    Rayleigh quotients differ by less than 1e-8 relative.
    """
    A = as_mat(A, "A")
    if not np.any(A):
        raise ValueError("max_eig_sym needs a nonzero matrix")

    n = A.shape[1]
    v = np.ones(n) / np.sqrt(n)
    lam_prev = 0.0
    lam = 0.0
    for it in range(POWER_MAX_ITERS):
        w = A.T @ (A @ v)
        lam = float(v @ w)
        nrm = np.linalg.norm(w)
        if nrm == 0:
            # Start vector lies in the null space
            return lam
        v = w / nrm
        if it > 0 and abs(lam - lam_prev) < POWER_TOL * abs(lam):
            break
        lam_prev = lam
    else:
        logger.warning(f"max_eig_sym: no convergence after {POWER_MAX_ITERS} iterations")
    return lam

"""
Designed compressed-sensing recovery: Orthogonal Matching Pursuit and the
Iterative Soft Thresholding Algorithm.

Both work on a generic A (m×n) and a measurement y (m×1). For windows
sensed by Φ the CLI recovers DCT coefficients α with A = ΦΨ and returns
the synthesis x = Ψα; see `recover_windows`.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy import fft

from lcae.sensing import SensingMatrix
from lcae.utils.errors import ConfigError, ShapeError
from lcae.utils.numkit import as_mat, max_eig_sym

logger = logging.getLogger(__name__)

OMP_RESIDUAL_FLOOR = 1e-12


@dataclass
class OmpResult:
    x: np.ndarray
    support: Tuple[int, ...]
    residual_norm: float


@dataclass
class IstaConfig:
    """ISTA settings. step=None means sigma = 1 / max eigenvalue of AᵀA."""

    lam: float = 0.01
    max_iters: int = 2000
    tol: float = 1e-6
    step: Optional[float] = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError(f"ista lambda must be > 0, got {self.lam}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ConfigError(f"ista max_iters must be a positive integer, got {self.max_iters}")
        if not self.tol > 0:
            raise ConfigError(f"ista tol must be > 0, got {self.tol}")
        if self.step is not None and not self.step > 0:
            raise ConfigError(f"ista step must be > 0, got {self.step}")


def _check_system(A, y) -> Tuple[np.ndarray, np.ndarray]:
    A = as_mat(A, "A")
    y = as_mat(y, "y")
    if y.shape != (A.shape[0], 1):
        raise ShapeError(f"y must be {A.shape[0]}x1 for a {A.shape[0]}x{A.shape[1]} A, got {y.shape}")
    return A, y


def omp(A, y, k: int) -> OmpResult:
    """
    Greedy k-sparse recovery.

    Each iteration correlates the residual with every unused column, adds
    the strongest one (lowest index on ties) to the support, re-fits the
    support by least squares and updates the residual. Stops early once
    the residual norm drops below 1e-12.
    """
    A, y = _check_system(A, y)
    m, n = A.shape
    if not 1 <= k <= min(m, n):
        raise ConfigError(f"omp sparsity k must lie in [1, {min(m, n)}], got {k}")

    support: List[int] = []
    coef = np.zeros((0, 1))
    residual = y.copy()
    used = np.zeros(n, dtype=bool)

    for it in range(k):
        corr = np.abs(A.T @ residual).ravel()
        corr[used] = -np.inf
        pos = int(np.argmax(corr))
        support.append(pos)
        used[pos] = True

        A_s = A[:, support]
        coef, *_ = np.linalg.lstsq(A_s, y, rcond=None)
        residual = y - A_s @ coef

        if np.linalg.norm(residual) < OMP_RESIDUAL_FLOOR:
            logger.debug(f"omp: zero residual after {it + 1} of {k} iterations")
            break

    x = np.zeros((n, 1))
    x[support, :] = coef
    return OmpResult(x=x, support=tuple(support), residual_norm=float(np.linalg.norm(residual)))


def soft_threshold(b, t: float) -> np.ndarray:
    """sign(b) * max(0, |b| - t), elementwise."""
    if t < 0:
        raise ValueError(f"threshold must be >= 0, got {t}")
    b = np.asarray(b, dtype=np.float64)
    return np.sign(b) * np.maximum(0.0, np.abs(b) - t)


def ista_objective(A: np.ndarray, y: np.ndarray, x: np.ndarray, lam: float) -> float:
    r = y - A @ x
    return float(r.ravel() @ r.ravel() + lam * np.abs(x).sum())


def ista(A, y, cfg: IstaConfig, history: Optional[list] = None) -> np.ndarray:
    """
    Landweber step followed by shrinkage, starting from x = 0:

        b = x + sigma Aᵀ(y - A x)
        x = soft_threshold(b, lam * sigma / 2)

    Runs until the relative change of ||y - Ax||² + lam ||x||₁ falls below
    cfg.tol or cfg.max_iters is reached. When `history` is given, the
    objective of the start point and of every iterate is appended to it.
    """
    A, y = _check_system(A, y)
    sigma = cfg.step if cfg.step is not None else 1.0 / max_eig_sym(A)
    thresh = cfg.lam * sigma / 2.0

    x = np.zeros((A.shape[1], 1))
    prev = ista_objective(A, y, x, cfg.lam)
    if history is not None:
        history.append(prev)

    tiny = np.finfo(np.float64).tiny
    for it in range(1, cfg.max_iters + 1):
        b = x + sigma * (A.T @ (y - A @ x))
        x = soft_threshold(b, thresh)
        obj = ista_objective(A, y, x, cfg.lam)
        if history is not None:
            history.append(obj)
        if abs(prev - obj) <= cfg.tol * max(abs(prev), tiny):
            logger.debug(f"ista: converged after {it} iterations (objective {obj:.6e})")
            break
        prev = obj
    else:
        logger.debug(f"ista: stopped at max_iters={cfg.max_iters}")
    return x


def dct_basis(n: int) -> np.ndarray:
    """Orthonormal inverse-DCT synthesis matrix Ψ: column k is the k-th cosine atom."""
    if n < 1:
        raise ShapeError(f"basis size must be >= 1, got {n}")
    return fft.idct(np.eye(n), norm="ortho", axis=0)


@dataclass
class RecoveryParams:
    method: str = "ista"
    basis: str = "dct"
    k: Optional[int] = None
    ista: IstaConfig = field(default_factory=IstaConfig)

    def __post_init__(self):
        if self.method not in ("omp", "ista"):
            raise ConfigError(f"unknown recovery method {self.method!r} (omp or ista)")
        if self.basis not in ("dct", "identity"):
            raise ConfigError(f"unknown sparsifying basis {self.basis!r} (dct or identity)")


def sensing_operator(phi: SensingMatrix, basis: str = "dct") -> Tuple[np.ndarray, np.ndarray]:
    """(Ψ, A = ΦΨ) for the named sparsifying basis."""
    if basis not in ("dct", "identity"):
        raise ConfigError(f"unknown sparsifying basis {basis!r} (dct or identity)")
    psi = dct_basis(phi.n) if basis == "dct" else np.eye(phi.n)
    return psi, np.asarray(phi.to_sparse() @ psi)


def with_fixed_step(phi: SensingMatrix, params: RecoveryParams) -> RecoveryParams:
    """Copy of params whose ISTA step is set to 1 / max eigenvalue of AᵀA."""
    if params.ista.step is not None:
        return params
    _, A = sensing_operator(phi, params.basis)
    return replace(params, ista=replace(params.ista, step=1.0 / max_eig_sym(A)))


def recover_windows(phi: SensingMatrix, B, params: Optional[RecoveryParams] = None) -> np.ndarray:
    """
    Recover every column of B (m×N) with OMP or ISTA and return the
    time-domain windows (n×N).

    OMP defaults to k = max(1, m // 4). ISTA computes the step once for
    the whole batch.
    """
    params = params or RecoveryParams()
    B = as_mat(B, "B")
    if B.shape[0] != phi.m:
        raise ShapeError(f"measurements have {B.shape[0]} rows but the sensing matrix has m={phi.m}")

    basis, A = sensing_operator(phi, params.basis)
    out = np.empty((phi.n, B.shape[1]))
    if params.method == "omp":
        k = params.k if params.k is not None else max(1, phi.m // 4)
        for j in range(B.shape[1]):
            out[:, j] = omp(A, B[:, [j]], k).x.ravel()
    else:
        cfg = with_fixed_step(phi, params).ista
        for j in range(B.shape[1]):
            out[:, j] = ista(A, B[:, [j]], cfg).ravel()

    logger.info(f"Recovered {B.shape[1]} window(s) with {params.method} ({params.basis} basis)")
    return basis @ out

"""
Compression side of the pipeline.

A window z (length n) is sensed as b = Φz with a sparse binary Φ (m×n,
m < n), shipped, and turned back into a noisy full-length estimate by the
adjoint x' = ΦᵀΦz (the "poor man's inverse") that the autoencoder learns
to clean up.

Φ is stored by structure: for every column, the d row indices holding a 1.
Generation uses numpy's PCG64 bit generator seeded with the given 64-bit
seed; each column's rows are the d smallest of m uniform keys drawn from
`Generator.random`, so they are uniform without replacement.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

from lcae.utils.errors import ConfigError, DataFormatError, NumericError, ShapeError
from lcae.utils.numkit import as_mat

logger = logging.getLogger(__name__)

DEFAULT_ONES_PER_COL = 2
MAX_ATTEMPTS = 100


@dataclass(frozen=True, eq=False)
class SensingMatrix:
    """Sparse binary m×n operator; rows[j] are the row indices of column j."""

    m: int
    n: int
    ones_per_col: int
    seed: int
    rows: np.ndarray
    _csc: sparse.csc_matrix = field(init=False, repr=False)

    def __post_init__(self):
        if not 1 <= self.ones_per_col <= self.m:
            raise ShapeError(f"need 1 <= d <= m, got d={self.ones_per_col}, m={self.m}")
        rows = np.array(self.rows, dtype=np.int64)
        if rows.shape != (self.n, self.ones_per_col):
            raise ShapeError(
                f"row structure has shape {rows.shape}, expected ({self.n}, {self.ones_per_col})"
            )
        if not 1 <= self.m <= self.n:
            raise ShapeError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")
        if rows.size and (rows.min() < 0 or rows.max() >= self.m):
            raise ShapeError(f"row indices must lie in [0, {self.m})")
        for j, col in enumerate(rows):
            if len(set(col.tolist())) != self.ones_per_col:
                raise ShapeError(f"column {j} repeats a row index")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

        indptr = np.arange(0, self.n * self.ones_per_col + 1, self.ones_per_col)
        csc = sparse.csc_matrix(
            (np.ones(rows.size), rows.ravel(), indptr), shape=(self.m, self.n)
        )
        object.__setattr__(self, "_csc", csc)

    @property
    def d(self) -> int:
        return self.ones_per_col

    def to_sparse(self) -> sparse.csc_matrix:
        return self._csc

    def to_dense(self) -> np.ndarray:
        return self._csc.toarray()

    def row_counts(self) -> np.ndarray:
        """Number of ones in every row."""
        return np.bincount(self.rows.ravel(), minlength=self.m)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SensingMatrix):
            return NotImplemented
        return (
            (self.m, self.n, self.ones_per_col, self.seed)
            == (other.m, other.n, other.ones_per_col, other.seed)
            and np.array_equal(self.rows, other.rows)
        )

    __hash__ = None


def generate(m: int, n: int, d: int = DEFAULT_ONES_PER_COL, seed: int = 0) -> SensingMatrix:
    """
    Draw a sparse binary sensing matrix with exactly d ones per column.
    Re-draws (up to 100 times) while some row is all zero, whenever
    d·n >= m makes full row coverage possible.
    """
    if not 1 <= d <= m <= n:
        raise ConfigError(f"infeasible sensing parameters: need 1 <= d <= m <= n, got d={d}, m={m}, n={n}")

    rng = np.random.Generator(np.random.PCG64(seed))
    need_cover = d * n >= m
    for attempt in range(1, MAX_ATTEMPTS + 1):
        keys = rng.random((n, m))
        rows = np.sort(np.argsort(keys, axis=1, kind="stable")[:, :d], axis=1)
        if not need_cover or np.bincount(rows.ravel(), minlength=m).min() > 0:
            logger.debug(f"Sensing matrix {m}x{n} (d={d}, seed={seed}) accepted on attempt {attempt}")
            return SensingMatrix(m=m, n=n, ones_per_col=d, seed=seed, rows=rows)

    raise NumericError(
        f"could not draw a {m}x{n} sensing matrix without empty rows in {MAX_ATTEMPTS} attempts"
    )


def sensing_for_ratio(n: int, ratio: float, d: int = DEFAULT_ONES_PER_COL, seed: int = 0) -> SensingMatrix:
    """
    Sensing matrix keeping round(ratio·n) measurements (0.5 = 50% compression).

    generate() redraws until no row is empty, and a draw leaves about
    m·exp(-d·n/m) rows empty. With d = 2 and n = 250, ratios above about 0.55
    often exhaust MAX_ATTEMPTS, and from about 0.7 up they almost always raise
    NumericError; raise d for them.
    """
    if not 0.0 < ratio <= 1.0:
        raise ConfigError(f"compression ratio must lie in (0, 1], got {ratio}")
    m = max(d, int(np.floor(ratio * n + 0.5)))
    return generate(m, n, d, seed)


def compress(phi: SensingMatrix, Z) -> np.ndarray:
    """b = Φz for every column of Z (n×N → m×N)."""
    Z = as_mat(Z, "Z")
    if Z.shape[0] != phi.n:
        raise ShapeError(f"windows have {Z.shape[0]} samples but the sensing matrix expects {phi.n}")
    return np.asarray(phi.to_sparse() @ Z)


def poor_mans_inverse(phi: SensingMatrix, B) -> np.ndarray:
    """x' = Φᵀb for every column of B (m×N → n×N)."""
    B = as_mat(B, "B")
    if B.shape[0] != phi.m:
        raise ShapeError(f"measurements have {B.shape[0]} rows but the sensing matrix has m={phi.m}")
    return np.asarray(phi.to_sparse().T @ B)


def save_sensing(path, phi: SensingMatrix) -> None:
    """Header `m n d seed`, then one line of d row indices per column."""
    lines = [f"{phi.m} {phi.n} {phi.ones_per_col} {phi.seed}"]
    lines.extend(" ".join(str(int(r)) for r in col) for col in phi.rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")
    logger.info(f"Saved {phi.m}x{phi.n} sensing matrix to {path}")


def load_sensing(path) -> SensingMatrix:
    path = Path(path)
    text = path.read_text(encoding="ascii").splitlines()
    if not text:
        raise DataFormatError("empty sensing file", path=path, line=1)

    try:
        m, n, d, seed = (int(tok) for tok in text[0].split())
    except ValueError:
        raise DataFormatError("header must be `m n d seed` (four integers)", path=path, line=1)

    body = text[1:]
    if len(body) != n:
        raise DataFormatError(f"expected {n} column lines, found {len(body)}", path=path, line=len(text))

    rows = np.empty((n, d), dtype=np.int64)
    for j, line in enumerate(body):
        lineno = j + 2
        try:
            idx = [int(tok) for tok in line.split()]
        except ValueError:
            raise DataFormatError("row indices must be integers", path=path, line=lineno)
        if len(idx) != d:
            raise DataFormatError(f"expected {d} row indices, found {len(idx)}", path=path, line=lineno)
        rows[j] = idx

    try:
        return SensingMatrix(m=m, n=n, ones_per_col=d, seed=seed, rows=rows)
    except ShapeError as e:
        raise DataFormatError(str(e), path=path) from e

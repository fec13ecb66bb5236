"""
Signal ingestion and dataset assembly.

Window CSV grammar, one window per line, no header:

    record_id,label,s_1,...,s_n

label is an integer class index, or -1 for an unlabeled window. Samples
use a decimal point regardless of locale. Files written by
`save_windows_csv` use the shortest round-trip float repr, so a
save/load cycle is bit-exact.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import signal as sps

from lcae.sensing import SensingMatrix, compress, poor_mans_inverse
from lcae.utils.errors import ConfigError, DataFormatError, ShapeError
from lcae.utils.numkit import as_mat

logger = logging.getLogger(__name__)

UNLABELED = -1
SCALE_FLOOR = 1e-8

# Anti-aliasing filter for `resample`
TAPS_PER_PHASE = 64
KAISER_BETA = 8.6
MAX_RATE_DENOMINATOR = 1000


@dataclass
class WindowSet:
    """Clean windows as columns of X, one label and record id per column."""

    X: np.ndarray
    labels: np.ndarray
    sample_rate_hz: float = 250.0
    source_ids: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.X = as_mat(self.X, "X")
        self.labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if self.labels.size != self.X.shape[1]:
            raise ShapeError(f"{self.X.shape[1]} windows but {self.labels.size} labels")
        if self.labels.size and self.labels.min() < UNLABELED:
            raise DataFormatError(f"labels must be >= {UNLABELED}, got {int(self.labels.min())}")
        if not self.source_ids:
            self.source_ids = [""] * self.n_windows
        if len(self.source_ids) != self.n_windows:
            raise ShapeError(f"{self.n_windows} windows but {len(self.source_ids)} record ids")
        if not self.sample_rate_hz > 0:
            raise ConfigError(f"sample rate must be > 0, got {self.sample_rate_hz}")

    @property
    def window_len(self) -> int:
        return self.X.shape[0]

    @property
    def n_windows(self) -> int:
        return self.X.shape[1]

    @property
    def n_labeled(self) -> int:
        return int(np.count_nonzero(self.labels >= 0))

    def subset(self, idx) -> "WindowSet":
        idx = np.asarray(idx, dtype=np.int64)
        return WindowSet(
            X=self.X[:, idx],
            labels=self.labels[idx],
            sample_rate_hz=self.sample_rate_hz,
            source_ids=[self.source_ids[i] for i in idx],
        )


@dataclass(frozen=True)
class NormStats:
    """Per-feature (per-sample-position) standardization."""

    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64).ravel()
        scale = np.array(self.scale, dtype=np.float64).ravel()
        if mean.shape != scale.shape:
            raise ShapeError(f"mean has {mean.size} entries but scale has {scale.size}")
        if not np.all(scale > 0):
            raise ShapeError("normalizer scale must be strictly positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "scale", scale)

    @property
    def n(self) -> int:
        return self.mean.size

    @classmethod
    def identity(cls, n: int) -> "NormStats":
        return cls(mean=np.zeros(n), scale=np.ones(n))

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = as_mat(X, "X")
        if X.shape[0] != self.n:
            raise ShapeError(f"normalizer fitted on {self.n} features, got {X.shape[0]}")
        return X

    def apply(self, X) -> np.ndarray:
        X = self._check(X)
        return (X - self.mean[:, None]) / self.scale[:, None]

    def invert(self, X) -> np.ndarray:
        X = self._check(X)
        return X * self.scale[:, None] + self.mean[:, None]


@dataclass
class Dataset:
    """Training triple: encoder input X̃, clean target X, one-hot T for the last n_supervised columns."""

    Xtilde: np.ndarray
    X: np.ndarray
    T: np.ndarray
    n_supervised: int
    labels: np.ndarray
    source_ids: List[str] = field(default_factory=list)

    @property
    def n_windows(self) -> int:
        return self.X.shape[1]

    @property
    def n_unsupervised(self) -> int:
        return self.n_windows - self.n_supervised


def _blank_fields(df: pd.DataFrame) -> np.ndarray:
    """Missing or whitespace-only fields; NA-like text such as 'NA' is kept as text."""
    blank = df.isna().to_numpy()
    for j, col in enumerate(df.columns):
        if df[col].dtype == object:
            blank[:, j] |= df[col].astype(str).str.strip().eq("").to_numpy()
    return blank


def load_windows_csv(path, n_classes: Optional[int] = None, sample_rate_hz: float = 250.0) -> WindowSet:
    """Read a window CSV; every problem is reported with its 1-based line number."""
    path = Path(path)
    try:
        df = pd.read_csv(
            path,
            header=None,
            dtype={0: str},
            keep_default_na=False,
            na_filter=False,
            skip_blank_lines=False,
            float_precision="round_trip",
        )
    except pd.errors.EmptyDataError:
        raise DataFormatError("file contains no windows", path=path, line=1)
    except pd.errors.ParserError as e:
        # pandas reports "Expected k fields in line L, saw j"
        raise DataFormatError(f"ragged row: {e}", path=path) from e

    if df.shape[1] < 3:
        raise DataFormatError("rows need record_id, label and at least one sample", path=path, line=1)

    missing = _blank_fields(df).any(axis=1)
    if missing.any():
        line = int(np.argmax(missing)) + 1
        raise DataFormatError(
            f"expected {df.shape[1]} fields (record_id, label, {df.shape[1] - 2} samples)",
            path=path,
            line=line,
        )

    samples = df.iloc[:, 2:]
    X = np.empty(samples.shape)
    for j, col in enumerate(samples.columns):
        values = samples[col]
        if not pd.api.types.is_numeric_dtype(values):
            values = pd.to_numeric(values.str.strip(), errors="coerce")
        X[:, j] = values.to_numpy(dtype=np.float64)
    bad = ~np.isfinite(X)
    if bad.any():
        row = int(np.argmax(bad.any(axis=1)))
        j = int(np.argmax(bad[row]))
        raise DataFormatError(
            f"sample {j + 1} is not a finite number: {str(samples.iat[row, j])!r}", path=path, line=row + 1
        )
    X = X.T

    label_col = df.iloc[:, 1]
    if not pd.api.types.is_integer_dtype(label_col):
        numeric = pd.to_numeric(label_col, errors="coerce")
        bad = (numeric.isna() | (numeric != np.floor(numeric))).to_numpy()
        if bad.any():
            line = int(np.argmax(bad)) + 1
            raise DataFormatError(f"label must be an integer: {label_col.iloc[line - 1]!r}", path=path, line=line)
        label_col = numeric
    labels = label_col.to_numpy(dtype=np.int64)

    bad = labels < UNLABELED
    if n_classes is not None:
        bad |= labels >= n_classes
    if bad.any():
        line = int(np.argmax(bad)) + 1
        limit = f"[-1, {n_classes})" if n_classes is not None else ">= -1"
        raise DataFormatError(f"label {labels[line - 1]} outside {limit}", path=path, line=line)

    ws = WindowSet(X=X, labels=labels, sample_rate_hz=sample_rate_hz, source_ids=df.iloc[:, 0].tolist())
    logger.info(f"Loaded {ws.n_windows} window(s) of length {ws.window_len} from {path} ({ws.n_labeled} labeled)")
    return ws


def save_windows_csv(path, ws: WindowSet) -> None:
    df = pd.DataFrame(ws.X.T)
    df.insert(0, "label", ws.labels)
    df.insert(0, "record_id", ws.source_ids)
    df.to_csv(path, header=False, index=False, lineterminator="\n")
    logger.info(f"Wrote {ws.n_windows} window(s) to {path}")


def load_signal_csv(path, column: int = 0) -> np.ndarray:
    """One raw recording from a column of a CSV; a single non-numeric first row is taken as a header."""
    path = Path(path)
    try:
        df = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise DataFormatError("file contains no samples", path=path, line=1)
    except pd.errors.ParserError as e:
        raise DataFormatError(f"ragged row: {e}", path=path) from e
    if not 0 <= column < df.shape[1]:
        raise DataFormatError(f"column {column} not present ({df.shape[1]} column(s))", path=path)

    values = pd.to_numeric(df.iloc[:, column], errors="coerce")
    first_line = 1
    if len(values) and np.isnan(values.iloc[0]):
        values = values.iloc[1:]
        first_line = 2
    bad = values.isna().to_numpy()
    if bad.any():
        line = int(np.argmax(bad)) + first_line
        raise DataFormatError(f"sample is not a number: {df.iloc[line - 1, column]!r}", path=path, line=line)
    signal = values.to_numpy(dtype=np.float64)
    logger.info(f"Loaded {signal.size} sample(s) from {path}")
    return signal


def segment(signal, window_len: int, hop: int) -> List[np.ndarray]:
    """Consecutive windows starting at 0, hop, 2*hop, ...; a trailing partial window is dropped."""
    if window_len < 1 or hop < 1:
        raise ConfigError(f"window_len and hop must be >= 1, got {window_len}, {hop}")
    signal = np.asarray(signal, dtype=np.float64).ravel()
    return [signal[s:s + window_len].copy() for s in range(0, signal.size - window_len + 1, hop)]


def rate_ratio(from_hz: float, to_hz: float) -> Fraction:
    """Rational approximation up/down of to_hz/from_hz."""
    if not (from_hz > 0 and to_hz > 0):
        raise ConfigError(f"sample rates must be > 0, got {from_hz} -> {to_hz}")
    return Fraction(to_hz / from_hz).limit_denominator(MAX_RATE_DENOMINATOR)


def _polyphase_filter(up: int, down: int) -> np.ndarray:
    """
    Kaiser-windowed sinc low-pass at the lower Nyquist, 64 taps per phase.
    Every polyphase branch is scaled to sum to 1/up, which makes the
    resampler pass DC unchanged.
    """
    max_rate = max(up, down)
    h = sps.firwin(2 * (TAPS_PER_PHASE // 2) * max_rate + 1, 1.0 / max_rate, window=("kaiser", KAISER_BETA))
    for p in range(up):
        h[p::up] *= (1.0 / up) / h[p::up].sum()
    return h


def resample(signal, from_hz: float, to_hz: float) -> np.ndarray:
    """Polyphase rational resampling (upsample, low-pass, downsample)."""
    ratio = rate_ratio(from_hz, to_hz)
    signal = np.asarray(signal, dtype=np.float64).ravel()
    if ratio == 1:
        return signal.copy()

    up, down = ratio.numerator, ratio.denominator
    if abs(float(ratio) - to_hz / from_hz) > 1e-9 * (to_hz / from_hz):
        logger.warning(f"Resampling {from_hz} Hz by {up}/{down}: effective rate {from_hz * up / down:.6g} Hz")
    # resample_poly multiplies custom coefficients by up
    return sps.resample_poly(signal, up, down, window=_polyphase_filter(up, down))


def fit_normalizer(X) -> NormStats:
    """Per-feature mean and standard deviation over the columns of X, scale floored at 1e-8."""
    X = as_mat(X, "X")
    if X.shape[1] < 1:
        raise ShapeError("cannot fit a normalizer on zero windows")
    mean = X.mean(axis=1)
    scale = np.maximum(X.std(axis=1), SCALE_FLOOR)
    return NormStats(mean=mean, scale=scale)


def fit_input_normalizer(ws: WindowSet, phi: SensingMatrix) -> NormStats:
    """
    Normalizer fit on the encoder inputs, the poor man's inverse of every
    training window. assemble() applies it to both X̃ and X, so the
    sigmoid layers see unit-variance inputs whatever the sensing density.
    """
    if phi.n != ws.window_len:
        raise ShapeError(f"sensing matrix expects windows of {phi.n} samples, got {ws.window_len}")
    return fit_normalizer(poor_mans_inverse(phi, compress(phi, ws.X)))


def one_hot(labels, c: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if c < 1:
        raise ConfigError(f"number of classes must be >= 1, got {c}")
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        raise DataFormatError(f"labels must lie in [0, {c}), got range [{labels.min()}, {labels.max()}]")
    T = np.zeros((c, labels.size))
    T[labels, np.arange(labels.size)] = 1.0
    return T


def infer_n_classes(labels) -> int:
    labels = np.asarray(labels)
    return max(1, int(labels.max()) + 1) if labels.size else 1


def assemble(ws: WindowSet, phi: SensingMatrix, stats: NormStats, n_classes: Optional[int] = None) -> Dataset:
    """
    Build (X̃, X, T): unlabeled windows first, then labeled ones, each group
    in file order. X̃ is the poor man's inverse of the compressed clean
    windows, normalized with the same statistics as X.
    """
    if phi.n != ws.window_len:
        raise ShapeError(f"sensing matrix expects windows of {phi.n} samples, got {ws.window_len}")
    c = n_classes if n_classes is not None else infer_n_classes(ws.labels)

    order = np.concatenate([np.flatnonzero(ws.labels < 0), np.flatnonzero(ws.labels >= 0)])
    clean = ws.X[:, order]
    labels = ws.labels[order]
    n_supervised = int(np.count_nonzero(labels >= 0))

    X = stats.apply(clean)
    Xtilde = stats.apply(poor_mans_inverse(phi, compress(phi, clean)))
    T = one_hot(labels[labels >= 0], c)
    logger.debug(f"Assembled {clean.shape[1]} windows: {clean.shape[1] - n_supervised} unlabeled, {n_supervised} labeled")
    return Dataset(
        Xtilde=Xtilde,
        X=X,
        T=T,
        n_supervised=n_supervised,
        labels=labels,
        source_ids=[ws.source_ids[i] for i in order],
    )


def prepare_signal(
    signal,
    from_hz: float,
    to_hz: float,
    window_len: int,
    hop: Optional[int] = None,
    record_id: str = "rec",
    label: int = UNLABELED,
) -> WindowSet:
    """Resample a raw 1-D recording and cut it into windows of one record."""
    resampled = resample(signal, from_hz, to_hz)
    windows = segment(resampled, window_len, hop or window_len)
    X = np.column_stack(windows) if windows else np.zeros((window_len, 0))
    return WindowSet(
        X=X,
        labels=np.full(len(windows), label, dtype=np.int64),
        sample_rate_hz=to_hz,
        source_ids=[record_id] * len(windows),
    )


def class_cycles(k: int) -> Sequence[float]:
    """Sinusoid frequencies (cycles per window) of synthetic class k."""
    return (2.0 + 2.0 * k, 5.0 + 3.0 * k)


def make_synthetic_windows(
    n: int,
    count: int,
    n_classes: int = 2,
    seed: int = 0,
    noise: float = 0.1,
    unlabeled_fraction: float = 0.0,
    windows_per_record: int = 8,
    sample_rate_hz: float = 250.0,
    phase_jitter: float = 0.25,
) -> WindowSet:
    """
    Seeded mixed-sinusoid task. Each record holds windows_per_record
    windows of one class; a class-k window is the sum of sinusoids at
    `class_cycles(k)` with random amplitude, aligned phase plus
    N(0, phase_jitter²) radians of jitter, and white noise, the way
    beat-aligned windows repeat one waveform. A random
    unlabeled_fraction of the windows gets label -1.
    """
    if n < 1 or count < 1 or n_classes < 1 or windows_per_record < 1:
        raise ConfigError("n, count, n_classes and windows_per_record must all be >= 1")
    if not noise >= 0 or not phase_jitter >= 0:
        raise ConfigError(f"noise and phase_jitter must be >= 0, got {noise} and {phase_jitter}")
    if not 0.0 <= unlabeled_fraction <= 1.0:
        raise ConfigError(f"unlabeled_fraction must lie in [0, 1], got {unlabeled_fraction}")

    rng = np.random.Generator(np.random.PCG64(seed))
    n_records = -(-count // windows_per_record)
    record_class = rng.permutation(np.arange(n_records) % n_classes)
    record_of = np.arange(count) // windows_per_record

    t = np.arange(n) / n
    X = np.empty((n, count))
    labels = record_class[record_of].astype(np.int64)
    for j in range(count):
        x = np.zeros(n)
        for f in class_cycles(int(labels[j])):
            amp = rng.uniform(0.5, 1.5)
            phase = rng.normal(0.0, phase_jitter)
            x += amp * np.sin(2.0 * np.pi * f * t + phase)
        X[:, j] = x + noise * rng.standard_normal(n)

    n_unlabeled = int(round(unlabeled_fraction * count))
    if n_unlabeled:
        labels[rng.choice(count, size=n_unlabeled, replace=False)] = UNLABELED

    return WindowSet(
        X=X,
        labels=labels,
        sample_rate_hz=sample_rate_hz,
        source_ids=[f"syn{seed}-{r}" for r in record_of],
    )

"""
Metrics: reconstruction NMSE, confusion matrices with per-class
sensitivity/specificity, and wall-clock comparison of two reconstructors.
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from lcae.utils.errors import NumericError, ShapeError
from lcae.utils.numkit import as_mat
from lcae.workers.cpu import pinned_to_single_cpu

logger = logging.getLogger(__name__)

MIN_TIMING_REPEATS = 5


@dataclass
class NmseResult:
    per_column: np.ndarray
    mean: float
    std: float


def nmse(truth, recon) -> NmseResult:
    """
    ||truth - recon||₂ / ||truth||₂ for every column (a ratio of norms,
    not squared), with the mean and population standard deviation.
    """
    truth = as_mat(truth, "truth")
    recon = as_mat(recon, "recon")
    if truth.shape != recon.shape:
        raise ShapeError(f"truth {truth.shape} and reconstruction {recon.shape} differ in shape")
    if truth.shape[1] == 0:
        raise ShapeError("nmse needs at least one column")

    denom = np.linalg.norm(truth, axis=0)
    if np.any(denom == 0):
        raise NumericError(f"truth column {int(np.argmin(denom))} has zero norm")
    per_col = np.linalg.norm(truth - recon, axis=0) / denom
    return NmseResult(per_column=per_col, mean=float(per_col.mean()), std=float(per_col.std()))


@dataclass
class Confusion:
    """counts[i, j]: true class i predicted as j."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ShapeError(f"confusion counts must be square, got shape {counts.shape}")
        if np.any(counts < 0) or not np.all(np.equal(np.mod(counts, 1), 0)):
            raise ShapeError("confusion counts must be non-negative integers")
        self.counts = counts.astype(np.int64)

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion_from_labels(true, pred, c: int) -> Confusion:
    true = np.asarray(true, dtype=np.int64).ravel()
    pred = np.asarray(pred, dtype=np.int64).ravel()
    if true.shape != pred.shape:
        raise ShapeError(f"{true.size} true labels but {pred.size} predictions")
    for name, arr in (("true", true), ("predicted", pred)):
        if arr.size and (arr.min() < 0 or arr.max() >= c):
            raise ShapeError(f"{name} labels must lie in [0, {c})")
    counts = np.zeros((c, c), dtype=np.int64)
    np.add.at(counts, (true, pred), 1)
    return Confusion(counts)


@dataclass
class ClassMetrics:
    sensitivity: np.ndarray
    specificity: np.ndarray
    accuracy: float


def _rate(num: int, den: int, what: str) -> float:
    if den == 0:
        logger.warning(f"{what} has a zero denominator, reporting 0")
        return 0.0
    return num / den


def class_metrics(conf: Confusion) -> ClassMetrics:
    """One-vs-rest sensitivity TP/(TP+FN) and specificity TN/(TN+FP) per class."""
    total = conf.total
    if total == 0:
        raise ShapeError("confusion matrix is empty")

    counts = conf.counts
    sens = np.zeros(conf.n_classes)
    spec = np.zeros(conf.n_classes)
    for k in range(conf.n_classes):
        tp = int(counts[k, k])
        fn = int(counts[k, :].sum()) - tp
        fp = int(counts[:, k].sum()) - tp
        tn = total - tp - fn - fp
        sens[k] = _rate(tp, tp + fn, f"sensitivity of class {k}")
        spec[k] = _rate(tn, tn + fp, f"specificity of class {k}")
    return ClassMetrics(sensitivity=sens, specificity=spec, accuracy=float(np.trace(counts)) / total)


@dataclass
class TimingResult:
    ms_a: float
    ms_b: float
    ratio: float


def _median_ms(fn: Callable, batch, repeats: int) -> float:
    fn(batch)  # warm-up
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(batch)
        samples.append((time.perf_counter() - start) * 1000.0)
    return float(np.median(samples))


def timing_compare(
    reconstructor_a: Callable,
    reconstructor_b: Callable,
    batch,
    repeats: int = MIN_TIMING_REPEATS,
) -> TimingResult:
    """
    Median wall-clock milliseconds of each reconstructor on the same batch,
    pinned to one CPU. ratio = ms_b / ms_a, i.e. how many times faster a is.
    """
    batch = np.asarray(batch)
    if batch.ndim != 2 or batch.shape[1] == 0:
        raise ShapeError("timing needs a non-empty m×N batch")
    repeats = max(repeats, MIN_TIMING_REPEATS)

    with pinned_to_single_cpu():
        ms_a = _median_ms(reconstructor_a, batch, repeats)
        ms_b = _median_ms(reconstructor_b, batch, repeats)

    ratio = ms_b / max(ms_a, np.finfo(np.float64).tiny)
    logger.info(f"Timing over {batch.shape[1]} window(s): a {ms_a:.3f} ms, b {ms_b:.3f} ms, ratio {ratio:.1f}")
    return TimingResult(ms_a=ms_a, ms_b=ms_b, ratio=ratio)

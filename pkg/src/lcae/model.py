"""
The label-consistent autoencoder: weights, forward passes and the
sequence classification rule.

Shapes, with layer sizes (n, h1, h2, c):

    W1   h1 × (n+1)   encoder layer 1, last column multiplies the bias feature
    W2   h2 × h1      encoder layer 2
    W2p  h1 × h2      decoder inner layer
    W1p  n  × h1      decoder outer layer (linear output)
    D    c  × h2      label map from the innermost representation

Model file (little-endian throughout):

    b"LCAE"
    u16 length + ASCII format version
    u64 n, h1, h2, c
    f64[n] normalizer mean, f64[n] normalizer scale
    W1, W2, W2p, W1p, D as row-major f64
"""

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np

from lcae.dataio import NormStats
from lcae.sensing import SensingMatrix, poor_mans_inverse
from lcae.utils.errors import DataFormatError, ShapeError
from lcae.utils.numkit import append_bias_row, as_mat, sigmoid
from lcae.utils.versioning import MODEL_FORMAT_VERSION, check_format_version

logger = logging.getLogger(__name__)

MAGIC = b"LCAE"
_F64 = np.dtype("<f8")


@dataclass
class LcaeModel:
    W1: np.ndarray
    W2: np.ndarray
    W2p: np.ndarray
    W1p: np.ndarray
    D: np.ndarray
    norm_stats: NormStats

    def __post_init__(self):
        for name in ("W1", "W2", "W2p", "W1p", "D"):
            setattr(self, name, as_mat(getattr(self, name), name))

        h1, n_plus = self.W1.shape
        n, h2, c = n_plus - 1, self.W2.shape[0], self.D.shape[0]
        expected = {
            "W1": (h1, n + 1),
            "W2": (h2, h1),
            "W2p": (h1, h2),
            "W1p": (n, h1),
            "D": (c, h2),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ShapeError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        if n < 1:
            raise ShapeError("W1 must have at least one input column besides the bias")
        if self.norm_stats.n != n:
            raise ShapeError(f"normalizer covers {self.norm_stats.n} features, model input is {n}")

    @property
    def layer_sizes(self) -> Tuple[int, int, int, int]:
        return (self.W1.shape[1] - 1, self.W1.shape[0], self.W2.shape[0], self.D.shape[0])

    @classmethod
    def zeros(cls, n: int, h1: int, h2: int, c: int, norm_stats: NormStats = None) -> "LcaeModel":
        return cls(
            W1=np.zeros((h1, n + 1)),
            W2=np.zeros((h2, h1)),
            W2p=np.zeros((h1, h2)),
            W1p=np.zeros((n, h1)),
            D=np.zeros((c, h2)),
            norm_stats=norm_stats if norm_stats is not None else NormStats.identity(n),
        )


@dataclass
class ClassScores:
    """Label activations, one column per window."""

    scores: np.ndarray

    def __post_init__(self):
        self.scores = as_mat(self.scores, "scores")

    @property
    def n_windows(self) -> int:
        return self.scores.shape[1]


def _check_rows(M, rows: int, what: str) -> np.ndarray:
    M = as_mat(M, what)
    if M.shape[0] != rows:
        raise ShapeError(f"{what} has {M.shape[0]} rows, model expects {rows}")
    return M


def encode(model: LcaeModel, Xin) -> np.ndarray:
    """Z2 = sigmoid(W2 sigmoid(W1 [Xin; 1]))."""
    Xin = _check_rows(Xin, model.layer_sizes[0], "encoder input")
    return sigmoid(model.W2 @ sigmoid(model.W1 @ append_bias_row(Xin)))


def decode(model: LcaeModel, Z2) -> np.ndarray:
    """X̂ = W1p sigmoid(W2p Z2); the output layer is linear."""
    Z2 = _check_rows(Z2, model.layer_sizes[2], "code")
    return model.W1p @ sigmoid(model.W2p @ Z2)


def preprocess(model: LcaeModel, phi: SensingMatrix, B) -> np.ndarray:
    """Poor man's inverse of the measurements, normalized like the training inputs."""
    if phi.n != model.layer_sizes[0]:
        raise ShapeError(f"sensing matrix has n={phi.n}, model input is {model.layer_sizes[0]}")
    return model.norm_stats.apply(poor_mans_inverse(phi, B))


def reconstruct(model: LcaeModel, phi: SensingMatrix, B) -> np.ndarray:
    """Measurements (m×N) to denormalized windows (n×N) in one feed-forward pass."""
    return model.norm_stats.invert(decode(model, encode(model, preprocess(model, phi, B))))


def predict_scores(model: LcaeModel, Xin_normalized) -> ClassScores:
    return ClassScores(model.D @ encode(model, Xin_normalized))


def classify_sequence(scores: ClassScores) -> int:
    """Class with the largest row mean; lowest index wins ties."""
    if scores.n_windows == 0 or scores.scores.shape[0] == 0:
        raise ShapeError("cannot classify an empty score matrix")
    return int(np.argmax(scores.scores.mean(axis=1)))


def classify_windows(scores: ClassScores) -> np.ndarray:
    """Per-window argmax."""
    if scores.scores.shape[0] == 0:
        raise ShapeError("cannot classify with zero classes")
    return np.argmax(scores.scores, axis=0).astype(np.int64)


def save_model(path, model: LcaeModel) -> None:
    version = MODEL_FORMAT_VERSION.encode("ascii")
    n, h1, h2, c = model.layer_sizes
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<H", len(version)))
        f.write(version)
        f.write(struct.pack("<4Q", n, h1, h2, c))
        for arr in (model.norm_stats.mean, model.norm_stats.scale,
                    model.W1, model.W2, model.W2p, model.W1p, model.D):
            f.write(np.ascontiguousarray(arr, dtype=_F64).tobytes(order="C"))
    logger.info(f"Saved model ({n}, {h1}, {h2}, {c}) to {path}")


def load_model(path) -> LcaeModel:
    path = Path(path)
    data = path.read_bytes()

    if data[:4] != MAGIC:
        raise DataFormatError("not an lcae model file (bad magic)", path=path)
    pos = 4
    try:
        (vlen,) = struct.unpack_from("<H", data, pos)
        pos += 2
        found = data[pos:pos + vlen].decode("ascii")
        pos += vlen
        check_format_version(found, path=path)
        n, h1, h2, c = struct.unpack_from("<4Q", data, pos)
        pos += 32
    except (struct.error, UnicodeDecodeError) as e:
        raise DataFormatError(f"truncated or corrupt header: {e}", path=path) from e

    shapes = [(n,), (n,), (h1, n + 1), (h2, h1), (h1, h2), (n, h1), (c, h2)]
    need = pos + _F64.itemsize * sum(int(np.prod(s)) for s in shapes)
    if len(data) != need:
        raise DataFormatError(f"expected {need} bytes for layer sizes ({n}, {h1}, {h2}, {c}), found {len(data)}", path=path)

    arrays = []
    for shape in shapes:
        count = int(np.prod(shape))
        arrays.append(np.frombuffer(data, dtype=_F64, count=count, offset=pos).reshape(shape).astype(np.float64))
        pos += count * _F64.itemsize

    mean, scale, W1, W2, W2p, W1p, D = arrays
    try:
        model = LcaeModel(W1=W1, W2=W2, W2p=W2p, W1p=W1p, D=D, norm_stats=NormStats(mean=mean, scale=scale))
    except (ShapeError, ArithmeticError) as e:
        raise DataFormatError(str(e), path=path) from e
    logger.info(f"Loaded model ({n}, {h1}, {h2}, {c}) from {path}")
    return model

"""
Split Bregman block-coordinate trainer for the label-consistent autoencoder.

The trainer minimizes, over the weights, the proxies Z, Z1, Z2 = [Z2_U | Z2_S]
and with Bregman variables B, B1, B2,

    ||X - W1p Z1||² + lam ||T - D Z2_S||²
      + mu1 ||Z1 - sig(W2p Z2) - B1||²
      + mu2 ||Z2 - sig(W2 Z) - B2||²
      + mu  ||Z - sig(W1 X̃) - B||²

where X is the clean (normalized) target, X̃ the normalized poor man's
inverse with a bias row appended, and the last n_supervised columns carry
one-hot labels T. One sweep solves, in order,

    Z1 -> Z2 -> Z -> W1p -> W2p -> W2 -> W1 -> D -> Bregman update

each in closed form, with proxies warm-started from the previous sweep.

train() starts the two linear output maps W1p and D at zero. The first
sweep then leaves the forward-consistent proxies where they are and fits
both maps to the forward codes, so later proxy updates pull against fitted
maps instead of random ones. A proxy pulled outside (0, 1) by a random
decoder is clamped by logit() and poisons every weight fit downstream.
"""

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from lcae.dataio import NormStats
from lcae.model import LcaeModel
from lcae.utils.errors import ConfigError, NumericError, ShapeError
from lcae.utils.numkit import (
    DEFAULT_RIDGE,
    append_bias_row,
    as_mat,
    fro2,
    logit,
    ridge_lstsq_left,
    sigmoid,
    stacked_ridge_solve,
)
from lcae.workers.cpu import resolve_threads

logger = logging.getLogger(__name__)

BREGMAN_RULES = ("paper", "conventional")
BREGMAN_RULE_ALIASES = {"alternating": "paper"}
WEIGHT_BLOCKS = ("W1p", "W2p", "W2", "W1", "D")


@dataclass
class TrainConfig:
    lam: float = 1.0
    mu1: float = 0.01
    mu2: float = 0.01
    mu: float = 0.01
    ridge: float = DEFAULT_RIDGE
    max_sweeps: int = 100
    tol: float = 1e-6
    seed: int = 0
    bregman_rule: str = "paper"
    layer_sizes: Tuple[int, int, int, int] = (250, 125, 63, 2)
    threads: int = 1

    def __post_init__(self):
        if not self.lam >= 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        for name in ("mu1", "mu2", "mu"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if not self.ridge >= 0:
            raise ConfigError(f"ridge must be >= 0, got {self.ridge}")
        if int(self.max_sweeps) != self.max_sweeps or self.max_sweeps < 1:
            raise ConfigError(f"max_sweeps must be a positive integer, got {self.max_sweeps}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be > 0, got {self.tol}")
        self.bregman_rule = BREGMAN_RULE_ALIASES.get(self.bregman_rule, self.bregman_rule)
        if self.bregman_rule not in BREGMAN_RULES:
            raise ConfigError(f"bregman_rule must be one of {BREGMAN_RULES}, got {self.bregman_rule!r}")
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if len(self.layer_sizes) != 4 or min(self.layer_sizes) < 1:
            raise ConfigError(f"layer_sizes must be four positive integers (n, h1, h2, c), got {self.layer_sizes}")
        if self.threads < 0:
            raise ConfigError(f"threads must be >= 0, got {self.threads}")


@dataclass
class TrainData:
    """Training matrices; Xtilde_b is X̃ with the bias row already appended."""

    Xtilde_b: np.ndarray
    X: np.ndarray
    T: np.ndarray
    n_supervised: int

    @property
    def n_windows(self) -> int:
        return self.X.shape[1]

    @property
    def split(self) -> int:
        """Index of the first supervised column."""
        return self.n_windows - self.n_supervised

    @classmethod
    def build(cls, cfg: TrainConfig, Xtilde, Xclean, T, n_supervised: int) -> "TrainData":
        Xtilde = as_mat(Xtilde, "Xtilde")
        Xclean = as_mat(Xclean, "Xclean")
        n, _, _, c = cfg.layer_sizes
        if Xtilde.shape != Xclean.shape:
            raise ShapeError(f"Xtilde {Xtilde.shape} and Xclean {Xclean.shape} differ in shape")
        if Xclean.shape[0] != n:
            raise ShapeError(f"windows have {Xclean.shape[0]} samples, layer_sizes says n={n}")
        if not 0 <= n_supervised <= Xclean.shape[1]:
            raise ShapeError(f"n_supervised={n_supervised} outside [0, {Xclean.shape[1]}]")
        T = np.asarray(T, dtype=np.float64).reshape(c, -1) if np.size(T) == 0 else as_mat(T, "T")
        if T.shape != (c, n_supervised):
            raise ShapeError(f"T has shape {T.shape}, expected ({c}, {n_supervised})")
        return cls(Xtilde_b=append_bias_row(Xtilde), X=Xclean, T=T, n_supervised=int(n_supervised))


@dataclass
class TrainState:
    Z: np.ndarray
    Z1: np.ndarray
    Z2: np.ndarray
    B: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    n_supervised: int
    initial_objective: float = float("nan")
    objective_history: List[float] = field(default_factory=list)

    @property
    def split(self) -> int:
        return self.Z2.shape[1] - self.n_supervised

    @property
    def Z2_U(self) -> np.ndarray:
        return self.Z2[:, :self.split]

    @property
    def Z2_S(self) -> np.ndarray:
        return self.Z2[:, self.split:]


@dataclass
class SweepRecord:
    sweep: int
    objective: float
    terms: Dict[str, float]
    rel_change: float
    wall_ms: float
    forward_nmse: float = float("nan")


def forward_codes(model: LcaeModel, Xtilde_b) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Z, Z2, Z1) of the feed-forward pass over X̃ with its bias row."""
    Z = sigmoid(model.W1 @ Xtilde_b)
    Z2 = sigmoid(model.W2 @ Z)
    Z1 = sigmoid(model.W2p @ Z2)
    return Z, Z2, Z1


def forward_nmse(model: LcaeModel, data: TrainData) -> float:
    """Mean per-window ||X - W1p Z1|| / ||X|| of the feed-forward reconstruction, normalized units."""
    _, _, Z1 = forward_codes(model, data.Xtilde_b)
    denom = np.maximum(np.linalg.norm(data.X, axis=0), np.finfo(np.float64).tiny)
    return float(np.mean(np.linalg.norm(data.X - model.W1p @ Z1, axis=0) / denom))


def init_state(
    cfg: TrainConfig,
    Xtilde,
    n_supervised: int,
    norm_stats: Optional[NormStats] = None,
) -> Tuple[LcaeModel, TrainState]:
    """
    Seeded start: every weight ~ N(0, (1/sqrt(fan_in))²), proxies set to the
    forward pass of X̃, Bregman variables zero.
    """
    Xtilde = as_mat(Xtilde, "Xtilde")
    n, h1, h2, c = cfg.layer_sizes
    if Xtilde.shape[0] != n:
        raise ShapeError(f"windows have {Xtilde.shape[0]} samples, layer_sizes says n={n}")
    N = Xtilde.shape[1]
    if not 0 <= n_supervised <= N:
        raise ShapeError(f"n_supervised={n_supervised} outside [0, {N}]")

    rng = np.random.Generator(np.random.PCG64(cfg.seed))

    def draw(rows, fan_in):
        return rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(rows, fan_in))

    model = LcaeModel(
        W1=draw(h1, n + 1),
        W2=draw(h2, h1),
        W2p=draw(h1, h2),
        W1p=draw(n, h1),
        D=draw(c, h2),
        norm_stats=norm_stats if norm_stats is not None else NormStats.identity(n),
    )

    Z, Z2, Z1 = forward_codes(model, append_bias_row(Xtilde))
    state = TrainState(
        Z=Z,
        Z1=Z1,
        Z2=Z2,
        B=np.zeros_like(Z),
        B1=np.zeros_like(Z1),
        B2=np.zeros_like(Z2),
        n_supervised=int(n_supervised),
    )
    return model, state


def solve_weight_block(which: str, state: TrainState, model: LcaeModel, data: TrainData, cfg: TrainConfig) -> np.ndarray:
    """Closed-form least squares for one weight matrix, all else frozen."""
    if which == "W1p":
        return ridge_lstsq_left(data.X, state.Z1, cfg.ridge)
    if which == "W2p":
        return ridge_lstsq_left(logit(state.Z1 - state.B1), state.Z2, cfg.ridge)
    if which == "W2":
        return ridge_lstsq_left(logit(state.Z2 - state.B2), state.Z, cfg.ridge)
    if which == "W1":
        return ridge_lstsq_left(logit(state.Z - state.B), data.Xtilde_b, cfg.ridge)
    if which == "D":
        if data.n_supervised == 0:
            return model.D.copy()
        return ridge_lstsq_left(data.T, state.Z2_S, cfg.ridge)
    raise ValueError(f"unknown weight block {which!r}; expected one of {WEIGHT_BLOCKS}")


def solve_Z1(state: TrainState, model: LcaeModel, data: TrainData, cfg: TrainConfig) -> np.ndarray:
    h1 = state.Z1.shape[0]
    target = sigmoid(model.W2p @ state.Z2) + state.B1
    return stacked_ridge_solve(
        [(model.W1p, data.X, 1.0), (np.eye(h1), target, cfg.mu1)],
        threads=cfg.threads,
    )


def solve_Z2(state: TrainState, model: LcaeModel, data: TrainData, cfg: TrainConfig) -> np.ndarray:
    """
    Unsupervised and supervised columns are separable and solved on their
    own; the supervised group adds the label block (D, T, lam) when lam > 0.
    """
    h2 = state.Z2.shape[0]
    upper = logit(state.Z1 - state.B1)
    lower = sigmoid(model.W2 @ state.Z) + state.B2
    s = data.split

    Z2 = np.empty_like(state.Z2)
    if s > 0:
        Z2[:, :s] = stacked_ridge_solve(
            [(model.W2p, upper[:, :s], cfg.mu1), (np.eye(h2), lower[:, :s], cfg.mu2)],
            threads=cfg.threads,
        )
    if data.n_supervised > 0:
        blocks = [(model.W2p, upper[:, s:], cfg.mu1), (np.eye(h2), lower[:, s:], cfg.mu2)]
        if cfg.lam > 0:
            blocks.append((model.D, data.T, cfg.lam))
        Z2[:, s:] = stacked_ridge_solve(blocks, threads=cfg.threads)
    return Z2


def solve_Z(state: TrainState, model: LcaeModel, data: TrainData, cfg: TrainConfig) -> np.ndarray:
    h1 = state.Z.shape[0]
    target = sigmoid(model.W1 @ data.Xtilde_b) + state.B
    return stacked_ridge_solve(
        [(model.W2, logit(state.Z2 - state.B2), cfg.mu2), (np.eye(h1), target, cfg.mu)],
        threads=cfg.threads,
    )


def update_bregman(state: TrainState, model: LcaeModel, data: TrainData, cfg: TrainConfig) -> TrainState:
    """
    paper:         B <- (Z - sig(.)) - B
    conventional:  B <- B + (sig(.) - Z)
    applied to (B1, Z1, W2p Z2), (B2, Z2, W2 Z) and (B, Z, W1 X̃).

    With the proxies and weights held fixed the paper rule is an
    involution: applying it twice returns the original B.
    """
    pairs = {
        "B1": (state.Z1, sigmoid(model.W2p @ state.Z2), state.B1),
        "B2": (state.Z2, sigmoid(model.W2 @ state.Z), state.B2),
        "B": (state.Z, sigmoid(model.W1 @ data.Xtilde_b), state.B),
    }
    updated = {}
    for name, (proxy, fwd, b) in pairs.items():
        if cfg.bregman_rule == "paper":
            updated[name] = (proxy - fwd) - b
        else:
            updated[name] = b + (fwd - proxy)
    return replace(state, **updated)


def objective_terms(state: TrainState, model: LcaeModel, data: TrainData, cfg: TrainConfig) -> Dict[str, float]:
    """Unweighted squared-norm terms of the training objective."""
    label = fro2(data.T - model.D @ state.Z2_S) if data.n_supervised else 0.0
    return {
        "data": fro2(data.X - model.W1p @ state.Z1),
        "label": label,
        "z1": fro2(state.Z1 - sigmoid(model.W2p @ state.Z2) - state.B1),
        "z2": fro2(state.Z2 - sigmoid(model.W2 @ state.Z) - state.B2),
        "z": fro2(state.Z - sigmoid(model.W1 @ data.Xtilde_b) - state.B),
    }


def weighted_objective(terms: Dict[str, float], cfg: TrainConfig) -> float:
    return (
        terms["data"]
        + cfg.lam * terms["label"]
        + cfg.mu1 * terms["z1"]
        + cfg.mu2 * terms["z2"]
        + cfg.mu * terms["z"]
    )


def objective(state: TrainState, model: LcaeModel, data: TrainData, cfg: TrainConfig) -> float:
    return weighted_objective(objective_terms(state, model, data, cfg), cfg)


def solve_blocks(state: TrainState, model: LcaeModel, data: TrainData, cfg: TrainConfig) -> Tuple[LcaeModel, TrainState]:
    """Proxy and weight solves of one sweep, Bregman variables untouched."""
    state = replace(state, Z1=solve_Z1(state, model, data, cfg))
    state = replace(state, Z2=solve_Z2(state, model, data, cfg))
    state = replace(state, Z=solve_Z(state, model, data, cfg))
    for which in WEIGHT_BLOCKS:
        model = replace(model, **{which: solve_weight_block(which, state, model, data, cfg)})
    return model, state


def run_sweep(state: TrainState, model: LcaeModel, data: TrainData, cfg: TrainConfig) -> Tuple[LcaeModel, TrainState]:
    """One pass over every block in the fixed order."""
    model, state = solve_blocks(state, model, data, cfg)
    return model, update_bregman(state, model, data, cfg)


def zero_output_maps(model: LcaeModel) -> LcaeModel:
    return replace(model, W1p=np.zeros_like(model.W1p), D=np.zeros_like(model.D))


def refit_output_maps(model: LcaeModel, data: TrainData, cfg: TrainConfig) -> LcaeModel:
    """
    Least-squares W1p and D on the feed-forward codes of the training
    inputs, the codes the exported model produces at inference time.
    D is kept when there are no labels.
    """
    _, Z2, Z1 = forward_codes(model, data.Xtilde_b)
    W1p = ridge_lstsq_left(data.X, Z1, cfg.ridge)
    D = ridge_lstsq_left(data.T, Z2[:, data.split:], cfg.ridge) if data.n_supervised else model.D
    return replace(model, W1p=W1p, D=D)


def train(
    cfg: TrainConfig,
    Xtilde,
    Xclean,
    T,
    n_supervised: int,
    norm_stats: Optional[NormStats] = None,
    on_sweep: Optional[Callable[[SweepRecord], None]] = None,
) -> Tuple[LcaeModel, TrainState]:
    """
    Sweep until the relative objective change drops below cfg.tol or
    cfg.max_sweeps is reached. The objective of every sweep goes to
    state.objective_history; on_sweep receives a SweepRecord per sweep.

    A sweep's objective is taken after its proxy and weight solves and
    before its Bregman update, against the Bregman variables those solves
    used. On return W1p and D are refit to the feed-forward codes.
    """
    threads = resolve_threads(cfg.threads)
    if threads != cfg.threads:
        cfg = replace(cfg, threads=threads)

    data = TrainData.build(cfg, Xtilde, Xclean, T, n_supervised)
    model, state = init_state(cfg, Xtilde, n_supervised, norm_stats)
    model = zero_output_maps(model)

    prev = objective(state, model, data, cfg)
    state.initial_objective = prev
    logger.info(
        f"Training {cfg.layer_sizes} on {data.n_windows} windows "
        f"({data.n_supervised} labeled, rule {cfg.bregman_rule}), initial objective {prev:.6e}"
    )

    tiny = np.finfo(np.float64).tiny
    for sweep in range(1, cfg.max_sweeps + 1):
        start = time.perf_counter()
        model, state = solve_blocks(state, model, data, cfg)
        terms = objective_terms(state, model, data, cfg)
        obj = weighted_objective(terms, cfg)
        state = update_bregman(state, model, data, cfg)
        wall_ms = (time.perf_counter() - start) * 1000.0
        fwd = forward_nmse(model, data)

        rel = abs(prev - obj) / max(abs(prev), tiny)
        state.objective_history.append(obj)
        logger.info(f"Sweep {sweep}: objective {obj:.6e} (relative change {rel:.3e}), forward NMSE {fwd:.4f}")
        if not np.isfinite(obj):
            raise NumericError(f"objective became {obj} at sweep {sweep}")
        if on_sweep:
            on_sweep(SweepRecord(sweep=sweep, objective=obj, terms=terms, rel_change=rel, wall_ms=wall_ms, forward_nmse=fwd))

        if rel < cfg.tol:
            logger.info(f"Converged after {sweep} sweeps")
            break
        prev = obj
    else:
        logger.info(f"Stopped at max_sweeps={cfg.max_sweeps}")

    model = refit_output_maps(model, data, cfg)
    logger.info(f"Forward NMSE after refitting the output maps: {forward_nmse(model, data):.4f}")
    return model, state

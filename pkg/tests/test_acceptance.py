"""
End-to-end runs on the seeded synthetic task. Deselected by default;
run with `pytest -m acceptance`.
"""

from itertools import combinations

import numpy as np
import pytest

from conftest import make_rng
from lcae.baselines import IstaConfig, RecoveryParams, ista, omp, recover_windows
from lcae.dataio import assemble, fit_input_normalizer, make_synthetic_windows
from lcae.evaluation import nmse, timing_compare
from lcae.model import ClassScores, classify_sequence, predict_scores, preprocess, reconstruct
from lcae.sensing import compress, sensing_for_ratio
from lcae.workers.trainer import TrainConfig, init_state, train

pytestmark = pytest.mark.acceptance

N_SAMPLES = 64
SIZES = (N_SAMPLES, 32, 16, 2)
# The data term cannot fall below the rank-32 approximation error of the
# noise, so the task keeps noise well under the signal amplitude.
NOISE = 0.05


def fit_model(ws, phi, seed=0, max_sweeps=100):
    stats = fit_input_normalizer(ws, phi)
    ds = assemble(ws, phi, stats, n_classes=2)
    cfg = TrainConfig(layer_sizes=SIZES, max_sweeps=max_sweeps, tol=1e-12, seed=seed)
    return train(cfg, ds.Xtilde, ds.X, ds.T, ds.n_supervised, norm_stats=stats)


def sequence_accuracy(model, phi, ws):
    scores = predict_scores(model, preprocess(model, phi, compress(phi, ws.X))).scores
    hits, total = 0, 0
    for rid in dict.fromkeys(ws.source_ids):
        idx = [j for j, s in enumerate(ws.source_ids) if s == rid]
        predicted = classify_sequence(ClassScores(scores[:, idx]))
        hits += int(predicted == ws.labels[idx[0]])
        total += 1
    return hits / total


def exact_recovery_condition(A, support):
    """max over off-support columns of ||A_S⁺ a_j||₁ (< 1 guarantees OMP success)."""
    pinv = np.linalg.pinv(A[:, support])
    off = [j for j in range(A.shape[1]) if j not in support]
    return max(np.abs(pinv @ A[:, j]).sum() for j in off)


def planted_instance(seed, m=10, n=20, k=2):
    rng = make_rng(seed)
    for _ in range(1000):
        A = rng.standard_normal((m, n))
        A /= np.linalg.norm(A, axis=0)
        support = sorted(rng.choice(n, size=k, replace=False).tolist())
        if exact_recovery_condition(A, support) < 1.0:
            break
    x = np.zeros((n, 1))
    x[support, 0] = rng.uniform(1.0, 2.0, k) * rng.choice([-1.0, 1.0], k)
    return A, x, support


def enumerate_support(A, y, k):
    best, best_res = None, np.inf
    for pair in combinations(range(A.shape[1]), k):
        cols = A[:, pair]
        coef, *_ = np.linalg.lstsq(cols, y, rcond=None)
        res = np.linalg.norm(y - cols @ coef)
        if res < best_res:
            best, best_res = list(pair), res
    return best


def test_omp_recovers_planted_two_sparse():
    successes = 0
    for seed in range(100):
        A, x, support = planted_instance(seed)
        y = A @ x
        assert enumerate_support(A, y, 2) == support
        res = omp(A, y, 2)
        if sorted(res.support) == support and np.max(np.abs(res.x - x)) < 1e-10:
            successes += 1
    assert successes >= 95


def test_ista_recovers_five_sparse():
    rng = make_rng(2024)
    m, n = 100, 200
    A = rng.standard_normal((m, n)) / np.sqrt(m)
    x = np.zeros((n, 1))
    support = rng.choice(n, size=5, replace=False)
    x[support, 0] = rng.uniform(1.0, 2.0, 5) * rng.choice([-1.0, 1.0], 5)

    history = []
    x_hat = ista(A, A @ x, IstaConfig(lam=0.01, max_iters=5000, tol=1e-14), history=history)
    h = np.array(history)
    assert np.all(np.diff(h) <= 1e-12 * h[:-1])
    assert np.linalg.norm(x_hat - x) / np.linalg.norm(x) < 1e-2


@pytest.fixture(scope="module")
def synthetic_task():
    train_ws = make_synthetic_windows(N_SAMPLES, 512, n_classes=2, seed=11, noise=NOISE, unlabeled_fraction=0.25)
    test_ws = make_synthetic_windows(N_SAMPLES, 128, n_classes=2, seed=12, noise=NOISE)
    phi = sensing_for_ratio(N_SAMPLES, 0.5, seed=3)
    model, state = fit_model(train_ws, phi)
    return train_ws, test_ws, phi, model, state


def test_training_converges(synthetic_task):
    *_, state = synthetic_task
    assert state.objective_history[-1] < 0.5 * state.objective_history[0]
    assert np.all(np.isfinite(state.objective_history))


def test_held_out_reconstruction(synthetic_task):
    _, test_ws, phi, model, _ = synthetic_task
    result = nmse(test_ws.X, reconstruct(model, phi, compress(phi, test_ws.X)))
    assert result.mean <= 0.15


def test_held_out_sequence_accuracy(synthetic_task):
    _, test_ws, phi, model, _ = synthetic_task
    assert sequence_accuracy(model, phi, test_ws) >= 0.90


def test_model_beats_ista_on_time():
    n = 250
    phi = sensing_for_ratio(n, 0.5, seed=0)
    model, _ = init_state(TrainConfig(layer_sizes=(n, 125, 63, 2)), np.zeros((n, 1)), 0)
    batch = compress(phi, make_synthetic_windows(n, 1, seed=0).X)
    params = RecoveryParams(method="ista", ista=IstaConfig(max_iters=2000, tol=1e-300))
    result = timing_compare(
        lambda b: reconstruct(model, phi, b),
        lambda b: recover_windows(phi, b, params),
        batch,
    )
    assert result.ratio >= 50


def test_unlabeled_windows_help_reconstruction():
    wins = 0
    for seed in range(3):
        pool = make_synthetic_windows(N_SAMPLES, 512, n_classes=2, seed=100 + seed, noise=NOISE)
        test_ws = make_synthetic_windows(N_SAMPLES, 128, n_classes=2, seed=200 + seed, noise=NOISE)
        phi = sensing_for_ratio(N_SAMPLES, 0.5, seed=seed)

        labeled_only = pool.subset(np.arange(64))
        mixed = pool.subset(np.arange(512))
        mixed.labels[64:] = -1

        errors = []
        for ws in (labeled_only, mixed):
            model, _ = fit_model(ws, phi, seed=seed)
            errors.append(nmse(test_ws.X, reconstruct(model, phi, compress(phi, test_ws.X))).mean)
        wins += int(errors[1] < errors[0])
    assert wins >= 2

"""
Reconstruct and classify compressively sensed signal windows with a
label-consistent autoencoder.

Command-line front-end: every subcommand composes library operations and
writes plain files (CSV, the sensing text file, the binary model).
Exit codes: 0 success, 1 usage or configuration error, 2 data error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from lcae import baselines
from lcae.dataio import (
    UNLABELED,
    WindowSet,
    assemble,
    fit_input_normalizer,
    infer_n_classes,
    load_signal_csv,
    load_windows_csv,
    make_synthetic_windows,
    prepare_signal,
    save_windows_csv,
)
from lcae.evaluation import class_metrics, confusion_from_labels, nmse, timing_compare
from lcae.model import (
    ClassScores,
    LcaeModel,
    classify_sequence,
    load_model,
    predict_scores,
    preprocess,
    reconstruct,
    save_model,
)
from lcae.sensing import SensingMatrix, compress, generate, load_sensing, save_sensing, sensing_for_ratio
from lcae.utils.config import KNOWN_KEYS, RunConfig, load_run_config, user_config_path
from lcae.utils.errors import ConfigError, DataFormatError, NumericError, ShapeError, UsageError
from lcae.utils.log_console import LEVELS, setup_logging
from lcae.utils.tables import (
    CLASS_METRIC_COLUMNS,
    NMSE_COLUMNS,
    PREDICTION_COLUMNS,
    SWEEP_COLUMNS,
    TIMING_COLUMNS,
    TRAIN_LOG_COLUMNS,
    MetricsTable,
)
from lcae.utils.versioning import get_current_version
from lcae.workers.trainer import SweepRecord, TrainConfig, train

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

FORMATS_HELP = """\
file formats:
  window CSV       no header; one window per line: record_id,label,s_1,...,s_n
                   label -1 marks an unlabeled window. Measurement CSVs
                   (from `compress`) use the same grammar with m values.
  sensing file     text; header `m n d seed`, then n lines of d row
                   indices (0-based) holding the ones of each column.
                   Rows are drawn with numpy's PCG64 generator.
  model file       binary, little-endian: b"LCAE", u16-prefixed format
                   version, u64 n h1 h2 c, f64 mean[n], f64 scale[n],
                   then W1 (h1 x n+1), W2, W2p, W1p, D row-major.
  config file      `key = value` per line, `#` comments; keys mirror the
                   long flags with `_` for `-`. Unknown keys are errors.
  metric CSVs      header row, fixed column order:
                     train log    %s
                     nmse         %s
                     classes      %s
                     predictions  %s
                     timing       %s
                     sweep        %s
""" % tuple(
    ",".join(cols)
    for cols in (
        TRAIN_LOG_COLUMNS + ("[wall_ms]",),
        NMSE_COLUMNS,
        CLASS_METRIC_COLUMNS,
        PREDICTION_COLUMNS,
        TIMING_COLUMNS,
        SWEEP_COLUMNS,
    )
)


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting with status 2."""

    def error(self, message):
        err = UsageError(f"{self.prog}: error: {message}")
        err.usage = self.format_usage()
        raise err


# ---------------------------------------------------------------- helpers


def _load_phi(cfg: RunConfig) -> SensingMatrix:
    return load_sensing(cfg.require("phi"))


def _measurements(cfg: RunConfig, phi: SensingMatrix) -> Tuple[np.ndarray, WindowSet, Optional[np.ndarray]]:
    """
    Measurements B (m×N) from --measurements, or by compressing --windows.
    Returns B, the row metadata, and the clean windows when known.
    """
    if cfg.get("measurements"):
        meta = load_windows_csv(cfg.get("measurements"))
        if meta.window_len != phi.m:
            raise ShapeError(f"measurement rows have {meta.window_len} values, sensing matrix has m={phi.m}")
        return meta.X, meta, None
    if cfg.get("windows"):
        ws = load_windows_csv(cfg.get("windows"), sample_rate_hz=cfg.get("sample_rate_hz"))
        return compress(phi, ws.X), ws, ws.X
    raise ConfigError("pass --measurements or --windows")


def _write_windows(path, X: np.ndarray, meta: WindowSet) -> None:
    save_windows_csv(
        path,
        WindowSet(X=X, labels=meta.labels, sample_rate_hz=meta.sample_rate_hz, source_ids=meta.source_ids),
    )


def _nmse_table(truth: np.ndarray, recon: np.ndarray, source_ids: List[str]) -> MetricsTable:
    result = nmse(truth, recon)
    logger.info(f"NMSE {result.mean:.4f} +/- {result.std:.4f} over {truth.shape[1]} window(s)")
    table = MetricsTable(NMSE_COLUMNS)
    for j, value in enumerate(result.per_column):
        table.append({"window": j, "record_id": source_ids[j], "nmse": float(value)})
    return table


def _class_table(true: np.ndarray, pred: np.ndarray, c: int) -> MetricsTable:
    conf = confusion_from_labels(true, pred, c)
    metrics = class_metrics(conf)
    logger.info(f"Accuracy {metrics.accuracy:.4f} over {conf.total} sequence(s)")
    table = MetricsTable(CLASS_METRIC_COLUMNS)
    for k in range(c):
        table.append({
            "class": k,
            "sensitivity": float(metrics.sensitivity[k]),
            "specificity": float(metrics.specificity[k]),
            "support": int(conf.counts[k].sum()),
            "accuracy": metrics.accuracy,
        })
    return table


def _train_config(cfg: RunConfig, n: int, c: int) -> TrainConfig:
    if cfg.get("n") is not None and cfg.get("n") != n:
        raise ConfigError(f"config says n={cfg.get('n')} but the windows have {n} samples")
    return TrainConfig(
        lam=cfg["lam"],
        mu1=cfg["mu1"],
        mu2=cfg["mu2"],
        mu=cfg["mu"],
        ridge=cfg["ridge"],
        max_sweeps=cfg["max_sweeps"],
        tol=cfg["tol"],
        seed=cfg["seed"],
        bregman_rule=cfg["bregman_rule"],
        layer_sizes=(n, cfg["h1"], cfg["h2"], c),
        threads=cfg["threads"],
    )


def _fit(cfg: RunConfig, ws: WindowSet, phi: SensingMatrix, log: Optional[MetricsTable] = None) -> LcaeModel:
    c = cfg.get("classes") or infer_n_classes(ws.labels)
    stats = fit_input_normalizer(ws, phi)
    ds = assemble(ws, phi, stats, n_classes=c)
    tcfg = _train_config(cfg, ws.window_len, c)
    with_wall = bool(cfg.get("log_wall_ms"))

    def on_sweep(rec: SweepRecord):
        if log is None:
            return
        row = {"sweep": rec.sweep, "objective": rec.objective, "rel_change": rec.rel_change,
               "forward_nmse": rec.forward_nmse, **rec.terms}
        if with_wall:
            row["wall_ms"] = rec.wall_ms
        log.append(row)

    model, _ = train(tcfg, ds.Xtilde, ds.X, ds.T, ds.n_supervised, norm_stats=stats, on_sweep=on_sweep)
    return model


def _recovery_params(cfg: RunConfig, method: str) -> baselines.RecoveryParams:
    return baselines.RecoveryParams(
        method=method,
        basis=cfg["basis"],
        k=cfg.get("omp_k"),
        ista=baselines.IstaConfig(lam=cfg["ista_lam"], max_iters=cfg["ista_max_iters"], tol=cfg["ista_tol"]),
    )


# ---------------------------------------------------------------- subcommands


def cmd_gen_sensing(args, cfg: RunConfig):
    n = cfg.require("n")
    if cfg.get("m") is not None:
        phi = generate(cfg["m"], n, cfg["d"], cfg["seed"])
    elif cfg.get("ratio") is not None:
        phi = sensing_for_ratio(n, cfg["ratio"], cfg["d"], cfg["seed"])
    else:
        raise ConfigError("pass --m or --ratio")
    save_sensing(cfg.require("out"), phi)


def cmd_compress(args, cfg: RunConfig):
    phi = _load_phi(cfg)
    ws = load_windows_csv(cfg.require("windows"), sample_rate_hz=cfg["sample_rate_hz"])
    _write_windows(cfg.require("out"), compress(phi, ws.X), ws)


def cmd_train(args, cfg: RunConfig):
    phi = _load_phi(cfg)
    ws = load_windows_csv(cfg.require("windows"), n_classes=cfg.get("classes"), sample_rate_hz=cfg["sample_rate_hz"])
    columns = TRAIN_LOG_COLUMNS + (("wall_ms",) if cfg.get("log_wall_ms") else ())
    log = MetricsTable(columns) if cfg.get("log") else None
    model = _fit(cfg, ws, phi, log)
    save_model(cfg.require("out"), model)
    if log is not None:
        log.to_csv(cfg["log"])


def cmd_reconstruct(args, cfg: RunConfig):
    phi = _load_phi(cfg)
    model = load_model(cfg.require("model"))
    B, meta, truth = _measurements(cfg, phi)
    recon = reconstruct(model, phi, B)
    _write_windows(cfg.require("out"), recon, meta)
    if truth is not None:
        table = _nmse_table(truth, recon, meta.source_ids)
        if cfg.get("metrics"):
            table.to_csv(cfg["metrics"])


def cmd_classify(args, cfg: RunConfig):
    phi = _load_phi(cfg)
    model = load_model(cfg.require("model"))
    B, meta, _ = _measurements(cfg, phi)
    scores = predict_scores(model, preprocess(model, phi, B))

    groups: Dict[str, List[int]] = {}
    if args.per_window:
        for j in range(meta.n_windows):
            groups[f"{meta.source_ids[j]}#{j}"] = [j]
    else:
        for j, rid in enumerate(meta.source_ids):
            groups.setdefault(rid, []).append(j)

    table = MetricsTable(PREDICTION_COLUMNS)
    true, pred = [], []
    for rid, idx in groups.items():
        label = classify_sequence(ClassScores(scores.scores[:, idx]))
        known = set(meta.labels[idx].tolist())
        truth = known.pop() if len(known) == 1 else UNLABELED
        table.append({"record_id": rid, "n_windows": len(idx), "predicted": label, "true_label": truth})
        if truth != UNLABELED:
            true.append(truth)
            pred.append(label)
    table.to_csv(cfg.get("out"))

    if true:
        c = model.layer_sizes[3]
        metrics = _class_table(np.array(true), np.array(pred), c)
        if cfg.get("metrics"):
            metrics.to_csv(cfg["metrics"])


def _cmd_baseline(cfg: RunConfig, method: str):
    phi = _load_phi(cfg)
    B, meta, truth = _measurements(cfg, phi)
    recon = baselines.recover_windows(phi, B, _recovery_params(cfg, method))
    _write_windows(cfg.require("out"), recon, meta)
    if truth is not None:
        table = _nmse_table(truth, recon, meta.source_ids)
        if cfg.get("metrics"):
            table.to_csv(cfg["metrics"])


def cmd_baseline_omp(args, cfg: RunConfig):
    _cmd_baseline(cfg, "omp")


def cmd_baseline_ista(args, cfg: RunConfig):
    _cmd_baseline(cfg, "ista")


def cmd_evaluate(args, cfg: RunConfig):
    if not (args.recon or args.predictions):
        raise ConfigError("pass --recon (with --truth) or --predictions")
    if args.recon:
        if not args.truth:
            raise ConfigError("--recon needs --truth")
        truth = load_windows_csv(args.truth)
        recon = load_windows_csv(args.recon)
        _nmse_table(truth.X, recon.X, truth.source_ids).to_csv(cfg.get("out"))
    if args.predictions:
        df = pd.read_csv(args.predictions)
        if list(df.columns) != list(PREDICTION_COLUMNS):
            raise DataFormatError(f"expected columns {','.join(PREDICTION_COLUMNS)}", path=args.predictions, line=1)
        df = df[df["true_label"] != UNLABELED]
        if df.empty:
            raise DataFormatError("no labeled sequences to evaluate", path=args.predictions)
        true = df["true_label"].to_numpy(dtype=np.int64)
        pred = df["predicted"].to_numpy(dtype=np.int64)
        c = cfg.get("classes") or int(max(true.max(), pred.max())) + 1
        target = cfg.get("metrics") or (None if args.recon else cfg.get("out"))
        _class_table(true, pred, c).to_csv(target)


def cmd_benchmark(args, cfg: RunConfig):
    phi = _load_phi(cfg)
    model = load_model(cfg.require("model"))
    ws = load_windows_csv(cfg.require("windows"))
    batch = compress(phi, ws.X[:, :max(1, args.batch_size)])
    # step fixed up front so ISTA timing excludes the power iteration
    params = baselines.with_fixed_step(phi, _recovery_params(cfg, "ista"))

    result = timing_compare(
        lambda b: reconstruct(model, phi, b),
        lambda b: baselines.recover_windows(phi, b, params),
        batch,
        repeats=cfg["repeats"],
    )
    table = MetricsTable(TIMING_COLUMNS)
    table.append({
        "method_a": "lcae",
        "method_b": f"ista{params.ista.max_iters}",
        "n_windows": batch.shape[1],
        "repeats": max(cfg["repeats"], 5),
        "ms_a": result.ms_a,
        "ms_b": result.ms_b,
        "ratio": result.ratio,
    })
    table.to_csv(cfg.get("out"))


def cmd_prepare(args, cfg: RunConfig):
    signal = load_signal_csv(args.signal, column=args.column)
    ws = prepare_signal(
        signal,
        from_hz=args.from_hz,
        to_hz=cfg["sample_rate_hz"],
        window_len=cfg.require("window_len"),
        hop=cfg.get("hop"),
        record_id=args.record_id or Path(args.signal).stem,
        label=args.label,
    )
    logger.info(f"{signal.size} samples at {args.from_hz} Hz -> {ws.n_windows} window(s)")
    save_windows_csv(cfg.require("out"), ws)


def cmd_gen_synthetic(args, cfg: RunConfig):
    ws = make_synthetic_windows(
        n=cfg.require("n"),
        count=args.count,
        n_classes=cfg.get("classes") or 2,
        seed=cfg["seed"],
        noise=args.noise,
        phase_jitter=args.phase_jitter,
        unlabeled_fraction=args.unlabeled_fraction,
        windows_per_record=args.windows_per_record,
        sample_rate_hz=cfg["sample_rate_hz"],
    )
    save_windows_csv(cfg.require("out"), ws)


def cmd_compression_sweep(args, cfg: RunConfig):
    train_ws = load_windows_csv(cfg.require("windows"), n_classes=cfg.get("classes"))
    test_ws = load_windows_csv(cfg.require("test_windows"))
    table = MetricsTable(SWEEP_COLUMNS)
    for ratio in cfg["ratios"]:
        phi = sensing_for_ratio(train_ws.window_len, ratio, cfg["d"], cfg["seed"])
        model = _fit(cfg, train_ws, phi)
        result = nmse(test_ws.X, reconstruct(model, phi, compress(phi, test_ws.X)))
        logger.info(f"ratio {ratio}: m={phi.m}, NMSE {result.mean:.4f} +/- {result.std:.4f}")
        table.append({"ratio": ratio, "m": phi.m, "nmse_mean": result.mean, "nmse_std": result.std})
    table.to_csv(cfg.get("out"))


# ---------------------------------------------------------------- parser


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("common options")
    group.add_argument("--log-level", default="INFO", type=str.upper, choices=LEVELS)
    group.add_argument("--log-file", help="also append log lines to this file")
    group.add_argument("--config", help="key = value run configuration file")
    group.add_argument("--no-user-config", action="store_true",
                       help=f"ignore the user config file ({user_config_path()})")
    group.add_argument("--seed", type=int, help="seed for every random draw (default 0)")
    group.add_argument("--threads", type=int, help="worker threads for column solves; 0 = auto (default 1)")
    return common


def _add_training_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("training")
    g.add_argument("--h1", type=int, help="outer hidden layer size (default 125)")
    g.add_argument("--h2", type=int, help="inner hidden layer size (default 63)")
    g.add_argument("--classes", type=int, help="number of classes (default: max label + 1)")
    g.add_argument("--lam", type=float, help="label-consistency weight (default 1.0)")
    g.add_argument("--mu1", type=float, help="penalty weight on Z1 (default 0.01)")
    g.add_argument("--mu2", type=float, help="penalty weight on Z2 (default 0.01)")
    g.add_argument("--mu", type=float, help="penalty weight on Z (default 0.01)")
    g.add_argument("--ridge", type=float, help="ridge on weight solves (default 1e-8)")
    g.add_argument("--max-sweeps", type=int, help="sweep limit (default 100)")
    g.add_argument("--tol", type=float, help="relative objective change to stop at (default 1e-6)")
    g.add_argument("--bregman-rule", choices=("paper", "alternating", "conventional"),
                   help="Bregman variable update (default paper); paper: B = residual - B, "
                        "alternating is an alias for paper, conventional: B = B - residual")


def _add_recovery_flags(p: argparse.ArgumentParser, method: str):
    g = p.add_argument_group("recovery")
    g.add_argument("--basis", choices=("dct", "identity"), help="sparsifying basis (default dct)")
    if method == "omp":
        g.add_argument("--omp-k", type=int, help="sparsity level (default m // 4)")
    else:
        g.add_argument("--ista-lam", type=float, help="l1 weight (default 0.01)")
        g.add_argument("--ista-max-iters", type=int, help="iteration limit (default 2000)")
        g.add_argument("--ista-tol", type=float, help="relative objective change to stop at (default 1e-6)")


def _add_input_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("input")
    g.add_argument("--phi", help="sensing matrix file")
    g.add_argument("--windows", help="clean window CSV (compressed on the fly; enables NMSE)")
    g.add_argument("--measurements", help="measurement CSV from `compress`")


def build_parser() -> CliParser:
    parser = CliParser(
        prog="lcae",
        description=__doc__.strip().splitlines()[0],
        epilog=FORMATS_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {get_current_version()}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    common = _common_parser()

    def add(name, func, help_text):
        p = sub.add_parser(
            name, parents=[common], help=help_text, description=help_text,
            epilog=FORMATS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.set_defaults(func=func)
        return p

    p = add("gen-sensing", cmd_gen_sensing, "generate a sparse binary sensing matrix")
    p.add_argument("--n", type=int, help="window length")
    p.add_argument("--m", type=int, help="compressed length")
    p.add_argument("--ratio", type=float, help="m = round(ratio * n), used when --m is absent; with d=2 and n=250, "
                   "ratios above about 0.55 often fail to cover every row and above about 0.7 almost never do, so raise --d")
    p.add_argument("--d", type=int, help="ones per column (default 2)")
    p.add_argument("--out", help="sensing file to write")

    p = add("compress", cmd_compress, "compress a window CSV into a measurement CSV")
    p.add_argument("--phi", help="sensing matrix file")
    p.add_argument("--windows", help="clean window CSV")
    p.add_argument("--out", help="measurement CSV to write")

    p = add("train", cmd_train, "train a model on a window CSV")
    p.add_argument("--phi", help="sensing matrix file")
    p.add_argument("--windows", help="training window CSV (unlabeled rows use label -1)")
    p.add_argument("--out", help="model file to write")
    p.add_argument("--log", help="objective-per-sweep CSV")
    p.add_argument("--log-wall-ms", action="store_const", const=True,
                   help="add a wall_ms column to the training log (not reproducible)")
    _add_training_flags(p)

    p = add("reconstruct", cmd_reconstruct, "reconstruct windows with a trained model")
    p.add_argument("--model", help="model file")
    _add_input_flags(p)
    p.add_argument("--out", help="reconstructed window CSV to write")
    p.add_argument("--metrics", help="per-window NMSE CSV (needs --windows)")

    p = add("classify", cmd_classify, "classify records by the row-average rule")
    p.add_argument("--model", help="model file")
    _add_input_flags(p)
    p.add_argument("--per-window", action="store_true", help="treat every window as its own sequence")
    p.add_argument("--out", help="prediction CSV (default stdout)")
    p.add_argument("--metrics", help="per-class sensitivity/specificity CSV")

    for name, method, func in (("baseline-omp", "omp", cmd_baseline_omp),
                               ("baseline-ista", "ista", cmd_baseline_ista)):
        p = add(name, func, f"recover windows with {method.upper()}")
        _add_input_flags(p)
        p.add_argument("--out", help="reconstructed window CSV to write")
        p.add_argument("--metrics", help="per-window NMSE CSV (needs --windows)")
        _add_recovery_flags(p, method)

    p = add("evaluate", cmd_evaluate, "score reconstructions or predictions")
    p.add_argument("--truth", help="clean window CSV")
    p.add_argument("--recon", help="reconstructed window CSV")
    p.add_argument("--predictions", help="prediction CSV from `classify`")
    p.add_argument("--classes", type=int, help="number of classes")
    p.add_argument("--out", help="NMSE CSV (default stdout)")
    p.add_argument("--metrics", help="class metric CSV when both inputs are given")

    p = add("benchmark", cmd_benchmark, "time model reconstruction against ISTA")
    p.add_argument("--phi", help="sensing matrix file")
    p.add_argument("--model", help="model file")
    p.add_argument("--windows", help="window CSV; the first --batch-size windows are timed")
    p.add_argument("--batch-size", type=int, default=1)
    p.add_argument("--repeats", type=int, help="timed repetitions, at least 5")
    p.add_argument("--out", help="timing CSV (default stdout)")
    _add_recovery_flags(p, "ista")

    p = add("prepare", cmd_prepare, "resample and window a raw one-column recording")
    p.add_argument("--signal", required=True, help="CSV holding the raw recording")
    p.add_argument("--column", type=int, default=0, help="column of the recording (default 0)")
    p.add_argument("--from-hz", type=float, required=True, help="native sample rate")
    p.add_argument("--sample-rate-hz", type=float, help="target sample rate (default 250)")
    p.add_argument("--window-len", type=int, help="samples per window")
    p.add_argument("--hop", type=int, help="samples between window starts (default window length)")
    p.add_argument("--record-id", help="record id column value (default file stem)")
    p.add_argument("--label", type=int, default=UNLABELED, help="label for every window (default -1)")
    p.add_argument("--out", help="window CSV to write")

    p = add("gen-synthetic", cmd_gen_synthetic, "write a seeded mixed-sinusoid window CSV")
    p.add_argument("--n", type=int, help="window length")
    p.add_argument("--count", type=int, default=512)
    p.add_argument("--classes", type=int, help="number of classes (default 2)")
    p.add_argument("--noise", type=float, default=0.1, help="white-noise standard deviation")
    p.add_argument("--phase-jitter", type=float, default=0.25, help="phase jitter standard deviation in radians")
    p.add_argument("--unlabeled-fraction", type=float, default=0.0)
    p.add_argument("--windows-per-record", type=int, default=8)
    p.add_argument("--out", help="window CSV to write")

    p = add("compression-sweep", cmd_compression_sweep, "NMSE against compression ratio (plot data)")
    p.add_argument("--windows", help="training window CSV")
    p.add_argument("--test-windows", help="held-out window CSV")
    p.add_argument("--ratios", type=lambda s: KNOWN_KEYS["ratios"](s),
                   help="comma-separated m/n ratios (default 0.5,0.25); with d=2 and n=250 keep them at or below about 0.55, since above about 0.7 every draw leaves empty rows")
    p.add_argument("--d", type=int, help="ones per column (default 2)")
    p.add_argument("--out", help="sweep CSV (default stdout)")
    _add_training_flags(p)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(getattr(e, "usage", parser.format_usage()))
        sys.stderr.write(f"{e}\n")
        return EXIT_USAGE
    except SystemExit as e:
        # --help / --version
        return e.code if isinstance(e.code, int) else EXIT_OK

    try:
        setup_logging(args.log_level, args.log_file)
    except OSError as e:
        sys.stderr.write(f"lcae: cannot open log file: {e}\n")
        return EXIT_DATA

    try:
        cfg = load_run_config(
            config_path=args.config,
            use_user_config=not args.no_user_config,
            overrides=vars(args),
        )
        logger.debug(f"lcae {get_current_version()} running {args.command}")
        args.func(args, cfg)
    except (UsageError, ConfigError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_USAGE
    except (DataFormatError, ShapeError, NumericError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_DATA
    return EXIT_OK

"""Command line front door: simulate, run, train, evaluate, record, replay.

Every subcommand prints a JSON result on stdout and, on failure, a JSON
error object on stderr with a nonzero exit code, so scripts can drive the
pipeline without scraping human-oriented text.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .cnn.model import CnnModel, macro_model, micro_model
from .cnn.train import TrainConfig, stratified_split, train_model
from .errors import ConfigError
from .labels import MACRO_LABELS, MICRO_LABELS, ScaleClass
from .logio.dataset import (load_cnn_dataset, load_rf_dataset, make_cnn_corpus,
                            make_rf_corpus, write_cnn_dataset, write_rf_dataset)
from .logio.exports import std_heatmap, write_csv, write_metrics_json
from .logio.framelog import (FrameLogWriter, GroundTruthRecord,
                             PointcloudRecord, RangeDopplerRecord,
                             read_framelog)
from .pipeline.frontend import process_frames
from .pipeline.metrics import compute_metrics, rebuild_track_history
from .pipeline.runner import run_live, run_replay
from .radar.config import Profile, profile_config
from .scale import ScaleForest
from .scoring import weighted_f1
from .sim.scenario import load_scenario
from .sim.synth import ground_truth_at, motion_instances, synthesize_frame

EVAL_SEED_OFFSET = 10_000   # fresh corpora for `eval`, disjoint from training


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as machine-readable JSON."""

    def error(self, message):
        _emit_error("UsageError", message)
        raise SystemExit(2)


def _emit_error(kind: str, message: str, offset: int | None = None):
    body = {"error": kind, "message": message}
    if offset is not None:
        body["offset"] = offset
    print(json.dumps(body), file=sys.stderr)


def _print(obj: dict):
    print(json.dumps(obj, sort_keys=True))


def _require(args, *names: str):
    for name in names:
        if getattr(args, name.replace("-", "_"), None) is None:
            raise ConfigError(f"this subcommand needs --{name}")


def _load_scenario(args):
    _require(args, "scenario")
    sc = load_scenario(args.scenario)
    if args.seed is not None:
        sc = dataclasses.replace(sc, seed=args.seed)
    return sc


def _seed(args, default: int = 0) -> int:
    return default if args.seed is None else args.seed


def _load_models(args) -> tuple[ScaleForest | None, CnnModel | None, CnnModel | None]:
    rf = ScaleForest.load(args.rf) if getattr(args, "rf", None) else None
    mac = CnnModel.load(args.macro_model) if getattr(args, "macro_model", None) else None
    mic = CnnModel.load(args.micro_model) if getattr(args, "micro_model", None) else None
    return rf, mac, mic


# -- subcommand bodies ---------------------------------------------------------

def cmd_simulate(args) -> int:
    """Fixed-profile synthesis + front end, recorded straight to a frame log."""
    sc = _load_scenario(args)
    _require(args, "out")
    cfg = profile_config(Profile(args.profile or "localization"))
    duration = args.duration if args.duration is not None else sc.duration
    instances = motion_instances(sc)
    theta = sc.radar_boresight
    n = 0
    with FrameLogWriter(args.out) as writer:
        t = 0.0
        while t < duration - 1e-9:
            frames, gt = synthesize_frame(sc, t, cfg, theta, instances)
            pf = process_frames(frames, radar_position=sc.radar_position)
            writer.write(RangeDopplerRecord(t, cfg.profile, theta, pf.rd_map.power))
            pts = np.array([(g.x, g.y, 0.0, g.d, g.p)
                            for g in pf.global_points], dtype=np.float64)
            writer.write(PointcloudRecord(t, cfg.profile, theta,
                                          pts.reshape(-1, 5)))
            writer.write(GroundTruthRecord(t, cfg.profile, tuple(
                (e.subject_id, e.x, e.y, e.label, e.scale) for e in gt)))
            n += 1
            t += cfg.frame_period_s
    _print({"frames": n, "profile": cfg.profile.value, "out": str(args.out)})
    return 0


def cmd_run(args) -> int:
    """Live end-to-end run; metrics JSON on stdout, frame log via --out."""
    sc = _load_scenario(args)
    rf, mac, mic = _load_models(args)
    result = run_live(sc, rf=rf, macro_cnn=mac, micro_cnn=mic,
                      duration=args.duration, log_path=args.out)
    report = result.metrics.to_dict()
    if args.metrics_out:
        write_metrics_json(result.metrics, args.metrics_out)
    _print(report)
    return 0


def cmd_train_rf(args) -> int:
    seed = _seed(args)
    _require(args, "out")
    if args.dataset:
        x, y = load_rf_dataset(args.dataset)
    else:
        x, y, _ = make_rf_corpus(args.windows, seed)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 11)))
    train_idx, test_idx = stratified_split(y, 0.25, rng)
    forest = ScaleForest(seed=seed).fit(x[train_idx], y[train_idx])
    acc = float(np.mean(forest.predict(x[test_idx]) == y[test_idx]))
    forest.save(args.out)
    _print({"holdout_accuracy": acc, "n_train": int(train_idx.size),
            "n_test": int(test_idx.size), "out": str(args.out)})
    return 0


_CNN_SCALES = {"macro": (ScaleClass.MACRO, macro_model, MACRO_LABELS),
               "micro": (ScaleClass.MICRO, micro_model, MICRO_LABELS)}


def cmd_train_cnn(args) -> int:
    _require(args, "profile", "out")
    if args.profile not in _CNN_SCALES:
        raise ConfigError("train-cnn --profile must be 'macro' or 'micro'")
    scale, build, labels = _CNN_SCALES[args.profile]
    seed = _seed(args)
    if args.dataset:
        x, y = load_cnn_dataset(args.dataset, scale)
    else:
        x, y, _ = make_cnn_corpus(scale, args.windows, seed)
    cfg = TrainConfig(seed=seed, epochs=args.epochs)
    result = train_model(build(seed), x, y, cfg, verbose=args.verbose)
    result.model.save(args.out)
    _print({"test_f1": result.test_f1, "test_accuracy": result.test_accuracy,
            "best_epoch": result.best_epoch, "epochs_run": len(result.history),
            "classes": [lbl.value for lbl in labels], "out": str(args.out)})
    return 0


def cmd_eval(args) -> int:
    """Score saved models against freshly synthesized held-out corpora."""
    rf, mac, mic = _load_models(args)
    if rf is None and mac is None and mic is None:
        raise ConfigError("eval needs at least one of --rf / --macro-model "
                          "/ --micro-model")
    seed = _seed(args) + EVAL_SEED_OFFSET
    out: dict = {}
    if rf is not None:
        x, y, _ = make_rf_corpus(args.windows, seed)
        out["rf_accuracy"] = float(np.mean(rf.predict(x) == y))
        out["rf_windows"] = int(y.size)
    for name, model, scale in (("macro", mac, ScaleClass.MACRO),
                               ("micro", mic, ScaleClass.MICRO)):
        if model is None:
            continue
        x, y, _ = make_cnn_corpus(scale, args.windows, seed)
        pred = model.predict(x)
        out[f"{name}_f1"] = weighted_f1(y, pred, model.n_classes)
        out[f"{name}_accuracy"] = float(np.mean(pred == y))
        out[f"{name}_windows"] = int(y.size)
    if args.out:
        Path(args.out).write_text(json.dumps(out, sort_keys=True, indent=1))
    _print(out)
    return 0


def cmd_metrics(args) -> int:
    """Recompute a MetricsReport from a frame log alone."""
    _require(args, "log")
    records = read_framelog(args.log)
    history = rebuild_track_history(records)
    report = compute_metrics(records, history)
    if args.heatmap_csv:
        t0, t1 = (None, None)
        if args.window:
            lo, _, hi = args.window.partition(":")
            t0, t1 = float(lo), float(hi)
        write_csv(std_heatmap(records, t0, t1), args.heatmap_csv)
    if args.out:
        write_metrics_json(report, args.out)
    _print(report.to_dict())
    return 0


def cmd_gen_dataset(args) -> int:
    _require(args, "out")
    seed = _seed(args)
    if args.kind == "rf":
        manifest = write_rf_dataset(args.out, args.windows, seed)
    else:
        _require(args, "profile")
        if args.profile not in _CNN_SCALES:
            raise ConfigError("gen-dataset --profile must be 'macro' or 'micro'")
        scale = _CNN_SCALES[args.profile][0]
        manifest = write_cnn_dataset(args.out, scale, args.windows, seed)
    _print({"out": str(args.out), **manifest})
    return 0


def cmd_replay(args) -> int:
    """Re-drive the orchestrator from a recorded log; prints fresh metrics."""
    _require(args, "log")
    sc = _load_scenario(args)
    rf, mac, mic = _load_models(args)
    records = read_framelog(args.log)
    result = run_replay(records, sc, rf=rf, macro_cnn=mac, micro_cnn=mic)
    if args.out:
        write_metrics_json(result.metrics, args.out)
    _print(result.metrics.to_dict())
    return 0


# -- wiring --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    shared.add_argument("--scenario", help="scenario file (mars-scenario v1)")
    shared.add_argument("--profile",
                        choices=["localization", "macro", "micro"],
                        help="radar profile / CNN scale, where applicable")
    shared.add_argument("--seed", type=int, default=None,
                        help="override the scenario/training seed")
    shared.add_argument("--out", help="output path (log, model or directory)")

    parser = _Parser(prog="roomsense",
                     description="Multi-user radar activity sensing pipeline")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[shared],
                       help="record a fixed-profile synthetic run to a frame log")
    p.add_argument("--duration", type=float, default=None, help="seconds")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", parents=[shared],
                       help="full live pipeline with trained models")
    p.add_argument("--rf", help="saved scale classifier (mars-rf v1)")
    p.add_argument("--macro-model", help="saved macro CNN (mars-cnn v1)")
    p.add_argument("--micro-model", help="saved micro CNN (mars-cnn v1)")
    p.add_argument("--duration", type=float, default=None)
    p.add_argument("--metrics-out", help="also write the metrics JSON here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("train-rf", parents=[shared],
                       help="train the scale random forest")
    p.add_argument("--windows", type=int, default=150, help="windows per class")
    p.add_argument("--dataset", help="directory from `gen-dataset --kind rf`")
    p.set_defaults(func=cmd_train_rf)

    p = sub.add_parser("train-cnn", parents=[shared],
                       help="train the macro or micro activity CNN")
    p.add_argument("--windows", type=int, default=200, help="windows per class")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--dataset", help="directory from `gen-dataset --kind cnn`")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_train_cnn)

    p = sub.add_parser("eval", parents=[shared],
                       help="evaluate saved models on fresh held-out corpora")
    p.add_argument("--rf")
    p.add_argument("--macro-model")
    p.add_argument("--micro-model")
    p.add_argument("--windows", type=int, default=40, help="windows per class")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("metrics", parents=[shared],
                       help="recompute metrics (and optional std heatmap) from a log")
    p.add_argument("--log", help="frame log path")
    p.add_argument("--heatmap-csv", help="write a std-over-time heatmap CSV")
    p.add_argument("--window", help="start:end seconds for the heatmap")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("gen-dataset", parents=[shared],
                       help="batch-synthesize a labeled training dataset")
    p.add_argument("--kind", choices=["rf", "cnn"], required=True)
    p.add_argument("--windows", type=int, default=200, help="windows per class")
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("replay", parents=[shared],
                       help="re-drive the pipeline from a recorded frame log")
    p.add_argument("--log", help="frame log path")
    p.add_argument("--rf")
    p.add_argument("--macro-model")
    p.add_argument("--micro-model")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:       # argparse --help exits 0, errors exit 2
        return int(exc.code or 0)
    except (ValueError, RuntimeError, OSError) as exc:
        _emit_error(type(exc).__name__, str(exc),
                    offset=getattr(exc, "offset", None))
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface: ``relseq {synth,mine,select,train,predict,evaluate}``.

Exit status is 0 on success, 1 on a usage error and 2 on a data error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .dataset import LanguageBias
from .errors import RelSeqError
from .grasp import GraspConfig, SubsetObjective, grasp_select, write_trace
from .logic import build_event_index
from .miner import MinerConfig, mine, mine_frequent, passes_threshold, restat
from .pipeline import (PipelineConfig, cross_validate, dump_models, load_models,
                       round_robin_predict, train)
from .synth import generate_synthetic
from .syntax import (parse_background, parse_dataset, parse_patterns, serialize_background,
                     serialize_dataset, serialize_patterns)

log = logging.getLogger("relseq")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--data", help="labelled sequence file")
    p.add_argument("--background", help="background / constraint file")
    p.add_argument("--out", help="output file or directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="worker processes for mining")
    p.add_argument("--confidence", type=float, default=1.0,
                   help="minimum best-class confidence of a feature (default 1.0)")
    p.add_argument("--maxiter", type=int, default=50, help="GRASP iterations")
    p.add_argument("--construction-size", type=int, default=None,
                   help="features added per GRASP construction (default min(10, half the pool))")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--no-grasp", action="store_true", help="use every mined feature")
    p.add_argument("--round-robin", action=argparse.BooleanOptionalAction, default=True,
                   help="one classifier per class pair, combined by majority vote "
                        "(default on)")
    p.add_argument("--absolute-minfreq", action="store_true",
                   help="read minfreq as a sequence count instead of a fraction")
    p.add_argument("--max-nstep", type=int, default=3)
    p.add_argument("--max-dims", type=int, default=None)
    p.add_argument("--smoothing", type=float, default=1.0)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="relseq", description="Relational sequence mining and classification")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    s = sub.add_parser("synth", parents=[common], help="write a planted-motif dataset")
    s.add_argument("--classes", type=int, default=3)
    s.add_argument("--per-class", type=int, default=30)
    s.add_argument("--motif-length", type=int, default=2)
    s.add_argument("--length", type=int, default=6)
    s.add_argument("--noise", type=float, default=0.0)

    sub.add_parser("mine", parents=[common], help="mine frequent discriminative patterns")
    p = sub.add_parser("select", parents=[common], help="GRASP feature selection")
    p.add_argument("--patterns", help="pattern file from 'mine' (default: mine now)")
    p.add_argument("--trace", help="CSV trace path (default: <out>.trace.csv)")
    p = sub.add_parser("train", parents=[common], help="train and save a model")
    p.add_argument("--patterns", help="pattern file from 'mine' (default: mine now)")
    p = sub.add_parser("predict", parents=[common], help="classify sequences with a model")
    p.add_argument("--model", required=True)
    sub.add_parser("evaluate", parents=[common], help="k-fold cross-validation report")
    return parser


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required for '{args.command}'")


def _miner_config(args, bias) -> MinerConfig:
    if not 0 < args.confidence <= 1:
        raise UsageError("--confidence must lie in (0, 1]")
    return MinerConfig(bias=bias, confidence_threshold=args.confidence,
                       max_nstep=args.max_nstep, max_dims=args.max_dims,
                       absolute_minfreq=args.absolute_minfreq, threads=args.threads)


def _grasp_config(args) -> GraspConfig:
    if args.maxiter < 0:
        raise UsageError("--maxiter must be non-negative")
    return GraspConfig(maxiter=args.maxiter, n=args.construction_size, seed=args.seed,
                       smoothing=args.smoothing)


def _load(args):
    data = parse_dataset(Path(args.data).read_text())
    bias = parse_background(Path(args.background).read_text()) if args.background \
        else LanguageBias()
    return data, bias


def _features(args, data, bias):
    if getattr(args, "patterns", None):
        return restat(parse_patterns(Path(args.patterns).read_text()), data)
    return mine(data, _miner_config(args, bias))


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_synth(args):
    _need(args, "out")
    prob = generate_synthetic(args.classes, args.per_class, args.motif_length, args.noise,
                              args.seed, args.length)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "data.txt").write_text(serialize_dataset(prob.data))
    (out / "background.txt").write_text(serialize_background(prob.bias))
    print(f"wrote {len(prob.data)} sequences to {out}")


def cmd_mine(args):
    _need(args, "data")
    data, bias = _load(args)
    features = mine(data, _miner_config(args, bias))
    _write(args.out, serialize_patterns(features))
    log.info("%d patterns", len(features))


def cmd_select(args):
    _need(args, "data", "out")
    data, bias = _load(args)
    features = [f for f in _features(args, data, bias)
                if passes_threshold(f, args.confidence)]
    if not features:
        raise RelSeqError("no features to select from")
    obj = SubsetObjective.from_dataset(data, features, args.smoothing)
    result = grasp_select(obj, _grasp_config(args))
    _write(args.out, serialize_patterns([features[i] for i in result.best.sorted()]))
    trace = args.trace or f"{args.out}.trace.csv"
    with open(trace, "w", newline="") as fh:
        write_trace(result.trace, fh)
    print(f"selected {len(result.best.indices)} of {len(features)} features, "
          f"training errors {result.best.score}")


def _pipeline_config(args, bias) -> PipelineConfig:
    if args.folds < 2:
        raise UsageError("--folds must be at least 2")
    return PipelineConfig(data_path=args.data, background_path=args.background,
                          miner=_miner_config(args, bias), grasp=_grasp_config(args),
                          folds=args.folds, round_robin=args.round_robin,
                          use_grasp=not args.no_grasp, smoothing=args.smoothing,
                          out_dir=args.out, seed=args.seed)


def cmd_train(args):
    _need(args, "data", "out")
    data, bias = _load(args)
    cfg = _pipeline_config(args, bias)
    if args.patterns:
        mined = restat(parse_patterns(Path(args.patterns).read_text()), data)
    else:
        # unfiltered: the threshold is applied per classifier
        mined = mine_frequent(data, cfg.miner)
    subs = train(data, mined, cfg)
    _write(args.out, dump_models(subs, data.classes))
    print(f"trained {len(subs)} classifier(s) on {len(data)} sequences")


def cmd_predict(args):
    _need(args, "data")
    subs, classes = load_models(Path(args.model).read_text())
    data = parse_dataset(Path(args.data).read_text())
    rows, correct = [], 0
    for seq, label in data:
        pred = round_robin_predict(subs, seq, classes, build_event_index(seq, data.dimensions))
        rows.append((seq.id, label, pred))
        correct += pred == label
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["id", "label", "predicted"])
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    if len(data):
        print(f"accuracy {correct / len(data):.4f}", file=sys.stderr)


def cmd_evaluate(args):
    _need(args, "data", "out")
    bias = parse_background(Path(args.background).read_text()) if args.background \
        else LanguageBias()
    report = cross_validate(_pipeline_config(args, bias))
    line = f"mean accuracy {report.mean_accuracy:.4f}"
    if report.baseline_mean is not None:
        line += f" (without selection {report.baseline_mean:.4f})"
    print(line)


COMMANDS = {"synth": cmd_synth, "mine": cmd_mine, "select": cmd_select, "train": cmd_train,
            "predict": cmd_predict, "evaluate": cmd_evaluate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"relseq {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (RelSeqError, OSError, ValueError) as exc:
        print(f"relseq {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: train, predict, eval, sweep, prune, inspect."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from . import kernels
from .data import Dataset, ParseError, load_libsvm
from .evaluation import (CONVENTIONAL_RHO, avg_binary_loss, error_bound, select_b, sweep,
                         train_model)
from .learner import TrainConfig
from .losses import LossKind
from .model import ModelFormatError, load, model_stats, prune, save, tune_prune
from .trellis import min_hamming_distance

log = logging.getLogger("wltls")

LOSS_CHOICES = [k.value for k in LossKind]


def _default_threads() -> int:
    raw = os.environ.get("WLTLS_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise SystemExit(f"error: WLTLS_THREADS must be an integer, got {raw!r}")
    return max(n, 1)


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _b_list(text):
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("no slice widths given")
    return values


def _add_common(p, data=True):
    if data:
        p.add_argument("--data", required=True, help="libsvm file (.gz accepted)")
    p.add_argument("--index-base", type=int, choices=(0, 1), default=1,
                   help="feature index base of the input files (default 1)")
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="worker threads (default $WLTLS_THREADS or 1)")


def _add_training(p):
    p.add_argument("--epochs", type=_positive_int, default=5)
    p.add_argument("--r", type=_positive_float, default=1.0, help="AROW regularisation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--loss", choices=LOSS_CHOICES, default="exp", help="decoding loss")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wltls", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model")
    _add_common(p)
    _add_training(p)
    p.add_argument("--b", type=int, required=True, help="slice width")
    p.add_argument("--K", type=int, default=None,
                   help="number of classes, if larger than the labels seen in --data")
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--log", default=None, help="training log (JSON lines); default <out>.log")

    p = sub.add_parser("predict", help="write one predicted label per input line")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--loss", choices=LOSS_CHOICES, default=None)
    p.add_argument("--out", default="-", help="output file (default stdout)")
    p.add_argument("--scores", action="store_true", help="append the winning path's total loss")

    p = sub.add_parser("eval", help="accuracy, average binary loss and error bound as JSON")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--loss", choices=LOSS_CHOICES, default=None)
    p.add_argument("--bound-loss", choices=LOSS_CHOICES, default="squaredhinge")
    p.add_argument("--rho", default=str(CONVENTIONAL_RHO),
                   help="minimum distance for the bound: an integer or 'exact'")

    p = sub.add_parser("sweep", help="train/evaluate several slice widths, write CSV")
    _add_common(p)
    _add_training(p)
    p.add_argument("--test", default=None, help="held-out libsvm file")
    p.add_argument("--b", type=_b_list, default=[2, 4, 10], help="comma-separated widths")
    p.add_argument("--out", required=True, help="CSV report")

    p = sub.add_parser("prune", help="zero small weights, tuned on validation data")
    _add_common(p, data=False)
    p.add_argument("--model", required=True)
    p.add_argument("--val", default=None, help="validation libsvm file")
    p.add_argument("--max-drop", type=float, default=0.01,
                   help="allowed validation accuracy drop (0.01 = one point)")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="fixed threshold instead of tuning")
    p.add_argument("--loss", choices=LOSS_CHOICES, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("inspect", help="print model header and stats as JSON lines")
    p.add_argument("--model", required=True)
    return parser


def _load_data(path, index_base, model=None) -> Dataset:
    if not os.path.exists(path):
        raise FileNotFoundError(f"data file not found: {path}")
    if model is None:
        return load_libsvm(path, index_base)
    return load_libsvm(path, index_base, labels=model.labels)


def _load_model(path):
    if not os.path.exists(path):
        raise FileNotFoundError(f"model file not found: {path}")
    return load(path)


def _pad_labels(data: Dataset, K: int | None) -> Dataset:
    if K is None or K == data.K:
        return data
    if K < data.K:
        raise ValueError(f"--K {K} is smaller than the {data.K} labels found in the data")
    extra = tuple(f"__unused{i}" for i in range(K - data.K))
    return Dataset(data.indptr, data.indices, data.values, data.y, data.d, data.labels + extra)


def cmd_train(args, out) -> int:
    data = _pad_labels(_load_data(args.data, args.index_base), args.K)
    if not 2 <= args.b <= data.K:
        raise ValueError(f"--b must lie in [2, K={data.K}], got {args.b}")
    config = TrainConfig(args.epochs, args.r, args.seed, args.threads)
    t0 = time.perf_counter()
    model = train_model(data, args.b, config, args.loss)
    train_s = time.perf_counter() - t0
    nbytes = save(model, args.out)
    record = {
        "event": "train", "data": args.data, "b": args.b, "K": model.K, "d": model.d,
        "ell": model.n_edges, "m": data.m, "epochs": args.epochs, "r": args.r,
        "seed": args.seed, "threads": args.threads, "loss": model.loss.value,
        "backend": kernels.BACKEND, "train_s": round(train_s, 3),
        "train_accuracy": model.accuracy(data), "model_bytes": nbytes, "out": args.out,
    }
    with open(args.log or args.out + ".log", "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record) + "\n")
    print(json.dumps(record), file=out)
    return 0


def cmd_predict(args, out) -> int:
    model = _load_model(args.model)
    data = _load_data(args.data, args.index_base)
    pred, totals = model.predict(data, args.loss, threads=args.threads)
    fh = out if args.out == "-" else open(args.out, "w", encoding="utf-8")
    try:
        for k, total in zip(pred.tolist(), totals.tolist()):
            line = model.labels[k]
            if args.scores:
                line += f" {total!r}"
            fh.write(line + "\n")
    finally:
        if fh is not out:
            fh.close()
    return 0


def cmd_eval(args, out) -> int:
    model = _load_model(args.model)
    data = _load_data(args.data, args.index_base, model)
    bound_loss = LossKind.parse(args.bound_loss)
    F = model.margin_matrix(data)
    pred, _ = model.predict(data, args.loss, margins=F, threads=args.threads)
    bound_pred, _ = model.predict(data, bound_loss, margins=F, threads=args.threads)
    eps = avg_binary_loss(model, model.graph, model.assignment, data, bound_loss, margins=F)
    if args.rho == "exact":
        rho = min_hamming_distance(model.graph)
        if rho is None:
            raise ValueError("K too large to compute the exact minimum distance")
    else:
        rho = int(args.rho)
    result = {
        "m": data.m,
        "loss": LossKind.parse(args.loss or model.loss).value,
        "accuracy": float(np.mean(pred == data.y)),
        "bound_loss": bound_loss.value,
        "error_bound_loss": float(np.mean(bound_pred != data.y)),
        "eps": eps,
        "rho": rho,
        "bound": error_bound(model.n_edges, eps, rho, bound_loss),
    }
    print(json.dumps(result), file=out)
    return 0


def cmd_sweep(args, out) -> int:
    train = _load_data(args.data, args.index_base)
    test = None
    if args.test:
        test = load_libsvm(args.test, args.index_base, labels=train.labels, n_features=train.d)
    config = TrainConfig(args.epochs, args.r, args.seed, args.threads)
    report = sweep(train, args.b, config, test=test, loss=args.loss)
    report.write_csv(args.out)
    print(json.dumps({"event": "sweep", "rows": len(report.rows), "csv": args.out,
                      "selected_b": select_b(report) if len(report.rows) > 1 else report.rows[0].b}),
          file=out)
    return 0


def cmd_prune(args, out) -> int:
    model = _load_model(args.model)
    if args.lam is not None:
        if args.val is not None:
            raise ValueError("give either --lambda or --val, not both")
        pruned = prune(model, args.lam)
        record = {"lambda": args.lam,
                  "nnz_before": int(np.count_nonzero(model.weights)),
                  "nnz_after": int(np.count_nonzero(pruned.weights))}
    else:
        if args.val is None:
            raise ValueError("prune needs --val for tuning, or a fixed --lambda")
        val = _load_data(args.val, args.index_base, model)
        _, pruned, report = tune_prune(model, val, args.max_drop, args.loss)
        record = report.as_dict()
    nbytes = save(pruned, args.out)
    record.update({"event": "prune", "out": args.out, "model_bytes": nbytes})
    print(json.dumps(record), file=out)
    return 0


def cmd_inspect(args, out) -> int:
    model = _load_model(args.model)
    header = {"record": "header", "format_version": model.version, "K": model.K, "b": model.b,
              "d": model.d, "ell": model.n_edges, "loss": model.loss.value,
              "assignment_seed": model.assignment.seed}
    stats = {"record": "stats", **model_stats(model)}
    print(json.dumps(header), file=out)
    print(json.dumps(stats), file=out)
    return 0


COMMANDS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "prune": cmd_prune,
    "inspect": cmd_inspect,
}


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if hasattr(args, "threads") and args.threads is None:
        args.threads = _default_threads()
    try:
        return COMMANDS[args.command](args, out)
    except (OSError, ValueError, ParseError, ModelFormatError) as exc:
        print(f"wltls {args.command}: error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

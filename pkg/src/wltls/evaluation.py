"""Accuracy, average binary loss, the training-error bound and slice-width sweeps."""
from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .assignment import ClassAssignment, assign_random
from .data import Dataset
from .learner import TrainConfig, edge_class_table, margin_matrix, train_all
from .losses import LossKind, loss_at_zero, loss_values
from .model import WltlsModel, model_stats
from .trellis import TrellisGraph, build_graph, min_hamming_distance

log = logging.getLogger(__name__)

CSV_COLUMNS = ("b", "ell", "train_acc", "test_acc", "eps", "bound",
               "bytes_dense", "bytes_sparse", "train_s", "decode_us_per_query")

# Minimum codeword distance of the trellis codes used when evaluating the bound.
CONVENTIONAL_RHO = 4


def accuracy(model: WltlsModel, dataset: Dataset, loss_kind=None) -> float:
    return model.accuracy(dataset, loss_kind)


def code_signs(graph: TrellisGraph, assignment: ClassAssignment, y: np.ndarray) -> np.ndarray:
    """Codeword bits of each sample's class, shape (m, ell), without building M."""
    S = -np.ones((len(y), graph.n_edges), dtype=np.int8)
    for e, classes in enumerate(edge_class_table(assignment, graph)):
        S[np.isin(y, classes), e] = 1
    return S


def avg_binary_loss(model, graph: TrellisGraph, assignment: ClassAssignment, train: Dataset,
                    loss_kind=LossKind.SQUARED_HINGE, margins: np.ndarray | None = None) -> float:
    """Mean per-bit loss of the edge learners over a labelled set."""
    F = margin_matrix(model.weights, train) if margins is None else margins
    S = code_signs(graph, assignment, train.y)
    return float(loss_values(loss_kind, S * F).mean())


def avg_abs_margin(margins: np.ndarray) -> float:
    return float(np.abs(margins).mean())


def error_bound(ell: int, epsilon: float, rho: int, loss_kind=LossKind.SQUARED_HINGE) -> float:
    """Upper bound ``ell * eps / (rho * L(0))`` on the multiclass training error."""
    if ell <= 0 or rho <= 0 or epsilon < 0:
        raise ValueError("need ell > 0, rho > 0 and epsilon >= 0")
    l0 = loss_at_zero(loss_kind)
    if l0 <= 0:
        raise ValueError(f"{loss_kind} has L(0) = 0; the bound is undefined")
    return ell * epsilon / (rho * l0)


@dataclass
class SweepRow:
    b: int
    ell: int
    train_acc: float
    test_acc: float | None
    eps: float
    bound: float
    bytes_dense: int
    bytes_sparse: int
    train_s: float
    decode_us_per_query: float
    train_error_bound_loss: float  # training error when decoding with the bound's loss
    eps_by_loss: dict = field(default_factory=dict)
    rho_exact: int | None = None
    bound_exact_rho: float | None = None
    avg_abs_margin: float = 0.0
    nnz_fraction: float = 0.0

    def csv_row(self) -> dict:
        return {c: getattr(self, c) for c in CSV_COLUMNS}


@dataclass
class SweepReport:
    rows: list[SweepRow]
    loss: LossKind
    bound_loss: LossKind
    models: dict = field(default_factory=dict, repr=False)

    def by_b(self) -> dict[int, SweepRow]:
        return {r.b: r for r in self.rows}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in self.rows:
            writer.writerow(row.csv_row())
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())


def evaluate_row(model: WltlsModel, train: Dataset, test: Dataset | None, train_s: float,
                 loss=LossKind.EXPONENTIAL, bound_loss=LossKind.SQUARED_HINGE,
                 eps_losses=tuple(LossKind), rho_limit: int = 4096) -> SweepRow:
    loss, bound_loss = LossKind.parse(loss), LossKind.parse(bound_loss)
    graph, assignment = model.graph, model.assignment
    F = model.margin_matrix(train)
    S = code_signs(graph, assignment, train.y)
    eps_by_loss = {k.value: float(loss_values(k, S * F).mean()) for k in eps_losses}
    eps_by_loss.setdefault(bound_loss.value, float(loss_values(bound_loss, S * F).mean()))
    eps = eps_by_loss[bound_loss.value]

    train_pred, _ = model.predict(train, loss, margins=F)
    bound_pred, _ = model.predict(train, bound_loss, margins=F)

    test_acc, decode_us = None, 0.0
    if test is not None:
        t0 = time.perf_counter()
        test_pred, _ = model.predict(test, loss)
        decode_us = 1e6 * (time.perf_counter() - t0) / test.m
        test_acc = float(np.mean(test_pred == test.y))

    rho = min_hamming_distance(graph, rho_limit)
    stats = model_stats(model)
    return SweepRow(
        b=graph.b, ell=graph.n_edges,
        train_acc=float(np.mean(train_pred == train.y)), test_acc=test_acc,
        eps=eps, bound=error_bound(graph.n_edges, eps, CONVENTIONAL_RHO, bound_loss),
        bytes_dense=stats["bytes_dense"], bytes_sparse=stats["bytes_sparse"],
        train_s=train_s, decode_us_per_query=decode_us,
        train_error_bound_loss=float(np.mean(bound_pred != train.y)),
        eps_by_loss=eps_by_loss, rho_exact=rho,
        bound_exact_rho=error_bound(graph.n_edges, eps, rho, bound_loss) if rho else None,
        avg_abs_margin=avg_abs_margin(F), nnz_fraction=stats["nnz_fraction"],
    )


def train_model(train: Dataset, b: int, config: TrainConfig = TrainConfig(),
                loss=LossKind.EXPONENTIAL) -> WltlsModel:
    graph = build_graph(train.K, b)
    assignment = assign_random(train.K, config.seed)
    margin_model = train_all(train, graph, assignment, config)
    return WltlsModel.from_margin_model(margin_model, graph, assignment, train.labels, loss)


def sweep(train: Dataset, b_values, config: TrainConfig = TrainConfig(),
          test: Dataset | None = None, loss=LossKind.EXPONENTIAL,
          bound_loss=LossKind.SQUARED_HINGE, keep_models: bool = False) -> SweepReport:
    """Train and evaluate one model per slice width, all with the same seeds."""
    b_values = sorted(set(int(b) for b in b_values))
    for b in b_values:
        if not 2 <= b <= train.K:
            raise ValueError(f"slice width {b} outside [2, K={train.K}]")
    loss, bound_loss = LossKind.parse(loss), LossKind.parse(bound_loss)
    rows, models = [], {}
    for b in b_values:
        t0 = time.perf_counter()
        model = train_model(train, b, config, loss)
        train_s = time.perf_counter() - t0
        row = evaluate_row(model, train, test, train_s, loss, bound_loss)
        log.info("b=%d ell=%d train_acc=%.4f test_acc=%s eps=%.4f bound=%.4f (%.1fs)",
                 row.b, row.ell, row.train_acc, row.test_acc, row.eps, row.bound, train_s)
        rows.append(row)
        if keep_models:
            models[b] = model
    return SweepReport(rows, loss, bound_loss, models)


def select_b(report: SweepReport | list) -> int:
    """Smallest slice width after which the bound stops decreasing."""
    rows = report.rows if isinstance(report, SweepReport) else list(report)
    if len(rows) < 2:
        raise ValueError("need at least two sweep rows")
    rows = sorted(rows, key=lambda r: r.b)
    for cur, nxt in zip(rows, rows[1:]):
        if nxt.bound > cur.bound:
            return cur.b
    return rows[-1].b

"""Full-batch training with early stopping, k-fold cross-validation, and
report assembly.

Every epoch runs one forward pass over the whole graph; the loss is
masked to the training ids and a separate evaluation-mode pass scores
the validation ids. The best-validation snapshot is what a run returns.
Per-fold RNG streams are derived as seed XOR fold index so folds are
independent but reproducible.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import tensor as T
from .embeddings import EmbeddingTable
from .graph import HeteroGraph
from .layers import Adjacency, LayerKind
from .metrics import macro_f1, mean_std, micro_f1, retrieval_at_k
from .model import (
    TASKS,
    MultiTaskGnn,
    head_logits,
    label_arrays,
    multitask_loss,
    node_representation,
)
from .splits import kfold, split_dataset

RETRIEVAL_KS = tuple(range(1, 11))


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 400
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    patience: int = 50
    dropout: float = 0.5
    k: int = 3
    test_fraction: float = 0.2
    loss_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    layer_kind: LayerKind = LayerKind.SAGE_MEAN
    hidden_dim: int = 64
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_epochs <= 0:
            raise ValueError("max_epochs must be positive")
        if not 0 <= self.patience < self.max_epochs:
            raise ValueError("patience must lie in [0, max_epochs)")
        if self.learning_rate <= 0 or self.weight_decay < 0:
            raise ValueError("rates must be positive (decay non-negative)")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if any(w < 0 for w in self.loss_weights):
            raise ValueError("loss weights must be non-negative")

    def adam(self) -> T.AdamConfig:
        return T.AdamConfig(
            learning_rate=self.learning_rate, weight_decay=self.weight_decay
        )


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = -1
    stop_epoch: int = 0

    @property
    def best_val_loss(self) -> float:
        return self.val_loss[self.best_epoch]


class NonFiniteLossError(RuntimeError):
    def __init__(self, epoch: int, value: float):
        super().__init__(f"non-finite loss {value} at epoch {epoch}")
        self.epoch = epoch


def _row_mask(node_ids: tuple[str, ...], ids: tuple[str, ...]) -> np.ndarray:
    wanted = set(ids)
    return np.array([nid in wanted for nid in node_ids])


def train(
    g: HeteroGraph,
    table: EmbeddingTable,
    cfg: TrainConfig,
    train_ids: tuple[str, ...],
    val_ids: tuple[str, ...],
) -> tuple[MultiTaskGnn, TrainHistory]:
    """Train until validation loss stops improving (strictly) for
    cfg.patience epochs; return the best-validation snapshot."""
    if not train_ids or not val_ids:
        raise ValueError("train and validation id sets must be non-empty")
    if set(train_ids) & set(val_ids):
        raise ValueError("train and validation ids overlap")
    rng = np.random.default_rng(cfg.seed)
    model = MultiTaskGnn(
        node_ids=tuple(n.id for n in g.nodes),
        text_dim=table.dim,
        hidden_dim=cfg.hidden_dim,
        kind=cfg.layer_kind,
        rng=rng,
        dropout=cfg.dropout,
        loss_weights=cfg.loss_weights,
    )
    adj = Adjacency.from_graph(g)
    labels = label_arrays(g, model.node_ids)
    train_mask = _row_mask(model.node_ids, train_ids)
    val_mask = _row_mask(model.node_ids, val_ids)
    params = model.parameters()
    adam_cfg = cfg.adam()

    history = TrainHistory()
    best = np.inf
    snapshot: list[np.ndarray] | None = None
    for epoch in range(cfg.max_epochs):
        reps = node_representation(model, g, table, adj, training=True, rng=rng)
        loss = multitask_loss(head_logits(model, reps), labels, train_mask, cfg.loss_weights)
        train_value = loss.item()
        if not np.isfinite(train_value):
            raise NonFiniteLossError(epoch, train_value)
        loss.backward()
        T.adam_step(params, adam_cfg)

        eval_reps = node_representation(model, g, table, adj, training=False)
        val_value = multitask_loss(
            head_logits(model, eval_reps), labels, val_mask, cfg.loss_weights
        ).item()
        if not np.isfinite(val_value):
            raise NonFiniteLossError(epoch, val_value)
        history.train_loss.append(train_value)
        history.val_loss.append(val_value)

        if val_value < best:
            best = val_value
            history.best_epoch = epoch
            snapshot = [p.data.copy() for p in params]
        elif epoch - history.best_epoch >= cfg.patience:
            history.stop_epoch = epoch + 1
            break
    else:
        history.stop_epoch = cfg.max_epochs

    assert snapshot is not None
    for p, data in zip(params, snapshot):
        p.data[:] = data
        p.grad = None
    return model, history


def classification_metrics(
    preds_by_task: dict[str, np.ndarray],
    labels: dict[str, tuple[np.ndarray, np.ndarray]],
    row_mask: np.ndarray,
) -> dict[str, dict[str, float | None]]:
    """Shared scorer: per task, micro and macro F1 over the rows that
    both sit in row_mask and carry that task's label. One code path for
    every model family evaluated in this package."""
    out: dict[str, dict[str, float | None]] = {}
    for task in TASKS:
        targets, present = labels[task.name]
        mask = present & row_mask
        preds = preds_by_task[task.name]
        out[task.name] = {
            "micro_f1": micro_f1(preds, targets, mask),
            "macro_f1": macro_f1(preds, targets, mask, len(task.classes)),
        }
    return out


def predictions_by_task(logits: np.ndarray) -> dict[str, np.ndarray]:
    return {
        task.name: np.argmax(logits[:, task.offset : task.stop], axis=1)
        for task in TASKS
    }


def retrieval_metrics(
    reps: np.ndarray,
    example_ids: tuple[str, ...],
    labels: dict[str, tuple[np.ndarray, np.ndarray]],
    query_ids: tuple[str, ...],
) -> dict[str, dict[str, dict[str, float | None]]]:
    """P@k / R@k per task. Rows are reordered by id so similarity ties
    break toward the lexicographically smaller id; the candidate pool is
    every example except the query itself."""
    order = np.argsort(np.array(example_ids))
    sorted_ids = [example_ids[i] for i in order]
    reps_sorted = reps[order]
    query_pos = np.array([sorted_ids.index(q) for q in query_ids])
    out: dict[str, dict[str, dict[str, float | None]]] = {}
    for task in TASKS:
        targets, present = labels[task.name]
        lab = np.where(present, targets, -1)[order]
        per_k_p: dict[str, float | None] = {}
        per_k_r: dict[str, float | None] = {}
        for k in RETRIEVAL_KS:
            if k > len(sorted_ids) - 1:
                per_k_p[str(k)] = None
                per_k_r[str(k)] = None
                continue
            result = retrieval_at_k(reps_sorted, lab, query_pos, k)
            per_k_p[str(k)] = None if result is None else result[0]
            per_k_r[str(k)] = None if result is None else result[1]
        out[task.name] = {"precision_at": per_k_p, "recall_at": per_k_r}
    return out


def evaluate_fold(
    model: MultiTaskGnn,
    g: HeteroGraph,
    table: EmbeddingTable,
    adj: Adjacency,
    eval_ids: tuple[str, ...],
) -> dict:
    """All metrics for one trained model on one id set."""
    reps = node_representation(model, g, table, adj, training=False)
    logits = head_logits(model, reps).data
    labels = label_arrays(g, model.node_ids)
    preds = predictions_by_task(logits)
    row_mask = _row_mask(model.node_ids, eval_ids)
    classification = classification_metrics(preds, labels, row_mask)

    example_ids = g.example_ids()
    ex_index = [model.node_ids.index(nid) for nid in example_ids]
    ex_reps = reps.data[ex_index]
    ex_labels = label_arrays(g, example_ids)
    retrieval = retrieval_metrics(ex_reps, example_ids, ex_labels, eval_ids)
    return {"classification": classification, "retrieval": retrieval}


def _aggregate(fold_results: list[dict]) -> dict:
    """mean and population std per leaf metric; folds where a metric is
    absent (None) are dropped from that metric's aggregate."""

    def collect(path_get):
        values = [path_get(fr) for fr in fold_results]
        values = [v for v in values if v is not None]
        if not values:
            return {"mean": None, "std": None, "count": 0}
        mean, std = mean_std(values)
        return {"mean": mean, "std": std, "count": len(values)}

    agg: dict = {"classification": {}, "retrieval": {}}
    for task in TASKS:
        agg["classification"][task.name] = {
            m: collect(lambda fr, m=m, t=task.name: fr["classification"][t][m])
            for m in ("micro_f1", "macro_f1")
        }
        agg["retrieval"][task.name] = {
            side: {
                str(k): collect(
                    lambda fr, s=side, t=task.name, k=k: fr["retrieval"][t][s][str(k)]
                )
                for k in RETRIEVAL_KS
            }
            for side in ("precision_at", "recall_at")
        }
    return agg


@dataclass
class MetricsReport:
    config: dict
    folds: list[dict]
    aggregate: dict
    notes: dict

    def to_json(self) -> str:
        doc = {
            "config": self.config,
            "folds": self.folds,
            "aggregate": self.aggregate,
            "notes": self.notes,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = []
        lines.append("fold  task   micro_f1  macro_f1")
        for i, fr in enumerate(self.folds):
            for task in TASKS:
                row = fr["classification"][task.name]
                lines.append(
                    f"{i:>4}  {task.name:<5}  {_fmt(row['micro_f1'])}  {_fmt(row['macro_f1'])}"
                )
        lines.append("")
        lines.append("aggregate (mean +/- population std over folds)")
        lines.append("task   micro_f1            macro_f1")
        for task in TASKS:
            row = self.aggregate["classification"][task.name]
            lines.append(
                f"{task.name:<5}  {_fmt_agg(row['micro_f1'])}  {_fmt_agg(row['macro_f1'])}"
            )
        has_retrieval = any(
            v["count"] > 0
            for task in TASKS
            for side in ("precision_at", "recall_at")
            for v in self.aggregate["retrieval"][task.name][side].values()
        )
        if has_retrieval:
            lines.append("")
            lines.append("retrieval (aggregate mean, x100)")
            header = "task   metric       " + "".join(f"@{k:<6}" for k in RETRIEVAL_KS)
            lines.append(header)
            for task in TASKS:
                for side, tag in (("precision_at", "P"), ("recall_at", "R")):
                    cells = []
                    for k in RETRIEVAL_KS:
                        v = self.aggregate["retrieval"][task.name][side][str(k)]["mean"]
                        cells.append("  -   " if v is None else f"{100 * v:6.2f} ")
                    lines.append(f"{task.name:<5}  {tag}@k          " + "".join(cells))
        return "\n".join(lines) + "\n"


def _fmt(v: float | None) -> str:
    return "   -    " if v is None else f"{100 * v:8.2f}"


def _fmt_agg(entry: dict) -> str:
    if entry["mean"] is None:
        return "     -             "
    return f"{100 * entry['mean']:6.2f} +/- {100 * entry['std']:5.2f} "


def cross_validate(
    g: HeteroGraph, table: EmbeddingTable, cfg: TrainConfig, config_echo: dict | None = None
) -> MetricsReport:
    """Split off the test part, train one model per fold of the
    remainder, and score each fold's validation ids."""
    plan = split_dataset(g, cfg.test_fraction, cfg.seed)
    folds = kfold(g, plan.train, cfg.k, cfg.seed)
    adj = Adjacency.from_graph(g)
    fold_results = []
    histories = []
    for fold_index, (fold_train, fold_val) in enumerate(folds):
        fold_cfg = replace(cfg, seed=cfg.seed ^ fold_index)
        model, history = train(g, table, fold_cfg, fold_train, fold_val)
        result = evaluate_fold(model, g, table, adj, fold_val)
        result["best_epoch"] = history.best_epoch
        result["stop_epoch"] = history.stop_epoch
        result["best_val_loss"] = history.best_val_loss
        fold_results.append(result)
        histories.append(history)
    report = MetricsReport(
        config=config_echo if config_echo is not None else _config_dict(cfg),
        folds=fold_results,
        aggregate=_aggregate(fold_results),
        notes={
            "retrieval_pool": "all example nodes except the query itself",
            "std": "population (n denominator)",
        },
    )
    return report


def _config_dict(cfg: TrainConfig) -> dict:
    doc = asdict(cfg)
    doc["layer_kind"] = cfg.layer_kind.value
    doc["loss_weights"] = list(cfg.loss_weights)
    return doc

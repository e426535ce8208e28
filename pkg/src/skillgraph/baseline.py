"""Text-only reference model: TF-IDF features into one multinomial
logistic head per task, trained with the same optimizer, splits, and
metrics pipeline as the graph model. Reports label it "TF-IDF linear
(RF stand-in)" to flag the substitution for the usual forest baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import tensor as T
from .embeddings import tokenize
from .graph import HeteroGraph
from .metrics import mean_std
from .model import TASKS, label_arrays
from .splits import kfold, split_dataset
from .training import (
    MetricsReport,
    NonFiniteLossError,
    TrainConfig,
    TrainHistory,
    _config_dict,
    _row_mask,
    classification_metrics,
)

BASELINE_LABEL = "TF-IDF linear (RF stand-in)"


@dataclass(frozen=True)
class TfidfVocabulary:
    index: dict[str, int]  # term -> dense column
    idf: np.ndarray
    n_docs: int


def fit_tfidf(corpus: list[str]) -> TfidfVocabulary:
    """Lexicographically ordered unigram vocabulary with smoothed idf."""
    if not corpus:
        raise ValueError("corpus must be non-empty")
    df: dict[str, int] = {}
    for text in corpus:
        for term in set(tokenize(text)):
            df[term] = df.get(term, 0) + 1
    terms = sorted(df)
    n = len(corpus)
    idf = np.array([math.log((1 + n) / (1 + df[t])) + 1.0 for t in terms])
    return TfidfVocabulary({t: i for i, t in enumerate(terms)}, idf, n)


def transform(vocab: TfidfVocabulary, text: str) -> np.ndarray:
    """tf * idf, L2-normalized; unknown terms dropped, empty result stays
    the zero vector."""
    vec = np.zeros(len(vocab.index))
    for term in tokenize(text):
        col = vocab.index.get(term)
        if col is not None:
            vec[col] += 1.0
    vec *= vocab.idf
    norm = np.linalg.norm(vec)
    if norm > 0.0:
        vec /= norm
    return vec


def transform_matrix(vocab: TfidfVocabulary, texts: list[str]) -> np.ndarray:
    return np.stack([transform(vocab, t) for t in texts])


class LinearBaseline:
    """One zero-initialized softmax-regression head per task. Zero init
    makes "untouched" provable: a task with loss weight 0 receives no
    loss gradient and, at zero, no decay gradient either."""

    def __init__(self, n_features: int):
        self.heads: dict[str, tuple[T.Parameter, T.Parameter]] = {
            task.name: (
                T.Parameter(np.zeros((n_features, len(task.classes)))),
                T.Parameter(np.zeros((1, len(task.classes)))),
            )
            for task in TASKS
        }

    def parameters(self) -> list[T.Parameter]:
        return [p for pair in self.heads.values() for p in pair]

    def logits(self, x: T.Tensor, task_name: str) -> T.Tensor:
        w, b = self.heads[task_name]
        return T.linear(x, w, b)

    def predictions(self, x: np.ndarray) -> dict[str, np.ndarray]:
        out = {}
        for task in TASKS:
            w, b = self.heads[task.name]
            out[task.name] = np.argmax(x @ w.data + b.data, axis=1)
        return out


def _loss(
    model: LinearBaseline,
    x: T.Tensor,
    labels: dict[str, tuple[np.ndarray, np.ndarray]],
    row_mask: np.ndarray,
    weights: tuple[float, float, float],
) -> T.Tensor:
    total = T.Tensor(0.0)
    for task, weight in zip(TASKS, weights):
        if weight == 0.0:
            continue
        targets, present = labels[task.name]
        term = T.cross_entropy(model.logits(x, task.name), targets, present & row_mask)
        total = T.add(total, T.scale(term, weight))
    return total


def train_baseline(
    x: np.ndarray,
    labels: dict[str, tuple[np.ndarray, np.ndarray]],
    cfg: TrainConfig,
    train_mask: np.ndarray,
    val_mask: np.ndarray,
) -> tuple[LinearBaseline, TrainHistory]:
    """Adam on masked cross-entropy with the same early-stopping rule as
    the graph model."""
    model = LinearBaseline(x.shape[1])
    params = model.parameters()
    adam_cfg = cfg.adam()
    xt = T.Tensor(x)
    history = TrainHistory()
    best = np.inf
    snapshot: list[np.ndarray] | None = None
    for epoch in range(cfg.max_epochs):
        loss = _loss(model, xt, labels, train_mask, cfg.loss_weights)
        train_value = loss.item()
        if not np.isfinite(train_value):
            raise NonFiniteLossError(epoch, train_value)
        loss.backward()
        T.adam_step(params, adam_cfg)
        val_value = _loss(model, xt, labels, val_mask, cfg.loss_weights).item()
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


def baseline_cross_validate(
    g: HeteroGraph, cfg: TrainConfig, config_echo: dict | None = None
) -> MetricsReport:
    """Same split plan and fold seeds as the graph model's run; text is
    the only input. Classification metrics come from the shared scorer;
    there is no representation to rank, so retrieval stays empty."""
    plan = split_dataset(g, cfg.test_fraction, cfg.seed)
    folds = kfold(g, plan.train, cfg.k, cfg.seed)
    example_ids = g.example_ids()
    texts = {nid: g.node(nid).text for nid in example_ids}
    labels = label_arrays(g, example_ids)

    fold_results = []
    for fold_index, (fold_train, fold_val) in enumerate(folds):
        fold_cfg = replace(cfg, seed=cfg.seed ^ fold_index)
        vocab = fit_tfidf([texts[nid] for nid in fold_train])
        x = transform_matrix(vocab, [texts[nid] for nid in example_ids])
        train_mask = _row_mask(example_ids, fold_train)
        val_mask = _row_mask(example_ids, fold_val)
        model, history = train_baseline(x, labels, fold_cfg, train_mask, val_mask)
        preds = model.predictions(x)
        result = {
            "classification": classification_metrics(preds, labels, val_mask),
            "retrieval": {
                task.name: {"precision_at": {}, "recall_at": {}} for task in TASKS
            },
            "best_epoch": history.best_epoch,
            "stop_epoch": history.stop_epoch,
            "best_val_loss": history.best_val_loss,
        }
        fold_results.append(result)

    echo = config_echo if config_echo is not None else _config_dict(cfg)
    echo = dict(echo)
    echo["model"] = BASELINE_LABEL
    return MetricsReport(
        config=echo,
        folds=fold_results,
        aggregate=_aggregate_classification_only(fold_results),
        notes={"model": BASELINE_LABEL, "std": "population (n denominator)"},
    )


def _aggregate_classification_only(fold_results: list[dict]) -> dict:
    agg: dict = {"classification": {}, "retrieval": {}}
    for task in TASKS:
        per_metric = {}
        for m in ("micro_f1", "macro_f1"):
            values = [
                fr["classification"][task.name][m]
                for fr in fold_results
                if fr["classification"][task.name][m] is not None
            ]
            if values:
                mean, std = mean_std(values)
                per_metric[m] = {"mean": mean, "std": std, "count": len(values)}
            else:
                per_metric[m] = {"mean": None, "std": None, "count": 0}
        agg["classification"][task.name] = per_metric
        agg["retrieval"][task.name] = {
            side: {str(k): {"mean": None, "std": None, "count": 0} for k in range(1, 11)}
            for side in ("precision_at", "recall_at")
        }
    return agg

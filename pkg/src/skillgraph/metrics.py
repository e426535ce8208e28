"""Classification and retrieval metrics.

micro F1 pools true/false positives globally (for single-label
multi-class prediction it equals accuracy); macro F1 averages per-class
F1 with absent classes contributing zero. Retrieval quality ranks
candidates by cosine similarity of representations, with relevance
defined as sharing the query's gold label.
"""

from __future__ import annotations

import numpy as np


def micro_f1(preds: np.ndarray, golds: np.ndarray, mask: np.ndarray) -> float | None:
    """Global-pool F1 over the masked rows; None when nothing is masked
    in (absence of data, not a zero score)."""
    preds = np.asarray(preds)
    golds = np.asarray(golds)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return None
    p = preds[mask]
    g = golds[mask]
    tp = int((p == g).sum())
    fp = int((p != g).sum())
    fn = fp  # each wrong single-label prediction is one FP and one FN
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


def macro_f1(
    preds: np.ndarray, golds: np.ndarray, mask: np.ndarray, n_classes: int
) -> float | None:
    """Unweighted mean of per-class F1; a class absent from both the
    predictions and the golds contributes 0."""
    preds = np.asarray(preds)
    golds = np.asarray(golds)
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return None
    p = preds[mask]
    g = golds[mask]
    scores = []
    for c in range(n_classes):
        tp = int(((p == c) & (g == c)).sum())
        fp = int(((p == c) & (g != c)).sum())
        fn = int(((p != c) & (g == c)).sum())
        if tp == 0:
            scores.append(0.0)
        else:
            precision = tp / (tp + fp)
            recall = tp / (tp + fn)
            scores.append(2 * precision * recall / (precision + recall))
    return float(np.mean(scores))


def _cosine_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    na = np.linalg.norm(a, axis=1, keepdims=True)
    nb = np.linalg.norm(b, axis=1, keepdims=True)
    na = np.where(na == 0.0, 1.0, na)
    nb = np.where(nb == 0.0, 1.0, nb)
    return (a / na) @ (b / nb).T


def retrieval_at_k(
    reps: np.ndarray,
    labels: np.ndarray,
    query_indices: np.ndarray,
    k: int,
) -> tuple[float, float] | None:
    """Mean P@k and R@k over the query rows.

    Candidates are all rows except the query itself; ranking is by
    cosine similarity descending with index-ascending tie-break (rows
    are expected in id order). Queries with a missing label (< 0) or
    with no relevant candidate anywhere are skipped; with every query
    skipped the result is None.
    """
    reps = np.asarray(reps)
    labels = np.asarray(labels)
    n = reps.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError(f"k={k} outside [1, {n - 1}]")
    sims = _cosine_matrix(reps, reps)
    precisions = []
    recalls = []
    for q in np.asarray(query_indices):
        if labels[q] < 0:
            continue
        relevant = (labels == labels[q]) & (labels >= 0)
        relevant[q] = False
        total_relevant = int(relevant.sum())
        if total_relevant == 0:
            continue
        sim = sims[q].copy()
        sim[q] = -np.inf  # query never retrieves itself
        order = np.lexsort((np.arange(n), -sim))
        top = order[:k]
        hits = int(relevant[top].sum())
        precisions.append(hits / k)
        recalls.append(hits / total_relevant)
    if not precisions:
        return None
    return float(np.mean(precisions)), float(np.mean(recalls))


def mean_std(values: list[float]) -> tuple[float, float]:
    """Mean and population (n-denominator) standard deviation."""
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std())

"""Independent reference implementations used only by tests.

These are deliberately naive (explicit confusion matrices, per-pair
cosine loops) so they share no code path with the library. Keep them
frozen; when a test disagrees with an oracle, suspect the library.
"""

import numpy as np


def confusion_matrix(preds, golds, mask, n_classes):
    cm = np.zeros((n_classes, n_classes), dtype=int)
    for p, g, m in zip(preds, golds, mask):
        if m:
            cm[int(g), int(p)] += 1
    return cm


def micro_f1_oracle(preds, golds, mask, n_classes):
    cm = confusion_matrix(preds, golds, mask, n_classes)
    if cm.sum() == 0:
        return None
    tp = sum(cm[c, c] for c in range(n_classes))
    fp = sum(cm[:, c].sum() - cm[c, c] for c in range(n_classes))
    fn = sum(cm[c, :].sum() - cm[c, c] for c in range(n_classes))
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def macro_f1_oracle(preds, golds, mask, n_classes):
    cm = confusion_matrix(preds, golds, mask, n_classes)
    if cm.sum() == 0:
        return None
    scores = []
    for c in range(n_classes):
        tp = cm[c, c]
        fp = cm[:, c].sum() - tp
        fn = cm[c, :].sum() - tp
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(scores))


def accuracy_oracle(preds, golds, mask):
    pairs = [(p, g) for p, g, m in zip(preds, golds, mask) if m]
    if not pairs:
        return None
    return sum(p == g for p, g in pairs) / len(pairs)


def cosine(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0:
        na = 1.0
    if nb == 0.0:
        nb = 1.0
    return float(np.dot(a, b) / (na * nb))


def retrieval_oracle(reps, labels, query_indices, k):
    """P@k and R@k by explicit per-query sorting."""
    n = len(labels)
    precisions, recalls = [], []
    for q in query_indices:
        if labels[q] < 0:
            continue
        candidates = [i for i in range(n) if i != q]
        relevant = {i for i in candidates if labels[i] == labels[q] and labels[i] >= 0}
        if not relevant:
            continue
        ranked = sorted(candidates, key=lambda i: (-cosine(reps[q], reps[i]), i))
        hits = sum(1 for i in ranked[:k] if i in relevant)
        precisions.append(hits / k)
        recalls.append(hits / len(relevant))
    if not precisions:
        return None
    return float(np.mean(precisions)), float(np.mean(recalls))

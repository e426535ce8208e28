"""Export trained representations for inspection.

Writes the labeled embedding file (one representation row per example
node, gold labels appended as extra tab-separated columns) plus a 2-D
companion computed by deterministic power-iteration PCA.
"""

from __future__ import annotations

import numpy as np

from .embeddings import EmbeddingTable
from .graph import TASK_CLASSES, HeteroGraph
from .layers import Adjacency
from .model import MultiTaskGnn, node_representation


def power_iteration_pca(
    x: np.ndarray, n_components: int = 2, iterations: int = 300
) -> tuple[np.ndarray, np.ndarray]:
    """Top principal components by repeated multiplication and deflation.

    Returns (components [n_components, d], projection [n, n_components]).
    Start vectors come from a fixed-seed generator and each component's
    sign is normalized, so the output is a pure function of x.
    """
    x = np.asarray(x, dtype=np.float64)
    centered = x - x.mean(axis=0, keepdims=True)
    cov = centered.T @ centered / max(len(x), 1)
    rng = np.random.default_rng(0)
    components = []
    for _ in range(n_components):
        v = rng.normal(size=cov.shape[0])
        # keep the search inside the orthogonal complement of what has
        # been found; otherwise a rank-deficient input returns the raw
        # start vector when the deflated matrix is numerically zero
        for u in components:
            v = v - (u @ v) * u
        v /= np.linalg.norm(v)
        for _ in range(iterations):
            w = cov @ v
            for u in components:
                w = w - (u @ w) * u
            norm = np.linalg.norm(w)
            if norm < 1e-300:
                break  # remaining spectrum is numerically zero
            v = w / norm
        # fix the sign so the largest-magnitude coordinate is positive
        anchor = int(np.argmax(np.abs(v)))
        if v[anchor] < 0:
            v = -v
        eigenvalue = float(v @ cov @ v)
        components.append(v)
        cov = cov - eigenvalue * np.outer(v, v)
    comp = np.stack(components)
    return comp, centered @ comp.T


def _label_columns(g: HeteroGraph, nid: str) -> list[str]:
    labels = g.node(nid).labels
    cols = []
    for task in ("cf", "ic", "skill"):
        value = None if labels is None else labels.get(task)
        cols.append("-" if value is None else TASK_CLASSES[task][value])
    return cols


def export_embeddings(
    model: MultiTaskGnn, g: HeteroGraph, table: EmbeddingTable
) -> tuple[str, str]:
    """(labeled embedding file, 2-D PCA companion), both covering every
    example node in graph order."""
    adj = Adjacency.from_graph(g)
    reps = node_representation(model, g, table, adj, training=False).data
    example_ids = g.example_ids()
    rows = np.stack([reps[model.node_ids.index(nid)] for nid in example_ids])

    emb_lines = [f"dim={rows.shape[1]}"]
    for nid, row in zip(example_ids, rows):
        values = " ".join(repr(v) for v in row.tolist())
        emb_lines.append("\t".join([nid, values, *_label_columns(g, nid)]))

    _, projected = power_iteration_pca(rows, n_components=2)
    pca_lines = ["dim=2"]
    for nid, row in zip(example_ids, projected):
        values = " ".join(repr(v) for v in row.tolist())
        pca_lines.append("\t".join([nid, values, *_label_columns(g, nid)]))

    return "\n".join(emb_lines) + "\n", "\n".join(pca_lines) + "\n"

"""Multi-task node classifier: input assembly, message-passing stack,
sliced linear head, masked loss, and isolated-node inference.

The head is one linear layer whose 15 output columns are split into
contiguous per-task slices (common factor [0,4), intervention concept
[4,7), skill [7,15)); each task applies softmax over its own slice.
Each node's input is its text embedding concatenated with a learnable
structural embedding (zeros for nodes outside the training graph), and
the classifier consumes the text embedding concatenated with the final
hidden state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .embeddings import EmbedderSpec, EmbeddingTable, hash_embed
from .graph import (
    CF_CLASSES,
    IC_CLASSES,
    SKILL_CLASSES,
    HeteroGraph,
    NodeKind,
)
from .layers import Adjacency, GnnStack, LayerKind, forward, init_stack


@dataclass(frozen=True)
class TaskSpec:
    name: str
    classes: tuple[str, ...]
    offset: int

    @property
    def stop(self) -> int:
        return self.offset + len(self.classes)


TASKS: tuple[TaskSpec, ...] = (
    TaskSpec("cf", CF_CLASSES, 0),
    TaskSpec("ic", IC_CLASSES, 4),
    TaskSpec("skill", SKILL_CLASSES, 7),
)
HEAD_WIDTH = TASKS[-1].stop  # 15 = 4 + 3 + 8


@dataclass(frozen=True)
class Prediction:
    labels: dict[str, str]
    label_indices: dict[str, int]
    probabilities: dict[str, list[float]]
    confidences: dict[str, float]


class MultiTaskGnn:
    """Structural embedding table + message-passing stack + sliced head."""

    def __init__(
        self,
        node_ids: tuple[str, ...],
        text_dim: int,
        hidden_dim: int,
        kind: LayerKind,
        rng: np.random.Generator,
        dropout: float = 0.5,
        loss_weights: tuple[float, float, float] = (1.0, 1.0, 1.0),
        n_layers: int = 3,
    ):
        if any(w < 0 for w in loss_weights):
            raise ValueError("loss weights must be non-negative")
        self.node_ids = node_ids
        self.text_dim = text_dim
        self.hidden_dim = hidden_dim
        self.loss_weights = loss_weights
        # Zero-initialized so an unseen node (all-zero structural half)
        # looks exactly like an untrained one.
        self.structural = T.Parameter(np.zeros((len(node_ids), text_dim)))
        self.stack: GnnStack = init_stack(
            kind, 2 * text_dim, hidden_dim, rng, n_layers=n_layers, dropout=dropout
        )
        rep_dim = text_dim + hidden_dim
        self.head_w = T.Parameter(
            T.glorot_uniform(rng, rep_dim, HEAD_WIDTH, (rep_dim, HEAD_WIDTH))
        )
        self.head_b = T.Parameter(np.zeros((1, HEAD_WIDTH)))

    def parameters(self) -> list[T.Parameter]:
        return [self.structural, *self.stack.parameters(), self.head_w, self.head_b]

    def parameter_items(self) -> list[tuple[str, T.Parameter]]:
        items = [("structural", self.structural)]
        for i, layer in enumerate(self.stack.layers):
            for fname in vars(layer):
                items.append((f"layer{i}.{fname}", getattr(layer, fname)))
        items.append(("head.w", self.head_w))
        items.append(("head.b", self.head_b))
        return items


def assemble_inputs(
    g: HeteroGraph, table: EmbeddingTable, model: MultiTaskGnn
) -> T.Tensor:
    """Per-node input rows: text embedding beside the structural half."""
    if table.dim != model.text_dim:
        raise ValueError(
            f"feature dim {table.dim} does not match model text dim {model.text_dim}"
        )
    text = T.Tensor(table.matrix(model.node_ids))
    return T.concat(text, model.structural, axis=1)


def node_representation(
    model: MultiTaskGnn,
    g: HeteroGraph,
    table: EmbeddingTable,
    adj: Adjacency,
    training: bool,
    rng: np.random.Generator | None = None,
) -> T.Tensor:
    """832-wide rows: text embedding beside the final hidden state. This
    is both the head input and the exported embedding."""
    features = assemble_inputs(g, table, model)
    hidden = forward(model.stack, features, adj, training, rng)
    text = T.Tensor(table.matrix(model.node_ids))
    return T.concat(text, hidden, axis=1)


def head_logits(model: MultiTaskGnn, reps: T.Tensor) -> T.Tensor:
    return T.linear(reps, model.head_w, model.head_b)


def slice_probabilities(logits: np.ndarray) -> dict[str, np.ndarray]:
    """Per-task softmax over each slice of already-computed logits."""
    out = {}
    for task in TASKS:
        z = logits[:, task.offset : task.stop]
        z = z - z.max(axis=1, keepdims=True)
        e = np.exp(z)
        out[task.name] = e / e.sum(axis=1, keepdims=True)
    return out


def predict_rows(model: MultiTaskGnn, reps: T.Tensor) -> list[Prediction]:
    logits = head_logits(model, reps).data
    probs = slice_probabilities(logits)
    preds = []
    for i in range(logits.shape[0]):
        labels: dict[str, str] = {}
        indices: dict[str, int] = {}
        vectors: dict[str, list[float]] = {}
        confs: dict[str, float] = {}
        for task in TASKS:
            p = probs[task.name][i]
            # argmax breaks ties toward the lowest index
            idx = int(np.argmax(p))
            labels[task.name] = task.classes[idx]
            indices[task.name] = idx
            vectors[task.name] = p.tolist()
            confs[task.name] = float(p[idx])
        preds.append(Prediction(labels, indices, vectors, confs))
    return preds


def label_arrays(g: HeteroGraph, node_ids: tuple[str, ...]) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Per task: (targets, present) aligned to node_ids; targets hold 0
    where absent and the mask carries the truth."""
    out = {}
    for task in TASKS:
        targets = np.zeros(len(node_ids), dtype=np.int64)
        present = np.zeros(len(node_ids), dtype=bool)
        for i, nid in enumerate(node_ids):
            node = g.node(nid)
            if node.kind is not NodeKind.EXAMPLE or node.labels is None:
                continue
            value = node.labels.get(task.name)
            if value is not None:
                targets[i] = value
                present[i] = True
        out[task.name] = (targets, present)
    return out


def multitask_loss(
    logits: T.Tensor,
    labels: dict[str, tuple[np.ndarray, np.ndarray]],
    row_mask: np.ndarray,
    loss_weights: tuple[float, float, float],
) -> T.Tensor:
    """Weighted sum of per-task masked cross-entropies. A row counts for
    a task only when it is in row_mask and carries that task's label."""
    total = T.Tensor(0.0)
    for task, weight in zip(TASKS, loss_weights):
        if weight == 0.0:
            continue
        targets, present = labels[task.name]
        mask = present & row_mask
        term = T.cross_entropy(
            T.narrow(logits, task.offset, task.stop, axis=1), targets, mask
        )
        total = T.add(total, T.scale(term, weight))
    return total


def infer_isolated(
    model: MultiTaskGnn, text: str, spec: EmbedderSpec
) -> tuple[Prediction, np.ndarray]:
    """Classify a new utterance with no graph attachment: zero structural
    half, empty neighborhood at every layer. Touches no stored state."""
    x = hash_embed(text, spec)
    return infer_isolated_from_vector(model, x)


def infer_isolated_from_vector(
    model: MultiTaskGnn, x: np.ndarray
) -> tuple[Prediction, np.ndarray]:
    if x.shape != (model.text_dim,):
        raise ValueError(f"expected a {model.text_dim}-wide feature vector")
    features = T.Tensor(
        np.concatenate([x, np.zeros(model.text_dim)])[None, :]
    )
    hidden = forward(model.stack, features, Adjacency.isolated(1), training=False)
    rep = T.concat(T.Tensor(x[None, :]), hidden, axis=1)
    return predict_rows(model, rep)[0], rep.data[0]

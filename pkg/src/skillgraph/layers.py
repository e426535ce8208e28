"""Message-passing layers: mean-aggregation, normalized-sum, and
single-head attention variants, all over a dense cached adjacency.

The graphs here are a few hundred nodes, so neighbor structure is kept
as dense [n, n] float64 matrices and aggregation is plain matrix
multiplication. Every variant handles an isolated node without special
cases: its output depends on its own features only.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import tensor as T
from .graph import HeteroGraph


class LayerKind(str, Enum):
    SAGE_MEAN = "sage"
    GCN = "gcn"
    GAT = "gat"


class Adjacency:
    """Constant per-graph matrices shared by every layer and epoch.

    mean_norm: row v = 1/|N(v)| over neighbors, zero row when isolated.
    gcn_norm: (D+I)^(-1/2) (A+I) (D+I)^(-1/2) with self-loops added.
    att_mask: boolean N(v) plus self, the attention softmax support.
    """

    def __init__(self, n: int, pairs: list[tuple[int, int]]):
        a = np.zeros((n, n))
        for u, v in pairs:
            a[u, v] = 1.0
            a[v, u] = 1.0
        np.fill_diagonal(a, 0.0)
        deg = a.sum(axis=1)
        inv_deg = np.zeros(n)
        nz = deg > 0
        inv_deg[nz] = 1.0 / deg[nz]
        self.mean_norm = a * inv_deg[:, None]
        a_hat = a + np.eye(n)
        inv_sqrt = 1.0 / np.sqrt(deg + 1.0)
        self.gcn_norm = a_hat * inv_sqrt[:, None] * inv_sqrt[None, :]
        self.att_mask = a_hat > 0.0
        self.n = n

    @classmethod
    def from_graph(cls, g: HeteroGraph) -> "Adjacency":
        pairs = [(g.index[e.source], g.index[e.target]) for e in g.edges]
        return cls(len(g.nodes), pairs)

    @classmethod
    def isolated(cls, n: int = 1) -> "Adjacency":
        return cls(n, [])


@dataclass
class SageParams:
    w_self: T.Parameter
    w_neigh: T.Parameter
    b: T.Parameter


@dataclass
class GcnParams:
    w: T.Parameter
    b: T.Parameter


@dataclass
class GatParams:
    w: T.Parameter
    a: T.Parameter
    b: T.Parameter


LayerParams = SageParams | GcnParams | GatParams


def init_layer(
    kind: LayerKind, din: int, dout: int, rng: np.random.Generator
) -> LayerParams:
    def glorot(shape):
        return T.Parameter(T.glorot_uniform(rng, shape[0], shape[1], shape))

    bias = T.Parameter(np.zeros((1, dout)))
    if kind is LayerKind.SAGE_MEAN:
        return SageParams(glorot((din, dout)), glorot((din, dout)), bias)
    if kind is LayerKind.GCN:
        return GcnParams(glorot((din, dout)), bias)
    att = T.Parameter(T.glorot_uniform(rng, 2 * dout, 1, (2 * dout, 1)))
    return GatParams(glorot((din, dout)), att, bias)


def layer_parameters(p: LayerParams) -> list[T.Parameter]:
    if isinstance(p, SageParams):
        return [p.w_self, p.w_neigh, p.b]
    if isinstance(p, GcnParams):
        return [p.w, p.b]
    return [p.w, p.a, p.b]


def sage_layer(h: T.Tensor, adj: Adjacency, p: SageParams) -> T.Tensor:
    agg = T.matmul(T.Tensor(adj.mean_norm), h)
    return T.relu(T.add(T.add(T.matmul(h, p.w_self), T.matmul(agg, p.w_neigh)), p.b))


def gcn_layer(h: T.Tensor, adj: Adjacency, p: GcnParams) -> T.Tensor:
    return T.relu(T.add(T.matmul(T.Tensor(adj.gcn_norm), T.matmul(h, p.w)), p.b))


def gat_attention(h: T.Tensor, adj: Adjacency, p: GatParams) -> tuple[T.Tensor, T.Tensor]:
    """Attention matrix alpha[v, u] over u in N(v) plus self, and the
    transformed features it weights."""
    g = T.matmul(h, p.w)
    # Score for the (destination v, source u) pair decomposes into a
    # destination term plus a source term, so the full [n, n] score grid
    # is one broadcast add instead of a per-edge gather.
    s_dst = T.matmul(g, T.narrow(p.a, 0, g.shape[1], axis=0))
    s_src = T.matmul(g, T.narrow(p.a, g.shape[1], 2 * g.shape[1], axis=0))
    scores = T.leaky_relu(
        T.add(s_dst, T.reshape(s_src, (1, adj.n))), slope=0.2
    )
    return T.masked_row_softmax(scores, adj.att_mask), g


def gat_layer(h: T.Tensor, adj: Adjacency, p: GatParams) -> T.Tensor:
    alpha, g = gat_attention(h, adj, p)
    return T.relu(T.add(T.matmul(alpha, g), p.b))


def apply_layer(h: T.Tensor, adj: Adjacency, p: LayerParams) -> T.Tensor:
    if isinstance(p, SageParams):
        return sage_layer(h, adj, p)
    if isinstance(p, GcnParams):
        return gcn_layer(h, adj, p)
    return gat_layer(h, adj, p)


@dataclass
class GnnStack:
    kind: LayerKind
    layers: list[LayerParams]
    input_dim: int
    hidden_dim: int
    dropout: float

    def parameters(self) -> list[T.Parameter]:
        return [p for layer in self.layers for p in layer_parameters(layer)]


def init_stack(
    kind: LayerKind,
    input_dim: int,
    hidden_dim: int,
    rng: np.random.Generator,
    n_layers: int = 3,
    dropout: float = 0.5,
) -> GnnStack:
    dims = [input_dim] + [hidden_dim] * n_layers
    layers = [init_layer(kind, dims[i], dims[i + 1], rng) for i in range(n_layers)]
    return GnnStack(kind, layers, input_dim, hidden_dim, dropout)


def forward(
    stack: GnnStack,
    features: T.Tensor,
    adj: Adjacency,
    training: bool,
    rng: np.random.Generator | None = None,
) -> T.Tensor:
    """Run all layers; dropout after every layer except the last, in
    training mode only."""
    if training and stack.dropout > 0.0 and rng is None:
        raise ValueError("training-mode forward with dropout requires an rng")
    h = features
    last = len(stack.layers) - 1
    for i, layer in enumerate(stack.layers):
        h = apply_layer(h, adj, layer)
        if i < last and training and stack.dropout > 0.0:
            h = T.dropout(h, stack.dropout, training=True, rng=rng)
    return h

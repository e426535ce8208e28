"""Dense float64 tensors with reverse-mode gradients and Adam.

Everything here is desk scale (a few hundred thousand parameters), so
arrays are plain numpy float64 buffers and the autodiff graph is rebuilt
on every forward pass. Each op returns a Tensor whose backward closure
scatters the upstream gradient onto the op's inputs; ``Tensor.backward``
replays the closures in reverse topological order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np


class Tensor:
    """Dense array plus the bookkeeping needed for reverse mode."""

    __slots__ = ("data", "grad", "requires_grad", "_prev", "_backward")

    def __init__(self, data, requires_grad: bool = False, _prev: tuple = ()):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in _prev)
        self._prev = _prev
        self._backward: Callable[[np.ndarray], None] | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        return self.data.item()

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self) -> None:
        """Backpropagate from this scalar through the recorded graph."""
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar tensor")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._prev:
                if id(p) not in seen and p.requires_grad:
                    stack.append((p, False))
        self._accumulate(np.ones_like(self.data))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


class Parameter(Tensor):
    """Trainable tensor carrying per-element Adam state."""

    __slots__ = ("m", "v", "t")

    def __init__(self, data):
        super().__init__(data, requires_grad=True)
        self.m = np.zeros_like(self.data)
        self.v = np.zeros_like(self.data)
        self.t = 0


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def add(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data + b.data, _prev=(a, b))

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.data.shape))

    out._backward = backward
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data * b.data, _prev=(a, b))

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.data, b.data.shape))

    out._backward = backward
    return out


def scale(a: Tensor, c: float) -> Tensor:
    out = Tensor(a.data * c, _prev=(a,))

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(g * c)

    out._backward = backward
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ValueError("matmul expects 2-D tensors")
    if a.data.shape[1] != b.data.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    out = Tensor(a.data @ b.data, _prev=(a, b))

    def backward(g: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(g @ b.data.T)
        if b.requires_grad:
            b._accumulate(a.data.T @ g)

    out._backward = backward
    return out


def linear(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """x @ w + b with the bias broadcast over rows."""
    return add(matmul(x, w), b)


def relu(x: Tensor) -> Tensor:
    out = Tensor(np.maximum(x.data, 0.0), _prev=(x,))

    def backward(g: np.ndarray) -> None:
        if x.requires_grad:
            x._accumulate(g * (x.data > 0.0))

    out._backward = backward
    return out


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    out = Tensor(np.where(x.data > 0.0, x.data, slope * x.data), _prev=(x,))

    def backward(g: np.ndarray) -> None:
        if x.requires_grad:
            x._accumulate(g * np.where(x.data > 0.0, 1.0, slope))

    out._backward = backward
    return out


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(shape)
    out = Tensor(x.data.reshape(shape), _prev=(x,))

    def backward(g: np.ndarray) -> None:
        if x.requires_grad:
            x._accumulate(g.reshape(x.data.shape))

    out._backward = backward
    return out


def concat(a: Tensor, b: Tensor, axis: int = 1) -> Tensor:
    out = Tensor(np.concatenate([a.data, b.data], axis=axis), _prev=(a, b))
    split = a.data.shape[axis]

    def backward(g: np.ndarray) -> None:
        ga, gb = np.split(g, [split], axis=axis)
        if a.requires_grad:
            a._accumulate(ga)
        if b.requires_grad:
            b._accumulate(gb)

    out._backward = backward
    return out


def narrow(x: Tensor, start: int, stop: int, axis: int = 1) -> Tensor:
    """Contiguous slice [start, stop) along one axis."""
    index = [slice(None)] * x.data.ndim
    index[axis] = slice(start, stop)
    index = tuple(index)
    out = Tensor(x.data[index], _prev=(x,))

    def backward(g: np.ndarray) -> None:
        if x.requires_grad:
            full = np.zeros_like(x.data)
            full[index] = g
            x._accumulate(full)

    out._backward = backward
    return out


def dropout(x: Tensor, p: float, training: bool, rng: np.random.Generator) -> Tensor:
    """Inverted dropout: zero with probability p, scale survivors by 1/(1-p)."""
    if not 0.0 <= p < 1.0:
        raise ValueError("dropout probability must be in [0, 1)")
    if not training or p == 0.0:
        return x
    keep = (rng.random(x.data.shape) >= p) / (1.0 - p)
    out = Tensor(x.data * keep, _prev=(x,))

    def backward(g: np.ndarray) -> None:
        if x.requires_grad:
            x._accumulate(g * keep)

    out._backward = backward
    return out


def softmax_rows(x: Tensor) -> Tensor:
    """Row-wise softmax of a 2-D tensor, stabilised by per-row max subtraction."""
    z = x.data - x.data.max(axis=1, keepdims=True)
    e = np.exp(z)
    s = e / e.sum(axis=1, keepdims=True)
    out = Tensor(s, _prev=(x,))

    def backward(g: np.ndarray) -> None:
        if x.requires_grad:
            inner = (g * s).sum(axis=1, keepdims=True)
            x._accumulate(s * (g - inner))

    out._backward = backward
    return out


def masked_row_softmax(x: Tensor, mask: np.ndarray) -> Tensor:
    """Row-wise softmax restricted to ``mask``; excluded entries get weight 0.

    Rows must have at least one allowed entry; an all-masked row would
    yield an undefined distribution.
    """
    neg = np.where(mask, x.data, -np.inf)
    rowmax = neg.max(axis=1, keepdims=True)
    e = np.where(mask, np.exp(np.where(mask, x.data - rowmax, 0.0)), 0.0)
    denom = e.sum(axis=1, keepdims=True)
    if np.any(denom == 0.0):
        raise ValueError("masked_row_softmax: a row has no allowed entries")
    s = e / denom
    out = Tensor(s, _prev=(x,))

    def backward(g: np.ndarray) -> None:
        if x.requires_grad:
            inner = (g * s).sum(axis=1, keepdims=True)
            x._accumulate(s * (g - inner))

    out._backward = backward
    return out


def tsum(x: Tensor) -> Tensor:
    out = Tensor(x.data.sum(), _prev=(x,))

    def backward(g: np.ndarray) -> None:
        if x.requires_grad:
            x._accumulate(np.full_like(x.data, float(g)))

    out._backward = backward
    return out


def cross_entropy(logits: Tensor, targets: np.ndarray, mask: np.ndarray) -> Tensor:
    """Mean negative log softmax probability over the masked rows.

    Rows where ``mask`` is false contribute nothing to the value or the
    gradient; with every row masked out the loss is exactly zero.
    """
    targets = np.asarray(targets, dtype=np.int64)
    mask = np.asarray(mask, dtype=bool)
    rows = np.flatnonzero(mask)
    if rows.size == 0:
        return Tensor(0.0)
    picked = logits.data[rows]
    t = targets[rows]
    if np.any(t < 0) or np.any(t >= picked.shape[1]):
        raise ValueError("cross_entropy: target index out of range on a masked row")
    z = picked - picked.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(z).sum(axis=1, keepdims=True))
    logp = z - logsumexp
    value = -logp[np.arange(rows.size), t].mean()
    out = Tensor(value, _prev=(logits,))

    def backward(g: np.ndarray) -> None:
        if logits.requires_grad:
            probs = np.exp(logp)
            probs[np.arange(rows.size), t] -= 1.0
            full = np.zeros_like(logits.data)
            full[rows] = probs * (float(g) / rows.size)
            logits._accumulate(full)

    out._backward = backward
    return out


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if self.weight_decay < 0.0:
            raise ValueError("weight_decay must be non-negative")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("betas must lie in (0, 1)")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")


def adam_step(params: Iterable[Parameter], cfg: AdamConfig) -> None:
    """One bias-corrected Adam update; weight decay enters the gradient
    as a coupled L2 term before the moment updates. Grads are cleared."""
    for p in params:
        g = p.grad if p.grad is not None else np.zeros_like(p.data)
        if cfg.weight_decay != 0.0:
            g = g + cfg.weight_decay * p.data
        p.t += 1
        p.m = cfg.beta1 * p.m + (1.0 - cfg.beta1) * g
        p.v = cfg.beta2 * p.v + (1.0 - cfg.beta2) * (g * g)
        m_hat = p.m / (1.0 - cfg.beta1**p.t)
        v_hat = p.v / (1.0 - cfg.beta2**p.t)
        p.data -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)
        p.grad = None


def zero_grads(params: Iterable[Parameter]) -> None:
    for p in params:
        p.grad = None


def grad_check(
    f: Callable[[], Tensor],
    params: Sequence[Parameter],
    eps: float = 1e-4,
    max_coords: int = 200,
    seed: int = 0,
) -> float:
    """Max relative error between backward-pass gradients of ``f`` and
    central differences over a sampled subset of coordinates.

    ``f`` must be deterministic (dropout disabled) and rebuild its graph
    on every call.
    """
    out = f()
    zero_grads(params)
    out.backward()
    analytic = [
        p.grad.copy() if p.grad is not None else np.zeros_like(p.data) for p in params
    ]
    zero_grads(params)

    coords = [(i, j) for i, p in enumerate(params) for j in range(p.data.size)]
    if len(coords) > max_coords:
        rng = np.random.default_rng(seed)
        chosen = rng.choice(len(coords), size=max_coords, replace=False)
        coords = [coords[int(k)] for k in sorted(chosen)]

    worst = 0.0
    for i, j in coords:
        flat = params[i].data.reshape(-1)
        orig = flat[j]
        flat[j] = orig + eps
        f_plus = f().item()
        flat[j] = orig - eps
        f_minus = f().item()
        flat[j] = orig
        numeric = (f_plus - f_minus) / (2.0 * eps)
        ana = analytic[i].reshape(-1)[j]
        err = abs(numeric - ana) / max(abs(numeric) + abs(ana), 1e-6)
        worst = max(worst, err)
    return worst


def glorot_uniform(
    rng: np.random.Generator, fan_in: int, fan_out: int, shape: Sequence[int]
) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=tuple(shape))

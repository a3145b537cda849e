"""Dense tensors with reverse-mode automatic differentiation.

Minimal substrate for the models in this package: row-major numpy storage
(float64 for training and checking, float32 optional), a fixed set of
forward operations, and exact reverse-mode gradients for each. Values are
immutable once produced by an op; repeated use of a value sums gradients.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from . import kernels


class ShapeError(ValueError):
    pass


class NonFiniteError(FloatingPointError):
    pass


_FLOAT_DTYPES = (np.float32, np.float64)
_grad_enabled = True


class no_grad:
    """Context manager disabling tape construction (used at inference)."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


def _check_finite(arr: np.ndarray, op: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"non-finite values produced by {op}")


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, *, dtype=None, _op: str = "leaf"):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype.type not in _FLOAT_DTYPES:
            arr = arr.astype(np.float64)
        _check_finite(arr, _op)
        self.data = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(()))

    def accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=self.data.dtype, copy=True)
        else:
            self.grad = self.grad + g

    def backward(self) -> None:
        """Reverse-mode gradient accumulation from a scalar root."""
        if self.data.size != 1:
            raise ShapeError(f"backward root must be a scalar, got shape {self.data.shape}")
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        self.accumulate(np.ones_like(self.data))
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype.name}, grad={self.requires_grad})"

    # Operator sugar; the full definitions live in the module functions.
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


class Parameter:
    """Named trainable tensor; its gradient always matches its shape."""

    __slots__ = ("name", "tensor")

    def __init__(self, name: str, data, dtype=None):
        self.name = name
        self.tensor = Tensor(data, requires_grad=True, dtype=dtype, _op=f"parameter {name}")

    @property
    def data(self) -> np.ndarray:
        return self.tensor.data

    @property
    def gradient(self) -> np.ndarray:
        if self.tensor.grad is None:
            return np.zeros_like(self.tensor.data)
        return self.tensor.grad

    @property
    def shape(self) -> tuple[int, ...]:
        return self.tensor.data.shape

    def zero_grad(self) -> None:
        self.tensor.grad = None

    def assign(self, values: np.ndarray) -> None:
        if values.shape != self.tensor.data.shape:
            raise ShapeError(f"{self.name}: cannot assign shape {values.shape} to {self.tensor.data.shape}")
        _check_finite(values, f"assign to {self.name}")
        self.tensor.data = np.array(values, dtype=self.tensor.data.dtype, copy=True)

    def __repr__(self) -> str:
        return f"Parameter({self.name!r}, shape={self.tensor.data.shape})"


def _coerce(x, like: Tensor | None = None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    dtype = like.data.dtype if like is not None else None
    return Tensor(x, dtype=dtype, _op="constant")


def _result(data: np.ndarray, op: str, parents: Sequence[Tensor], backward) -> Tensor:
    out = Tensor(data, _op=op)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (gs, ss) in enumerate(zip(g.shape, shape)) if ss == 1 and gs != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def constant(data, dtype=np.float64) -> Tensor:
    return Tensor(data, dtype=dtype, _op="constant")


def add(a, b) -> Tensor:
    a = _coerce(a)
    b = _coerce(b, like=a)
    try:
        data = a.data + b.data
    except ValueError:
        raise ShapeError(f"add: incompatible shapes {a.data.shape} and {b.data.shape}") from None

    def backward(g):
        a.accumulate(_unbroadcast(g, a.data.shape))
        b.accumulate(_unbroadcast(g, b.data.shape))

    return _result(data, "add", (a, b), backward)


def mul(a, b) -> Tensor:
    a = _coerce(a)
    b = _coerce(b, like=a)
    try:
        data = a.data * b.data
    except ValueError:
        raise ShapeError(f"mul: incompatible shapes {a.data.shape} and {b.data.shape}") from None

    def backward(g):
        a.accumulate(_unbroadcast(g * b.data, a.data.shape))
        b.accumulate(_unbroadcast(g * a.data, b.data.shape))

    return _result(data, "mul", (a, b), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a = _coerce(a)
    b = _coerce(b, like=a)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul: operands must be at least 2-D, got {a.data.shape} and {b.data.shape}")
    try:
        data = np.matmul(a.data, b.data)
    except ValueError:
        raise ShapeError(f"matmul: incompatible shapes {a.data.shape} and {b.data.shape}") from None

    def backward(g):
        a.accumulate(_unbroadcast(np.matmul(g, b.data.swapaxes(-1, -2)), a.data.shape))
        b.accumulate(_unbroadcast(np.matmul(a.data.swapaxes(-1, -2), g), b.data.shape))

    return _result(data, "matmul", (a, b), backward)


def scaled_dot(q: Tensor, k: Tensor, scale: float | None = None) -> Tensor:
    """q @ k^T over the last two axes, scaled (default 1/sqrt(d))."""
    if scale is None:
        scale = 1.0 / math.sqrt(q.shape[-1])
    return mul(matmul(q, transpose_last(k)), float(scale))


def transpose(a: Tensor, axes: tuple[int, ...]) -> Tensor:
    a = _coerce(a)
    data = np.transpose(a.data, axes)
    inverse = tuple(int(i) for i in np.argsort(axes))

    def backward(g):
        a.accumulate(np.transpose(g, inverse))

    return _result(data, "transpose", (a,), backward)


def transpose_last(a: Tensor) -> Tensor:
    axes = tuple(range(a.ndim - 2)) + (a.ndim - 1, a.ndim - 2)
    return transpose(a, axes)


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    a = _coerce(a)
    try:
        data = a.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: cannot view {a.data.shape} as {shape}") from None

    def backward(g):
        a.accumulate(g.reshape(a.data.shape))

    return _result(data, "reshape", (a,), backward)


def concat(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    parts = [_coerce(p) for p in parts]
    data = np.concatenate([p.data for p in parts], axis=axis)
    sizes = [p.data.shape[axis] for p in parts]
    offsets = np.cumsum(sizes)[:-1]

    def backward(g):
        for p, piece in zip(parts, np.split(g, offsets, axis=axis)):
            p.accumulate(piece)

    return _result(data, "concat", tuple(parts), backward)


def narrow(a: Tensor, axis: int, start: int, length: int) -> Tensor:
    a = _coerce(a)
    index = [slice(None)] * a.ndim
    index[axis] = slice(start, start + length)
    index = tuple(index)
    data = a.data[index]

    def backward(g):
        buf = np.zeros_like(a.data)
        buf[index] = g
        a.accumulate(buf)

    return _result(data, "narrow", (a,), backward)


def relu(a: Tensor) -> Tensor:
    a = _coerce(a)
    mask = a.data > 0
    data = np.where(mask, a.data, 0.0)

    def backward(g):
        a.accumulate(np.where(mask, g, 0.0))

    return _result(data, "relu", (a,), backward)


def softmax(a: Tensor) -> Tensor:
    """Row softmax over the last axis."""
    a = _coerce(a)
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=-1, keepdims=True)

    def backward(g):
        a.accumulate(s * (g - (g * s).sum(axis=-1, keepdims=True)))

    return _result(s, "softmax", (a,), backward)


def log_softmax(a: Tensor) -> Tensor:
    a = _coerce(a)
    m = a.data.max(axis=-1, keepdims=True)
    shifted = a.data - m
    lse = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    data = shifted - lse
    probs = np.exp(data)

    def backward(g):
        a.accumulate(g - probs * g.sum(axis=-1, keepdims=True))

    return _result(data, "log_softmax", (a,), backward)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean and unit variance, then affine."""
    x, gain, bias = _coerce(x), _coerce(gain), _coerce(bias)
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    data = xhat * gain.data + bias.data

    def backward(g):
        reduce_axes = tuple(range(g.ndim - 1))
        gain.accumulate((g * xhat).sum(axis=reduce_axes) if reduce_axes else g * xhat)
        bias.accumulate(g.sum(axis=reduce_axes) if reduce_axes else g)
        dxhat = g * gain.data
        x.accumulate(
            inv * (dxhat - dxhat.mean(axis=-1, keepdims=True) - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
        )

    return _result(data, "layer_norm", (x, gain, bias), backward)


def embedding(table: Tensor, indices) -> Tensor:
    """Row lookup; gradients scatter-add into the table."""
    table = _coerce(table)
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= table.shape[0]):
        raise ShapeError(f"embedding: index out of range for table with {table.shape[0]} rows")
    data = table.data[idx]

    def backward(g):
        buf = np.zeros_like(table.data)
        np.add.at(buf, idx, g)
        table.accumulate(buf)

    return _result(data, "embedding", (table,), backward)


def gather_nd(a: Tensor, indices: tuple) -> Tensor:
    """Pick elements a[indices]; indices is a tuple of integer arrays."""
    a = _coerce(a)
    idx = tuple(np.asarray(i, dtype=np.int64) for i in indices)
    data = a.data[idx]

    def backward(g):
        buf = np.zeros_like(a.data)
        np.add.at(buf, idx, g)
        a.accumulate(buf)

    return _result(data, "gather", (a,), backward)


def tsum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    a = _coerce(a)
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is None:
            a.accumulate(np.broadcast_to(g, a.data.shape).copy())
        else:
            gg = g if keepdims else np.expand_dims(g, axis)
            a.accumulate(np.broadcast_to(gg, a.data.shape).copy())

    return _result(data, "sum", (a,), backward)


def tmean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    a = _coerce(a)
    count = a.data.size if axis is None else a.data.shape[axis]
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def cross_entropy(logits: Tensor, targets, reduction: str = "mean") -> Tensor:
    """Negative log-likelihood of integer targets under row logits.

    logits is (n, vocab); targets is n integer class ids. The gradient is
    the classic (softmax - onehot) scaled by the reduction.
    """
    logits = _coerce(logits)
    t = np.asarray(targets, dtype=np.int64)
    if logits.ndim != 2 or t.ndim != 1 or t.shape[0] != logits.shape[0]:
        raise ShapeError(f"cross_entropy: logits {logits.data.shape} vs targets {t.shape}")
    if t.size and (t.min() < 0 or t.max() >= logits.shape[1]):
        raise ShapeError(f"cross_entropy: target id out of vocabulary of size {logits.shape[1]}")
    m = logits.data.max(axis=-1, keepdims=True)
    shifted = logits.data - m
    lse = np.log(np.exp(shifted).sum(axis=-1)) + m[:, 0]
    rows = np.arange(t.shape[0])
    nll = lse - logits.data[rows, t]
    if reduction == "mean":
        data = nll.mean() if t.size else np.float64(0.0)
    elif reduction == "sum":
        data = nll.sum()
    else:
        raise ValueError(f"unknown reduction {reduction!r}")

    def backward(g):
        probs = np.exp(shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True)))
        probs[rows, t] -= 1.0
        scale = g / t.shape[0] if reduction == "mean" else g
        logits.accumulate(probs * scale)

    return _result(np.asarray(data, dtype=logits.data.dtype), "cross_entropy", (logits,), backward)


def rel_scores(q: Tensor, k: Tensor, gamma: Tensor) -> Tensor:
    """Relation-aware attention logits: q against (k + per-pair gamma)."""
    q, k, gamma = _coerce(q), _coerce(k), _coerce(gamma)
    if gamma.shape != (q.shape[0], q.shape[1], k.shape[1], q.shape[2]):
        raise ShapeError(f"rel_scores: gamma shape {gamma.data.shape} does not match q {q.data.shape}, k {k.data.shape}")
    data = kernels.rel_attn_scores(q.data, k.data, gamma.data)

    def backward(g):
        dq, dk, dgamma = kernels.rel_attn_scores_backward(g, q.data, k.data, gamma.data)
        q.accumulate(dq)
        k.accumulate(dk)
        gamma.accumulate(dgamma)

    return _result(data, "rel_scores", (q, k, gamma), backward)


def rel_context(a: Tensor, v: Tensor, gamma: Tensor) -> Tensor:
    """Attention-weighted sum of (v + per-pair gamma) vectors."""
    a, v, gamma = _coerce(a), _coerce(v), _coerce(gamma)
    if gamma.shape != (a.shape[0], a.shape[1], a.shape[2], v.shape[2]):
        raise ShapeError(f"rel_context: gamma shape {gamma.data.shape} does not match a {a.data.shape}, v {v.data.shape}")
    data = kernels.rel_attn_context(a.data, v.data, gamma.data)

    def backward(g):
        da, dv, dgamma = kernels.rel_attn_context_backward(g, a.data, v.data, gamma.data)
        a.accumulate(da)
        v.accumulate(dv)
        gamma.accumulate(dgamma)

    return _result(data, "rel_context", (a, v, gamma), backward)


def dropout(x: Tensor, p: float, rng: np.random.Generator | None) -> Tensor:
    """Inverted dropout; identity when p <= 0 or no generator is given."""
    if p <= 0.0 or rng is None:
        return x
    if p >= 1.0:
        raise ValueError("dropout probability must be < 1")
    mask = (rng.random(x.shape) >= p).astype(x.data.dtype) / (1.0 - p)
    return mul(x, constant(mask, dtype=x.data.dtype))


def affine(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    out = matmul(x, w)
    if b is not None:
        out = add(out, b)
    return out


def sinusoid_positions(length: int, dim: int, dtype=np.float64) -> np.ndarray:
    """Fixed sinusoidal position table (length, dim)."""
    pos = np.arange(length, dtype=np.float64)[:, None]
    half = np.arange(0, dim, 2, dtype=np.float64)
    angles = pos / np.power(10000.0, half / dim)
    table = np.zeros((length, dim), dtype=np.float64)
    table[:, 0::2] = np.sin(angles)
    table[:, 1::2] = np.cos(angles[:, : dim // 2])
    return table.astype(dtype)


def causal_mask(size: int, dtype=np.float64) -> np.ndarray:
    """Additive (size, size) mask: 0 on and below the diagonal, -1e9 above."""
    mask = np.triu(np.full((size, size), -1e9, dtype=dtype), k=1)
    return mask

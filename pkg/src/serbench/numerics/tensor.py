"""Dense float64 tensors with tape-based reverse-mode differentiation.

Ops executed inside a `with Tape() as tape:` block append backward closures
to the tape; `backward(loss, tape)` replays them in reverse. Execution
order is a topological order by construction, so the reverse walk visits
every op after all of its consumers. Everything is float64 and single
threaded with a fixed summation order, so results are bit-reproducible.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erf

from ..errors import NumericError

_TAPES: list["Tape"] = []


class Tensor:
    """Shape-tagged float64 array with an optional gradient slot."""

    __slots__ = ("values", "grad", "requires_grad", "name")

    def __init__(self, values, requires_grad: bool = False, name: str = ""):
        self.values = np.asarray(values, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def size(self) -> int:
        return int(self.values.size)

    def item(self) -> float:
        return float(self.values)

    def zero_grad(self) -> None:
        if self.requires_grad:
            self.grad = np.zeros_like(self.values)

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, grad={self.requires_grad}{tag})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, mul_scalar(other, -1.0))

    def __mul__(self, other):
        return hadamard(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return mul_scalar(self, -1.0)


def param(values, name: str = "") -> Tensor:
    """A leaf parameter; its gradient starts at zero (so unused leaves read zero)."""
    t = Tensor(values, requires_grad=True, name=name)
    t.grad = np.zeros_like(t.values)
    return t


class Tape:
    """Ordered record of executed ops, replayed in reverse by backward()."""

    def __init__(self):
        self._records: list = []

    def __enter__(self) -> "Tape":
        _TAPES.append(self)
        return self

    def __exit__(self, *exc):
        _TAPES.pop()
        return False

    def __len__(self) -> int:
        return len(self._records)


def _tape() -> Tape | None:
    return _TAPES[-1] if _TAPES else None


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce a broadcast gradient back to the operand's shape."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


def _acc(t: Tensor, g: np.ndarray) -> None:
    if not t.requires_grad:
        return
    g = _unbroadcast(np.asarray(g, dtype=np.float64), t.values.shape)
    t.grad = g.copy() if t.grad is None else t.grad + g


def _make(values, inputs, backward_fn) -> Tensor:
    """Create an op output; record the backward closure if a tape is active."""
    out = Tensor(values)
    tape = _tape()
    if tape is not None and any(i.requires_grad for i in inputs):
        out.requires_grad = True

        def step():
            if out.grad is not None:
                backward_fn(out.grad)

        tape._records.append(step)
    return out


def backward(loss: Tensor, tape: Tape) -> None:
    """Accumulate d(loss)/d(input) into .grad for everything on the tape."""
    if loss.values.size != 1:
        raise NumericError(f"backward needs a scalar loss, got shape {loss.shape}")
    loss.grad = np.ones_like(loss.values)
    for step in reversed(tape._records):
        step()


def constant(values) -> Tensor:
    return Tensor(values)


# --- arithmetic primitives ---------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    def bwd(g):
        _acc(a, g)
        _acc(b, g)

    return _make(a.values + b.values, (a, b), bwd)


def hadamard(a: Tensor, b: Tensor) -> Tensor:
    """Element-wise product (broadcasting allowed)."""

    def bwd(g):
        _acc(a, g * b.values)
        _acc(b, g * a.values)

    return _make(a.values * b.values, (a, b), bwd)


def mul_scalar(a: Tensor, c: float) -> Tensor:
    def bwd(g):
        _acc(a, g * c)

    return _make(a.values * c, (a,), bwd)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product for 2-D @ 2-D, 2-D @ 1-D and 1-D @ 2-D operands."""
    av, bv = a.values, b.values
    if av.ndim == 2 and bv.ndim == 2:
        if av.shape[1] != bv.shape[0]:
            raise ValueError(f"matmul shape mismatch: {av.shape} @ {bv.shape}")

        def bwd(g):
            _acc(a, g @ bv.T)
            _acc(b, av.T @ g)

    elif av.ndim == 2 and bv.ndim == 1:
        if av.shape[1] != bv.shape[0]:
            raise ValueError(f"matmul shape mismatch: {av.shape} @ {bv.shape}")

        def bwd(g):
            _acc(a, np.outer(g, bv))
            _acc(b, av.T @ g)

    elif av.ndim == 1 and bv.ndim == 2:
        if av.shape[0] != bv.shape[0]:
            raise ValueError(f"matmul shape mismatch: {av.shape} @ {bv.shape}")

        def bwd(g):
            _acc(a, bv @ g)
            _acc(b, np.outer(av, g))

    else:
        raise ValueError(f"matmul supports 1-D/2-D operands, got {av.ndim}-D @ {bv.ndim}-D")
    return _make(av @ bv, (a, b), bwd)


# --- shape primitives --------------------------------------------------------


def transpose(a: Tensor) -> Tensor:
    def bwd(g):
        _acc(a, g.T)

    return _make(a.values.T, (a,), bwd)


def reshape(a: Tensor, shape) -> Tensor:
    def bwd(g):
        _acc(a, g.reshape(a.values.shape))

    return _make(a.values.reshape(shape), (a,), bwd)


def narrow(a: Tensor, axis: int, start: int, length: int) -> Tensor:
    """Contiguous slice [start, start+length) along one axis."""
    sl = [slice(None)] * a.values.ndim
    sl[axis] = slice(start, start + length)
    sl = tuple(sl)

    def bwd(g):
        full = np.zeros_like(a.values)
        full[sl] = g
        _acc(a, full)

    return _make(a.values[sl], (a,), bwd)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = list(tensors)
    sizes = [t.values.shape[axis] for t in tensors]
    offsets = np.concatenate([[0], np.cumsum(sizes)])

    def bwd(g):
        for t, off, size in zip(tensors, offsets, sizes):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(int(off), int(off + size))
            _acc(t, g[tuple(sl)])

    return _make(np.concatenate([t.values for t in tensors], axis=axis), tensors, bwd)


# --- activations -------------------------------------------------------------


def sigmoid(a: Tensor) -> Tensor:
    y = 1.0 / (1.0 + np.exp(-a.values))

    def bwd(g):
        _acc(a, g * y * (1.0 - y))

    return _make(y, (a,), bwd)


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.values)

    def bwd(g):
        _acc(a, g * (1.0 - y * y))

    return _make(y, (a,), bwd)


def relu(a: Tensor) -> Tensor:
    def bwd(g):
        _acc(a, g * (a.values > 0.0))

    return _make(np.maximum(a.values, 0.0), (a,), bwd)


def gelu(a: Tensor) -> Tensor:
    """Exact GELU: x * Phi(x) with the Gaussian CDF."""
    x = a.values
    phi = 0.5 * (1.0 + erf(x / math.sqrt(2.0)))

    def bwd(g):
        pdf = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        _acc(a, g * (phi + x * pdf))

    return _make(x * phi, (a,), bwd)


# --- reductions and normalizations -------------------------------------------


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    if a.values.shape[axis] == 0:
        raise ValueError("softmax over an empty axis")
    z = a.values - a.values.max(axis=axis, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=axis, keepdims=True)

    def bwd(g):
        _acc(a, (g - (g * y).sum(axis=axis, keepdims=True)) * y)

    return _make(y, (a,), bwd)


def layer_norm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    axis: int = -1,
    eps: float = 1e-12,
) -> Tensor:
    """Normalize to zero mean / unit variance along `axis`, then affine."""
    mu = x.values.mean(axis=axis, keepdims=True)
    var = ((x.values - mu) ** 2).mean(axis=axis, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    y = (x.values - mu) * inv

    def bwd(g):
        _acc(gamma, g * y)
        _acc(beta, g)
        dy = g * gamma.values
        _acc(x, inv * (dy - dy.mean(axis=axis, keepdims=True)
                       - y * (dy * y).mean(axis=axis, keepdims=True)))

    return _make(y * gamma.values + beta.values, (x, gamma, beta), bwd)


def mean_pool(a: Tensor, axis: int = 0) -> Tensor:
    n = a.values.shape[axis]

    def bwd(g):
        _acc(a, np.expand_dims(g, axis).repeat(n, axis=axis) / n)

    return _make(a.values.mean(axis=axis), (a,), bwd)


def sum_all(a: Tensor) -> Tensor:
    def bwd(g):
        _acc(a, np.full_like(a.values, float(g)))

    return _make(a.values.sum(), (a,), bwd)


# --- neural building blocks --------------------------------------------------


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """x @ w (+ b broadcast over rows)."""
    y = matmul(x, w)
    return y if b is None else add(y, b)


def conv1d(x: Tensor, w: Tensor, b: Tensor | None = None, padding: str = "same") -> Tensor:
    """1-D temporal cross-correlation with 'same' zero padding.

    x is (T, C_in), w is (K, width, C_in), output is (T, K):
    y[t, k] = sum_{d, c} x[t + d - center, c] * w[k, d, c].
    """
    if padding != "same":
        raise ValueError("only 'same' padding is supported")
    if x.values.ndim != 2 or w.values.ndim != 3:
        raise ValueError(f"conv1d expects (T, C) and (K, width, C), got {x.shape}, {w.shape}")
    if x.values.shape[1] != w.values.shape[2]:
        raise ValueError(f"channel mismatch: input {x.shape} vs kernels {w.shape}")
    t_len, _ = x.values.shape
    n_k, width, _ = w.values.shape
    pad_l = (width - 1) // 2
    pad_r = width - 1 - pad_l
    xp = np.pad(x.values, ((pad_l, pad_r), (0, 0)))
    windows = np.lib.stride_tricks.sliding_window_view(xp, (width,), axis=0)  # (T, C, width)
    y = np.einsum("tcd,kdc->tk", windows, w.values)

    def bwd(g):
        _acc(w, np.einsum("tk,tcd->kdc", g, windows))
        dxp = np.zeros_like(xp)
        for d in range(width):
            dxp[d : d + t_len] += g @ w.values[:, d, :]
        _acc(x, dxp[pad_l : pad_l + t_len])

    out = _make(y, (x, w), bwd)
    return out if b is None else add(out, b)


def cross_entropy(logits: Tensor, label: int) -> Tensor:
    """Softmax cross-entropy of a single (C,) logit vector against a class index."""
    v = logits.values.ravel()
    if not 0 <= label < v.size:
        raise ValueError(f"label {label} out of range for {v.size} classes")
    m = v.max()
    z = v - m
    lse = m + math.log(np.exp(z).sum())

    def bwd(g):
        p = np.exp(v - lse)
        p[label] -= 1.0
        _acc(logits, (g * p).reshape(logits.values.shape))

    return _make(np.asarray(lse - v[label]), (logits,), bwd)

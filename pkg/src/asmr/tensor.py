"""A small dense tensor with a reverse-mode tape.

Only the handful of operators the coordinate networks need are provided:
``affine``, ``sine``, ``upsample_nearest``, ``tile_replicate``, ``add``,
``reshape`` and ``mse``.  Storage is a row-major float64 numpy array.

Usage::

    with Tape() as tape:
        y = sine(affine(x, W, b), 30.0)
        loss = mse(y, target)
    tape.backward(loss)
    W.grad  # accumulated gradient

Gradients accumulate; call :func:`zero_grad` between optimisation steps.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import BadFactor, ShapeMismatch

_TAPES: list["Tape"] = []
_MAC_COUNTERS: list["MacCounter"] = []


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        # np.ascontiguousarray would promote 0-d to 1-d
        self.data = np.require(np.asarray(data, dtype=np.float64), requirements="C")
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.item())

    def _accumulate(self, g: np.ndarray, owned: bool = True) -> None:
        # owned: caller hands over a fresh array that nobody else references
        if self.grad is None:
            g = g.reshape(self.data.shape)
            self.grad = g if owned and g.flags.writeable and g.dtype == np.float64 else g.copy()
        else:
            self.grad += g.reshape(self.data.shape)

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, requires_grad={self.requires_grad})"


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def zero_grad(params: Iterable[Tensor]) -> None:
    for p in params:
        p.grad = None


@dataclass
class _Record:
    out: Tensor
    backward: Callable[[np.ndarray], None]


class Tape:
    """Ordered log of differentiable operations executed while active."""

    def __init__(self) -> None:
        self.records: list[_Record] = []

    def __enter__(self) -> "Tape":
        _TAPES.append(self)
        return self

    def __exit__(self, *exc) -> None:
        _TAPES.remove(self)

    def __len__(self) -> int:
        return len(self.records)

    def backward(self, out: Tensor, grad: np.ndarray | None = None) -> None:
        """Replay in reverse, seeding ``out`` with ``grad`` (ones by default)."""
        seed = np.ones_like(out.data) if grad is None else np.asarray(grad, dtype=np.float64)
        if seed.shape != out.shape:
            raise ShapeMismatch(f"seed gradient {seed.shape} vs output {out.shape}")
        out._accumulate(seed, owned=False)
        for rec in reversed(self.records):
            if rec.out.grad is not None:
                rec.backward(rec.out.grad)


def _record(out: Tensor, inputs: Sequence[Tensor], backward: Callable[[np.ndarray], None]) -> Tensor:
    if _TAPES and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        _TAPES[-1].records.append(_Record(out, backward))
    return out


@dataclass
class MacCounter:
    """Counts multiply-accumulates performed by :func:`affine` while active."""

    total: int = 0
    entries: list[tuple[str, int, int]] = field(default_factory=list)

    def add(self, label: str, points: int, macs: int) -> None:
        self.total += macs
        self.entries.append((label, points, macs))


@contextlib.contextmanager
def count_macs():
    counter = MacCounter()
    _MAC_COUNTERS.append(counter)
    try:
        yield counter
    finally:
        _MAC_COUNTERS.remove(counter)


def affine(x: Tensor, W: Tensor, b: Tensor | None = None, label: str = "affine") -> Tensor:
    """``x @ W + b`` over the last axis of ``x``; leading axes are batch axes."""
    p, q = W.shape
    if x.shape[-1] != p:
        raise ShapeMismatch(f"affine: x{x.shape} @ W{W.shape}")
    if b is not None and b.shape != (q,):
        raise ShapeMismatch(f"affine: bias {b.shape}, expected ({q},)")
    lead = x.shape[:-1]
    x2 = x.data.reshape(-1, p)
    y = x2 @ W.data
    if b is not None:
        y += b.data
    n = x2.shape[0]
    for c in _MAC_COUNTERS:
        c.add(label, n, n * p * q)
    out = Tensor(y.reshape(*lead, q))

    def backward(g: np.ndarray) -> None:
        g2 = g.reshape(-1, q)
        if x.requires_grad:
            x._accumulate(g2 @ W.data.T)
        if W.requires_grad:
            W._accumulate(x2.T @ g2)
        if b is not None and b.requires_grad:
            b._accumulate(g2.sum(axis=0))

    inputs = [x, W] + ([b] if b is not None else [])
    return _record(out, inputs, backward)


def sine(x: Tensor, omega0: float = 1.0) -> Tensor:
    """``sin(omega0 * x)``."""
    arg = omega0 * x.data
    out = Tensor(np.sin(arg))

    def backward(g: np.ndarray) -> None:
        x._accumulate(omega0 * np.cos(arg) * g)

    return _record(out, [x], backward)


def add(x: Tensor, y: Tensor) -> Tensor:
    if x.shape != y.shape:
        raise ShapeMismatch(f"add: {x.shape} vs {y.shape}")
    out = Tensor(x.data + y.data)

    def backward(g: np.ndarray) -> None:
        if x.requires_grad:
            x._accumulate(g, owned=False)
        if y.requires_grad:
            y._accumulate(g, owned=False)

    return _record(out, [x, y], backward)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    out = Tensor(x.data.reshape(shape))

    def backward(g: np.ndarray) -> None:
        x._accumulate(g, owned=False)

    return _record(out, [x], backward)


def _factors(x: Tensor, r) -> tuple[int, ...]:
    r = (int(r),) if np.isscalar(r) else tuple(int(v) for v in r)
    if len(r) > x.data.ndim or any(v < 1 for v in r):
        raise BadFactor(f"factors {r} invalid for shape {x.shape}")
    return r


def upsample_nearest(x: Tensor, r) -> Tensor:
    """Block replication along the leading ``len(r)`` axes: ``out[j] = x[j // r]``."""
    r = _factors(x, r)
    y = x.data
    for axis, k in enumerate(r):
        if k > 1:
            y = np.repeat(y, k, axis=axis)
    out = Tensor(y)
    src = x.shape

    def backward(g: np.ndarray) -> None:
        split = []
        for axis, n in enumerate(src):
            split += [n, r[axis]] if axis < len(r) else [n]
        sum_axes = tuple(2 * a + 1 for a in range(len(r)))
        x._accumulate(g.reshape(split).sum(axis=sum_axes))

    return _record(out, [x], backward)


def tile_replicate(x: Tensor, r) -> Tensor:
    """Whole-grid repetition along the leading ``len(r)`` axes: ``out[j] = x[j % n]``."""
    r = _factors(x, r)
    reps = r + (1,) * (x.data.ndim - len(r))
    out = Tensor(np.tile(x.data, reps))
    src = x.shape

    def backward(g: np.ndarray) -> None:
        split = []
        for axis, n in enumerate(src):
            split += [r[axis], n] if axis < len(r) else [n]
        sum_axes = tuple(2 * a for a in range(len(r)))
        x._accumulate(g.reshape(split).sum(axis=sum_axes))

    return _record(out, [x], backward)


def mse(pred: Tensor, target) -> Tensor:
    """Mean squared error as a 0-d tensor.  ``target`` is treated as a constant."""
    t = target.data if isinstance(target, Tensor) else np.asarray(target, dtype=np.float64)
    if pred.shape != t.shape:
        raise ShapeMismatch(f"mse: {pred.shape} vs {t.shape}")
    diff = pred.data - t
    with np.errstate(over="ignore", invalid="ignore"):
        out = Tensor(np.mean(diff * diff))
    count = diff.size

    def backward(g: np.ndarray) -> None:
        pred._accumulate(g * (2.0 / count) * diff)

    return _record(out, [pred], backward)


def numeric_grad(f: Callable[[], float], x: Tensor, eps: float = 1e-5) -> np.ndarray:
    """Central finite differences of scalar ``f()`` w.r.t. every entry of ``x``."""
    g = np.zeros_like(x.data)
    flat = x.data.reshape(-1)
    gflat = g.reshape(-1)
    for k in range(flat.size):
        old = flat[k]
        flat[k] = old + eps
        hi = f()
        flat[k] = old - eps
        lo = f()
        flat[k] = old
        gflat[k] = (hi - lo) / (2 * eps)
    return g


def rel_error(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-12)
    return float(np.max(np.abs(a - b)) / scale) if a.size else 0.0


__all__ = [
    "Tensor", "Tape", "MacCounter", "count_macs", "affine", "sine", "add", "reshape",
    "upsample_nearest", "tile_replicate", "mse", "zero_grad", "as_tensor",
    "numeric_grad", "rel_error",
]

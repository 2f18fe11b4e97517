"""Fitting a coordinate network to a grid: MSE, Adam, cosine-annealed learning rate."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from . import model as M
from .coords import global_grid, normalized_grid
from .dataio import Grid
from .errors import ConfigError, DivergedError, ExtentMismatch, ShapeMismatch
from .tensor import Tape, Tensor, mse, zero_grad


@dataclass
class TrainConfig:
    iterations: int = 10_000
    lr: float = 1e-4
    lr_min: float = 1e-6
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch: int | Literal["full"] = "full"
    seed: int = 0
    log_every: int = 100
    checkpoint_every: int = 0
    checkpoint_dir: str | None = None

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if not 0 < self.lr_min <= self.lr:
            raise ConfigError(f"need 0 < lr_min <= lr, got lr={self.lr}, lr_min={self.lr_min}")
        if self.log_every < 1:
            raise ConfigError("log_every must be >= 1")
        if self.batch != "full" and (not isinstance(self.batch, int) or self.batch < 1):
            raise ConfigError(f"batch must be 'full' or a positive int, got {self.batch!r}")


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def zeros(cls, params: list[Tensor]) -> "AdamState":
        return cls([np.zeros_like(p.data) for p in params], [np.zeros_like(p.data) for p in params])


def adam_step(params: list[Tensor], grads: list[np.ndarray | None], state: AdamState,
              lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    """In-place Adam update with bias correction.  ``None`` gradients count as zero."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeMismatch("params, grads and optimizer state differ in length")
    state.t += 1
    c1 = 1.0 - beta1**state.t
    c2 = 1.0 - beta2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if g is None:
            g = np.zeros_like(p.data)
        if g.shape != p.shape:
            raise ShapeMismatch(f"gradient {g.shape} for parameter {p.shape}")
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p.data -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return state


def cosine_lr(t: float, T: float, lr_max: float, lr_min: float) -> float:
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + math.cos(math.pi * t / T))


@dataclass(frozen=True)
class LogRecord:
    iter: int
    loss: float
    psnr: float
    lr: float


@dataclass
class FitResult:
    model: M.AsmrModel | M.SirenModel
    records: list[LogRecord] = field(default_factory=list)
    wall_time: float = 0.0

    def metrics_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iter", "loss", "psnr", "lr"])
        for r in self.records:
            w.writerow([r.iter, repr(r.loss), repr(r.psnr), repr(r.lr)])
        return buf.getvalue()


def check_target(model, target: Grid) -> None:
    if isinstance(model, M.AsmrModel):
        if tuple(target.extents) != tuple(model.scheme.extents):
            raise ExtentMismatch(
                f"target extents {target.extents} vs scheme extents {model.scheme.extents}"
            )
    elif target.ndim != model.widths[0]:
        raise ExtentMismatch(f"target is {target.ndim}-D, model input width {model.widths[0]}")
    if target.channels != model.widths[-1]:
        raise ExtentMismatch(f"target has {target.channels} channels, model outputs {model.widths[-1]}")


def predict(model, extents, idx: np.ndarray | None = None, path: str = "shared") -> Tensor:
    """Normalised output ``[n, channels]`` for all grid points (or the rows ``idx``)."""
    if isinstance(model, M.AsmrModel):
        if idx is None and path == "shared":
            return M.forward_shared(model)
        pts = global_grid(extents)
        return M.forward_naive(model, pts if idx is None else pts[idx])
    coords = normalized_grid(extents)
    return M.forward_siren(model, coords if idx is None else coords[idx])


def loss_to_psnr(loss: float, target: Grid) -> float:
    lo, hi = target.value_range
    native = loss * ((hi - lo) / 2.0) ** 2
    if native <= 0:
        return 200.0
    return 10.0 * math.log10(target.peak**2 / native)


def gradient_step(model, target: Grid, state: AdamState, lr: float, cfg: TrainConfig,
                  idx: np.ndarray | None = None, path: str = "shared") -> float:
    """One forward/backward/Adam update; returns the loss before the update."""
    y = target.normalized()
    params = model.parameters()
    with Tape() as tape:
        pred = predict(model, target.extents, idx, path)
        loss = mse(pred, y if idx is None else y[idx])
    value = float(loss.data)
    if not math.isfinite(value):
        raise DivergedError(f"loss became {value}")
    zero_grad(params)
    tape.backward(loss)
    adam_step(params, [p.grad for p in params], state, lr, cfg.beta1, cfg.beta2, cfg.eps)
    return value


def fit(model, target: Grid, cfg: TrainConfig) -> FitResult:
    """Train ``model`` in place on ``target``.

    Logs at iterations ``0, k, 2k, ...`` (loss of the batch before that update)
    plus a final full-grid evaluation at ``iterations``.
    """
    check_target(model, target)
    n = int(np.prod(target.extents))
    if cfg.batch != "full" and cfg.batch > n:
        raise ConfigError(f"batch {cfg.batch} exceeds grid size {n}")
    rng = np.random.default_rng(cfg.seed)
    state = AdamState.zeros(model.parameters())
    result = FitResult(model)
    start = time.perf_counter()
    T = cfg.iterations
    for t in range(T):
        lr = cosine_lr(t, T, cfg.lr, cfg.lr_min)
        idx = None if cfg.batch == "full" else np.sort(rng.choice(n, cfg.batch, replace=False))
        loss = gradient_step(model, target, state, lr, cfg, idx)
        if t % cfg.log_every == 0:
            result.records.append(LogRecord(t, loss, loss_to_psnr(loss, target), lr))
        if cfg.checkpoint_every and cfg.checkpoint_dir and (t + 1) % cfg.checkpoint_every == 0:
            M.save(model, Path(cfg.checkpoint_dir) / f"ckpt_{t + 1:06d}.asmr")
    final = evaluate_loss(model, target)
    if not math.isfinite(final):
        raise DivergedError(f"final loss {final}")
    result.records.append(LogRecord(T, final, loss_to_psnr(final, target), cfg.lr_min))
    result.wall_time = time.perf_counter() - start
    return result


def evaluate_loss(model, target: Grid) -> float:
    pred = predict(model, target.extents)
    return float(np.mean((pred.data - target.normalized()) ** 2))


def reconstruct(model, target_like: Grid) -> Grid:
    """Full-grid prediction mapped back to the native value range (unclipped)."""
    return target_like.from_normalized(predict(model, target_like.extents).data)

"""Multi-resolution coordinate decomposition.

A global integer coordinate ``x`` on an axis of extent ``N`` is split into
``L`` digits using per-level bases ``B_0 .. B_{L-1}`` whose product is ``N``::

    C_i = B_0 * ... * B_i        (cumulative base)
    G_i = N // C_i               (grid size, cell width at level i)
    x_i = (x // G_i) % B_i

Level 0 is the most significant digit.  Multi-dimensional data uses one
base list per axis; all axes must share the same number of levels.
Lattices are flattened row-major (last axis fastest) everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    BaseProductMismatch,
    CoordOutOfRange,
    LevelOutOfRange,
    LevelValueOutOfRange,
    NonPositiveBase,
    RaggedLevels,
)


@dataclass(frozen=True)
class PartitionScheme:
    """Per-axis bases of partition.  Build with :func:`make_scheme`."""

    bases: tuple[tuple[int, ...], ...]

    @property
    def ndim(self) -> int:
        return len(self.bases)

    @property
    def levels(self) -> int:
        return len(self.bases[0])

    @property
    def extents(self) -> tuple[int, ...]:
        return tuple(math.prod(b) for b in self.bases)

    @property
    def size(self) -> int:
        """Total number of grid points."""
        return math.prod(self.extents)

    @property
    def cumulative(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(int(c) for c in np.cumprod(b)) for b in self.bases)

    @property
    def grid_sizes(self) -> tuple[tuple[int, ...], ...]:
        return tuple(
            tuple(n // c for c in cum) for n, cum in zip(self.extents, self.cumulative)
        )

    def level_bases(self, i: int) -> tuple[int, ...]:
        """Bases of level ``i`` across axes."""
        return tuple(b[i] for b in self.bases)

    def level_cumulative(self, i: int) -> tuple[int, ...]:
        """Per-axis resolution reached after level ``i``."""
        return tuple(c[i] for c in self.cumulative)

    def permuted(self, order: Sequence[int]) -> "PartitionScheme":
        return PartitionScheme(tuple(tuple(b[k] for k in order) for b in self.bases))

    def __str__(self) -> str:
        return format_scheme(self)


def make_scheme(
    bases_per_axis: Sequence[Sequence[int]], extents: Sequence[int] | None = None
) -> PartitionScheme:
    """Validate bases (and optionally the extents they must factor) into a scheme."""
    if not bases_per_axis or any(len(b) == 0 for b in bases_per_axis):
        raise RaggedLevels("every axis needs at least one level")
    bases = tuple(tuple(int(v) for v in b) for b in bases_per_axis)
    if len({len(b) for b in bases}) != 1:
        raise RaggedLevels(f"axes disagree on level count: {[len(b) for b in bases]}")
    for axis, b in enumerate(bases):
        if any(v < 1 for v in b):
            raise NonPositiveBase(f"axis {axis}: bases must be >= 1, got {list(b)}")
        if max(b) < 2:
            raise NonPositiveBase(f"axis {axis}: at least one base must be >= 2")
    if extents is not None:
        if len(extents) != len(bases):
            raise RaggedLevels(f"{len(extents)} extents for {len(bases)} axes")
        for axis, (b, n) in enumerate(zip(bases, extents)):
            if n <= 0:
                raise NonPositiveBase(f"axis {axis}: extent must be positive, got {n}")
            if math.prod(b) != n:
                raise BaseProductMismatch(
                    f"axis {axis}: product of bases {list(b)} is {math.prod(b)}, extent is {n}"
                )
    return PartitionScheme(bases)


def parse_scheme(text: str, ndim: int | None = None) -> PartitionScheme:
    """Parse ``axis0=4x4x4x8;axis1=4x4x6x8``.

    The ``axisK=`` prefixes are optional.  A single axis spec combined with
    ``ndim`` is replicated to every axis.
    """
    parts = [p.strip() for p in text.strip().split(";") if p.strip()]
    if not parts:
        raise RaggedLevels(f"empty scheme string {text!r}")
    bases = []
    for k, part in enumerate(parts):
        if "=" in part:
            name, part = part.split("=", 1)
            if name.strip() != f"axis{k}":
                raise RaggedLevels(f"expected axis{k}=..., got {name.strip()!r}")
        try:
            bases.append([int(v) for v in part.lower().split("x")])
        except ValueError:
            raise NonPositiveBase(f"bad base list {part!r}") from None
    if ndim is not None and len(bases) != ndim:
        if len(bases) != 1:
            raise RaggedLevels(f"scheme has {len(bases)} axes, data has {ndim}")
        bases = bases * ndim
    return make_scheme(bases)


def format_scheme(scheme: PartitionScheme) -> str:
    return ";".join(
        f"axis{k}=" + "x".join(str(v) for v in b) for k, b in enumerate(scheme.bases)
    )


def _as_coord(x, scheme: PartitionScheme) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=np.int64))
    if arr.shape[-1] != scheme.ndim:
        raise CoordOutOfRange(f"coordinate has {arr.shape[-1]} axes, scheme has {scheme.ndim}")
    return arr


def decompose_array(xs, scheme: PartitionScheme) -> np.ndarray:
    """Vectorised decomposition of ``[n, d]`` coordinates into ``[L, n, d]`` digits."""
    xs = np.asarray(xs, dtype=np.int64)
    if xs.ndim == 1:
        xs = xs[:, None] if scheme.ndim == 1 else xs[None, :]
    ext = np.array(scheme.extents)
    if xs.shape[-1] != scheme.ndim:
        raise CoordOutOfRange(f"coordinates have {xs.shape[-1]} axes, scheme has {scheme.ndim}")
    if np.any(xs < 0) or np.any(xs >= ext):
        raise CoordOutOfRange(f"coordinate outside extents {scheme.extents}")
    grid = np.array(scheme.grid_sizes).T  # [L, d]
    base = np.array(scheme.bases).T
    return (xs[None, :, :] // grid[:, None, :]) % base[:, None, :]


def decompose(x, scheme: PartitionScheme) -> list[tuple[int, ...]]:
    """Digits of one coordinate, most significant level first."""
    arr = _as_coord(x, scheme)
    digits = decompose_array(arr[None, :], scheme)[:, 0, :]
    return [tuple(int(v) for v in row) for row in digits]


def recompose(levels, scheme: PartitionScheme) -> tuple[int, ...]:
    """Inverse of :func:`decompose`: ``sum_i x_i * G_i`` per axis."""
    lv = np.asarray(levels, dtype=np.int64).reshape(scheme.levels, -1)
    if lv.shape[1] != scheme.ndim:
        raise LevelValueOutOfRange(f"levels have {lv.shape[1]} axes, scheme has {scheme.ndim}")
    base = np.array(scheme.bases).T
    if np.any(lv < 0) or np.any(lv >= base):
        raise LevelValueOutOfRange("level digit outside [0, B_i)")
    grid = np.array(scheme.grid_sizes).T
    return tuple(int(v) for v in (lv * grid).sum(axis=0))


def recompose_array(levels, scheme: PartitionScheme) -> np.ndarray:
    """Vectorised inverse of :func:`decompose_array`: ``[L, n, d]`` digits to ``[n, d]``."""
    lv = np.asarray(levels, dtype=np.int64)
    if lv.ndim != 3 or lv.shape[0] != scheme.levels or lv.shape[2] != scheme.ndim:
        raise LevelValueOutOfRange(f"digits of shape {lv.shape} do not fit the scheme")
    base = np.array(scheme.bases).T[:, None, :]
    if np.any(lv < 0) or np.any(lv >= base):
        raise LevelValueOutOfRange("level digit outside [0, B_i)")
    return (lv * np.array(scheme.grid_sizes).T[:, None, :]).sum(axis=0)


def level_grid(scheme: PartitionScheme, i: int) -> np.ndarray:
    """All level-``i`` digit tuples, shape ``[prod_a B_i^(a), d]``, row-major."""
    if not 0 <= i < scheme.levels:
        raise LevelOutOfRange(f"level {i} not in [0, {scheme.levels})")
    axes = [np.arange(b) for b in scheme.level_bases(i)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=-1)


def normalize_level(values, base) -> np.ndarray:
    """Map digits in ``[0, B-1]`` linearly onto ``[-1, 1]``; base-1 levels map to 0.

    ``base`` may be a scalar or broadcast against the trailing axis of ``values``.
    """
    v = np.asarray(values, dtype=np.float64)
    b = np.broadcast_to(np.asarray(base, dtype=np.float64), v.shape)
    out = np.zeros_like(v)
    ok = b >= 2
    out[ok] = 2.0 * v[ok] / (b[ok] - 1.0) - 1.0
    return out


def global_grid(extents: Sequence[int]) -> np.ndarray:
    """All integer coordinates of a grid, ``[prod(extents), d]``, row-major."""
    mesh = np.meshgrid(*[np.arange(n) for n in extents], indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=-1)


def normalized_grid(extents: Sequence[int]) -> np.ndarray:
    """Global coordinates mapped to ``[-1, 1]`` per axis (SIREN input convention)."""
    return normalize_level(global_grid(extents), np.asarray(extents))

"""Analytic multiply-accumulate (MAC) and parameter accounting.

Only weight-matrix multiply-accumulates are counted: no biases, no sine
evaluations, no upsampling copies.  Per-sample cost is the total divided by
the number of grid points.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .coords import PartitionScheme, make_scheme
from .errors import InconsistentConfig
from .model import num_params_formula


@dataclass(frozen=True)
class LayerCost:
    label: str
    points: int
    macs: int


@dataclass
class MacReport:
    layers: list[LayerCost]
    modulators: list[LayerCost]
    n_total: int
    params: int

    @property
    def total(self) -> int:
        return sum(e.macs for e in self.layers + self.modulators)

    @property
    def per_sample_exact(self) -> Fraction:
        return Fraction(self.total, self.n_total)

    @property
    def per_sample(self) -> float:
        return self.total / self.n_total

    @property
    def per_sample_k(self) -> float:
        """Per-sample MACs in thousands, three significant figures."""
        return float(f"{self.per_sample / 1000:.3g}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["layer", "points", "macs"])
        for e in self.layers + self.modulators:
            w.writerow([e.label, e.points, e.macs])
        w.writerow(["total", "", self.total])
        w.writerow(["per_sample", "", repr(self.per_sample)])
        w.writerow(["params", "", self.params])
        return buf.getvalue()


def mac_siren(widths: Sequence[int], n_samples: int = 1) -> MacReport:
    widths = list(widths)
    layers = [
        LayerCost(f"layer{k + 1}", n_samples, n_samples * a * b)
        for k, (a, b) in enumerate(zip(widths[:-1], widths[1:]))
    ]
    return MacReport(layers, [], n_samples, num_params_formula(widths))


def mac_asmr(widths: Sequence[int], scheme: PartitionScheme) -> MacReport:
    """Cost of one activation-sharing pass over the full grid.

    Layer ``i`` runs on the ``C_{i-1}`` lattice (layer 1 on the ``B_0``
    lattice), modulator ``i`` on the ``B_i`` lattice, the output layer on
    every grid point.
    """
    widths = list(widths)
    if len(widths) - 1 != scheme.levels:
        raise InconsistentConfig(f"{len(widths) - 1} layers vs {scheme.levels} levels")
    if widths[0] != scheme.ndim:
        raise InconsistentConfig(f"input width {widths[0]} vs data dimension {scheme.ndim}")
    d = scheme.ndim
    layers, mods = [], []
    for i in range(1, scheme.levels + 1):
        pts = math.prod(scheme.level_cumulative(i - 1))
        layers.append(LayerCost(f"layer{i}", pts, pts * widths[i - 1] * widths[i]))
    for i in range(1, scheme.levels):
        grids = math.prod(scheme.level_bases(i))
        mods.append(LayerCost(f"mod{i}", grids, grids * d * widths[i]))
    params = num_params_formula(widths, scheme.levels, d)
    return MacReport(layers, mods, scheme.size, params)


@dataclass(frozen=True)
class BoundCheck:
    per_sample: Fraction
    bound: int
    asymptote: Fraction

    @property
    def holds(self) -> bool:
        return self.per_sample <= self.bound


def mac_bound_check(layer_macs: int, base: int, levels: int) -> BoundCheck:
    """Uniform-base 1-D idealisation: layer ``i`` runs ``B^i`` times at cost ``M``.

    Total is ``M * sum_{i=1..L} B^i`` over ``N = B^L`` samples; the per-sample
    figure approaches ``B/(B-1) * M`` and never exceeds ``2M`` for ``B >= 2``.
    """
    if base < 2 or levels < 1:
        raise InconsistentConfig("need base >= 2 and at least one level")
    total = layer_macs * sum(base**i for i in range(1, levels + 1))
    per = Fraction(total, base**levels)
    return BoundCheck(per, 2 * layer_macs, Fraction(base * layer_macs, base - 1))


def uniform_scheme(base: int, levels: int, ndim: int = 1) -> PartitionScheme:
    return make_scheme([[base] * levels for _ in range(ndim)])


@dataclass(frozen=True)
class DepthRow:
    levels: int
    n_total: int
    siren_params: int
    siren_per_sample: float
    asmr_params: int
    asmr_per_sample: float
    bound_per_sample: float
    siren_bound_per_sample: float


def sweep_depth(
    width: int, base: int, levels: Iterable[int], ndim: int = 1, out_channels: int = 1
) -> list[DepthRow]:
    """Parameter and per-sample MAC growth with depth at fixed width and base.

    ``asmr_per_sample``/``siren_per_sample`` are exact counts for widths
    ``[ndim, width, ..., width, out_channels]`` on a ``base**L`` grid per axis;
    the ``*bound_per_sample`` columns use the uniform-width idealisation
    (``M = width**2`` per layer).
    """
    rows = []
    m = width * width
    for L in levels:
        widths = [ndim] + [width] * (L - 1) + [out_channels]
        scheme = uniform_scheme(base, L, ndim)
        a = mac_asmr(widths, scheme)
        s = mac_siren(widths)
        b = mac_bound_check(m, base, L)
        rows.append(
            DepthRow(L, scheme.size, s.params, s.per_sample, a.params, a.per_sample,
                     float(b.per_sample), float(L * m))
        )
    return rows


def rows_to_csv(rows: Sequence) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    names = list(rows[0].__dataclass_fields__)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in rows:
        w.writerow([getattr(r, n) for n in names])
    return buf.getvalue()

"""SIREN backbone and the activation-sharing multi-resolution (ASMR) network.

Layer ``i`` of an ASMR with ``L`` levels computes::

    z_0 = xhat_0
    z_i = sin(omega0 * (z_{i-1} @ W_i + b_i + xhat_i @ M_i))     i = 1 .. L-1
    z_L = z_{L-1} @ W_L + b_L

where ``xhat_i`` is the level-``i`` digit of the input coordinate mapped to
``[-1, 1]``.  ``forward_naive`` evaluates this per coordinate.
``forward_shared`` evaluates the whole grid at once: layer ``i`` runs on the
coarse ``C_{i-1}`` lattice only, is block-upsampled by ``B_i`` and receives
the modulation of the ``B_i`` lattice tiled ``C_{i-1}`` times.  Both paths
give the same numbers; the shared path is what makes the per-sample cost
nearly independent of depth.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import coords as C
from .errors import (
    BadWidths,
    CorruptCheckpoint,
    CoordOutOfRange,
    LevelCountMismatch,
    ShapeMismatch,
    VersionMismatch,
)
from .tensor import Tensor, add, affine, reshape, sine, tile_replicate, upsample_nearest

MAGIC = b"ASMR1"


@dataclass
class SirenModel:
    widths: tuple[int, ...]
    omega0: float
    weights: list[Tensor]
    biases: list[Tensor]

    @property
    def depth(self) -> int:
        return len(self.weights)

    def parameters(self) -> list[Tensor]:
        out = []
        for W, b in zip(self.weights, self.biases):
            out += [W, b]
        return out

    def num_params(self) -> int:
        return sum(p.size for p in self.parameters())


@dataclass
class AsmrModel:
    backbone: SirenModel
    modulators: list[Tensor]
    scheme: C.PartitionScheme

    @property
    def widths(self) -> tuple[int, ...]:
        return self.backbone.widths

    @property
    def omega0(self) -> float:
        return self.backbone.omega0

    def parameters(self) -> list[Tensor]:
        return self.backbone.parameters() + list(self.modulators)

    def num_params(self) -> int:
        return sum(p.size for p in self.parameters())


@dataclass
class InstanceModulation:
    """Per-datum shift added to every hidden pre-activation (one vector per hidden layer)."""

    vectors: list[Tensor] = field(default_factory=list)

    @classmethod
    def zeros(cls, widths: Sequence[int], requires_grad: bool = False) -> "InstanceModulation":
        return cls([Tensor(np.zeros(w), requires_grad=requires_grad) for w in widths[1:-1]])

    def parameters(self) -> list[Tensor]:
        return list(self.vectors)


def _check_widths(widths: Sequence[int]) -> tuple[int, ...]:
    widths = tuple(int(w) for w in widths)
    if len(widths) < 2 or any(w < 1 for w in widths):
        raise BadWidths(f"need at least [d_in, d_out] positive widths, got {list(widths)}")
    return widths


def init_siren(widths: Sequence[int], omega0: float = 30.0, seed: int = 0) -> SirenModel:
    """Standard SIREN initialisation with zero biases.

    First layer ``U(-1/d_0, 1/d_0)``, later layers ``U(+-sqrt(6/fan_in)/omega0)``.
    """
    widths = _check_widths(widths)
    if not omega0 > 0:
        raise BadWidths(f"omega0 must be positive, got {omega0}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for k, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
        bound = 1.0 / fan_in if k == 0 else math.sqrt(6.0 / fan_in) / omega0
        weights.append(Tensor(rng.uniform(-bound, bound, (fan_in, fan_out)), True, f"W{k + 1}"))
        biases.append(Tensor(np.zeros(fan_out), True, f"b{k + 1}"))
    return SirenModel(widths, float(omega0), weights, biases)


def init_asmr(
    widths: Sequence[int], omega0: float, scheme: C.PartitionScheme, seed: int = 0
) -> AsmrModel:
    widths = _check_widths(widths)
    if len(widths) - 1 != scheme.levels:
        raise LevelCountMismatch(
            f"{len(widths) - 1} layers but scheme has {scheme.levels} levels"
        )
    if widths[0] != scheme.ndim:
        raise LevelCountMismatch(f"input width {widths[0]} != data dimension {scheme.ndim}")
    backbone = init_siren(widths, omega0, seed)
    # separate stream so the backbone matches a plain SIREN with the same seed
    rng = np.random.default_rng([seed, 1])
    d = scheme.ndim
    bound = math.sqrt(1.0 / d)
    mods = [
        Tensor(rng.uniform(-bound, bound, (d, widths[i])), True, f"M{i}")
        for i in range(1, scheme.levels)
    ]
    return AsmrModel(backbone, mods, scheme)


def _hidden_bias(model: SirenModel, i: int, phi: InstanceModulation | None) -> Tensor:
    b = model.biases[i - 1]
    if phi is None:
        return b
    return add(b, phi.vectors[i - 1])


def _check_phi(widths: Sequence[int], phi: InstanceModulation | None) -> None:
    if phi is None:
        return
    expected = list(widths[1:-1])
    got = [v.shape[0] if v.data.ndim == 1 else -1 for v in phi.vectors]
    if got != expected:
        raise ShapeMismatch(f"instance modulation widths {got}, expected {expected}")


def forward_naive(
    model: AsmrModel, xs, phi: InstanceModulation | None = None
) -> Tensor:
    """Per-coordinate evaluation; ``xs`` is ``[n, d]`` integer global coordinates."""
    scheme = model.scheme
    xs = np.asarray(xs, dtype=np.int64)
    if xs.ndim == 1:
        xs = xs[:, None]
    if xs.shape[1] != scheme.ndim:
        raise CoordOutOfRange(f"coordinates have {xs.shape[1]} axes, scheme has {scheme.ndim}")
    _check_phi(model.widths, phi)
    digits = C.decompose_array(xs, scheme)
    net = model.backbone
    w = net.omega0
    z = Tensor(C.normalize_level(digits[0], scheme.level_bases(0)))
    for i in range(1, scheme.levels):
        pre = affine(z, net.weights[i - 1], _hidden_bias(net, i, phi), label=f"layer{i}")
        xhat = Tensor(C.normalize_level(digits[i], scheme.level_bases(i)))
        mod = affine(xhat, model.modulators[i - 1], label=f"mod{i}")
        z = sine(add(pre, mod), w)
    return affine(z, net.weights[-1], net.biases[-1], label=f"layer{scheme.levels}")


def _level_lattice(scheme: C.PartitionScheme, i: int) -> np.ndarray:
    bases = scheme.level_bases(i)
    grid = C.normalize_level(C.level_grid(scheme, i), bases)
    return grid.reshape(*bases, scheme.ndim)


def forward_shared(model: AsmrModel, phi: InstanceModulation | None = None) -> Tensor:
    """Full-grid evaluation with activation sharing; rows are row-major global coordinates."""
    scheme = model.scheme
    _check_phi(model.widths, phi)
    net = model.backbone
    w = net.omega0
    z = Tensor(_level_lattice(scheme, 0))
    for i in range(1, scheme.levels):
        pre = affine(z, net.weights[i - 1], _hidden_bias(net, i, phi), label=f"layer{i}")
        up = upsample_nearest(pre, scheme.level_bases(i))
        mod = affine(Tensor(_level_lattice(scheme, i)), model.modulators[i - 1], label=f"mod{i}")
        rep = tile_replicate(mod, scheme.level_cumulative(i - 1))
        z = sine(add(up, rep), w)
    out = affine(z, net.weights[-1], net.biases[-1], label=f"layer{scheme.levels}")
    return reshape(out, (scheme.size, net.widths[-1]))


def forward_siren(model: SirenModel, coords) -> Tensor:
    """Plain SIREN: ``sin(omega0 * (z @ W + b))`` on hidden layers, affine output."""
    z = coords if isinstance(coords, Tensor) else Tensor(coords)
    if z.data.ndim != 2 or z.shape[1] != model.widths[0]:
        raise ShapeMismatch(f"coords {z.shape}, expected [n, {model.widths[0]}]")
    for k in range(model.depth - 1):
        z = sine(affine(z, model.weights[k], model.biases[k], label=f"layer{k + 1}"), model.omega0)
    return affine(z, model.weights[-1], model.biases[-1], label=f"layer{model.depth}")


# -- checkpoints ---------------------------------------------------------------


def save(model: SirenModel | AsmrModel, path) -> None:
    """Write ``ASMR1\\n`` + JSON header line + little-endian float64 parameter blocks."""
    if isinstance(model, AsmrModel):
        kind, scheme = "asmr", C.format_scheme(model.scheme)
    else:
        kind, scheme = "siren", None
    params = model.parameters()
    header = {
        "kind": kind,
        "widths": list(model.widths),
        "omega0": float(model.omega0).hex(),
        "scheme": scheme,
        "shapes": [list(p.shape) for p in params],
    }
    payload = b"".join(p.data.astype("<f8").tobytes() for p in params)
    blob = MAGIC + b"\n" + json.dumps(header, sort_keys=True).encode() + b"\n"
    Path(path).write_bytes(blob + struct.pack("<Q", len(payload)) + payload)


def load(path, kind: str | None = None) -> SirenModel | AsmrModel:
    """Read a checkpoint; ``kind`` ('siren' or 'asmr') enforces the model type."""
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise CorruptCheckpoint(f"cannot read {path}: {e}") from None
    if not raw.startswith(b"ASMR"):
        raise CorruptCheckpoint(f"{path}: not a checkpoint")
    magic, _, rest = raw.partition(b"\n")
    if magic != MAGIC:
        raise VersionMismatch(f"{path}: format {magic!r}, expected {MAGIC!r}")
    head, sep, body = rest.partition(b"\n")
    try:
        if not sep:
            raise ValueError("missing header terminator")
        header = json.loads(head)
        widths = [int(w) for w in header["widths"]]
        omega0 = float.fromhex(header["omega0"])
        shapes = [tuple(s) for s in header["shapes"]]
        (nbytes,) = struct.unpack("<Q", body[:8])
    except (ValueError, KeyError, TypeError, struct.error) as e:
        raise CorruptCheckpoint(f"{path}: bad header ({e})") from None
    if kind is not None and header["kind"] != kind:
        raise VersionMismatch(f"{path}: holds a {header['kind']} model, expected {kind}")
    payload = body[8:]
    expected = 8 * sum(math.prod(s) for s in shapes)
    if nbytes != expected or len(payload) != expected:
        raise CorruptCheckpoint(f"{path}: payload {len(payload)} bytes, expected {expected}")
    flat = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    arrays, off = [], 0
    for s in shapes:
        n = math.prod(s)
        arrays.append(flat[off : off + n].reshape(s).copy())
        off += n

    if header["kind"] == "asmr":
        scheme = C.parse_scheme(header["scheme"])
        model = init_asmr(widths, omega0, scheme)
    elif header["kind"] == "siren":
        model = init_siren(widths, omega0)
    else:
        raise CorruptCheckpoint(f"{path}: unknown kind {header['kind']!r}")
    params = model.parameters()
    if [p.shape for p in params] != shapes:
        raise CorruptCheckpoint(f"{path}: parameter shapes disagree with widths")
    for p, a in zip(params, arrays):
        p.data = a
    return model


def num_params_formula(widths: Sequence[int], levels: int | None = None, ndim: int | None = None) -> int:
    """Closed-form count: backbone weights+biases plus ``sum_i d * d_i`` modulators."""
    widths = _check_widths(widths)
    n = sum(a * b + b for a, b in zip(widths[:-1], widths[1:]))
    if levels is not None:
        d = widths[0] if ndim is None else ndim
        n += sum(d * widths[i] for i in range(1, levels))
    return n

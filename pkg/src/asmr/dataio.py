"""Signal containers and file formats.

Supported formats: binary PGM (P5) / PPM (P6) with maxval 255, mono PCM16
WAV, and a raw float64 grid (``GRID1`` header).  Readers raise typed
:class:`~asmr.errors.DataError` subclasses on malformed input.
"""

from __future__ import annotations

import math
import struct
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    BadMagic,
    HeaderMismatch,
    TooShort,
    TruncatedFile,
    UnsupportedEncoding,
    UnsupportedMaxval,
)


@dataclass
class Grid:
    """Signal samples on a regular grid, shape ``(*extents, channels)``, native range."""

    values: np.ndarray
    value_range: tuple[float, float] = (0.0, 255.0)
    peak: float = 255.0

    @property
    def extents(self) -> tuple[int, ...]:
        return self.values.shape[:-1]

    @property
    def channels(self) -> int:
        return self.values.shape[-1]

    @property
    def ndim(self) -> int:
        return self.values.ndim - 1

    def normalized(self) -> np.ndarray:
        """Values mapped to ``[-1, 1]``, flattened to ``[prod(extents), channels]``."""
        lo, hi = self.value_range
        v = 2.0 * (self.values - lo) / (hi - lo) - 1.0
        return v.reshape(-1, self.channels)

    def from_normalized(self, flat: np.ndarray) -> "Grid":
        lo, hi = self.value_range
        v = (np.asarray(flat) + 1.0) * 0.5 * (hi - lo) + lo
        return Grid(v.reshape(self.values.shape), self.value_range, self.peak)

    def clipped(self) -> "Grid":
        lo, hi = self.value_range
        return Grid(np.clip(self.values, lo, hi), self.value_range, self.peak)


def image_grid(pixels: np.ndarray) -> Grid:
    """Wrap an 8-bit ``[h, w]`` or ``[h, w, c]`` array."""
    a = np.asarray(pixels, dtype=np.float64)
    if a.ndim == 2:
        a = a[..., None]
    return Grid(a, (0.0, 255.0), 255.0)


def center_crop(grid: Grid, extents: Sequence[int]) -> Grid:
    sl = []
    for n, m in zip(grid.extents, extents):
        if m > n:
            raise HeaderMismatch(f"cannot crop extent {n} to {m}")
        start = (n - m) // 2
        sl.append(slice(start, start + m))
    return Grid(grid.values[tuple(sl)].copy(), grid.value_range, grid.peak)


# -- PGM / PPM -----------------------------------------------------------------


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise TruncatedFile(f"cannot read {path}: {e.strerror or e}") from None


def _pnm_header(raw: bytes, path) -> tuple[bytes, list[int], int]:
    magic = raw[:2]
    if magic not in (b"P5", b"P6"):
        raise BadMagic(f"{path}: magic {magic!r}, only binary P5/P6 supported")
    fields: list[int] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and raw[pos : pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise TruncatedFile(f"{path}: incomplete header")
        fields.append(int(raw[start:pos]))
    if pos >= len(raw) or not raw[pos : pos + 1].isspace():
        raise TruncatedFile(f"{path}: header not terminated")
    return magic, fields, pos + 1


def read_pnm(path) -> Grid:
    raw = _read_bytes(path)
    magic, (w, h, maxval), offset = _pnm_header(raw, path)
    if maxval != 255:
        raise UnsupportedMaxval(f"{path}: maxval {maxval}, only 255 supported")
    c = 1 if magic == b"P5" else 3
    n = w * h * c
    body = raw[offset : offset + n]
    if len(body) < n:
        raise TruncatedFile(f"{path}: {len(body)} of {n} pixel bytes")
    return image_grid(np.frombuffer(body, dtype=np.uint8).reshape(h, w, c))


def read_pgm(path) -> Grid:
    g = read_pnm(path)
    if g.channels != 1:
        raise BadMagic(f"{path}: expected P5 (grayscale)")
    return g


def read_ppm(path) -> Grid:
    g = read_pnm(path)
    if g.channels != 3:
        raise BadMagic(f"{path}: expected P6 (RGB)")
    return g


def _to_bytes8(grid: Grid) -> np.ndarray:
    return np.clip(np.rint(grid.values), 0, 255).astype(np.uint8)


def write_pnm(grid: Grid, path) -> None:
    if grid.ndim != 2 or grid.channels not in (1, 3):
        raise HeaderMismatch(f"PNM needs a 2-D grid with 1 or 3 channels, got {grid.values.shape}")
    h, w = grid.extents
    magic = b"P5" if grid.channels == 1 else b"P6"
    Path(path).write_bytes(magic + f"\n{w} {h}\n255\n".encode() + _to_bytes8(grid).tobytes())


write_pgm = write_pnm
write_ppm = write_pnm


# -- WAV -----------------------------------------------------------------------


def read_wav(path, n_samples: int | None = 32000) -> Grid:
    """Mono PCM16 WAV, first ``n_samples`` samples scaled by ``1/32768``."""
    try:
        with wave.open(str(path), "rb") as f:
            if f.getnchannels() != 1 or f.getsampwidth() != 2 or f.getcomptype() != "NONE":
                raise UnsupportedEncoding(
                    f"{path}: need mono PCM16, got {f.getnchannels()} ch x {8 * f.getsampwidth()} bit"
                )
            total = f.getnframes()
            want = total if n_samples is None else n_samples
            if total < want:
                raise TooShort(f"{path}: {total} samples, need {want}")
            frames = f.readframes(want)
    except FileNotFoundError:
        raise TruncatedFile(f"cannot read {path}: no such file") from None
    except (wave.Error, EOFError) as e:
        raise UnsupportedEncoding(f"{path}: {e}") from None
    if len(frames) < 2 * want:
        raise TruncatedFile(f"{path}: sample data truncated")
    pcm = np.frombuffer(frames, dtype="<i2").astype(np.float64)
    return Grid((pcm / 32768.0)[:, None], (-1.0, 1.0), 1.0)


def write_wav(grid: Grid, path, rate: int = 16000) -> None:
    if grid.ndim != 1 or grid.channels != 1:
        raise HeaderMismatch(f"WAV needs a 1-D mono grid, got {grid.values.shape}")
    pcm = np.clip(np.rint(grid.values[:, 0] * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(rate)
        f.writeframes(pcm.tobytes())


# -- raw grid ------------------------------------------------------------------

GRID_MAGIC = b"GRID1"


def write_raw_grid(grid: Grid, path) -> None:
    """``GRID1``, u32 dims, u32 extents, u32 channels, float64 payload (all LE)."""
    ext = grid.extents
    head = GRID_MAGIC + struct.pack(f"<I{len(ext)}II", len(ext), *ext, grid.channels)
    Path(path).write_bytes(head + grid.values.astype("<f8").tobytes())


def read_raw_grid(path, value_range: tuple[float, float] | None = None) -> Grid:
    """Read a ``GRID1`` file.

    The format carries no value range.  Unless one is given, it is taken as
    ``[0, 1]`` widened to cover the data, so occupancy grids keep ``(0, 1)``.
    """
    raw = _read_bytes(path)
    if not raw.startswith(GRID_MAGIC):
        raise BadMagic(f"{path}: not a GRID1 file")
    pos = len(GRID_MAGIC)
    try:
        (dims,) = struct.unpack_from("<I", raw, pos)
        if not 1 <= dims <= 16:
            raise HeaderMismatch(f"{path}: implausible dimension count {dims}")
        *ext, ch = struct.unpack_from(f"<{dims}II", raw, pos + 4)
    except struct.error:
        raise TruncatedFile(f"{path}: header truncated") from None
    pos += 4 * (dims + 2)
    payload = raw[pos:]
    want = 8 * math.prod(ext) * ch
    if len(payload) != want or min(ext + [ch]) < 1:
        raise HeaderMismatch(f"{path}: header says {want} payload bytes, found {len(payload)}")
    vals = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(*ext, ch)
    if value_range is None:
        value_range = (min(0.0, float(vals.min())), max(1.0, float(vals.max())))
    return Grid(vals, value_range, value_range[1] - value_range[0])


def read_grid(path, **kw) -> Grid:
    """Dispatch on file extension (.pgm/.ppm/.pnm, .wav, anything else raw)."""
    suffix = Path(path).suffix.lower()
    if suffix in (".pgm", ".ppm", ".pnm"):
        return read_pnm(path)
    if suffix == ".wav":
        return read_wav(path, **kw)
    return read_raw_grid(path)


def write_grid(grid: Grid, path) -> None:
    suffix = Path(path).suffix.lower()
    if suffix in (".pgm", ".ppm", ".pnm"):
        write_pnm(grid, path)
    elif suffix == ".wav":
        write_wav(grid, path)
    else:
        write_raw_grid(grid, path)

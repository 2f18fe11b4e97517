"""Command-line experiment driver.

Subcommands: fit, eval, profile, permute, decompose, compare.
Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import logging
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import coords as C
from . import dataio as D
from . import metrics
from . import model as M
from . import profiler as P
from . import train as T
from .errors import AsmrError, ConfigError, ExtentMismatch

log = logging.getLogger("asmr")


@dataclass
class ExperimentConfig:
    model: str = "asmr"
    widths: str = ""
    omega0: float = 30.0
    scheme: str = ""
    iterations: int = 10_000
    lr: float = 1e-4
    lr_min: float = 1e-6
    batch: str = "full"
    seed: int = 0
    log_every: int = 100
    checkpoint_every: int = 0
    input: str = ""
    out: str = "out"
    crop_to_factorable: bool = False
    name: str = ""

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
        values = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = val
        return cls().updated(values)

    def updated(self, values: dict) -> "ExperimentConfig":
        types = {f.name: f.type for f in fields(self)}
        changes = {}
        for key, val in values.items():
            if val is None:
                continue
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            kind = types[key]
            try:
                if kind == "bool":
                    changes[key] = val if isinstance(val, bool) else str(val).lower() in ("1", "true", "yes")
                elif kind == "int":
                    changes[key] = int(val)
                elif kind == "float":
                    changes[key] = float(val)
                else:
                    changes[key] = str(val)
            except ValueError:
                raise ConfigError(f"bad value for {key}: {val!r}") from None
        return replace(self, **changes)

    def width_list(self, data: D.Grid) -> list[int]:
        if not self.widths:
            depth = C.parse_scheme(self.scheme).levels if self.scheme else 4
            return [data.ndim] + [128] * (depth - 1) + [data.channels]
        try:
            return [int(w) for w in self.widths.replace("x", ",").split(",")]
        except ValueError:
            raise ConfigError(f"bad widths {self.widths!r}") from None

    def train_config(self) -> T.TrainConfig:
        batch = "full" if self.batch == "full" else int(self.batch)
        return T.TrainConfig(
            iterations=self.iterations, lr=self.lr, lr_min=self.lr_min, batch=batch,
            seed=self.seed, log_every=self.log_every, checkpoint_every=self.checkpoint_every,
        )


def load_target(cfg: ExperimentConfig) -> D.Grid:
    if not cfg.input:
        raise ConfigError("no input file given")
    grid = D.read_grid(cfg.input)
    if cfg.model == "asmr" and cfg.scheme:
        scheme = C.parse_scheme(cfg.scheme, grid.ndim)
        if scheme.extents != grid.extents:
            if cfg.crop_to_factorable and all(s <= n for s, n in zip(scheme.extents, grid.extents)):
                grid = D.center_crop(grid, scheme.extents)
            else:
                raise ExtentMismatch(
                    f"data extents {grid.extents} vs scheme extents {scheme.extents}"
                    " (use --crop-to-factorable to center-crop)"
                )
    return grid


def build_model(cfg: ExperimentConfig, data: D.Grid):
    widths = cfg.width_list(data)
    if cfg.model == "siren":
        return M.init_siren(widths, cfg.omega0, cfg.seed)
    if cfg.model != "asmr":
        raise ConfigError(f"unknown model kind {cfg.model!r}")
    if not cfg.scheme:
        raise ConfigError("asmr needs --scheme")
    return M.init_asmr(widths, cfg.omega0, C.parse_scheme(cfg.scheme, data.ndim), cfg.seed)


def model_macs(model, extents) -> P.MacReport:
    if isinstance(model, M.AsmrModel):
        return P.mac_asmr(model.widths, model.scheme)
    return P.mac_siren(model.widths, int(np.prod(extents)))


def quality(recon: D.Grid, target: D.Grid, with_iou: bool = False) -> metrics.QualityReport:
    recon = recon.clipped()
    p = metrics.psnr(recon.values, target.values, target.peak)
    s = None
    lo, hi = target.value_range
    if target.ndim == 2 and min(target.extents) >= 11:
        s = metrics.ssim((recon.values - lo) / (hi - lo), (target.values - lo) / (hi - lo))
    i = metrics.iou(recon.values, target.values, lo + 0.5 * (hi - lo)) if with_iou else None
    return metrics.QualityReport(p, s, i)


def run_fit(cfg: ExperimentConfig, write: bool = True):
    data = load_target(cfg)
    model = build_model(cfg, data)
    tcfg = cfg.train_config()
    out = Path(cfg.out)
    if write:
        out.mkdir(parents=True, exist_ok=True)
        if tcfg.checkpoint_every:
            tcfg.checkpoint_dir = str(out)
    result = T.fit(model, data, tcfg)
    recon = T.reconstruct(model, data)
    q = quality(recon, data)
    if write:
        (out / "metrics.csv").write_text(result.metrics_csv())
        M.save(model, out / "model.asmr")
        D.write_grid(recon.clipped(), out / ("reconstruction" + _suffix(cfg.input)))
    return model, data, result, q


def _suffix(path: str) -> str:
    s = Path(path).suffix.lower()
    return s if s in (".pgm", ".ppm", ".wav") else ".grid"


def _fmt(v) -> str:
    return "" if v is None else f"{v:.4f}"


# -- subcommands -----------------------------------------------------------------


def cmd_fit(cfg: ExperimentConfig) -> int:
    model, data, result, q = run_fit(cfg)
    macs = model_macs(model, data.extents)
    print(f"psnr={q.psnr:.3f} ssim={_fmt(q.ssim)} params={macs.params} "
          f"per_sample_macs={macs.per_sample:.1f} time={result.wall_time:.1f}s")
    return 0


def cmd_eval(args) -> int:
    model = M.load(args.checkpoint)
    data = D.read_grid(args.input)
    if args.crop_to_factorable and isinstance(model, M.AsmrModel):
        data = D.center_crop(data, model.scheme.extents)
    T.check_target(model, data)
    recon = T.reconstruct(model, data)
    q = quality(recon, data, with_iou=args.iou)
    print("psnr,ssim,iou")
    print(f"{q.psnr:.4f},{_fmt(q.ssim)},{_fmt(q.iou)}")
    if args.out:
        D.write_grid(recon.clipped(), args.out)
    return 0


def cmd_profile(args) -> int:
    widths = [int(w) for w in args.widths.split(",")]
    if args.model == "asmr":
        if not args.scheme:
            raise ConfigError("asmr profile needs --scheme")
        report = P.mac_asmr(widths, C.parse_scheme(args.scheme, widths[0]))
    else:
        report = P.mac_siren(widths, args.samples)
    _emit(report.to_csv(), args.out)
    return 0


def distinct_permutations(bases) -> list[tuple[int, ...]]:
    return sorted(set(itertools.permutations(bases)))


def cmd_permute(cfg: ExperimentConfig, bases: list[int]) -> int:
    rows = permutation_study(cfg, bases)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["permutation", "per_sample_macs", "psnr", "ssim"])
    for perm, macs, q in rows:
        w.writerow(["x".join(map(str, perm)), repr(macs), f"{q.psnr:.4f}", _fmt(q.ssim)])
    _emit(buf.getvalue(), str(Path(cfg.out) / "permute.csv") if cfg.out else None)
    print(buf.getvalue(), end="")
    return 0


def permutation_study(cfg: ExperimentConfig, bases: list[int]):
    data = D.read_grid(cfg.input)
    rows = []
    for perm in distinct_permutations(bases):
        spec = "x".join(map(str, perm))
        run = cfg.updated({"scheme": spec, "model": "asmr"})
        log.info("permutation %s", spec)
        model, _, _, q = run_fit(replace(run, out=str(Path(cfg.out) / spec)), write=False)
        rows.append((perm, P.mac_asmr(model.widths, model.scheme).per_sample, q))
    return rows


def cmd_decompose(args) -> int:
    scheme = C.parse_scheme(args.scheme)
    x = [int(v) for v in args.x.split(",")]
    scheme = C.parse_scheme(args.scheme, len(x)) if scheme.ndim != len(x) else scheme
    digits = C.decompose(x, scheme)
    for axis in range(scheme.ndim):
        print(",".join(str(level[axis]) for level in digits))
    back = C.recompose(digits, scheme)
    print("recompose=" + ",".join(map(str, back)))
    return 0


def cmd_compare(paths: list[str], base: dict) -> int:
    if not paths:
        raise ConfigError("compare needs at least one --config")
    cfgs = [ExperimentConfig.from_file(p).updated(base) for p in paths]
    extents = {tuple(D.read_grid(c.input).extents) for c in cfgs}
    if len(extents) > 1 and not any(c.crop_to_factorable for c in cfgs):
        raise ExtentMismatch(f"configs target different extents: {sorted(extents)}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "params", "per_sample_macs", "psnr", "ssim"])
    for path, cfg in zip(paths, cfgs):
        name = cfg.name or Path(path).stem
        model, data, _, q = run_fit(replace(cfg, out=str(Path(cfg.out) / name)))
        macs = model_macs(model, data.extents)
        w.writerow([name, macs.params, repr(macs.per_sample), f"{q.psnr:.4f}", _fmt(q.ssim)])
    out = Path(cfgs[0].out) / "compare.csv"
    _emit(buf.getvalue(), str(out))
    print(buf.getvalue(), end="")
    return 0


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# -- argument parsing --------------------------------------------------------------


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config")
    p.add_argument("--input")
    p.add_argument("--model", choices=["asmr", "siren"])
    p.add_argument("--widths")
    p.add_argument("--omega0", type=float)
    p.add_argument("--scheme")
    p.add_argument("--iters", dest="iterations", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--lr-min", dest="lr_min", type=float)
    p.add_argument("--batch")
    p.add_argument("--log-every", dest="log_every", type=int)
    p.add_argument("--checkpoint-every", dest="checkpoint_every", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--crop-to-factorable", dest="crop_to_factorable", action="store_true", default=None)


_RUN_KEYS = ["input", "model", "widths", "omega0", "scheme", "iterations", "lr", "lr_min",
             "batch", "log_every", "checkpoint_every", "seed", "out", "crop_to_factorable"]


def _run_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    return cfg.updated({k: getattr(args, k) for k in _RUN_KEYS})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asmr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_flags(sub.add_parser("fit", help="train one model on one signal"))

    p = sub.add_parser("eval", help="score a checkpoint against a signal")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", help="write the reconstruction here")
    p.add_argument("--iou", action="store_true", help="also report IoU at half range")
    p.add_argument("--crop-to-factorable", action="store_true")

    p = sub.add_parser("profile", help="analytic MAC / parameter report (CSV)")
    p.add_argument("--model", choices=["asmr", "siren"], default="asmr")
    p.add_argument("--widths", required=True)
    p.add_argument("--scheme")
    p.add_argument("--samples", type=int, default=1, help="grid points (siren only)")
    p.add_argument("--out")

    p = sub.add_parser("permute", help="fit every distinct ordering of a base multiset")
    _add_run_flags(p)
    p.add_argument("--bases", required=True, help="comma-separated multiset, e.g. 4,4,4,8")

    p = sub.add_parser("decompose", help="print the level digits of a coordinate")
    p.add_argument("x", help="coordinate, comma-separated for multi-dimensional data")
    p.add_argument("--scheme", required=True)

    p = sub.add_parser("compare", help="fit several configs on the same data")
    p.add_argument("--config", dest="configs", action="append", default=[])
    p.add_argument("--seed", type=int)
    p.add_argument("--iters", dest="iterations", type=int)
    p.add_argument("--out")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "fit":
            return cmd_fit(_run_config(args))
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "profile":
            return cmd_profile(args)
        if args.command == "permute":
            bases = [int(b) for b in args.bases.split(",")]
            return cmd_permute(_run_config(args), bases)
        if args.command == "decompose":
            return cmd_decompose(args)
        if args.command == "compare":
            base = {"seed": args.seed, "iterations": args.iterations, "out": args.out}
            return cmd_compare(args.configs, base)
    except AsmrError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    return 2


if __name__ == "__main__":
    sys.exit(main())

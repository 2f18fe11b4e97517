"""Fit every distinct ordering of a base multiset and tabulate MACs against PSNR.

``--mode line`` uses one 512-sample Cameraman scanline (seconds per run);
``--mode image`` uses the full 512x512 image (minutes to hours per run).
"""

import argparse
from pathlib import Path

import numpy as np
import skimage.data

from asmr import dataio as D
from asmr.cli import main as cli_main


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mode", choices=["line", "image"], default="line")
    ap.add_argument("--bases", default="4,4,4,8")
    ap.add_argument("--width", type=int, default=64)
    ap.add_argument("--iters", type=int, default=2000)
    ap.add_argument("--row", type=int, default=256)
    ap.add_argument("--out", default="runs/permute")
    args = ap.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    img = skimage.data.camera()
    if args.mode == "line":
        src = out / "scanline.grid"
        D.write_raw_grid(D.Grid(img[args.row].astype(np.float64)[:, None], (0.0, 255.0), 255.0), src)
        d = 1
    else:
        src = out / "cameraman.pgm"
        D.write_pgm(D.image_grid(img), src)
        d = 2
    depth = len(args.bases.split(","))
    widths = ",".join(map(str, [d] + [args.width] * (depth - 1) + [1]))
    cli_main(["permute", "--input", str(src), "--bases", args.bases, "--widths", widths,
              "--iters", str(args.iters), "--log-every", str(args.iters), "--out", str(out)])


if __name__ == "__main__":
    main()

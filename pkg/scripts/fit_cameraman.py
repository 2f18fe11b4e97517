"""Desk-scale image fit: ASMR against a same-shape SIREN on 64x64 Cameraman.

Needs scikit-image for the test image.  Writes the image, both runs'
metrics and reconstructions under ``--out``.
"""

import argparse
from pathlib import Path

import numpy as np
import skimage.data

from asmr import dataio as D
from asmr.cli import main as cli_main


def cameraman(size: int) -> np.ndarray:
    img = skimage.data.camera().astype(np.float64)
    f = img.shape[0] // size
    return np.rint(img.reshape(size, f, size, f).mean(axis=(1, 3))).astype(np.uint8)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iters", type=int, default=5000)
    ap.add_argument("--out", default="runs/cameraman")
    args = ap.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    src = out / "cameraman64.pgm"
    D.write_pgm(D.image_grid(cameraman(64)), src)
    common = ["--input", str(src), "--widths", "2,128,128,128,1", "--iters", str(args.iters),
              "--lr", "1e-4", "--lr-min", "1e-6", "--log-every", "500"]
    for name, extra in [("asmr", ["--model", "asmr", "--scheme", "2x2x4x4"]), ("siren", ["--model", "siren"])]:
        print(f"[{name}]", end=" ", flush=True)
        cli_main(["fit", *common, *extra, "--out", str(out / name)])


if __name__ == "__main__":
    main()

import numpy as np
import pytest

from asmr import coords as C
from asmr import model as M
from asmr.tensor import Tensor


def random_asmr(rng: np.random.Generator, with_phi: bool | None = None, max_points: int = 1500):
    """Random small ASMR (d in 1..3, L in 2..5, base-1 levels allowed) plus optional phi."""
    while True:
        d = int(rng.integers(1, 4))
        L = int(rng.integers(2, 6))
        bases = []
        for _ in range(d):
            b = [int(v) for v in rng.integers(1, 5, size=L)]
            if max(b) < 2:
                b[int(rng.integers(L))] = 2
            bases.append(b)
        scheme = C.make_scheme(bases)
        if scheme.size <= max_points:
            break
    widths = [d] + [int(v) for v in rng.integers(2, 7, size=L - 1)] + [int(rng.integers(1, 4))]
    model = M.init_asmr(widths, float(rng.uniform(1.0, 30.0)), scheme, seed=int(rng.integers(2**31)))
    # perturb biases away from zero so every parameter matters
    for b in model.backbone.biases:
        b.data = rng.normal(size=b.shape) * 0.1
    if with_phi is None:
        with_phi = bool(rng.integers(2))
    phi = None
    if with_phi:
        phi = M.InstanceModulation([Tensor(rng.normal(size=w) * 0.1) for w in widths[1:-1]])
    return model, phi


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_image():
    """64x64 8-bit Cameraman (block-averaged from the 512x512 original)."""
    skdata = pytest.importorskip("skimage.data")
    img = skdata.camera().astype(np.float64)
    return np.rint(img.reshape(64, 8, 64, 8).mean(axis=(1, 3)))




ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion; echoed in the terminal summary."""

    def record(num: int, ok: bool, detail: str) -> bool:
        line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

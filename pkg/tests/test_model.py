import math

import numpy as np
import pytest

from asmr import coords as C
from asmr import model as M
from asmr.coords import global_grid
from asmr.errors import BadWidths, CorruptCheckpoint, LevelCountMismatch, VersionMismatch
from asmr.tensor import Tape, Tensor, numeric_grad, rel_error

from conftest import random_asmr


def test_siren_param_count_reference():
    m = M.init_siren([2, 256, 256, 256, 1], 30.0, seed=0)
    # 2*256+256 + 2*(256^2+256) + 256+1
    assert m.num_params() == 132_609
    assert round(m.num_params() / 1000) == 133


def test_asmr_param_counts_reference():
    s = C.make_scheme([[4, 4, 4, 8]] * 2)
    m = M.init_asmr([2, 256, 256, 256, 1], 30.0, s, seed=0)
    assert m.num_params() == 132_609 + 3 * 2 * 256
    assert round(m.num_params() / 1000) == 134
    audio = M.init_asmr([1, 128, 128, 128, 1], 30.0, C.make_scheme([[10, 10, 16, 20]]), seed=0)
    assert audio.num_params() == 33_793
    assert round(audio.num_params() / 100) / 10 == 33.8


def test_param_formula_matches_models(rng):
    for _ in range(20):
        model, _ = random_asmr(rng, with_phi=False)
        assert model.num_params() == M.num_params_formula(model.widths, model.scheme.levels)


def test_init_bounds_and_determinism():
    a = M.init_siren([2, 256, 256, 256, 1], 30.0, seed=7)
    b = M.init_siren([2, 256, 256, 256, 1], 30.0, seed=7)
    for p, q in zip(a.parameters(), b.parameters()):
        assert p.data.tobytes() == q.data.tobytes()
    assert np.max(np.abs(a.weights[0].data)) <= 1 / 2
    bound = math.sqrt(6 / 256) / 30
    assert bound == pytest.approx(0.005103, abs=1e-6)
    for W in a.weights[1:]:
        assert np.max(np.abs(W.data)) <= bound
    assert all(np.all(bias.data == 0) for bias in a.biases)


def test_modulator_init_bound():
    s = C.make_scheme([[4, 4, 4, 8]] * 2)
    m = M.init_asmr([2, 64, 64, 64, 1], 30.0, s, seed=0)
    assert len(m.modulators) == 3
    for W in m.modulators:
        assert W.shape[0] == 2
        assert np.max(np.abs(W.data)) <= math.sqrt(1 / 2)


def test_init_errors():
    with pytest.raises(LevelCountMismatch):
        M.init_asmr([2, 8, 8, 8, 1], 30.0, C.make_scheme([[4, 4, 4]] * 2))
    with pytest.raises(LevelCountMismatch):
        M.init_asmr([1, 8, 1], 30.0, C.make_scheme([[2, 2]] * 2))
    with pytest.raises(BadWidths):
        M.init_siren([2], 30.0)


def test_constant_network():
    s = C.make_scheme([[2, 2, 2]])
    m = M.init_asmr([1, 4, 4, 2], 30.0, s)
    for p in m.parameters():
        p.data[...] = 0.0
    m.backbone.biases[-1].data[:] = [0.25, -3.0]
    out = M.forward_naive(m, np.arange(8)).data
    assert np.all(out == np.array([0.25, -3.0]))
    assert np.all(M.forward_shared(m).data == out)


def test_hand_unrolled_two_layer():
    s = C.make_scheme([[2, 2]])
    m = M.init_asmr([1, 3, 1], 30.0, s, seed=4)
    rng = np.random.default_rng(0)
    for p in m.parameters():
        p.data = rng.normal(size=p.shape)
    W1, b1 = m.backbone.weights[0].data, m.backbone.biases[0].data
    W2, b2 = m.backbone.weights[1].data, m.backbone.biases[1].data
    M1 = m.modulators[0].data
    # x = 0 -> digits (0, 0) -> normalized (-1, -1)
    x0, x1 = -1.0, -1.0
    out = b2[0]
    for j in range(3):
        z = math.sin(30.0 * (x0 * W1[0, j] + b1[j] + x1 * M1[0, j]))
        out += z * W2[j, 0]
    assert M.forward_naive(m, [0]).data[0, 0] == pytest.approx(out, abs=1e-13)
    # x = 3 -> digits (1, 1) -> normalized (1, 1)
    out3 = b2[0] + sum(
        math.sin(30.0 * (W1[0, j] + b1[j] + M1[0, j])) * W2[j, 0] for j in range(3)
    )
    assert M.forward_naive(m, [3]).data[0, 0] == pytest.approx(out3, abs=1e-13)


def test_shared_equals_naive(rng):
    for _ in range(25):
        model, phi = random_asmr(rng)
        shared = M.forward_shared(model, phi).data
        naive = M.forward_naive(model, global_grid(model.scheme.extents), phi).data
        assert np.max(np.abs(shared - naive)) <= 1e-10


def test_naive_on_subsets_matches_rows(rng):
    model, phi = random_asmr(rng, with_phi=True)
    full = M.forward_shared(model, phi).data
    pts = global_grid(model.scheme.extents)
    idx = rng.choice(len(pts), size=min(7, len(pts)), replace=False)
    sub = M.forward_naive(model, pts[idx], phi).data
    assert np.max(np.abs(sub - full[idx])) <= 1e-10


def test_base_one_tail_is_plain_siren():
    s = C.make_scheme([[4, 1, 1], [2, 1, 1]])
    m = M.init_asmr([2, 5, 5, 1], 30.0, s, seed=3)
    lattice = C.normalize_level(C.level_grid(s, 0), s.level_bases(0))
    plain = M.forward_siren(m.backbone, lattice).data
    assert np.max(np.abs(M.forward_shared(m).data - plain)) <= 1e-12


def test_zero_modulators_constant_on_cells():
    s = C.make_scheme([[2, 4, 2]])
    m = M.init_asmr([1, 6, 6, 1], 30.0, s, seed=9)
    for W in m.modulators:
        W.data[...] = 0.0
    g0 = s.grid_sizes[0][0]
    g1 = s.grid_sizes[0][1]
    out = M.forward_naive(m, [0, 1, g1, g0 - 1, g0]).data[:, 0]
    assert out[0] == out[1] == out[2] == out[3]
    assert out[4] != out[0]


def test_phi_zero_is_noop(rng):
    model, _ = random_asmr(rng, with_phi=False)
    phi = M.InstanceModulation.zeros(model.widths)
    assert np.array_equal(M.forward_shared(model, phi).data, M.forward_shared(model).data)


def test_forward_determinism(rng):
    s = C.make_scheme([[2, 2, 4]] * 2)
    a = M.forward_shared(M.init_asmr([2, 8, 8, 1], 30.0, s, seed=5)).data
    b = M.forward_shared(M.init_asmr([2, 8, 8, 1], 30.0, s, seed=5)).data
    assert a.tobytes() == b.tobytes()


def test_forward_siren_basics():
    m = M.init_siren([2, 4, 3], 30.0, seed=0)
    for W in m.weights:
        W.data[...] = 0.0
    m.biases[-1].data[:] = [1.0, 2.0, 3.0]
    out = M.forward_siren(m, np.random.default_rng(0).uniform(-1, 1, (5, 2))).data
    assert np.all(out == [1.0, 2.0, 3.0])
    lin = M.init_siren([3, 2], 30.0, seed=1)
    x = np.random.default_rng(1).normal(size=(4, 3))
    np.testing.assert_allclose(M.forward_siren(lin, x).data, x @ lin.weights[0].data, atol=1e-15)


def test_forward_siren_coord_gradient():
    m = M.init_siren([2, 8, 8, 1], 30.0, seed=2)
    coords = Tensor(np.random.default_rng(2).uniform(-1, 1, (6, 2)), requires_grad=True)
    with Tape() as tape:
        out = M.forward_siren(m, coords)
    tape.backward(out)
    num = numeric_grad(lambda: float(M.forward_siren(m, coords).data.sum()), coords, 1e-6)
    assert rel_error(coords.grad, num) <= 1e-6


def test_checkpoint_roundtrip(tmp_path, rng):
    model, _ = random_asmr(rng)
    p1, p2 = tmp_path / "a.asmr", tmp_path / "b.asmr"
    M.save(model, p1)
    back = M.load(p1, kind="asmr")
    assert back.scheme == model.scheme and back.widths == model.widths
    assert back.omega0 == model.omega0
    for p, q in zip(model.parameters(), back.parameters()):
        assert p.data.tobytes() == q.data.tobytes()
    M.save(back, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_bytes().startswith(b"ASMR1")


def test_checkpoint_errors(tmp_path):
    siren = M.init_siren([2, 4, 1], 30.0)
    path = tmp_path / "s.asmr"
    M.save(siren, path)
    assert isinstance(M.load(path), M.SirenModel)
    with pytest.raises(VersionMismatch):
        M.load(path, kind="asmr")
    raw = path.read_bytes()
    (tmp_path / "t.asmr").write_bytes(raw[:-5])
    with pytest.raises(CorruptCheckpoint):
        M.load(tmp_path / "t.asmr")
    (tmp_path / "v.asmr").write_bytes(b"ASMR9" + raw[5:])
    with pytest.raises(VersionMismatch):
        M.load(tmp_path / "v.asmr")
    (tmp_path / "h.asmr").write_bytes(raw[:20])
    with pytest.raises(CorruptCheckpoint):
        M.load(tmp_path / "h.asmr")

import numpy as np
import pytest

from delaypred import (DEMO_D1, check_assumptions, consistency_error,
                       fno_forward, load_weights, neural_psi, oracle_psi,
                       save_weights, synth_constant_weights)
from delaypred.errors import ContainerFormatError, LengthMismatch
from delaypred.fno import gelu, spectral_apply


def test_gelu_reference_values():
    # tanh-form gelu; values pinned so any activation swap is caught
    assert gelu(np.array([0.0]))[0] == 0.0
    assert gelu(np.array([1.0]))[0] == pytest.approx(0.8411919906082768, abs=1e-12)
    assert gelu(np.array([-1.0]))[0] == pytest.approx(-0.15880801, abs=1e-7)
    # large |x| saturates to x and 0
    assert gelu(np.array([20.0]))[0] == pytest.approx(20.0, abs=1e-8)
    assert gelu(np.array([-20.0]))[0] == pytest.approx(0.0, abs=1e-8)


def test_constant_weights_emit_constant():
    # 0.5 is exactly representable in f32, so equality is exact
    w = synth_constant_weights(0.5)
    out = fno_forward(w, np.linspace(0.2, 0.8, 1024))
    assert out.shape == (1024,)
    assert np.all(out == 0.5)


def test_forward_is_deterministic():
    w = synth_constant_weights(1.25)
    d = np.asarray(DEMO_D1.value(np.linspace(0.0, 12.0, 1024)))
    a = fno_forward(w, d)
    b = fno_forward(w, d)
    assert np.array_equal(a, b)


def test_forward_rejects_wrong_resolution():
    w = synth_constant_weights(0.5)
    with pytest.raises(LengthMismatch):
        fno_forward(w, np.zeros(512))


def test_spectral_apply_is_linear():
    rng = np.random.default_rng(0)
    C, m, n = 4, 8, 64
    R = (rng.standard_normal((C, C, m))
         + 1j * rng.standard_normal((C, C, m))).astype(np.complex64)
    v1 = rng.standard_normal((n, C))
    v2 = rng.standard_normal((n, C))
    lhs = spectral_apply(R, 2.0 * v1 - 3.0 * v2, n)
    rhs = 2.0 * spectral_apply(R, v1, n) - 3.0 * spectral_apply(R, v2, n)
    assert np.abs(lhs - rhs).max() < 1e-10


def test_spectral_apply_truncates_high_frequencies():
    # energy above the retained modes must not leak through
    rng = np.random.default_rng(1)
    C, m, n = 3, 6, 128
    R = (rng.standard_normal((C, C, m))
         + 1j * rng.standard_normal((C, C, m))).astype(np.complex64)
    x = np.arange(n)
    hi = np.cos(2 * np.pi * 20 * x / n)     # mode 20 > m-1 = 5
    v = np.tile(hi[:, None], (1, C))
    out = spectral_apply(R, v, n)
    assert np.abs(out).max() < 1e-12


def test_weights_roundtrip(tmp_path):
    w = synth_constant_weights(0.5, resolution=256, modes=8, channels=6, layers=2)
    path = tmp_path / "w.nopc"
    save_weights(path, w)
    w2 = load_weights(path)
    assert w2.resolution == 256 and w2.modes == 8
    assert w2.channels == 6 and w2.layers == 2
    assert np.array_equal(w2.lift_w, w.lift_w)
    assert np.array_equal(w2.project_b2, w.project_b2)
    assert w2.spectral[0].dtype == np.complex64
    d = np.full(256, 0.4)
    assert np.array_equal(fno_forward(w, d), fno_forward(w2, d))


def test_load_rejects_shape_mismatch(tmp_path):
    w = synth_constant_weights(0.5, resolution=256, modes=8, channels=6, layers=2)
    path = tmp_path / "w.nopc"
    w.lift_w = np.zeros((6, 3), dtype=np.float32)     # wants (6, 2)
    with pytest.raises(Exception) as exc:
        save_weights(path, w)
        load_weights(path)
    assert "lift_w" in str(exc.value)


def test_load_rejects_nonfinite(tmp_path):
    w = synth_constant_weights(0.5, resolution=256, modes=8, channels=6, layers=2)
    w.pointwise_w[1] = w.pointwise_w[1].copy()
    w.pointwise_w[1][0, 0] = np.nan
    path = tmp_path / "w.nopc"
    save_weights(path, w)
    with pytest.raises(ContainerFormatError, match="pointwise_w_1"):
        load_weights(path)


def test_load_rejects_bad_std(tmp_path):
    w = synth_constant_weights(0.5, resolution=256, modes=8, channels=6, layers=2)
    w.in_std = np.float64(0.0)
    path = tmp_path / "w.nopc"
    save_weights(path, w)
    with pytest.raises(ContainerFormatError, match="in_std"):
        load_weights(path)


def test_neural_series_grid_and_method():
    w = synth_constant_weights(0.5)
    s = neural_psi(w, DEMO_D1)
    assert s.method == "neural"
    assert s.grid.size == 1024
    assert s.grid[0] == 0.0
    assert s.grid[-1] == pytest.approx(12.0)
    assert np.all(s.values == 0.5)


def test_consistency_error_brackets_known_offset():
    # feed the net's output as psi_true + eps: the residual
    # |phi(t + psi_hat) - t| equals |phi(t+psi+eps) - phi(t+psi)|,
    # which the mean value theorem brackets by [pi2*eps, sup(phi')*eps]
    eps = 0.05
    grid = np.linspace(0.0, 12.0, 1024)
    truth = oracle_psi(DEMO_D1, grid)
    shifted = type(truth)(grid=truth.grid, values=truth.values + eps,
                          method="neural", step=truth.step)
    rep = consistency_error(DEMO_D1, shifted)
    r = check_assumptions(DEMO_D1, t_end=14.0)
    assert rep.max_residual <= eps * (1.0 / r.pi3_star) * 1.001
    assert rep.max_residual >= eps * r.pi2_star * 0.999
    assert rep.mean_residual <= rep.max_residual

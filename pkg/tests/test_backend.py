import importlib

import numpy as np
import pytest

from selfsing import _backend, _kernels_py

compiled = pytest.importorskip("selfsing._kernels")
RNG = np.random.default_rng(5)


def test_backend_selection():
    assert _backend.get_kernels("python") is _kernels_py
    assert _backend.get_kernels("compiled") is compiled
    with pytest.raises(ValueError):
        _backend.get_kernels("fortran")


def test_env_forces_python(monkeypatch):
    monkeypatch.setenv("SELFSING_BACKEND", "python")
    mod = importlib.reload(_backend)
    try:
        assert mod.BACKEND == "python" and mod.kernels is _kernels_py
    finally:
        monkeypatch.delenv("SELFSING_BACKEND")
        importlib.reload(_backend)


@pytest.mark.parametrize("fn", ["bump", "bridge"])
def test_scalar_kernels_agree(fn):
    s = RNG.uniform(-1.2, 1.2, 5000)
    for a, b in zip(getattr(compiled, fn)(s), getattr(_kernels_py, fn)(s)):
        # the third derivative crosses zero, so compare against the array scale
        assert np.allclose(a, b, rtol=1e-13, atol=1e-13 * np.max(np.abs(b)))


@pytest.mark.parametrize("tau", [0.0, 0.013, 0.05, 0.1])
def test_cartesian_base_agrees(tau):
    x, y, z = RNG.uniform(-1.1, 1.1, (3, 4000))
    centers = np.array([[0.0, 0, 0], [0.8, 0, 0.8]])
    for cen, lam in ((np.zeros((1, 3)), 2.0), (centers, 9 / 8)):
        a = compiled.cartesian_base(tau, x, y, z, lam, 0.1, 1.0, cen)
        b = _kernels_py.cartesian_base(tau, x, y, z, lam, 0.1, 1.0, cen)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12 * np.max(np.abs(b)))


@pytest.mark.parametrize("zero_mean", [True, False])
@pytest.mark.parametrize("tau", [0.0, 0.02, 0.05, 0.1])
def test_radial_base_agrees(tau, zero_mean):
    r = RNG.uniform(-1.2, 1.2, 4000)
    y = RNG.uniform(-1.1, 1.1, 4000)
    for offset in (0.0, 1.0):
        a = compiled.radial_base(tau, r, y, 1.3, 0.1, 1.0, 1.0, zero_mean, offset)
        b = _kernels_py.radial_base(tau, r, y, 1.3, 0.1, 1.0, 1.0, zero_mean, offset)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12 * np.max(np.abs(b)))


def test_heat_step_agrees():
    u0 = RNG.standard_normal((33, 65))
    f = RNG.standard_normal((33, 65))
    ua, ub = u0.copy(), u0.copy()
    for _ in range(5):
        compiled.heat_step_radial(ua, f, 1 / 32, 1e-4)
        _kernels_py.heat_step_radial(ub, f, 1 / 32, 1e-4)
    assert np.allclose(ua, ub, rtol=1e-13, atol=1e-13)
    # the Dirichlet ring is untouched
    assert np.array_equal(ua[-1], u0[-1]) and np.array_equal(ua[:, 0], u0[:, 0])

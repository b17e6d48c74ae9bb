import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from selfsing.params import ScalingParams
from selfsing.profile import (
    BRIDGE,
    CARTESIAN,
    RADIAL,
    BumpProfile,
    IntervalError,
    chi,
    eval_z0,
    eval_z1,
    eval_z1_cantor_block,
    forcing_f1,
    forcing_f1_fd,
    split_forcing,
)
from selfsing.fractal import CantorSpec

CART = BumpProfile(CARTESIAN)
RAD = BumpProfile(RADIAL)
P = ScalingParams(lam=2.0, sigma=0.1)
PA = ScalingParams(lam=1.3, sigma=0.1)


def test_seed_values():
    assert eval_z0(CART, [0, 0, 0]) == 1.0
    assert eval_z0(RAD, [0, 0]) == 1.0
    assert eval_z0(CART, [1.0, 0, 0]) == 0.0
    assert eval_z0(CART, [0.3, -1.2, 0]) == 0.0
    s = 0.5
    assert eval_z0(CART, [math.sqrt(s), 0, 0]) == pytest.approx(math.exp(1 - 1 / (1 - s * s)), rel=1e-14)
    assert eval_z0(RAD, [0.5, 0.0]) == pytest.approx(math.exp(1 - 1 / (1 - 0.5 ** 8)), rel=1e-14)


def test_psi_matches_symbolic_derivatives():
    s = sp.symbols("s")
    expr = sp.exp(1 - 1 / (1 - s ** 2))
    from selfsing._backend import kernels
    pts = np.array([-0.7, -0.2, 0.0, 0.31, 0.8])
    got = kernels.bump(pts)
    for order in range(3):
        want = [float(sp.diff(expr, s, order).subs(s, v)) for v in pts]
        assert np.allclose(got[order], want, rtol=1e-12, atol=1e-14)


def test_axial_factor_has_zero_mean():
    val, _ = quad(lambda u: float(chi(np.array([u]))[0]), -1, 1, points=[0.35, 0.85],
                  epsabs=1e-13, limit=200)
    assert abs(val) < 1e-12
    assert chi(np.array([0.0]))[0] == 1.0
    assert quad(lambda u: float(chi(np.array([u]), zero_mean=False)[0]), -1, 1)[0] > 0


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_cartesian_seed_nonnegative(x, y, z):
    assert eval_z0(CART, [x, y, z]) >= 0


def test_bridge_values_and_symmetry():
    assert BRIDGE(0.0) == 0.0 and BRIDGE(1.0) == 1.0
    assert BRIDGE(0.5) == 0.5
    s = np.linspace(0.01, 0.99, 50)
    assert np.allclose(BRIDGE(s) + BRIDGE(1 - s), 1.0, atol=1e-15)
    assert BRIDGE.integral(2.0) == 1.5
    assert BRIDGE.integral(1.0) == pytest.approx(0.5, abs=1e-13)


def test_bridge_derivative_symbolic():
    x = sp.symbols("x")
    B = lambda v: sp.exp(-1 / v)
    eta = B(x) / (B(x) + B(1 - x))
    d = sp.diff(eta, x)
    for v in (0.1, 0.35, 0.5, 0.77):
        assert float(BRIDGE.derivative(v)) == pytest.approx(float(d.subs(x, v)), rel=1e-12)


def test_bridged_field_endpoints():
    pts = np.random.default_rng(0).uniform(-1, 1, (200, 3))
    assert np.array_equal(eval_z1(CART, P, 0.0, pts), eval_z0(CART, pts))
    end = eval_z1(CART, P, P.sigma, pts)
    assert np.allclose(end, P.lam * eval_z0(CART, pts / math.sqrt(P.sigma)), rtol=1e-14, atol=0)
    assert eval_z1(CART, P, P.sigma, [0, 0, 0]) == pytest.approx(2.0, rel=1e-15)
    mid = eval_z1(CART, P, P.sigma / 2, pts)
    assert np.allclose(mid, 0.5 * eval_z0(CART, pts) + 0.5 * end, rtol=1e-13, atol=1e-15)
    with pytest.raises(IntervalError):
        eval_z1(CART, P, 0.2, pts)


def test_radial_endpoints_and_flat_axis():
    rng = np.random.default_rng(1)
    pts = np.column_stack([rng.uniform(0, 1, 200), rng.uniform(-1, 1, 200)])
    assert np.allclose(eval_z1(RAD, PA, 0.0, pts), eval_z0(RAD, pts), atol=0)
    rs = math.sqrt(PA.sigma)
    end = eval_z1(RAD, PA, PA.sigma, pts)
    want = PA.lam * eval_z0(RAD, np.column_stack([(pts[:, 0] - rs) / rs, pts[:, 1] / rs]))
    assert np.allclose(end, want, rtol=1e-13, atol=1e-15)
    from selfsing._backend import kernels
    y = np.linspace(-0.9, 0.9, 19)
    for tau in (0.0, 0.03, 0.1):
        out = kernels.radial_base(tau, np.zeros_like(y), y, PA.lam, PA.sigma, 1.0, 1.0, True, 0.0)
        assert np.max(np.abs(out[1])) <= 1e-8 and np.max(np.abs(out[3])) <= 1e-8


def test_radial_zero_axial_mean_in_time():
    for tau in (0.0, 0.04, 0.1):
        for rho in (0.1, 0.45, 0.7):
            val, _ = quad(lambda y: float(eval_z1(RAD, PA, tau, [rho, y])), -1, 1,
                          points=[-0.316, 0.316, 0.35, 0.85, 0.11, 0.27], limit=400, epsabs=1e-13)
            assert abs(val) < 1e-10


def test_cantor_blocks():
    spec = CantorSpec.default(5, 8)
    prm = ScalingParams.cantor(5, 8, lam=9.0, q=2.0, p=1.2)
    x = np.random.default_rng(2).uniform(-0.5, 1, (50, 3))
    blocks = [eval_z1_cantor_block(CART, spec, prm, i, 0.0, x) for i in range(1, 9)]
    assert np.allclose(blocks[0], eval_z0(CART, x) / 8)
    assert np.allclose(sum(blocks), eval_z0(CART, x), rtol=1e-14)
    xi = spec.generator_points[3]
    assert eval_z1_cantor_block(CART, spec, prm, 4, prm.sigma, xi) == pytest.approx(9 / 8)


@pytest.mark.parametrize("prof, prm, pts", [
    (CART, P, np.random.default_rng(3).uniform(-0.9, 0.9, (40, 3))),
    (RAD, PA, np.column_stack([np.random.default_rng(4).uniform(0.05, 0.95, 40),
                               np.random.default_rng(5).uniform(-0.9, 0.9, 40)])),
])
def test_forcing_matches_finite_differences(prof, prm, pts):
    t = 0.37 * prm.sigma
    exact = forcing_f1(prof, prm, t, pts)
    e1 = np.max(np.abs(forcing_f1_fd(prof, prm, t, pts, h=2e-3) - exact))
    e2 = np.max(np.abs(forcing_f1_fd(prof, prm, t, pts, h=1e-3) - exact))
    scale = np.max(np.abs(exact))
    assert e2 < 1e-3 * scale
    assert math.log2(e1 / e2) > 1.8


def test_forcing_outside_support_is_zero():
    assert forcing_f1(CART, P, 0.05, [[1.2, 0, 0]])[0] == 0.0


def test_split_policies():
    F = lambda t, x: np.ones_like(np.asarray(x, dtype=float)[..., 0]) * (1 + t)
    f, g = split_forcing(F, "all-in-f")
    x = np.zeros((3, 3))
    assert np.array_equal(f(0.3, x), F(0.3, x)) and np.all(g(0.3, x) == 0)
    f0, g0 = split_forcing(F, "time-smoothed-fraction", 0.0)
    assert np.array_equal(f0(0.3, x), F(0.3, x)) and np.all(g0(0.3, x) == 0)
    fh, gh = split_forcing(F, "time-smoothed-fraction", 0.5)
    assert np.allclose(fh(0.3, x), 0.5 * F(0.3, x))
    assert np.allclose(gh(0.3, x), 0.5 * (0.3 + 0.045))
    h = 1e-4
    dg = (gh(0.3 + h, x) - gh(0.3 - h, x)) / (2 * h)
    assert np.allclose(fh(0.3, x) + dg, F(0.3, x), atol=1e-8)
    with pytest.raises(ValueError):
        split_forcing(F, "nope")

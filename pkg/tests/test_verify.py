import json
import math

import numpy as np
import pytest
from scipy.integrate import quad_vec

from selfsing import verify as V
from selfsing.field import FieldSpec
from selfsing.params import ScalingParams, default_params, sigma_partial
from selfsing.profile import RADIAL, BumpProfile
from selfsing.reporting import dumps_json

SINGLE = FieldSpec("single", ScalingParams(lam=2.0, sigma=0.1))
AXI = FieldSpec("axisym", default_params("axisym"))
CANTOR = FieldSpec("cantor", default_params("cantor"))


def _radial_energy(spec, N):
    """Independent level energy: scipy in time, fixed Gauss-Legendre in r."""
    s = spec.params.sigma
    a, b = sigma_partial(s, N - 1), sigma_partial(s, N)
    reach = spec.scale(N) * 1.2
    x, w = np.polynomial.legendre.leggauss(400)
    r = 0.5 * reach * (x + 1)
    w = 0.5 * reach * w
    pts = np.column_stack([r, np.zeros_like(r), np.zeros_like(r)])

    def dens(t):
        g = spec.eval_grad_z(t, pts)
        return np.sum(4 * np.pi * r * r * w * np.sum(g * g, axis=1))

    return quad_vec(dens, a, b, epsabs=0, epsrel=1e-10, limit=400)[0]


@pytest.mark.parametrize("N", [1, 2])
def test_level_energy_matches_independent_quadrature(N):
    rep = V.energy_norms(SINGLE, N_max=3)
    oracle = _radial_energy(SINGLE, N)
    assert rep.levels[N - 1].grad_energy == pytest.approx(oracle, rel=1e-6)


def test_energy_totals_and_finiteness():
    rep = V.energy_norms(SINGLE, N_max=5)
    th = 2.0 ** 2 * 0.1 ** 1.5
    assert rep.fitted_ratio() == pytest.approx(th, rel=1e-6)
    assert rep.totals["grad_energy_finite"] and rep.regime_ok
    lv = rep.levels
    assert rep.totals["grad_energy_total"] == pytest.approx(
        sum(x.grad_energy for x in lv) + lv[-1].grad_energy * th / (1 - th), rel=1e-6)
    big = FieldSpec("single", ScalingParams(lam=6.0, sigma=0.1), enforce_regime=False)
    rep = V.energy_norms(big, N_max=4)
    assert not rep.totals["grad_energy_finite"] and rep.passed
    assert math.isinf(rep.totals["grad_energy_total"])
    with pytest.raises(ValueError):
        V.energy_norms(SINGLE, N_max=1)


def test_cantor_energy_ratio():
    rep = V.energy_norms(CANTOR, N_max=4)
    assert rep.passed
    p = CANTOR.params
    assert rep.theory["grad_energy"] == pytest.approx(p.lam ** 2 * p.sigma ** 1.5 / p.m)


def test_fit_slope():
    assert V.fit_slope([1, 2, 3], [2.0, 4.0, 8.0]) == pytest.approx(math.log(2))
    assert V.fit_slope([1, 2], [-1.0, -3.0]) == pytest.approx(math.log(3))
    with pytest.raises(ValueError):
        V.fit_slope([1, 2], [0.0, 1.0])


def test_flatness_far_field_and_tube():
    far = V.local_energy_flatness(AXI, (0.15, 0.5), range(3, 6))
    assert far.vanishing and far.passed
    tube = V.local_energy_flatness(AXI, None, range(3, 9), region="tube")
    assert tube.passed and tube.decreasing
    with pytest.raises(ValueError):
        V.local_energy_flatness(AXI, region="cube")
    with pytest.raises(ValueError):
        V.local_energy_flatness(CANTOR)


def test_flatness_single_point_rate():
    rep = V.local_energy_flatness(SINGLE, None, range(3, 8))
    assert rep.slope == pytest.approx(rep.theoretical, rel=0.05)


def test_weak_residual_single_identity():
    rep = V.weak_residual(SINGLE, N_trunc=8)
    assert all(abs(g) <= 10 * rep.tol for g in rep.gap)
    assert rep.theoretical == pytest.approx(math.log(2.0 * 0.1 ** 1.5))
    assert rep.passed
    with pytest.raises(ValueError):
        V.weak_residual(CANTOR)
    with pytest.raises(ValueError):
        V.weak_residual(AXI, V.TestFunction(center=(0.5, 0.0, 0.0)))


def test_test_function_laplacian():
    phi = V.TestFunction(radius=1.3)
    x = np.random.default_rng(0).uniform(-0.7, 0.7, (50, 3))
    h = 1e-4

    def H(p):
        return phi.space_part(np.sum(p * p, axis=1))[0]

    fd = sum(H(x + e) - 2 * H(x) + H(x - e) for e in np.eye(3) * h) / h ** 2
    assert np.allclose(phi.space_part(np.sum(x * x, axis=1))[1], fd, atol=1e-5)


def test_forcing_classification():
    conv = V.forcing_integrability(SINGLE, 1.2, N_max=5)
    assert conv.expected == "convergent" and conv.passed
    assert V.forcing_theory(SINGLE, 1.2) == pytest.approx(2.0 ** 1.2 * 0.1 ** 1.3)
    with pytest.raises(ValueError):
        V.forcing_integrability(SINGLE, 0.5)


def test_blowup_reports():
    rep = V.blowup_rate_fit(SINGLE, range(1, 15))
    assert rep.exact and rep.passed
    assert rep.slope == pytest.approx(math.log(2.0))
    rep = V.blowup_rate_fit(CANTOR, range(1, 8))
    assert not rep.exact and rep.certified and rep.passed


def test_holder_quotient_finite():
    spec = FieldSpec("single", ScalingParams(lam=2.0, sigma=0.1), split_policy="time-smoothed-fraction",
                     g_fraction=0.5)
    rep = V.holder_quotient_g(spec, 0.1, np.linspace(0, 0.1, 6))
    assert rep.passed and rep.quotient > 0 and rep.pairs == 15
    with pytest.raises(ValueError):
        V.holder_quotient_g(spec, 0.1, [0.01])


def test_assumption_b_clauses():
    rep = V.assumption_B_check(AXI, N_max=4, flat_range=range(3, 6))
    assert rep.clauses == {"L_inf_L2": True, "L_inf_Lq": True, "flatness": True}
    with pytest.raises(ValueError):
        V.assumption_B_check(SINGLE)


def test_stability_guard():
    h = 1 / 32
    rad = V.check_stability(32, 64, h, 0.2 * h * h)
    assert rad * 0.2 * h * h < 2
    with pytest.raises(V.StabilityError):
        V.check_stability(32, 64, h, 0.5 * h * h)


def test_oracle_rejects_bad_setup():
    with pytest.raises(ValueError):
        V.fd_oracle_compare(SINGLE)
    with pytest.raises(ValueError):
        V.fd_oracle_compare(AXI, domain=(0.5, 1.0))
    with pytest.raises(ValueError):
        V.fd_oracle_compare(AXI, t_horizon=1.0)
    with pytest.raises(ValueError):
        V.fd_oracle_compare(AXI, grid=(32, 32))


def test_oracle_second_order_once_resolved():
    # grids below 128 cells do not resolve the seed's edge layer; see the oracle config
    spec = FieldSpec("axisym", ScalingParams(lam=1.2, sigma=0.2),
                     profile=BumpProfile(RADIAL, zero_mean=False))
    rep = V.fd_oracle_compare(spec, grid=(64, 128), t_horizon=0.01, refinements=3)
    assert rep.orders[-1] >= 1.8, rep.errors
    assert rep.errors[-1] < rep.errors[0]


def test_reports_serialise():
    for rep in (V.energy_norms(SINGLE, 3), V.weak_residual(SINGLE, N_trunc=3),
                V.blowup_rate_fit(SINGLE, range(1, 4))):
        d = json.loads(dumps_json(rep))
        assert d["report"] == rep.name and d["pass"] == rep.passed
        assert {c["name"] for c in d["checks"]} == {c.name for c in rep.checks()}

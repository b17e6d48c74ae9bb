import math
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from selfsing.params import (
    REQUIRED,
    InfeasibleError,
    ParameterError,
    RadialPartition,
    ScalingParams,
    TimePartition,
    admissible,
    blowup_time,
    candidates,
    check_regime,
    dimension_bound,
    hausdorff_dimension,
    p_threshold,
    rho_infty,
    rho_partial,
    sigma_partial,
    suggest_params,
)

sigmas = st.floats(min_value=0.01, max_value=0.95)


def test_sigma_partial_examples():
    assert sigma_partial(0.25, 0) == 0
    assert sigma_partial(0.25, 2) == pytest.approx(0.3125, abs=1e-15)
    assert blowup_time(0.25) == pytest.approx(1 / 3, abs=1e-15)


def test_rho_partial_examples():
    assert rho_infty(1 / 9) == pytest.approx(0.5, abs=1e-15)
    assert rho_partial(1 / 9, 1) == pytest.approx(1 / 3, abs=1e-15)
    assert rho_partial(0.04, 3) == pytest.approx(0.248, abs=1e-15)


def test_partial_sums_match_symbolic_series():
    s, j = sp.Rational(1, 7), sp.symbols("j", integer=True)
    for N in (1, 5, 12):
        exact = sp.summation(s ** j, (j, 1, N))
        assert sigma_partial(float(s), N) == pytest.approx(float(exact), rel=1e-15)
    assert blowup_time(float(s)) == pytest.approx(float(sp.summation(s ** j, (j, 1, sp.oo))))


@given(sigmas, st.integers(0, 40))
def test_sigma_partial_recurrence(s, N):
    assert sigma_partial(s, N) + s ** (N + 1) == pytest.approx(sigma_partial(s, N + 1), rel=1e-14)


@given(sigmas, st.integers(0, 40))
def test_remaining_time_is_geometric(s, N):
    rem = blowup_time(s) - sigma_partial(s, N)
    assert rem == pytest.approx(s ** (N + 1) / (1 - s), rel=1e-9, abs=1e-15)


@given(sigmas, st.integers(0, 30))
def test_rho_partial_closed_form(s, N):
    r = math.sqrt(s)
    closed = r * (1 - r ** N) / (1 - r)
    assert rho_partial(s, N) == pytest.approx(closed, rel=1e-12, abs=1e-15)


def test_partitions():
    tp = TimePartition(0.25, levels=3)
    assert tp.interval(2) == (0.25, 0.3125)
    assert tp.sigma_partials[0] == 0
    with pytest.raises(ValueError):
        tp.interval(0)
    rp = RadialPartition(1 / 9, levels=2)
    assert rp.rho_partials[1] == pytest.approx(1 / 3)
    assert rp.rho_infty == pytest.approx(0.5)


@pytest.mark.parametrize("kw, msg", [
    (dict(lam=1.0, sigma=0.1), "lam"),
    (dict(lam=2.0, sigma=1.0), "sigma"),
    (dict(lam=2.0, sigma=0.1, k=5), "together"),
    (dict(lam=2.0, sigma=0.1, k=5, m=126), "'m'"),
    (dict(lam=2.0, sigma=0.1, beta=0.1, epsilon=0.2), "beta > epsilon"),
    (dict(lam=float("nan"), sigma=0.1), "finite"),
])
def test_params_rejected(kw, msg):
    with pytest.raises(ParameterError, match=msg):
        ScalingParams(**kw)


def test_cantor_constructor_fixes_sigma():
    p = ScalingParams.cantor(5, 8, lam=9.0, q=2.0)
    assert p.sigma == 1 / 25 and (p.k, p.m) == (5, 8)


def test_energy_row_example():
    row = check_regime(ScalingParams(lam=2.0, sigma=0.1))["energy"]
    assert row.lhs == pytest.approx(0.3557, abs=5e-5)
    assert row.satisfied is True


def test_strict_rows_fail_at_equality():
    # lam * sigma^(3/4) == 1 exactly with sigma = 1/16, lam = 8
    row = check_regime(ScalingParams(lam=8.0, sigma=1 / 16))["energy"]
    assert row.lhs == 1.0 and row.satisfied is False


def test_g_regime_is_non_strict():
    # exponent 1/4 - (1/4 - 1/8) = 1/8 and sigma = 2^-8 give lhs = 2 * 2^-1 = 1
    rep = check_regime(ScalingParams(lam=2.0, sigma=2.0 ** -8, beta=0.25, epsilon=0.125))
    assert rep["g_regime"].lhs == 1.0 and rep["g_regime"].satisfied is True
    assert all(rep[n].strict for n in rep.names() if n not in ("g_regime", "p_ckn"))


def test_p_threshold_at_q6():
    assert Fraction(p_threshold(6)).limit_denominator(100) == Fraction(12, 7)
    rep = check_regime(ScalingParams(lam=1.2, sigma=0.1, q=6.0, p=12 / 7))
    assert rep["p_ckn"].satisfied is True
    rep = check_regime(ScalingParams(lam=1.2, sigma=0.1, q=6.0, p=12 / 7 + 1e-9))
    assert rep["p_ckn"].satisfied is False


@given(st.floats(min_value=6.0001, max_value=100))
def test_dimension_bound_below_half_for_q_above_6(q):
    assert dimension_bound(q) < 0.5


@given(
    st.floats(1.01, 20), st.floats(0.01, 0.99), st.floats(1.01, 12), st.floats(1.0, 3.0),
    st.integers(2, 9), st.integers(1, 60),
)
def test_regime_rows_match_literal_inequalities(lam, s, q, p, k, m):
    m = min(m, k ** 3)
    rep = check_regime(ScalingParams(lam=lam, sigma=s, q=q, p=p, k=k, m=m))
    literal = {
        "energy": lam * s ** 0.75 < 1,
        "forcing3d": lam ** p * s ** (2.5 - p) < 1,
        "g_regime": lam * s ** (0.25 - 0.2) <= 1,
        "weak_solution": lam * s < 1,
        "cantor_Lq": lam ** q * s ** 1.5 < 1,
        "axisym_Lq": lam ** q * s < 1,
        "sigma_quarter": s < 0.25,
        "axisym_forcing": lam ** p * s ** (2 - p) < 1,
        "p_ckn": p <= 2 * q / (1 + q),
        "lambda_gt_m": lam > m,
        "dimension": math.log(m) / math.log(k) < 3 / q,
        "q_gt_6": q > 6,
        "axisym_energy": lam * lam * s < 1,
        "flatness": lam * lam * math.sqrt(s) < 1,
    }
    assert set(rep.names()) == set(literal)
    for name, want in literal.items():
        assert rep[name].satisfied is want, name


def test_cell_rows_not_applicable_without_k():
    rep = check_regime(ScalingParams(lam=2.0, sigma=0.1))
    assert rep["lambda_gt_m"].satisfied is None
    assert rep["dimension"].satisfied is None


def test_required_rows_cover_each_variant():
    names = set(check_regime(ScalingParams(lam=2.0, sigma=0.1)).names())
    for rows in REQUIRED.values():
        assert set(rows) <= names


def test_hausdorff_dimension_examples():
    assert hausdorff_dimension(5, 8) == pytest.approx(1.29203, abs=5e-6)
    assert hausdorff_dimension(5, 8) == pytest.approx(math.log(8) / math.log(5), abs=1e-12)
    assert hausdorff_dimension(2, 2) == 1
    assert hausdorff_dimension(3, 1) == 0
    with pytest.raises(ValueError):
        hausdorff_dimension(3, 0)


@given(st.integers(2, 12), st.integers(1, 100))
def test_hausdorff_dimension_monotone(k, m):
    m = min(m, k ** 3 - 1)
    assert hausdorff_dimension(k, m + 1) > hausdorff_dimension(k, m)
    if m <= (k + 1) ** 3 and m > 1:
        assert hausdorff_dimension(k + 1, m) < hausdorff_dimension(k, m)


def test_suggest_params_examples():
    p = suggest_params(0.4, 7.0)
    assert abs(hausdorff_dimension(p.k, p.m) - 0.4) <= 0.05
    assert p.m < p.lam < p.k ** (3 / 7)
    assert p.sigma == pytest.approx(p.k ** -2)
    with pytest.raises(InfeasibleError):
        suggest_params(0.6, 7.0)
    assert admissible(5, 8, 1.29, 2.0)
    assert (5, 8) in list(candidates(1.29, 2.0, k_max=6))
    first = next(candidates(1.29, 2.0))
    got = suggest_params(1.29, 2.0)
    assert (got.k, got.m) == first

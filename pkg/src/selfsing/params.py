"""Scalar parameters, geometric partitions and the parameter-regime table."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

VARIANTS = ("single", "cantor", "axisym")


class ParameterError(ValueError):
    """A parameter is missing, non-finite or outside its admissible range."""


class InfeasibleError(ValueError):
    """No parameter set can meet the requested target."""


@dataclass(frozen=True)
class ScalingParams:
    """All scalar inputs of the constructions.

    ``k`` and ``m`` are only meaningful for the Cantor variant; for the other
    variants they may be left as ``None``. Viscosity is fixed to one.
    """

    lam: float
    sigma: float
    k: int | None = None
    m: int | None = None
    q: float = 7.0
    p: float = 1.5
    beta: float = 0.3
    epsilon: float = 0.1
    M: float = 1.0
    nu: float = field(default=1.0, init=False)

    def __post_init__(self):
        for name in ("lam", "sigma", "q", "p", "beta", "epsilon", "M"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParameterError(f"parameter {name!r} must be finite, got {v!r}")
        if self.lam <= 1:
            raise ParameterError(f"parameter 'lam' must exceed 1, got {self.lam}")
        if not 0 < self.sigma < 1:
            raise ParameterError(f"parameter 'sigma' must lie in (0, 1), got {self.sigma}")
        if self.q <= 1:
            raise ParameterError(f"parameter 'q' must exceed 1, got {self.q}")
        if self.p < 1:
            raise ParameterError(f"parameter 'p' must be at least 1, got {self.p}")
        if not self.beta > self.epsilon > 0:
            raise ParameterError(
                f"need beta > epsilon > 0, got beta={self.beta}, epsilon={self.epsilon}"
            )
        if self.M <= 0:
            raise ParameterError(f"parameter 'M' must be positive, got {self.M}")
        if (self.k is None) != (self.m is None):
            raise ParameterError("parameters 'k' and 'm' must be given together")
        if self.k is not None:
            if int(self.k) != self.k or self.k < 2:
                raise ParameterError(f"parameter 'k' must be an integer >= 2, got {self.k}")
            if int(self.m) != self.m or not 1 <= self.m <= self.k ** 3:
                raise ParameterError(
                    f"parameter 'm' must be an integer in [1, k^3], got {self.m}"
                )

    @classmethod
    def cantor(cls, k: int, m: int, lam: float, **kw) -> "ScalingParams":
        """Cantor parameters with ``sigma = k**-2`` fixed by ``k``."""
        return cls(lam=lam, sigma=1.0 / (k * k), k=int(k), m=int(m), **kw)

    def with_(self, **kw) -> "ScalingParams":
        return replace(self, **kw)

    def as_dict(self) -> dict:
        d = asdict(self)
        return d


def _sigma(params_or_sigma) -> float:
    return getattr(params_or_sigma, "sigma", params_or_sigma)


def sigma_partial(params, N: int) -> float:
    """Start of interval ``N + 1``: the sum of ``sigma**j`` for ``j = 1..N``."""
    if N < 0:
        raise ValueError("N must be non-negative")
    s = _sigma(params)
    return math.fsum(s ** j for j in range(1, N + 1))


def blowup_time(params) -> float:
    s = _sigma(params)
    return s / (1.0 - s)


def rho_partial(params, N: int) -> float:
    """Radius of the level-``N`` ring: the sum of ``sigma**(j/2)``."""
    if N < 0:
        raise ValueError("N must be non-negative")
    rs = math.sqrt(_sigma(params))
    return math.fsum(rs ** j for j in range(1, N + 1))


def rho_infty(params) -> float:
    rs = math.sqrt(_sigma(params))
    return rs / (1.0 - rs)


@dataclass(frozen=True)
class TimePartition:
    sigma: float
    levels: int = 40

    @property
    def T(self) -> float:
        return blowup_time(self.sigma)

    @property
    def sigma_partials(self) -> list[float]:
        return [sigma_partial(self.sigma, n) for n in range(self.levels + 1)]

    def interval(self, N: int) -> tuple[float, float]:
        if N < 1:
            raise ValueError("intervals are numbered from 1")
        return sigma_partial(self.sigma, N - 1), sigma_partial(self.sigma, N)


@dataclass(frozen=True)
class RadialPartition:
    sigma: float
    levels: int = 40

    @property
    def rho_infty(self) -> float:
        return rho_infty(self.sigma)

    @property
    def rho_partials(self) -> list[float]:
        return [rho_partial(self.sigma, n) for n in range(self.levels + 1)]


# ---------------------------------------------------------------- regime table


@dataclass(frozen=True)
class RegimeEntry:
    name: str
    expression: str
    lhs: float
    threshold: float
    strict: bool
    satisfied: bool | None  # None when the row does not apply (k, m unset)

    @property
    def margin(self) -> float:
        return self.threshold - self.lhs

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "expression": self.expression,
            "lhs": self.lhs,
            "threshold": self.threshold,
            "strict": self.strict,
            "satisfied": self.satisfied,
            "margin": self.margin,
        }


# rows that must hold for each construction variant to be well posed
REQUIRED = {
    "single": ("energy",),
    "cantor": ("energy", "lambda_gt_m", "cantor_Lq", "dimension"),
    "axisym": ("energy", "sigma_quarter", "axisym_Lq", "q_gt_6"),
}


@dataclass(frozen=True)
class RegimeReport:
    params: ScalingParams
    entries: tuple[RegimeEntry, ...]

    def __getitem__(self, name: str) -> RegimeEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def failures(self, variant: str) -> list[RegimeEntry]:
        """Required rows for ``variant`` that are not satisfied."""
        return [self[n] for n in REQUIRED[variant] if self[n].satisfied is not True]

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "entries": [e.as_dict() for e in self.entries],
        }


def _row(name, expr, lhs, threshold, strict=True):
    if lhs is None or not math.isfinite(threshold):
        return RegimeEntry(name, expr, math.nan, threshold, strict, None)
    ok = lhs < threshold if strict else lhs <= threshold
    return RegimeEntry(name, expr, lhs, threshold, strict, bool(ok))


def check_regime(params: ScalingParams) -> RegimeReport:
    """Evaluate every parameter inequality; none is skipped.

    Rows needing ``k`` and ``m`` are reported with ``satisfied=None`` when
    those are unset.
    """
    lam, s, q, p = params.lam, params.sigma, params.q, params.p
    b, eps = params.beta, params.epsilon
    k, m = params.k, params.m
    has_cells = k is not None
    dim = hausdorff_dimension(k, m) if has_cells else None
    rows = [
        _row("energy", "lam*sigma^(3/4) < 1", lam * s ** 0.75, 1.0),
        _row("forcing3d", "lam^p*sigma^(5/2-p) < 1", lam ** p * s ** (2.5 - p), 1.0),
        _row(
            "g_regime",
            "lam*sigma^(1/4-(beta-epsilon)) <= 1",
            lam * s ** (0.25 - (b - eps)),
            1.0,
            strict=False,
        ),
        _row("weak_solution", "lam*sigma < 1", lam * s, 1.0),
        _row("cantor_Lq", "lam^q*sigma^(3/2) < 1", lam ** q * s ** 1.5, 1.0),
        _row("axisym_Lq", "lam^q*sigma < 1", lam ** q * s, 1.0),
        _row("sigma_quarter", "sigma < 1/4", s, 0.25),
        _row("axisym_forcing", "lam^p*sigma^(2-p) < 1", lam ** p * s ** (2 - p), 1.0),
        _row("p_ckn", "p <= 2q/(1+q)", p, 2 * q / (1 + q), strict=False),
        _row("lambda_gt_m", "lam > m", float(m) if has_cells else None, lam),
        _row("dimension", "log m/log k < 3/q", dim, 3.0 / q),
        _row("q_gt_6", "q > 6", -q, -6.0),
        _row("axisym_energy", "lam^2*sigma < 1", lam * lam * s, 1.0),
        _row("flatness", "lam^2*sigma^(1/2) < 1", lam * lam * math.sqrt(s), 1.0),
    ]
    return RegimeReport(params, tuple(rows))


def dimension_bound(q: float) -> float:
    """Largest Cantor dimension compatible with ``L^q`` integrability."""
    return 3.0 / q


def p_threshold(q: float) -> float:
    return 2.0 * q / (1.0 + q)


def hausdorff_dimension(k: int, m: int) -> float:
    """Similarity dimension ``log m / log k`` of the set with m of k^3 cells."""
    if m is None or m < 1:
        raise ValueError(f"the set with m={m} cells is empty; dimension undefined")
    if k < 2 or m > k ** 3:
        raise ValueError(f"need k >= 2 and m <= k^3, got k={k}, m={m}")
    return math.log(m) / math.log(k)


def _lambda_window(k: int, m: int, q: float) -> tuple[float, float]:
    # lam must exceed m (blow-up) and stay below k^(3/q) (L^q bound)
    return float(m), k ** (3.0 / q)


def admissible(k: int, m: int, target_dim: float, q: float, tol: float = 0.05) -> bool:
    """True when (k, m) is within ``tol`` of ``target_dim`` and some lambda fits."""
    if abs(hausdorff_dimension(k, m) - target_dim) > tol:
        return False
    lo, hi = _lambda_window(k, m, q)
    return lo < hi and max(lo, 1.0) < hi


def candidates(target_dim: float, q: float, k_max: int = 64, tol: float = 0.05):
    """Admissible (k, m) pairs in search order: increasing k, then m."""
    for k in range(2, k_max + 1):
        for m in range(1, k ** 3 + 1):
            if m >= k ** (3.0 / q):
                break
            if admissible(k, m, target_dim, q, tol):
                yield k, m


def suggest_params(target_dim: float, q: float, k_max: int = 64, **kw) -> ScalingParams:
    """First admissible Cantor parameter set for ``target_dim`` at exponent ``q``.

    ``lam`` is the geometric mean of its admissible window ``(m, k^(3/q))``.
    """
    if not target_dim > 0:
        raise InfeasibleError(f"target dimension must be positive, got {target_dim}")
    bound = dimension_bound(q)
    if target_dim >= bound:
        raise InfeasibleError(
            f"target dimension {target_dim} violates the bound dim < 3/q = {bound:.6g}"
        )
    for k, m in candidates(target_dim, q, k_max):
        lo, hi = _lambda_window(k, m, q)
        lam = math.sqrt(max(lo, 1.0) * hi)
        params = ScalingParams.cantor(k, m, lam, q=q, **kw)
        if not check_regime(params).failures("cantor"):
            return params
    raise InfeasibleError(
        f"no (k, m) with k <= {k_max} reaches dimension {target_dim} within 0.05 "
        f"under dim < 3/q = {bound:.6g}"
    )


DEFAULTS = {
    "single": dict(lam=2.0, sigma=0.1),
    "cantor": dict(lam=9.0, sigma=1.0 / 25.0, k=5, m=8, q=2.0, p=1.2),
    "axisym": dict(lam=1.3, sigma=0.1, q=7.0, p=1.5, beta=0.3, epsilon=0.1, M=1.0),
}


def default_params(variant: str) -> ScalingParams:
    if variant not in DEFAULTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    return ScalingParams(**DEFAULTS[variant])

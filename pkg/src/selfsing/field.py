"""Self-similar fields: evaluation of z, grad z, f and g at any (t, x).

Level ``N`` lives on ``I_N = [sigma_{N-1}, sigma_N)``. A point there is
pulled back to the first interval with local time
``tau = (t - sigma_{N-1}) / sigma^{N-1}`` and spatial scale
``s = sigma^{(N-1)/2}``:

* ``single``  z_N = lam^{N-1} z_1(tau, x/s)
* ``cantor``  Z_N = (lam/m)^{N-1} Z_1(tau, beta chain of x)
* ``axisym``  z_N = lam^{N-1} z_1(tau, (rho - rho_{N-1})/s, y/s)

The axisymmetric forcing is not a pure rescaling: the ``(1/rho) d_rho``
term is evaluated with the true distance to the axis, so ``z`` solves
the heat equation in cylindrical coordinates exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .fractal import CantorSpec, chain_point
from .params import (
    ParameterError,
    ScalingParams,
    blowup_time,
    check_regime,
    rho_partial,
    sigma_partial,
)
from .profile import BRIDGE, CARTESIAN, RADIAL, SPLIT_POLICIES, BumpProfile

SINGLE = "single"
CANTOR = "cantor"
AXISYM = "axisym"
VARIANTS = (SINGLE, CANTOR, AXISYM)

# log of the largest amplitude we are willing to form
_LOG_MAX = 700.0


class LevelOverflow(OverflowError):
    pass


class _PostT:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "POST_T"


POST_T = _PostT()


def interval_index(params, t: float, n_max: int | None = None):
    """Level ``N`` with ``sigma_{N-1} <= t < sigma_N``, or ``POST_T`` for t >= T."""
    if t < 0:
        raise ValueError("t must be non-negative")
    s = params.sigma
    if t >= blowup_time(s):
        return POST_T
    arg = 1.0 - t * (1.0 - s) / s
    N = int(math.floor(math.log(arg) / math.log(s))) + 1 if arg < 1 else 1
    N = max(N, 1)
    # log arithmetic can land one level off near the boundaries
    while N > 1 and t < sigma_partial(s, N - 1):
        N -= 1
    while t >= sigma_partial(s, N):
        N += 1
        if sigma_partial(s, N) == sigma_partial(s, N - 1):
            return POST_T  # t is within rounding of T
    if n_max is not None and N > n_max:
        raise LevelOverflow(
            f"t={t!r} lies in level {N} > cap {n_max}; largest admissible t is "
            f"{sigma_partial(s, n_max)!r}"
        )
    return N


@dataclass(frozen=True)
class SupportBox:
    level: int
    intervals: tuple[tuple[float, float], ...]

    def contains(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        ok = np.ones(pts.shape[:-1], dtype=bool)
        for d, (lo, hi) in enumerate(self.intervals):
            ok &= (pts[..., d] > lo) & (pts[..., d] < hi)
        return ok


@dataclass(frozen=True)
class FieldSpec:
    """Immutable description of one construction.

    ``g_fraction`` moves that fraction of the base forcing into the
    fluctuation ``g`` (split policy ``time-smoothed-fraction``).
    ``enforce_regime`` rejects parameters outside the regime the variant
    needs; structural constraints are always enforced.
    """

    variant: str
    params: ScalingParams
    profile: BumpProfile = None
    cantor: CantorSpec | None = None
    split_policy: str = "all-in-f"
    g_fraction: float = 0.0
    n_max: int = 300
    enforce_regime: bool = True
    _gens: np.ndarray = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        v, p = self.variant, self.params
        if v not in VARIANTS:
            raise ValueError(f"unknown variant {v!r}; expected one of {VARIANTS}")
        if self.profile is None:
            prof = BumpProfile(RADIAL if v == AXISYM else CARTESIAN, M=p.M)
            object.__setattr__(self, "profile", prof)
        prof = self.profile
        if (prof.variant == RADIAL) != (v == AXISYM):
            raise ValueError(f"variant {v!r} cannot use a {prof.variant} profile")
        if self.split_policy not in SPLIT_POLICIES:
            raise ValueError(f"unknown split policy {self.split_policy!r}")
        if self.split_policy == "all-in-f" and self.g_fraction != 0.0:
            raise ValueError("g_fraction requires split_policy='time-smoothed-fraction'")
        if not 0.0 <= self.g_fraction <= 1.0:
            raise ValueError("g_fraction must lie in [0, 1]")
        if v == CANTOR:
            spec = self.cantor
            if p.k is None:
                raise ParameterError("the Cantor variant needs k and m")
            if spec is None:
                spec = CantorSpec.default(p.k, p.m)
                object.__setattr__(self, "cantor", spec)
            if spec.k != p.k or spec.m != p.m:
                raise ParameterError("CantorSpec disagrees with params k, m")
            if abs(p.sigma * p.k * p.k - 1.0) > 1e-14:
                raise ParameterError("the Cantor variant needs sigma = k^-2 exactly")
            if not spec.separated():
                raise ParameterError(
                    "chosen cells touch; branch supports would overlap (need Chebyshev distance >= 2)"
                )
            if prof.radius > 1.0:
                raise ParameterError("Cantor seed support radius must be at most 1")
            object.__setattr__(self, "_gens", spec.generator_points)
        if v == AXISYM:
            if not p.sigma < 0.25:
                raise ParameterError("the axisymmetric variant needs sigma < 1/4")
            if prof.radius > 1.0:
                raise ParameterError("radial seed support radius must be at most 1")
        if self.n_max < 1:
            raise ValueError("n_max must be positive")
        if self.n_max * math.log(self.amplitude_ratio) > _LOG_MAX:
            raise LevelOverflow(
                f"amplitude ratio^{self.n_max} overflows double precision; lower n_max"
            )
        if self.enforce_regime:
            bad = check_regime(p).failures(v)
            if bad:
                names = ", ".join(f"{e.name} ({e.expression})" for e in bad)
                raise ParameterError(f"parameters violate the {v} regime: {names}")

    # ------------------------------------------------------------ basics

    @property
    def amplitude_ratio(self) -> float:
        """Per-level amplitude factor: lam, or lam/m for the Cantor variant."""
        p = self.params
        return p.lam / p.m if self.variant == CANTOR else p.lam

    @property
    def T(self) -> float:
        return blowup_time(self.params.sigma)

    @property
    def theta(self) -> float:
        return self.g_fraction if self.split_policy != "all-in-f" else 0.0

    def level(self, t: float):
        return interval_index(self.params, t, self.n_max)

    def local_time(self, t: float):
        """``(N, tau)`` for ``t < T``; ``(POST_T, None)`` otherwise."""
        N = self.level(t)
        if N is POST_T:
            return N, None
        s = self.params.sigma
        tau = (t - sigma_partial(s, N - 1)) / s ** (N - 1)
        return N, min(max(tau, 0.0), s)

    def scale(self, N: int) -> float:
        return self.params.sigma ** ((N - 1) / 2.0)

    def _log_amp(self, N: int, time_order: int = 0, space_order: int = 0) -> float:
        p = self.params
        a = (N - 1) * math.log(self.amplitude_ratio)
        a -= (N - 1) * time_order * math.log(p.sigma)
        a -= (N - 1) * space_order * 0.5 * math.log(p.sigma)
        if a > _LOG_MAX:
            raise LevelOverflow(f"amplitude at level {N} overflows double precision")
        return a

    def amp(self, N: int, time_order: int = 0, space_order: int = 0) -> float:
        return math.exp(self._log_amp(N, time_order, space_order))

    def max_time(self) -> float:
        return sigma_partial(self.params.sigma, self.n_max)

    # ------------------------------------------------------------ geometry

    def chart_points(self, pts):
        """Cartesian points become (rho, y) for the axisymmetric variant."""
        pts = np.asarray(pts, dtype=float)
        if self.variant == AXISYM and pts.shape[-1] == 3:
            return np.stack([np.hypot(pts[..., 0], pts[..., 1]), pts[..., 2]], axis=-1)
        return pts

    def support_box(self, N: int) -> SupportBox:
        """A box containing ``supp z_N(t)`` for every t in ``I_N``."""
        if N < 1:
            raise ValueError("levels start at 1")
        s = self.scale(N)
        r = self.profile.radius
        if self.variant == SINGLE:
            return SupportBox(N, ((-s * r, s * r),) * 3)
        if self.variant == CANTOR:
            return SupportBox(N, ((-r * s, 1.0),) * 3)
        c = rho_partial(self.params.sigma, N - 1)
        M = self.profile.M
        return SupportBox(N, ((max(c - s * r, 0.0) if N > 1 else -np.inf, c + s * r), (-s * M, s * M)))

    def end_support_box(self, N: int) -> SupportBox:
        """Support of the axisymmetric level-N field at the end of ``I_N``.

        It is ``(rho_{N-1}, rho_N + sigma^{N/2}) x (-s M, s M)``; earlier in the
        interval the support is wider, see :meth:`support_box`.
        """
        if self.variant != AXISYM:
            raise ValueError("end-of-interval box is defined for the axisymmetric variant")
        sig = self.params.sigma
        s = self.scale(N)
        M = self.profile.M
        return SupportBox(
            N,
            ((rho_partial(sig, N - 1), rho_partial(sig, N) + sig ** (N / 2.0)), (-s * M, s * M)),
        )

    # ------------------------------------------------------------ level kernels

    def _cantor_pullback(self, x: np.ndarray, N: int):
        """Follow the unique live branch N-1 times; returns (u, alive)."""
        k = self.params.k
        r = self.profile.radius
        u = x.copy()
        alive = np.ones(len(u), dtype=bool)
        for _ in range(N - 1):
            nxt = np.zeros_like(u)
            hit = np.zeros(len(u), dtype=bool)
            for g in self._gens:
                w = k * (u - g)
                inside = np.all((w > -r) & (w < 1.0), axis=1)
                nxt[inside] = w[inside]
                hit |= inside
            alive &= hit
            u = nxt
        return u, alive

    def base_components(self, N: int, tau: float, pts):
        """Raw base-kernel output for the level-N pullback of ``pts``.

        Cartesian variants take (n, 3) points, the axisymmetric one (n, 2)
        chart points. Returns ``(components, alive)`` where components has
        the kernel layout and ``alive`` masks points with a live branch.
        """
        p = self.params
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        s = self.scale(N)
        if self.variant == SINGLE:
            u = pts / s
            out = kernels.cartesian_base(
                tau, u[:, 0], u[:, 1], u[:, 2], p.lam, p.sigma,
                self.profile.radius, np.zeros((1, 3)),
            )
            return out, np.ones(len(u), dtype=bool)
        if self.variant == CANTOR:
            u, alive = self._cantor_pullback(pts, N)
            out = np.zeros((7, len(u)))
            if alive.any():
                ua = u[alive]
                out[:, alive] = kernels.cartesian_base(
                    tau, ua[:, 0], ua[:, 1], ua[:, 2], p.lam / p.m, p.sigma,
                    self.profile.radius, self._gens,
                )
            return out, alive
        c = rho_partial(p.sigma, N - 1)
        u = (pts[:, 0] - c) / s
        v = pts[:, 1] / s
        prof = self.profile
        out = kernels.radial_base(
            tau, u, v, p.lam, p.sigma, prof.radius, prof.M, prof.zero_mean, c / s
        )
        return out, np.ones(len(u), dtype=bool)

    # ------------------------------------------------------------ level API

    def z_at_level(self, N: int, tau: float, pts):
        out, _ = self.base_components(N, tau, pts)
        return self.amp(N) * out[0]

    def grad_at_level(self, N: int, tau: float, pts):
        """Chart gradient: (n, 3) for Cartesian variants, (n, 2) = (d_rho, d_y) otherwise."""
        out, _ = self.base_components(N, tau, pts)
        a = self.amp(N, space_order=1)
        if self.variant == AXISYM:
            return a * np.stack([out[1], out[2]], axis=-1)
        return a * out[1:4].T

    def forcing_at_level(self, N: int, tau: float, pts, total: bool = False):
        """Mean forcing ``f`` (or the total ``F = f + dg/dt`` when ``total``)."""
        out, _ = self.base_components(N, tau, pts)
        a = self.amp(N, time_order=1)
        idx = 9 if self.variant == AXISYM else 6
        F = a * out[idx]
        if total or self.theta == 0.0:
            return F
        return F - self.theta * a * self._base_forcing(N, tau, pts)

    def _base_forcing(self, N, tau, pts):
        # forcing of the unshifted base field at the pulled-back point;
        # dg/dt is built from it on every level
        if self.variant != AXISYM:
            out, _ = self.base_components(N, tau, pts)
            return out[6]
        p, prof = self.params, self.profile
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        s = self.scale(N)
        c = rho_partial(p.sigma, N - 1)
        return kernels.radial_base(
            tau, (pts[:, 0] - c) / s, pts[:, 1] / s, p.lam, p.sigma,
            prof.radius, prof.M, prof.zero_mean, 0.0,
        )[9]

    def components_at_level(self, N: int, tau: float, pts) -> dict:
        """All physical-scale derivatives at level N as a dict of arrays."""
        out, _ = self.base_components(N, tau, pts)
        amp = lambda t_o, s_o: self.amp(N, t_o, s_o)
        if self.variant == AXISYM:
            names = ("z", "dr", "dy", "drr", "dyy", "drrr", "dryy", "dt", "dtr", "f", "df_r")
            orders = ((0, 0), (0, 1), (0, 1), (0, 2), (0, 2), (0, 3), (0, 3),
                      (1, 0), (1, 1), (1, 0), (1, 1))
        else:
            names = ("z", "gx", "gy", "gz", "lap", "dt", "f")
            orders = ((0, 0), (0, 1), (0, 1), (0, 1), (0, 2), (1, 0), (1, 0))
        return {n: amp(*o) * out[i] for i, (n, o) in enumerate(zip(names, orders))}

    def bridge_basis(self, N: int, pts, total: bool = False) -> dict:
        """Level-N quantities as affine functions of the bridge.

        On ``I_N`` with ``eta = eta(tau/sigma)``:
        ``z = (1 - eta) z0 + eta z1``, likewise the gradient, and
        ``f = (1 - eta) f0 + eta f1 + eta'(tau/sigma) fd``.
        The spatial operator does not depend on time inside an interval,
        so this is exact; verifiers use it to separate space and time.
        """
        sig = self.params.sigma
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = {}
        for key, tau in (("0", 0.0), ("1", sig)):
            out["z" + key] = self.z_at_level(N, tau, pts)
            out["grad" + key] = self.grad_at_level(N, tau, pts)
            out["f" + key] = self.forcing_at_level(N, tau, pts, total=total)
        # eta(1/2) = 1/2 exactly by symmetry
        fm = self.forcing_at_level(N, 0.5 * sig, pts, total=total)
        out["fd"] = (fm - 0.5 * (out["f0"] + out["f1"])) / float(BRIDGE.derivative(0.5))
        return out

    # ------------------------------------------------------------ time API

    def _dispatch(self, t, pts, fn, width=None):
        pts = np.asarray(pts, dtype=float)
        shape = pts.shape[:-1]
        flat = pts.reshape(-1, pts.shape[-1])
        N, tau = self.local_time(t)
        if N is POST_T:
            res = np.zeros(len(flat) if width is None else (len(flat), width))
        else:
            res = fn(N, tau, flat)
        return res.reshape(shape if width is None else shape + (width,))

    def eval_z(self, t: float, x):
        """Scalar field. Axisymmetric points may be chart (rho, y) or Cartesian."""
        return self._dispatch(t, self.chart_points(x), self.z_at_level)

    def eval_grad_z(self, t: float, x):
        """Spatial gradient; Cartesian points give the 3-vector gradient."""
        x = np.asarray(x, dtype=float)
        if self.variant == AXISYM and x.shape[-1] == 3:
            return self._dispatch(t, x, self._lifted_grad, width=3)
        width = 2 if self.variant == AXISYM else 3
        return self._dispatch(t, x, self.grad_at_level, width=width)

    def _lifted_grad(self, N, tau, x):
        ch = self.chart_points(x)
        g = self.grad_at_level(N, tau, ch)
        rho = ch[:, 0]
        safe = np.where(rho > 0, rho, 1.0)
        c1 = np.where(rho > 0, x[:, 0] / safe, 0.0)
        c2 = np.where(rho > 0, x[:, 1] / safe, 0.0)
        return np.stack([g[:, 0] * c1, g[:, 0] * c2, g[:, 1]], axis=-1)

    def eval_f(self, t: float, x, total: bool = False):
        fn = lambda N, tau, p: self.forcing_at_level(N, tau, p, total=total)
        return self._dispatch(t, self.chart_points(x), fn)

    def eval_Z_lifted(self, t: float, x):
        if self.variant != AXISYM:
            raise ValueError("lifting applies to the axisymmetric variant")
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 3:
            raise ValueError("lifted evaluation takes Cartesian points")
        return self.eval_z(t, x)

    # ------------------------------------------------------------ fluctuation g

    def _g1_parts(self, tau, pts):
        # g_1 = theta * int_0^tau F_1 split through the bridge:
        # eta (E - S) + (tau - H) f(0) + H f(sigma), f(0) = -L S, f(sigma) = -L E
        sig = self.params.sigma
        idx = 9 if self.variant == AXISYM else 6
        k0 = self._base_raw(0.0, pts)
        k1 = self._base_raw(sig, pts)
        eta = float(BRIDGE(tau / sig))
        H = sig * BRIDGE.integral(tau / sig)
        return eta * (k1[0] - k0[0]) + (tau - H) * k0[idx] + H * k1[idx]

    def _base_raw(self, tau, u):
        # unshifted base kernel at base-level points u (no pullback)
        p, prof = self.params, self.profile
        if self.variant == AXISYM:
            return kernels.radial_base(
                tau, u[:, 0], u[:, 1], p.lam, p.sigma, prof.radius, prof.M, prof.zero_mean, 0.0
            )
        centers = self._gens if self.variant == CANTOR else np.zeros((1, 3))
        lam_end = self.amplitude_ratio
        return kernels.cartesian_base(
            tau, u[:, 0], u[:, 1], u[:, 2], lam_end, p.sigma, prof.radius, centers
        )

    def _chain(self, pts, n):
        """Points ``x_0 = pts, x_1, ..., x_n`` of one-level pullbacks (dead -> far away)."""
        p = self.params
        rs = math.sqrt(p.sigma)
        chain = [pts]
        cur = pts
        for _ in range(n):
            if self.variant == SINGLE:
                cur = cur / rs
            elif self.variant == CANTOR:
                nxt, alive = self._cantor_pullback(cur, 2)
                nxt[~alive] = 1e6
                cur = nxt
            else:
                cur = np.stack([(cur[:, 0] - rs) / rs, cur[:, 1] / rs], axis=-1)
            chain.append(cur)
        return chain

    def g_at_level(self, N: int, tau: float, pts):
        """Fluctuation from the additive recursion, unwound to the base.

        With boundary values ``b_n(x) = g(sigma_n, x)``:
        ``g = sum_j a^j [b_{N-1-j}(x_j) - a b_{N-2-j}(x_{j+1})] + a^{N-1} g_1(tau, x_{N-1})``
        where ``a`` is the amplitude ratio and ``x_j`` the j-fold pullback.
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.theta == 0.0:
            return np.zeros(len(pts))
        sig = self.params.sigma
        a = self.amplitude_ratio
        chain = self._chain(pts, N - 1)
        g1_end = [self.theta * self._g1_parts(sig, c) for c in chain]
        # B[n][j] = b_n(x_j) for n + j <= N - 1
        B = {0: [np.zeros(len(pts))] * N, 1: g1_end}
        for n in range(2, N):
            B[n] = [
                B[n - 1][j] + a * (B[n - 1][j + 1] - B[n - 2][j + 1]) for j in range(N - n)
            ]
        total = a ** (N - 1) * self.theta * self._g1_parts(tau, chain[N - 1])
        for j in range(N - 1):
            total = total + a ** j * (B[N - 1 - j][j] - a * B[N - 2 - j][j + 1])
        return total

    def eval_g(self, t: float, x):
        """Fluctuation ``g``; zero under the all-in-f policy and for t >= T."""
        return self._dispatch(t, self.chart_points(x), self.g_at_level)

    # ------------------------------------------------------------ witnesses

    def cantor_chain_value(self, N: int, branches) -> float:
        """``Z(sigma_N, x)`` for the chain point of ``branches`` (length N).

        The point and its pullbacks are kept as exact rationals; a float
        copy of x would be amplified by k^N when pulled back.
        """
        from fractions import Fraction

        k = self.params.k
        gens = [tuple(Fraction(c, k) for c in cell) for cell in self.cantor.cells]
        x = [Fraction(0)] * 3
        for depth, i in enumerate(branches):
            x = [a + g / k ** depth for a, g in zip(x, gens[i - 1])]
        r = Fraction(self.profile.radius)
        u = x
        for _ in range(N - 1):
            live = [g for g in gens if all(-r < k * (a - c) < 1 for a, c in zip(u, g))]
            if not live:
                return 0.0
            u = [k * (a - c) for a, c in zip(u, live[0])]
        pt = np.array([[float(a) for a in u]])
        return self.amp(N) * float(self._base_raw(self.params.sigma, pt)[0][0])

    def witness(self, N: int):
        """A point where ``z(sigma_N, .)`` attains the blow-up value."""
        if self.variant == SINGLE:
            return np.zeros(3)
        if self.variant == AXISYM:
            return np.array([rho_partial(self.params.sigma, N), 0.0])
        # cycle through the branches so the witness is not a fixed point
        return chain_point(self.cantor, [1 + (j % self.cantor.m) for j in range(N)])


def blowup_sequence(spec: FieldSpec, n_max: int):
    """``[(sigma_N, witness, z(sigma_N, witness))]`` for N = 1..n_max.

    Values are taken at the end of ``I_N`` in the level-N chart, which by
    continuity is ``z(sigma_N)``. Near T the time ``sigma_N`` itself is not
    resolvable in double precision once sigma^N < eps T.
    """
    if n_max > spec.n_max:
        raise LevelOverflow(f"requested {n_max} levels, cap is {spec.n_max}")
    sig = spec.params.sigma
    rows = []
    for N in range(1, n_max + 1):
        w = spec.witness(N)
        if spec.variant == CANTOR:
            val = spec.cantor_chain_value(N, [1 + (j % spec.cantor.m) for j in range(N)])
        else:
            val = float(spec.z_at_level(N, sig, w[None, :])[0])
        rows.append((sigma_partial(sig, N), w, val))
    return rows


def eval_z_bruteforce(spec: FieldSpec, t: float, x):
    """Cantor field summed over every branch chain, no pruning (testing only)."""
    if spec.variant != CANTOR:
        raise ValueError("brute force applies to the Cantor variant")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    N, tau = spec.local_time(t)
    if N is POST_T:
        return np.zeros(len(x))
    k = spec.params.k
    pts = [x]
    for _ in range(N - 1):
        pts = [k * (u - g) for u in pts for g in spec._gens]
    total = np.zeros(len(x))
    for u in pts:
        total += spec._base_raw(tau, u)[0]
    return spec.amp(N) * total


# module-level spellings of the main operations


def eval_z(spec, t, x):
    return spec.eval_z(t, x)


def eval_grad_z(spec, t, x):
    return spec.eval_grad_z(t, x)


def eval_f(spec, t, x):
    return spec.eval_f(t, x)


def eval_g(spec, t, x):
    return spec.eval_g(t, x)


def eval_Z_lifted(spec, t, x):
    return spec.eval_Z_lifted(t, x)


def support_box(spec, N):
    return spec.support_box(N)

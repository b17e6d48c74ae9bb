"""Divergence-free vector lift of the axisymmetric field.

``z = (Z, Z, z3)`` with ``z3(t, x) = -int_{-inf}^{x3} (d1 Z + d2 Z)(t, x1, x2, xi) dxi``
and the same construction for the forcing. Since ``d1 Z = (x1/rho) Z_rho``,
the axial integral only involves ``Z_rho`` at fixed ``rho``:
``z3 = -((x1 + x2)/rho) int Z_rho dxi``. The zero axial mean of the seed
makes ``z3`` vanish above the support as well as below it.

The single-term variant keeps only ``d1 Z``; it is not divergence free
and exists for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels_py import AXIS_EPS, LOBE_CENTER, LOBE_SCALE
from .field import AXISYM, POST_T, FieldSpec
from .params import rho_partial
from .quadrature import QuadratureError, breakpoint_rule, product_rule, refine_until, tanh_sinh

MODES = ("full", "single")


@dataclass(frozen=True)
class LiftedField:
    """Vector field ``(Z, Z, z3)`` over an axisymmetric :class:`FieldSpec`.

    ``tol`` is the absolute tolerance of the axial quadrature.
    """

    spec: FieldSpec
    mode: str = "full"
    tol: float = 1e-10

    def __post_init__(self):
        if self.spec.variant != AXISYM:
            raise ValueError("the lift needs the axisymmetric variant")
        if not self.spec.profile.zero_mean:
            raise ValueError("the lift needs a zero-axial-mean profile")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")

    # -------------------------------------------------------------- helpers

    def axial_breaks(self, N: int):
        """Edges of the level-N axial support pieces, bottom to top."""
        s = self.spec.scale(N)
        M = self.spec.profile.M
        rs = math.sqrt(self.spec.params.sigma)
        half = 1.0 / LOBE_SCALE
        vals = {-1.0, 1.0, -rs, rs}
        for a in (LOBE_CENTER - half, LOBE_CENTER + half):
            vals |= {a, a * rs}
        return np.array(sorted(s * M * v for v in vals))

    def _coef(self, x):
        rho = np.hypot(x[:, 0], x[:, 1])
        safe = np.where(rho > AXIS_EPS, rho, 1.0)
        num = x[:, 0] + x[:, 1] if self.mode == "full" else x[:, 0]
        return rho, np.where(rho > AXIS_EPS, -num / safe, 0.0)

    def axial_integrals(self, t: float, rho, upper, names=("dr",)):
        """``int_{bottom}^{upper} c(t, rho, xi) dxi`` for each component name.

        ``names`` index :meth:`FieldSpec.components_at_level`. Returns a dict
        of arrays; raises :class:`QuadratureError` if the tolerance is missed.
        """
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        N, tau = self.spec.local_time(t)
        if N is POST_T:
            return {n: np.zeros(len(rho)) for n in names}
        br = self.axial_breaks(N)
        hi = np.clip(upper, br[0], br[-1])

        def evaluate(step):
            x, w = tanh_sinh(step)
            acc = np.zeros((len(names), len(rho)))
            for a, b in zip(br[:-1], br[1:]):
                top = np.clip(hi, a, b)
                half = 0.5 * (top - a)
                live = half > 0
                if not live.any():
                    continue
                nodes = a + half[live, None] * (x[None, :] + 1.0)
                pts = np.column_stack([np.repeat(rho[live], len(x)), nodes.ravel()])
                comp = self.spec.components_at_level(N, tau, pts)
                for i, n in enumerate(names):
                    vals = comp[n].reshape(-1, len(x))
                    acc[i, live] += half[live] * (vals @ w)
            return acc

        try:
            vals, _ = refine_until(lambda st: evaluate(st).ravel(), self.tol, step=0.25,
                                   min_step=1 / 256)
        except QuadratureError as err:
            raise QuadratureError(f"axial quadrature: {err}", estimate=err.estimate) from err
        vals = vals.reshape(len(names), len(rho))
        return {n: vals[i] for i, n in enumerate(names)}

    # -------------------------------------------------------------- evaluation

    def _points(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 3:
            raise ValueError("the lift takes Cartesian points")
        return x.reshape(-1, 3), x.shape[:-1]

    def _lifted(self, t, x, name):
        if t < 0:
            raise ValueError("t must be non-negative")
        pts, shape = self._points(x)
        rho, coef = self._coef(pts)
        I = self.axial_integrals(t, rho, pts[:, 2], (name,))[name]
        return (coef * I).reshape(shape)

    def eval_z3(self, t: float, x):
        return self._lifted(t, x, "dr")

    def eval_f3(self, t: float, x):
        """Third component of the lifted total forcing."""
        return self._lifted(t, x, "df_r")

    def eval_dz3_dt(self, t: float, x):
        return self._lifted(t, x, "dtr")

    def eval_z(self, t: float, x):
        """The full vector ``(Z, Z, z3)`` shaped ``(..., 3)``."""
        Z = self.spec.eval_Z_lifted(t, x)
        return np.stack([Z, Z, self.eval_z3(t, x)], axis=-1)

    def eval_f(self, t: float, x):
        F = self.spec.eval_f(t, x, total=True)
        return np.stack([F, F, self.eval_f3(t, x)], axis=-1)

    def eval_dz3_derivatives(self, t: float, x):
        """``(d1 z3, d2 z3, d3 z3)`` from the two-term axial integrals.

        With ``I = int Z_rho`` and ``J = int Z_rho_rho``, the full mode gives
        ``d1 z3 = -[(x2^2 - x1 x2)/rho^3 I + x1 (x1 + x2)/rho^2 J]``. On the
        axis every term tends to 0 because Z_rho and Z_rho_rho vanish there.
        """
        pts, shape = self._points(x)
        x1, x2, x3 = pts[:, 0], pts[:, 1], pts[:, 2]
        rho, coef = self._coef(pts)
        ints = self.axial_integrals(t, rho, x3, ("dr", "drr"))
        I, J = ints["dr"], ints["drr"]
        on = rho > AXIS_EPS
        r = np.where(on, rho, 1.0)
        if self.mode == "full":
            d1 = -((x2 * x2 - x1 * x2) / r ** 3 * I + x1 * (x1 + x2) / r ** 2 * J)
            d2 = -((x1 * x1 - x1 * x2) / r ** 3 * I + x2 * (x1 + x2) / r ** 2 * J)
        else:
            d1 = -(x2 * x2 / r ** 3 * I + x1 * x1 / r ** 2 * J)
            d2 = -(-x1 * x2 / r ** 3 * I + x1 * x2 / r ** 2 * J)
        N, tau = self.spec.local_time(t)
        if N is POST_T:
            zr = np.zeros(len(pts))
        else:
            zr = self.spec.grad_at_level(N, tau, np.column_stack([rho, x3]))[:, 0]
        d3 = coef * zr
        out = np.stack([np.where(on, d1, 0.0), np.where(on, d2, 0.0), d3], axis=-1)
        return out.reshape(shape + (3,))

    def divergence(self, t: float, x, h: float = 1e-3, mode: str = "analytic"):
        """``d1 Z + d2 Z + d3 z3``.

        ``analytic`` uses ``d3 z3 = -(d1 Z + d2 Z)`` from the fundamental
        theorem of calculus (exactly 0 in full mode); ``fd`` uses centred
        differences of step ``h`` for validation.
        """
        if h <= 0:
            raise ValueError("h must be positive")
        pts, shape = self._points(x)
        if mode == "analytic":
            if self.mode == "full":
                return np.zeros(shape)
            g = self.spec.eval_grad_z(t, pts)
            return g[:, 1].reshape(shape)
        if mode != "fd":
            raise ValueError("mode must be 'analytic' or 'fd'")
        Z = self.spec.eval_Z_lifted
        e = np.eye(3) * h
        div = (Z(t, pts + e[0]) - Z(t, pts - e[0])) / (2 * h)
        div += (Z(t, pts + e[1]) - Z(t, pts - e[1])) / (2 * h)
        div += (self.eval_z3(t, pts + e[2]) - self.eval_z3(t, pts - e[2])) / (2 * h)
        return div.reshape(shape)


def lift(spec: FieldSpec, mode: str = "full", tol: float = 1e-10) -> LiftedField:
    return LiftedField(spec, mode, tol)


def dz3_level_energy(lifted: LiftedField, N: int, step: float = 0.1) -> float:
    """``int_{I_N} int |d1 z3|^2 dx dt`` in full mode.

    In cylindrical coordinates the angular integral is exact:
    ``int_0^{2 pi} |d1 z3|^2 dtheta = pi (I^2/rho^2 + J^2)``. The axial
    integrals are affine in the bridge, so the time integral reduces to
    bridge moments.
    """
    if lifted.mode != "full":
        raise ValueError("the energy identity is written for the full mode")
    from .verify import _axisym_breaks, _bridge_moments

    spec = lifted.spec
    sig = spec.params.sigma
    ub, vb = _axisym_breaks(spec, N)
    pts, w = product_rule([breakpoint_rule(ub, step), breakpoint_rule(vb, step)])
    s = spec.scale(N)
    rho = rho_partial(sig, N - 1) + s * pts[:, 0]
    y = s * pts[:, 1]
    (I0, J0), (I1, J1) = (_level_axial(lifted, N, tau, rho, y) for tau in (0.0, sig))
    mom = _bridge_moments(sig)
    dens = np.stack([I0 * I0 / rho ** 2 + J0 * J0,
                     I0 * I1 / rho ** 2 + J0 * J1,
                     I1 * I1 / rho ** 2 + J1 * J1], axis=-1) @ mom
    return float(sig ** (N - 1) * np.pi * np.sum(w * rho * s * s * dens))


def _level_axial(lifted, N, tau, rho, upper):
    spec = lifted.spec
    br = lifted.axial_breaks(N)
    x, w = tanh_sinh(1 / 32)
    I = np.zeros(len(rho))
    J = np.zeros(len(rho))
    for a, b in zip(br[:-1], br[1:]):
        top = np.clip(upper, a, b)
        half = 0.5 * (top - a)
        live = half > 0
        if not live.any():
            continue
        nodes = a + half[live, None] * (x[None, :] + 1.0)
        pts = np.column_stack([np.repeat(rho[live], len(x)), nodes.ravel()])
        comp = spec.components_at_level(N, tau, pts)
        I[live] += half[live] * (comp["dr"].reshape(-1, len(x)) @ w)
        J[live] += half[live] * (comp["drr"].reshape(-1, len(x)) @ w)
    return I, J

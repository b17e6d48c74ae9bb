"""Seed profile, time bridge and the manufactured forcing on the first interval.

The seed is built from the one-dimensional bump ``psi(s) = exp(1 - 1/(1-s^2))``:

* Cartesian: ``z0(x) = psi(|x|^2 / r^2)``, non-negative with ``z0(0) = 1``.
* radial plane: ``z0(rho, y) = psi((rho/a)^4) chi(y/M)``. The quartic makes
  the first and second rho-derivatives vanish on the axis. With the
  zero-mean flag, ``chi(u) = psi(u) - 4 psi(4(u - 0.6))`` integrates to zero.

On the first interval the field is ``(1 - eta(t/sigma)) start + eta end``
and the forcing is whatever the heat operator leaves behind.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from ._backend import kernels
from ._kernels_py import LOBE_CENTER, LOBE_SCALE

CARTESIAN = "cartesian"
RADIAL = "radial"
SPLIT_POLICIES = ("all-in-f", "time-smoothed-fraction")


class IntervalError(ValueError):
    """Time outside the first interval [0, sigma]."""


def psi(s):
    """The bump ``exp(1 - 1/(1 - s^2))`` on (-1, 1), zero elsewhere."""
    return kernels.bump(np.asarray(s, dtype=float))[0]


def chi(u, zero_mean=True):
    """Axial factor; has zero integral when ``zero_mean`` is set."""
    u = np.asarray(u, dtype=float)
    out = psi(u)
    if zero_mean:
        out = out - LOBE_SCALE * psi(LOBE_SCALE * (u - LOBE_CENTER))
    return out


@dataclass(frozen=True)
class BumpProfile:
    variant: str = CARTESIAN
    radius: float = 1.0
    M: float = 1.0
    zero_mean: bool = True

    def __post_init__(self):
        if self.variant not in (CARTESIAN, RADIAL):
            raise ValueError(f"unknown profile variant {self.variant!r}")
        if self.radius <= 0 or self.M <= 0:
            raise ValueError("support radius and M must be positive")


class BridgeFunction:
    """Smooth step ``eta(s) = B(s) / (B(s) + B(1-s))`` with ``B(s) = exp(-1/s)``."""

    def __call__(self, s):
        return kernels.bridge(np.asarray(s, dtype=float))[0]

    def derivative(self, s):
        return kernels.bridge(np.asarray(s, dtype=float))[1]

    def integral(self, s: float) -> float:
        """``int_0^s eta``; exact for s >= 1 by the symmetry eta(s)+eta(1-s)=1."""
        if s <= 0:
            return 0.0
        if s >= 1:
            return s - 0.5
        val, _ = quad(lambda u: float(self(u)), 0.0, s, epsabs=1e-15, epsrel=1e-13, limit=200)
        return val


BRIDGE = BridgeFunction()


def _split_point(point, n):
    pts = np.asarray(point, dtype=float)
    if pts.shape[-1] != n:
        raise ValueError(f"expected points with {n} coordinates, got shape {pts.shape}")
    return pts.reshape(-1, n), pts.shape[:-1]


def _check_time(t, sigma):
    if not 0.0 <= t <= sigma:
        raise IntervalError(f"t={t} is outside the first interval [0, {sigma}]")


def _base(profile, params, tau, point, centers=None, lam_end=None):
    if profile.variant == CARTESIAN:
        pts, shape = _split_point(point, 3)
        if centers is None:
            centers = np.zeros((1, 3))
        out = kernels.cartesian_base(
            tau, pts[:, 0], pts[:, 1], pts[:, 2],
            params.lam if lam_end is None else lam_end,
            params.sigma, profile.radius, centers,
        )
    else:
        pts, shape = _split_point(point, 2)
        out = kernels.radial_base(
            tau, pts[:, 0], pts[:, 1], params.lam, params.sigma,
            profile.radius, profile.M, profile.zero_mean, 0.0,
        )
    return out, shape


def eval_z0(profile: BumpProfile, point):
    """Seed value; Cartesian points are (x, y, z), radial points (rho, y)."""
    pts = np.asarray(point, dtype=float)
    if profile.variant == CARTESIAN:
        q = np.sum(pts * pts, axis=-1) / profile.radius ** 2
        return psi(q)
    r = pts[..., 0] / profile.radius
    return psi(r * r * r * r) * chi(pts[..., 1] / profile.M, profile.zero_mean)


def eval_z1(profile: BumpProfile, params, t: float, point):
    """Bridged field on [0, sigma]."""
    _check_time(t, params.sigma)
    out, shape = _base(profile, params, t, point)
    return out[0].reshape(shape)


def eval_z1_cantor_block(profile: BumpProfile, spec, params, i: int, t: float, point):
    """Block ``i`` (1-based) of the Cantor base field.

    Runs from ``z0 / m`` at t=0 to ``(lam/m) z0(k (x - x_i))`` at t=sigma.
    """
    _check_time(t, params.sigma)
    if not 1 <= i <= spec.m:
        raise IndexError(f"block index {i} outside 1..{spec.m}")
    x = np.asarray(point, dtype=float)
    eta = float(BRIDGE(t / params.sigma))
    start = eval_z0(profile, x) / spec.m
    end = params.lam / spec.m * eval_z0(profile, spec.k * (x - spec.generator_points[i - 1]))
    return (1.0 - eta) * start + eta * end


def forcing_f1(profile: BumpProfile, params, t: float, point):
    """``dz1/dt - Laplacian z1`` from closed-form derivatives.

    In the radial chart the Laplacian is ``d_rr + d_yy + (1/rho) d_r``; on
    the axis the last term takes its limit ``d_rr``.
    """
    _check_time(t, params.sigma)
    out, shape = _base(profile, params, t, point)
    idx = 6 if profile.variant == CARTESIAN else 9
    return out[idx].reshape(shape)


def forcing_f1_fd(profile: BumpProfile, params, t: float, point, h: float = 1e-3):
    """Centred finite-difference version of :func:`forcing_f1`.

    Needs ``h <= t <= sigma - h``; radial points need ``rho > h``.
    """
    if not h <= t <= params.sigma - h:
        raise IntervalError("finite-difference stencil leaves the first interval")
    pts = np.asarray(point, dtype=float)
    z = lambda tt, pp: eval_z1(profile, params, tt, pp)
    dt = (z(t + h, pts) - z(t - h, pts)) / (2 * h)
    c = z(t, pts)
    lap = np.zeros_like(c)
    n = pts.shape[-1]
    for d in range(n):
        e = np.zeros(n)
        e[d] = h
        lap += (z(t, pts + e) - 2 * c + z(t, pts - e)) / (h * h)
    if profile.variant == RADIAL:
        e = np.array([h, 0.0])
        lap += (z(t, pts + e) - z(t, pts - e)) / (2 * h) / pts[..., 0]
    return dt - lap


def split_forcing(f_total: Callable, policy: str = "all-in-f", fraction: float = 0.0):
    """Split a forcing on the first interval into ``(f, g)`` with ``f + dg/dt = f_total``.

    ``all-in-f`` keeps everything in ``f`` and ``g = 0``. The
    time-smoothed policy moves ``fraction`` of the forcing into
    ``g(t) = fraction * int_0^t f_total``, so ``g(0) = 0``.
    """
    if policy not in SPLIT_POLICIES:
        raise ValueError(f"unknown split policy {policy!r}; expected one of {SPLIT_POLICIES}")
    theta = 0.0 if policy == "all-in-f" else float(fraction)
    if not 0.0 <= theta <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")

    def f(t, x):
        return (1.0 - theta) * np.asarray(f_total(t, x))

    def g(t, x):
        if theta == 0.0 or t == 0.0:
            return np.zeros_like(np.asarray(f_total(0.0, x), dtype=float))
        nodes, weights = np.polynomial.legendre.leggauss(40)
        s = 0.5 * t * (nodes + 1.0)
        acc = sum(w * np.asarray(f_total(si, x)) for si, w in zip(s, weights))
        return theta * 0.5 * t * acc

    return f, g

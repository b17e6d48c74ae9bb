"""NumPy implementation of the pointwise kernels.

This module is the fallback used when the compiled ``selfsing._kernels``
extension is missing, and the reference the extension is tested against.
Both expose the same functions with the same argument order.

All kernels evaluate the *base* interval fields (first time interval) and
their derivatives in closed form. The recursion that carries them to deeper
levels lives in :mod:`selfsing.field`.
"""

import numpy as np
from scipy.special import expit

# psi(s) = exp(1 - 1/(1 - s^2)) is flushed to zero once 1 - s^2 < TAIL, i.e.
# below ~1e-60; this keeps squared/multiplied tails out of subnormal range.
TAIL = 1.0 / 138.0
AXIS_EPS = 1e-8
BRIDGE_FLOOR = 1e-60

# offset of the negative lobe that gives the axial factor zero mean
LOBE_CENTER = 0.6
LOBE_SCALE = 4.0

CART_COMPONENTS = ("z", "gx", "gy", "gz", "lap", "dt", "f")
RADIAL_COMPONENTS = (
    "z", "dr", "dy", "drr", "dyy", "drrr", "dryy", "dt", "dtr", "f", "df_r",
)


def bump(s):
    """psi and its first three derivatives at ``s``."""
    s = np.asarray(s, dtype=float)
    w = 1.0 - s * s
    inside = w > TAIL
    ws = np.where(inside, w, 1.0)
    iw = 1.0 / ws
    v = np.where(inside, np.exp(1.0 - iw), 0.0)
    p1 = -2.0 * s * iw * iw
    p2 = -2.0 * iw * iw - 8.0 * s * s * iw ** 3
    p3 = -24.0 * s * iw ** 3 - 48.0 * s ** 3 * iw ** 4
    d1 = v * p1
    d2 = v * (p2 + p1 * p1)
    d3 = v * (p3 + 3.0 * p1 * p2 + p1 ** 3)
    return v, d1, d2, d3


def bridge(s):
    """Smooth step eta(s) and eta'(s); flat to all orders at s=0 and s=1."""
    s = np.asarray(s, dtype=float)
    inner = (s > 0.0) & (s < 1.0)
    sc = np.where(inner, s, 0.5)
    arg = 1.0 / (1.0 - sc) - 1.0 / sc
    eta = np.where(inner, expit(arg), np.where(s >= 1.0, 1.0, 0.0))
    slope = np.where(
        inner, eta * (1.0 - eta) * (1.0 / (sc * sc) + 1.0 / ((1.0 - sc) ** 2)), 0.0
    )
    eta = np.where(eta < BRIDGE_FLOOR, 0.0, eta)
    slope = np.where(slope < BRIDGE_FLOOR, 0.0, slope)
    return eta, slope


def _radial_bump(q, inv_r2):
    # h(q) = psi(q / r^2) for q = |x|^2, with h' and h''
    v, d1, d2, _ = bump(q * inv_r2)
    return v, d1 * inv_r2, d2 * inv_r2 * inv_r2


def cartesian_base(tau, x, y, z, lam_end, sigma, radius, centers):
    """Base field on the first interval for the 3D variants.

    Start state ``z0(x) = psi(|x|^2/r^2)``; end state
    ``lam_end * sum_c z0((x - c)/sqrt(sigma))``. Returns an array shaped
    ``(7, n)`` ordered as :data:`CART_COMPONENTS`.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    inv_r2 = 1.0 / (radius * radius)
    eta, deta = bridge(tau / sigma)

    q = x * x + y * y + z * z
    h, h1, h2 = _radial_bump(q, inv_r2)
    start = np.stack([h, 2 * x * h1, 2 * y * h1, 2 * z * h1, 6 * h1 + 4 * q * h2])

    end = np.zeros_like(start)
    rs = np.sqrt(sigma)
    for cx, cy, cz in np.asarray(centers, dtype=float).reshape(-1, 3):
        ux, uy, uz = (x - cx) / rs, (y - cy) / rs, (z - cz) / rs
        qu = ux * ux + uy * uy + uz * uz
        e, e1, e2 = _radial_bump(qu, inv_r2)
        end[0] += e
        end[1] += 2 * ux * e1 / rs
        end[2] += 2 * uy * e1 / rs
        end[3] += 2 * uz * e1 / rs
        end[4] += (6 * e1 + 4 * qu * e2) / sigma
    end *= lam_end

    out = np.empty((7, x.size))
    out[:5] = (1.0 - eta) * start + eta * end
    out[5] = deta / sigma * (end[0] - start[0])
    out[6] = out[5] - out[4]
    return out


def _axial(u, zero_mean):
    a = bump(u)
    if not zero_mean:
        return a
    lobe = bump(LOBE_SCALE * (u - LOBE_CENTER))
    return tuple(
        a[j] - LOBE_SCALE * LOBE_SCALE ** j * lobe[j] for j in range(4)
    )


def _plane_profile(r, y, radius, M, zero_mean):
    # separable z0(r, y) = A(r) C(y) with A = psi((r/a)^4), C = chi(y/M)
    ia4 = 1.0 / radius ** 4
    g = r ** 4 * ia4
    g1 = 4 * r ** 3 * ia4
    g2 = 12 * r * r * ia4
    g3 = 24 * r * ia4
    p0, p1, p2, p3 = bump(g)
    A0 = p0
    A1 = p1 * g1
    A2 = p2 * g1 * g1 + p1 * g2
    A3 = p3 * g1 ** 3 + 3 * p2 * g1 * g2 + p1 * g3
    c0, c1, c2, _ = _axial(y / M, zero_mean)
    C0, C1, C2 = c0, c1 / M, c2 / (M * M)
    # z, dr, dy, drr, dyy, drrr, dryy
    return np.stack([A0 * C0, A1 * C0, A0 * C1, A2 * C0, A0 * C2, A3 * C0, A1 * C2])


def radial_base(tau, r, y, lam, sigma, radius, M, zero_mean, offset):
    """Base field of the axisymmetric construction in the (rho, y) chart.

    ``offset`` is the distance to the symmetry axis in base units; the
    forcing includes ``-(1/(r + offset)) dz/dr`` with its on-axis limit.
    Returns an array shaped ``(11, n)`` ordered as :data:`RADIAL_COMPONENTS`.
    """
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    rs = np.sqrt(sigma)
    eta, deta = bridge(tau / sigma)

    start = _plane_profile(r, y, radius, M, zero_mean)
    end = _plane_profile((r - rs) / rs, y / rs, radius, M, zero_mean)
    # derivative orders (r, y) of each stacked component
    orders = np.array([0, 1, 1, 2, 2, 3, 3], dtype=float)
    end *= (lam * rs ** (-orders))[:, None]

    out = np.empty((11, r.size))
    out[:7] = (1.0 - eta) * start + eta * end
    out[7] = deta / sigma * (end[0] - start[0])
    out[8] = deta / sigma * (end[1] - start[1])

    z_r, z_rr, z_yy, z_rrr, z_ryy = out[1], out[3], out[4], out[5], out[6]
    d = r + offset
    off_axis = d > AXIS_EPS
    dd = np.where(off_axis, d, 1.0)
    curv = np.where(off_axis, z_r / dd, z_rr)
    dcurv = np.where(off_axis, z_rr / dd - z_r / (dd * dd), 0.5 * z_rrr)
    out[9] = out[7] - z_rr - z_yy - curv
    out[10] = out[8] - z_rrr - z_ryy - dcurv
    return out


def heat_step_radial(u, f, h, dt):
    """One explicit Euler step of u_t = u_rr + u_r/r + u_yy + f, in place.

    ``u`` is shaped ``(nr, ny)`` with row 0 on the axis (even reflection);
    the last row and first/last columns are held fixed (Dirichlet).
    """
    nr = u.shape[0]
    ih2 = 1.0 / (h * h)
    lap = np.zeros_like(u)
    c = u[1:-1, 1:-1]
    rad = (np.arange(1, nr - 1, dtype=float) * h)[:, None]
    lap[1:-1, 1:-1] = (
        (u[2:, 1:-1] - 2 * c + u[:-2, 1:-1]) * ih2
        + (u[2:, 1:-1] - u[:-2, 1:-1]) / (2 * h * rad)
        + (u[1:-1, 2:] - 2 * c + u[1:-1, :-2]) * ih2
    )
    a = u[0, 1:-1]
    lap[0, 1:-1] = 4 * (u[1, 1:-1] - a) * ih2 + (u[0, 2:] - 2 * a + u[0, :-2]) * ih2
    u[:-1, 1:-1] += dt * (lap[:-1, 1:-1] + f[:-1, 1:-1])

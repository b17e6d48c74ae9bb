# cython: language_level=3
"""Compiled pointwise kernels; mirrors selfsing._kernels_py exactly."""

import numpy as np
from libc.math cimport exp, sqrt

cdef double TAIL = 1.0 / 138.0
cdef double AXIS_EPS = 1e-8
cdef double BRIDGE_FLOOR = 1e-60
cdef double LOBE_CENTER = 0.6
cdef double LOBE_SCALE = 4.0

CART_COMPONENTS = ("z", "gx", "gy", "gz", "lap", "dt", "f")
RADIAL_COMPONENTS = (
    "z", "dr", "dy", "drr", "dyy", "drrr", "dryy", "dt", "dtr", "f", "df_r",
)


cdef inline void _bump(double s, double* out) noexcept nogil:
    cdef double w = 1.0 - s * s
    cdef double iw, v, p1, p2, p3
    if w <= TAIL:
        out[0] = 0.0
        out[1] = 0.0
        out[2] = 0.0
        out[3] = 0.0
        return
    iw = 1.0 / w
    v = exp(1.0 - iw)
    p1 = -2.0 * s * iw * iw
    p2 = -2.0 * iw * iw - 8.0 * s * s * iw * iw * iw
    p3 = -24.0 * s * iw * iw * iw - 48.0 * s * s * s * iw * iw * iw * iw
    out[0] = v
    out[1] = v * p1
    out[2] = v * (p2 + p1 * p1)
    out[3] = v * (p3 + 3.0 * p1 * p2 + p1 * p1 * p1)


cdef inline void _bridge(double s, double* eta, double* slope) noexcept nogil:
    cdef double arg, e, d
    if s <= 0.0:
        eta[0] = 0.0
        slope[0] = 0.0
        return
    if s >= 1.0:
        eta[0] = 1.0
        slope[0] = 0.0
        return
    arg = 1.0 / (1.0 - s) - 1.0 / s
    if arg >= 0:
        e = 1.0 / (1.0 + exp(-arg))
    else:
        e = exp(arg) / (1.0 + exp(arg))
    d = e * (1.0 - e) * (1.0 / (s * s) + 1.0 / ((1.0 - s) * (1.0 - s)))
    if e < BRIDGE_FLOOR:
        e = 0.0
    if d < BRIDGE_FLOOR:
        d = 0.0
    eta[0] = e
    slope[0] = d


def bump(s):
    cdef const double[::1] sv = np.ascontiguousarray(s, dtype=np.float64).ravel()
    cdef Py_ssize_t n = sv.shape[0], i
    out = np.empty((4, n))
    cdef double[:, ::1] ov = out
    cdef double buf[4]
    for i in range(n):
        _bump(sv[i], buf)
        ov[0, i] = buf[0]
        ov[1, i] = buf[1]
        ov[2, i] = buf[2]
        ov[3, i] = buf[3]
    shape = np.shape(s)
    return tuple(out[j].reshape(shape) for j in range(4))


def bridge(s):
    cdef const double[::1] sv = np.ascontiguousarray(s, dtype=np.float64).ravel()
    cdef Py_ssize_t n = sv.shape[0], i
    e = np.empty(n)
    cdef double[::1] ev_ = e
    d = np.empty(n)
    cdef double[::1] dv_ = d
    cdef double a, b
    for i in range(n):
        _bridge(sv[i], &a, &b)
        ev_[i] = a
        dv_[i] = b
    shape = np.shape(s)
    return e.reshape(shape), d.reshape(shape)


def cartesian_base(double tau, x, y, z, double lam_end, double sigma,
                   double radius, centers):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64).ravel()
    cdef const double[::1] zv = np.ascontiguousarray(z, dtype=np.float64).ravel()
    cdef const double[:, ::1] cv = np.ascontiguousarray(np.reshape(centers, (-1, 3)), dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], nc = cv.shape[0], i, j
    out = np.empty((7, n))
    cdef double[:, ::1] ov = out
    cdef double inv_r2 = 1.0 / (radius * radius)
    cdef double rs = sqrt(sigma)
    cdef double eta, deta, q, h1, h2, ux, uy, uz, qu
    cdef double s0, s1, s2, s3, s4, e0, e1, e2, e3, e4
    cdef double buf[4]
    _bridge(tau / sigma, &eta, &deta)
    with nogil:
        for i in range(n):
            q = xv[i] * xv[i] + yv[i] * yv[i] + zv[i] * zv[i]
            _bump(q * inv_r2, buf)
            h1 = buf[1] * inv_r2
            h2 = buf[2] * inv_r2 * inv_r2
            s0 = buf[0]
            s1 = 2 * xv[i] * h1
            s2 = 2 * yv[i] * h1
            s3 = 2 * zv[i] * h1
            s4 = 6 * h1 + 4 * q * h2
            e0 = 0.0
            e1 = 0.0
            e2 = 0.0
            e3 = 0.0
            e4 = 0.0
            for j in range(nc):
                ux = (xv[i] - cv[j, 0]) / rs
                uy = (yv[i] - cv[j, 1]) / rs
                uz = (zv[i] - cv[j, 2]) / rs
                qu = ux * ux + uy * uy + uz * uz
                if qu * inv_r2 >= 1.0:
                    continue
                _bump(qu * inv_r2, buf)
                h1 = buf[1] * inv_r2
                h2 = buf[2] * inv_r2 * inv_r2
                e0 += buf[0]
                e1 += 2 * ux * h1 / rs
                e2 += 2 * uy * h1 / rs
                e3 += 2 * uz * h1 / rs
                e4 += (6 * h1 + 4 * qu * h2) / sigma
            e0 *= lam_end
            e1 *= lam_end
            e2 *= lam_end
            e3 *= lam_end
            e4 *= lam_end
            ov[0, i] = (1 - eta) * s0 + eta * e0
            ov[1, i] = (1 - eta) * s1 + eta * e1
            ov[2, i] = (1 - eta) * s2 + eta * e2
            ov[3, i] = (1 - eta) * s3 + eta * e3
            ov[4, i] = (1 - eta) * s4 + eta * e4
            ov[5, i] = deta / sigma * (e0 - s0)
            ov[6, i] = ov[5, i] - ov[4, i]
    return out


cdef inline void _plane(double r, double y, double radius, double M,
                        bint zero_mean, double* out) noexcept nogil:
    # z, dr, dy, drr, dyy, drrr, dryy of A(r) C(y)
    cdef double ia4 = 1.0 / (radius * radius * radius * radius)
    cdef double g = r * r * r * r * ia4
    cdef double g1 = 4 * r * r * r * ia4
    cdef double g2 = 12 * r * r * ia4
    cdef double g3 = 24 * r * ia4
    cdef double p[4]
    cdef double c[4]
    cdef double lobe[4]
    cdef double A0, A1, A2, A3, C0, C1, C2, u
    _bump(g, p)
    A0 = p[0]
    A1 = p[1] * g1
    A2 = p[2] * g1 * g1 + p[1] * g2
    A3 = p[3] * g1 * g1 * g1 + 3 * p[2] * g1 * g2 + p[1] * g3
    u = y / M
    _bump(u, c)
    if zero_mean:
        _bump(LOBE_SCALE * (u - LOBE_CENTER), lobe)
        c[0] -= LOBE_SCALE * lobe[0]
        c[1] -= LOBE_SCALE * LOBE_SCALE * lobe[1]
        c[2] -= LOBE_SCALE * LOBE_SCALE * LOBE_SCALE * lobe[2]
    C0 = c[0]
    C1 = c[1] / M
    C2 = c[2] / (M * M)
    out[0] = A0 * C0
    out[1] = A1 * C0
    out[2] = A0 * C1
    out[3] = A2 * C0
    out[4] = A0 * C2
    out[5] = A3 * C0
    out[6] = A1 * C2


def radial_base(double tau, r, y, double lam, double sigma, double radius,
                double M, bint zero_mean, double offset):
    cdef const double[::1] rv = np.ascontiguousarray(r, dtype=np.float64).ravel()
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64).ravel()
    cdef Py_ssize_t n = rv.shape[0], i
    cdef int j
    out = np.empty((11, n))
    cdef double[:, ::1] ov = out
    cdef double rs = sqrt(sigma)
    cdef double eta, deta, d, curv, dcurv
    cdef double sv[7]
    cdef double ev[7]
    cdef double scale[7]
    cdef double zc[7]
    _bridge(tau / sigma, &eta, &deta)
    scale[0] = lam
    scale[1] = lam / rs
    scale[2] = lam / rs
    scale[3] = lam / sigma
    scale[4] = lam / sigma
    scale[5] = lam / (sigma * rs)
    scale[6] = lam / (sigma * rs)
    with nogil:
        for i in range(n):
            _plane(rv[i], yv[i], radius, M, zero_mean, sv)
            _plane((rv[i] - rs) / rs, yv[i] / rs, radius, M, zero_mean, ev)
            for j in range(7):
                ev[j] *= scale[j]
                zc[j] = (1 - eta) * sv[j] + eta * ev[j]
                ov[j, i] = zc[j]
            ov[7, i] = deta / sigma * (ev[0] - sv[0])
            ov[8, i] = deta / sigma * (ev[1] - sv[1])
            d = rv[i] + offset
            if d > AXIS_EPS:
                curv = zc[1] / d
                dcurv = zc[3] / d - zc[1] / (d * d)
            else:
                curv = zc[3]
                dcurv = 0.5 * zc[5]
            ov[9, i] = ov[7, i] - zc[3] - zc[4] - curv
            ov[10, i] = ov[8, i] - zc[5] - zc[6] - dcurv
    return out


def heat_step_radial(double[:, ::1] u, const double[:, ::1] f,
                     double h, double dt):
    cdef Py_ssize_t nr = u.shape[0], ny = u.shape[1], i, j
    cdef double ih2 = 1.0 / (h * h)
    cdef double[:, ::1] lap = np.zeros((nr, ny))
    cdef double c, rad
    with nogil:
        for j in range(1, ny - 1):
            c = u[0, j]
            lap[0, j] = 4 * (u[1, j] - c) * ih2 + (u[0, j + 1] - 2 * c + u[0, j - 1]) * ih2
        for i in range(1, nr - 1):
            rad = i * h
            for j in range(1, ny - 1):
                c = u[i, j]
                lap[i, j] = ((u[i + 1, j] - 2 * c + u[i - 1, j]) * ih2
                             + (u[i + 1, j] - u[i - 1, j]) / (2 * h * rad)
                             + (u[i, j + 1] - 2 * c + u[i, j - 1]) * ih2)
        for i in range(nr - 1):
            for j in range(1, ny - 1):
                u[i, j] += dt * (lap[i, j] + f[i, j])

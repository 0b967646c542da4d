# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the grid-heavy inner loops: Fisher-information
sums over probability grids, the closed-form Fisher curves, and the
per-outcome linear fit.  API mirrors _reference exactly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, sin

cnp.import_array()

DENOMINATOR_FLOOR = 1e-12
cdef double DEN_FLOOR = 1e-12

FLAG_DEGENERATE = 1
FLAG_DIVERGENT = 2


def classical_fi_terms(p_in, dp_in, double p_floor, double dp_tol):
    """Sum of dp^2/p over outcomes with p >= p_floor, per grid column.

    Returns (fi, flags) with flags marking columns where sub-floor terms
    were skipped; callers decide how to treat those.
    """
    cdef const double[:, ::1] p = np.ascontiguousarray(p_in, dtype=np.float64)
    cdef const double[:, ::1] dp = np.ascontiguousarray(dp_in, dtype=np.float64)
    cdef Py_ssize_t m = p.shape[0]
    cdef Py_ssize_t k = p.shape[1]
    if dp.shape[0] != m or dp.shape[1] != k:
        raise ValueError("p and dp shapes differ")
    fi = np.zeros(k, dtype=np.float64)
    flags = np.zeros(k, dtype=np.uint8)
    cdef double[::1] fi_v = fi
    cdef unsigned char[::1] fl_v = flags
    cdef Py_ssize_t i, j
    cdef double pv, dv, acc
    cdef unsigned char fl
    for j in range(k):
        acc = 0.0
        fl = 0
        for i in range(m):
            pv = p[i, j]
            dv = dp[i, j]
            if pv < p_floor:
                if fabs(dv) >= dp_tol:
                    fl |= 2
                else:
                    fl |= 1
            else:
                acc += dv * dv / pv
        fi_v[j] = acc
        fl_v[j] = fl
    return fi, flags


def noisy_fi(double indist, double noise, phis_in):
    """Five-term closed-form Fisher information of the port-resolved
    measurement on the white-noise single-pair probe.

    NaN marks grid points where a needed denominator falls below
    DENOMINATOR_FLOOR (removable only at noise=0).
    """
    cdef const double[::1] phis = np.ascontiguousarray(phis_in, dtype=np.float64)
    cdef Py_ssize_t k = phis.shape[0]
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef double i = indist
    cdef double eps = noise
    cdef double one = (1.0 - i) * (1.0 - eps)
    cdef double ione = i * (1.0 - eps)
    cdef double sq = (1.0 - eps) * (1.0 - eps)
    cdef double c1 = 4.0 * (1.0 - i) * (1.0 - i) * sq
    cdef double c3 = 4.0 * i * i * sq
    cdef double c4 = (1.0 - i) * (1.0 - i) * sq
    cdef double c5 = 2.0 * i * i * sq
    cdef Py_ssize_t j
    cdef double phi, s, c, sh, ch, acc, den, s2c2
    cdef bint bad
    for j in range(k):
        phi = phis[j]
        s = sin(phi)
        c = cos(phi)
        sh = sin(phi / 2.0)
        ch = cos(phi / 2.0)
        s2c2 = s * s * c * c
        acc = 0.0
        bad = False
        if c1 != 0.0:
            den = eps / 10.0 + one * ch * ch * ch * ch
            if den < DEN_FLOOR:
                bad = True
            else:
                acc += c1 * ch * ch * ch * ch * ch * ch * sh * sh / den
            den = eps / 10.0 + one * sh * sh * sh * sh
            if den < DEN_FLOOR:
                bad = True
            else:
                acc += c1 * ch * ch * sh * sh * sh * sh * sh * sh / den
        if c3 != 0.0:
            den = eps / 10.0 + ione * c * c
            if den < DEN_FLOOR:
                bad = True
            else:
                acc += c3 * s2c2 / den
        if c4 != 0.0:
            den = eps / 5.0 + one * s * s / 2.0
            if den < DEN_FLOOR:
                bad = True
            else:
                acc += c4 * s2c2 / den
        if c5 != 0.0:
            den = eps / 10.0 + ione * s * s / 2.0
            if den < DEN_FLOOR:
                bad = True
            else:
                acc += c5 * s2c2 / den
        out_v[j] = float("nan") if bad else acc
    return out


def coarse_fi(double indist, phis_in):
    """Closed-form Fisher information of the path-unresolved measurement,
    4(1+i)(1+cos2phi) / (3-i+(1+i)cos2phi); NaN at sub-floor denominators."""
    cdef const double[::1] phis = np.ascontiguousarray(phis_in, dtype=np.float64)
    cdef Py_ssize_t k = phis.shape[0]
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef double i = indist
    cdef Py_ssize_t j
    cdef double c2, den
    for j in range(k):
        c2 = cos(2.0 * phis[j])
        den = 3.0 - i + (1.0 + i) * c2
        if fabs(den) < DEN_FLOOR:
            out_v[j] = float("nan")
        else:
            out_v[j] = 4.0 * (1.0 + i) * (1.0 + c2) / den
    return out


def mprime_fi(double noise, phis_in):
    """Closed-form Fisher information of the superposition measurement on
    the fully indistinguishable noisy probe,
    20(1-eps)^2 (5-4eps) sin^2(2phi) / ((5-4eps)^2 - 25(1-eps)^2 cos^2(2phi));
    NaN at sub-floor denominators (reachable only at noise=0)."""
    cdef const double[::1] phis = np.ascontiguousarray(phis_in, dtype=np.float64)
    cdef Py_ssize_t k = phis.shape[0]
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef double eps = noise
    cdef double a = 5.0 - 4.0 * eps
    cdef double pref = 20.0 * (1.0 - eps) * (1.0 - eps) * a
    cdef double csq = 25.0 * (1.0 - eps) * (1.0 - eps)
    cdef Py_ssize_t j
    cdef double s, c, den
    for j in range(k):
        s = sin(2.0 * phis[j])
        c = cos(2.0 * phis[j])
        den = a * a - csq * c * c
        if fabs(den) < DEN_FLOOR:
            out_v[j] = float("nan")
        else:
            out_v[j] = pref * s * s / den
    return out


def fit_linear(x_in, y_in):
    """Least-squares fit y ~ a*x + b.  Returns (a, b, rss); a is NaN when
    the design is degenerate (x essentially constant)."""
    cdef const double[::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(y_in, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    if y.shape[0] != n:
        raise ValueError("x and y lengths differ")
    cdef Py_ssize_t j
    cdef double mx = 0.0, my = 0.0
    for j in range(n):
        mx += x[j]
        my += y[j]
    mx /= n
    my /= n
    cdef double sxx = 0.0, sxy = 0.0, dx
    for j in range(n):
        dx = x[j] - mx
        sxx += dx * dx
        sxy += dx * (y[j] - my)
    if sxx < 1e-20:
        nan = float("nan")
        return nan, nan, nan
    cdef double a = sxy / sxx
    cdef double b = my - a * mx
    cdef double rss = 0.0, r
    for j in range(n):
        r = y[j] - a * x[j] - b
        rss += r * r
    return a, b, rss

"""Pure-numpy kernel implementations.

Mirrors the compiled extension's API one to one; selected at import time
by the package __init__ when the extension is unavailable or when
TWINFOCK_KERNELS=python is set.
"""

import numpy as np

DENOMINATOR_FLOOR = 1e-12

FLAG_DEGENERATE = 1  # some outcome has p < p_floor with |dp| < dp_tol
FLAG_DIVERGENT = 2  # some outcome has p < p_floor with |dp| >= dp_tol


def classical_fi_terms(p, dp, p_floor, dp_tol):
    """Sum of dp^2/p over outcomes with p >= p_floor, per grid column.

    Returns (fi, flags) with flags marking columns where sub-floor terms
    were skipped; callers decide how to treat those.
    """
    p = np.ascontiguousarray(p, dtype=np.float64)
    dp = np.ascontiguousarray(dp, dtype=np.float64)
    ok = p >= p_floor
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(ok, dp * dp / np.where(ok, p, 1.0), 0.0)
    fi = terms.sum(axis=0)
    sub = ~ok
    divergent = sub & (np.abs(dp) >= dp_tol)
    degenerate = sub & ~divergent
    flags = (
        degenerate.any(axis=0).astype(np.uint8) * FLAG_DEGENERATE
        + divergent.any(axis=0).astype(np.uint8) * FLAG_DIVERGENT
    )
    return fi, flags


def noisy_fi(indist, noise, phis):
    """Five-term closed-form Fisher information of the port-resolved
    measurement on the white-noise single-pair probe.

    NaN marks grid points where a needed denominator falls below
    DENOMINATOR_FLOOR (removable only at noise=0).
    """
    i = float(indist)
    eps = float(noise)
    phis = np.asarray(phis, dtype=np.float64)
    s, c = np.sin(phis), np.cos(phis)
    sh, ch = np.sin(phis / 2.0), np.cos(phis / 2.0)
    one = (1.0 - i) * (1.0 - eps)
    ione = i * (1.0 - eps)
    sq = (1.0 - eps) ** 2
    out = np.zeros_like(phis)
    bad = np.zeros(phis.shape, dtype=bool)

    def add(coef, numer_trig, denom):
        nonlocal out, bad
        if coef == 0.0:
            return
        small = denom < DENOMINATOR_FLOOR
        bad |= small
        out += np.where(small, 0.0, coef * numer_trig / np.where(small, 1.0, denom))

    add(4.0 * (1.0 - i) ** 2 * sq, ch**6 * sh**2, eps / 10.0 + one * ch**4)
    add(4.0 * (1.0 - i) ** 2 * sq, ch**2 * sh**6, eps / 10.0 + one * sh**4)
    add(4.0 * i**2 * sq, c**2 * s**2, eps / 10.0 + ione * c**2)
    add((1.0 - i) ** 2 * sq, c**2 * s**2, eps / 5.0 + one * s**2 / 2.0)
    add(2.0 * i**2 * sq, c**2 * s**2, eps / 10.0 + ione * s**2 / 2.0)
    out[bad] = np.nan
    return out


def coarse_fi(indist, phis):
    """Closed-form Fisher information of the path-unresolved measurement,
    4(1+i)(1+cos2phi) / (3-i+(1+i)cos2phi); NaN at sub-floor denominators."""
    i = float(indist)
    phis = np.asarray(phis, dtype=np.float64)
    c2 = np.cos(2.0 * phis)
    den = 3.0 - i + (1.0 + i) * c2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 4.0 * (1.0 + i) * (1.0 + c2) / den
    out[np.abs(den) < DENOMINATOR_FLOOR] = np.nan
    return out


def mprime_fi(noise, phis):
    """Closed-form Fisher information of the superposition measurement on
    the fully indistinguishable noisy probe,
    20(1-eps)^2 (5-4eps) sin^2(2phi) / ((5-4eps)^2 - 25(1-eps)^2 cos^2(2phi));
    NaN at sub-floor denominators (reachable only at noise=0)."""
    eps = float(noise)
    phis = np.asarray(phis, dtype=np.float64)
    s2 = np.sin(2.0 * phis) ** 2
    c2 = np.cos(2.0 * phis) ** 2
    a = 5.0 - 4.0 * eps
    den = a * a - 25.0 * (1.0 - eps) ** 2 * c2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 20.0 * (1.0 - eps) ** 2 * a * s2 / den
    out[np.abs(den) < DENOMINATOR_FLOOR] = np.nan
    return out


def fit_linear(x, y):
    """Least-squares fit y ~ a*x + b.  Returns (a, b, rss); a is NaN when
    the design is degenerate (x essentially constant)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ValueError("x and y lengths differ")
    mx = x.mean()
    my = y.mean()
    dx = x - mx
    sxx = float(dx @ dx)
    if sxx < 1e-20:
        return float("nan"), float("nan"), float("nan")
    a = float(dx @ (y - my)) / sxx
    b = my - a * mx
    r = y - a * x - b
    return a, float(b), float(r @ r)

#!/usr/bin/env python3
"""Timing comparison of the compiled kernels against the numpy reference.

Also cross-checks that both backends return the same numbers on the
benchmark inputs, so a quick run doubles as a parity smoke test.

    python3 benchmarks/bench_kernels.py [--points N] [--repeats R]
"""

import argparse
import time

import numpy as np

from twinfock._kernels import _reference

try:
    from twinfock._kernels import _native
except ImportError:
    _native = None


def case_fns(mod, p, dp, phis, x, ys):
    return {
        "classical_fi_terms": lambda: mod.classical_fi_terms(p, dp, 1e-12, 1e-9),
        "noisy_fi": lambda: mod.noisy_fi(0.5, 0.06, phis),
        "coarse_fi": lambda: mod.coarse_fi(0.5, phis),
        "mprime_fi": lambda: mod.mprime_fi(0.06, phis),
        "fit_linear_batch": lambda: [mod.fit_linear(x, y) for y in ys],
    }


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def same(a, b) -> bool:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return bool(np.array_equal(np.isnan(a), np.isnan(b))) and bool(
        np.allclose(np.nan_to_num(a), np.nan_to_num(b), rtol=1e-12, atol=1e-13)
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200_000, help="phase-grid size")
    ap.add_argument("--fits", type=int, default=2000, help="fits per repeat")
    ap.add_argument("--repeats", type=int, default=7)
    args = ap.parse_args()

    if _native is None:
        print("compiled extension not built; nothing to compare")
        print("(install with `pip install -e . --no-build-isolation` to build it)")
        return

    rng = np.random.default_rng(7)
    phis = np.linspace(0.0, np.pi, args.points, endpoint=False)
    p = rng.uniform(1e-6, 1.0, size=(10, args.points))
    p /= p.sum(axis=0)
    dp = rng.normal(size=(10, args.points))
    x = np.linspace(0.0, 1.0, 32)
    ys = rng.normal(size=(args.fits, 32))

    native = case_fns(_native, p, dp, phis, x, ys)
    reference = case_fns(_reference, p, dp, phis, x, ys)

    print(f"{args.points} grid points, {args.fits} fits, best of {args.repeats}")
    print(f"{'kernel':<20} {'native':>10} {'python':>10} {'speedup':>9}  match")
    for name in native:
        got_n = native[name]()
        got_r = reference[name]()
        if name == "classical_fi_terms":
            ok = same(got_n[0], got_r[0]) and np.array_equal(got_n[1], got_r[1])
        elif name == "fit_linear_batch":
            ok = all(same(a, b) for a, b in zip(got_n, got_r))
        else:
            ok = same(got_n, got_r)
        t_n = best_of(native[name], args.repeats)
        t_r = best_of(reference[name], args.repeats)
        print(
            f"{name:<20} {t_n * 1e3:>8.2f}ms {t_r * 1e3:>8.2f}ms "
            f"{t_r / t_n:>8.1f}x  {'yes' if ok else 'NO'}"
        )


if __name__ == "__main__":
    main()

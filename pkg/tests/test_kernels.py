"""Parity between the compiled kernels and the pure-python reference."""

import math

import numpy as np
import pytest

from twinfock import _kernels
from twinfock._kernels import _reference

native = pytest.importorskip(
    "twinfock._kernels._native", reason="compiled kernels not built"
)


def both(name):
    return getattr(native, name), getattr(_reference, name)


def assert_same_with_nans(a, b, atol=1e-13):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    assert a.shape == b.shape
    assert np.array_equal(np.isnan(a), np.isnan(b))
    mask = ~np.isnan(a)
    assert np.allclose(a[mask], b[mask], atol=atol, rtol=1e-12)


def test_backend_reports_selection():
    assert _kernels.backend() in ("native", "python")
    assert _kernels.BACKEND == _kernels.backend()


def test_flag_constants_agree():
    assert native.FLAG_DEGENERATE == _reference.FLAG_DEGENERATE == 1
    assert native.FLAG_DIVERGENT == _reference.FLAG_DIVERGENT == 2
    assert native.DENOMINATOR_FLOOR == _reference.DENOMINATOR_FLOOR


def test_classical_fi_terms_parity():
    rng = np.random.default_rng(42)
    f_nat, f_ref = both("classical_fi_terms")
    for _ in range(20):
        m, k = rng.integers(2, 12), rng.integers(1, 40)
        p = rng.uniform(0.0, 1.0, (m, k))
        dp = rng.normal(0.0, 1.0, (m, k))
        # sprinkle degenerate and divergent cells
        p[rng.random((m, k)) < 0.15] = 0.0
        dp[rng.random((m, k)) < 0.3] = 0.0
        fi_n, fl_n = f_nat(p, dp, 1e-12, 1e-9)
        fi_r, fl_r = f_ref(p, dp, 1e-12, 1e-9)
        assert np.allclose(fi_n, fi_r, atol=1e-12)
        assert np.array_equal(fl_n, fl_r)


def test_classical_fi_terms_flags():
    f_nat, _ = both("classical_fi_terms")
    p = np.array([[0.0, 0.0, 0.5]])
    dp = np.array([[0.0, 0.5, 0.5]])
    fi, flags = f_nat(p, dp, 1e-12, 1e-9)
    assert flags.tolist() == [1, 2, 0]
    assert fi[2] == pytest.approx(0.5)


def test_closed_form_parity():
    phis = np.linspace(0.0, 2.0 * math.pi, 257)
    for i in (0.0, 0.3, 1.0):
        for eps in (0.0, 0.06, 0.4):
            f_nat, f_ref = both("noisy_fi")
            assert_same_with_nans(f_nat(i, eps, phis), f_ref(i, eps, phis))
        f_nat, f_ref = both("coarse_fi")
        assert_same_with_nans(f_nat(i, phis), f_ref(i, phis))
    for eps in (0.0, 0.06, 0.4):
        f_nat, f_ref = both("mprime_fi")
        assert_same_with_nans(f_nat(eps, phis), f_ref(eps, phis))


def test_fit_linear_parity_and_oracle():
    rng = np.random.default_rng(7)
    f_nat, f_ref = both("fit_linear")
    for _ in range(25):
        x = rng.normal(0.0, 1.0, rng.integers(3, 60))
        y = 1.7 * x - 0.3 + rng.normal(0.0, 0.05, x.size)
        a_n, b_n, r_n = f_nat(x, y)
        a_r, b_r, r_r = f_ref(x, y)
        assert a_n == pytest.approx(a_r, abs=1e-12)
        assert b_n == pytest.approx(b_r, abs=1e-12)
        assert r_n == pytest.approx(r_r, abs=1e-10)
        slope, intercept = np.polyfit(x, y, 1)
        assert a_n == pytest.approx(slope, abs=1e-9)
        assert b_n == pytest.approx(intercept, abs=1e-9)


def test_fit_linear_degenerate_design():
    for fn in both("fit_linear"):
        a, b, rss = fn(np.full(10, 2.0), np.linspace(0, 1, 10))
        assert math.isnan(a) and math.isnan(b) and math.isnan(rss)


def test_kernels_accept_readonly_arrays():
    # frozen result arrays circulate through the package; the kernels must
    # not require writable buffers
    phis = np.linspace(0.1, 3.0, 11)
    phis.flags.writeable = False
    p = np.random.default_rng(1).uniform(0.1, 1.0, (4, 11))
    dp = np.zeros_like(p)
    p.flags.writeable = False
    dp.flags.writeable = False
    for fn_pair, args in (
        (both("noisy_fi"), (0.5, 0.06, phis)),
        (both("coarse_fi"), (0.5, phis)),
        (both("mprime_fi"), (0.06, phis)),
        (both("classical_fi_terms"), (p, dp, 1e-12, 1e-9)),
        (both("fit_linear"), (phis, phis)),
    ):
        for fn in fn_pair:
            fn(*args)  # must not raise


def test_shape_mismatch_rejected():
    for fn in both("classical_fi_terms"):
        with pytest.raises(ValueError):
            fn(np.zeros((2, 3)), np.zeros((2, 4)), 1e-12, 1e-9)
    for fn in both("fit_linear"):
        with pytest.raises(ValueError):
            fn(np.zeros(3), np.zeros(4))


def test_backend_env_override(monkeypatch):
    import importlib
    import twinfock._kernels as pkg

    monkeypatch.setenv("TWINFOCK_KERNELS", "python")
    reloaded = importlib.reload(pkg)
    try:
        assert reloaded.backend() == "python"
        assert reloaded.noisy_fi is _reference.noisy_fi
    finally:
        monkeypatch.undo()
        importlib.reload(pkg)

"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy reference
implementation is the fallback.  Set TWINFOCK_KERNELS=python or
TWINFOCK_KERNELS=native to force a backend (forcing native raises if the
extension was not built).
"""

import os

_requested = os.environ.get("TWINFOCK_KERNELS", "auto").strip().lower()

if _requested in ("auto", ""):
    try:
        from twinfock._kernels import _native as _impl

        BACKEND = "native"
    except ImportError:
        from twinfock._kernels import _reference as _impl

        BACKEND = "python"
elif _requested in ("native", "cython"):
    from twinfock._kernels import _native as _impl

    BACKEND = "native"
elif _requested in ("python", "reference"):
    from twinfock._kernels import _reference as _impl

    BACKEND = "python"
else:
    raise ImportError(
        f"TWINFOCK_KERNELS={_requested!r} not understood; "
        "use 'auto', 'native' or 'python'"
    )

DENOMINATOR_FLOOR = _impl.DENOMINATOR_FLOOR
FLAG_DEGENERATE = _impl.FLAG_DEGENERATE
FLAG_DIVERGENT = _impl.FLAG_DIVERGENT

classical_fi_terms = _impl.classical_fi_terms
noisy_fi = _impl.noisy_fi
coarse_fi = _impl.coarse_fi
mprime_fi = _impl.mprime_fi
fit_linear = _impl.fit_linear


def backend() -> str:
    """Name of the kernel backend selected at import time."""
    return BACKEND

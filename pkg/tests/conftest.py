"""Shared fixtures and independent oracles.

The oracles here rebuild key quantities through routes the package does
not use (first-quantized tensor products, symbolic creation chains,
angular-momentum bookkeeping) so the tests are not circular.
"""

import math
from collections import defaultdict

import numpy as np
import pytest

from twinfock import build_basis


@pytest.fixture(scope="session")
def basis1():
    return build_basis(1)


@pytest.fixture(scope="session")
def basis2():
    return build_basis(2)


# ------------------------------------------------------------------ oracles

def apply_creation(state: dict, weights: dict) -> dict:
    """Apply sum_m w_m a_m^dagger to a dict occupation -> coefficient,
    with the bosonic sqrt(occ+1) factors."""
    out = defaultdict(complex)
    for occ, coeff in state.items():
        for mode, w in weights.items():
            if w == 0:
                continue
            new = list(occ)
            new[mode] += 1
            out[tuple(new)] += coeff * w * math.sqrt(new[mode])
    return dict(out)


def creation_chain_probe(n: int, indist: float) -> dict:
    """Probe amplitudes built by explicit creation-operator algebra.

    Port one carries n photons of the first label (mode 0); each of the
    n photons in port two is sqrt(i)|label 1> + sqrt(1-i)|label 2>
    (modes 1 and 3).  Returns a dict occupation -> amplitude, normalized.
    """
    state = {(0, 0, 0, 0): 1.0 + 0.0j}
    for _ in range(n):
        state = apply_creation(state, {0: 1.0})
    w = {1: math.sqrt(indist), 3: math.sqrt(1.0 - indist)}
    for _ in range(n):
        state = apply_creation(state, w)
    norm = math.sqrt(sum(abs(c) ** 2 for c in state.values()))
    return {occ: c / norm for occ, c in state.items() if abs(c) > 1e-15}


def symmetric_two_photon_lift(basis, t: np.ndarray) -> np.ndarray:
    """Sector matrix of a single-photon mode map, built first-quantized.

    Embeds each two-photon occupation state into C^4 (x) C^4 as a
    symmetrized product vector, applies t (x) t, and reads the result
    back.  Valid on the n=1 sector only; independent of the package's
    second-quantized operator construction.
    """
    if basis.n != 1:
        raise ValueError("lift oracle is for the two-photon sector")
    d = basis.dimension
    embed = np.zeros((16, d), dtype=np.complex128)
    for col, occ in enumerate(basis.states):
        modes = [m for m, c in enumerate(occ) for _ in range(c)]
        m1, m2 = modes
        vec = np.zeros((4, 4), dtype=np.complex128)
        if m1 == m2:
            vec[m1, m1] = 1.0
        else:
            vec[m1, m2] = vec[m2, m1] = 1.0 / math.sqrt(2.0)
        embed[:, col] = vec.reshape(16)
    big = np.kron(t, t)
    return embed.conj().T @ big @ embed


def schwinger_generator_spectrum(n: int) -> list:
    """Eigenvalue multiset of the two-path rotation generator on the
    2n-photon sector, from angular-momentum splitting alone: a path with
    m photons carries spin m/2, and the sector splits by photon number
    per path."""
    values = []
    for m in range(2 * n + 1):
        ja = [(-m / 2.0) + k for k in range(m + 1)]
        jb = [(-(2 * n - m) / 2.0) + k for k in range(2 * n - m + 1)]
        values.extend(a + b for a in ja for b in jb)
    return sorted(values)


def finite_difference(fn, x: float, h: float = 1e-6):
    """Central difference, fourth order."""
    return (
        -fn(x + 2 * h) + 8 * fn(x + h) - 8 * fn(x - h) + fn(x - 2 * h)
    ) / (12 * h)

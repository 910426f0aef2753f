"""Shared fixtures and oracle helpers for the test suite."""

import numpy as np
import pytest

from dcheun.core import DcheParams
from dcheun.recurrence import char_root
from dcheun.solutions import power_coeffs


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def draw_params(rng, b2_range=(-1.0, 3.0)) -> DcheParams:
    """Generic nondegenerate parameter draw, B1 in the right half plane."""
    return DcheParams(
        b1=rng.uniform(0.5, 2.0) + 1j * rng.uniform(-0.5, 0.5),
        b2=rng.uniform(*b2_range),
        b3=rng.uniform(-2.0, 2.0) + 1j * rng.uniform(-1.0, 1.0),
        omega=rng.uniform(0.5, 1.5) + 1j * rng.uniform(-0.5, 0.5),
        eta=rng.uniform(-1.0, 1.0) + 1j * rng.uniform(-1.0, 1.0),
    )


def tune_b3(pair_id: int, params: DcheParams) -> DcheParams:
    """Move B3 to the nearest characteristic root so the series is minimal."""

    def fac(b3):
        return power_coeffs(pair_id, params.with_b3(b3))

    root = char_root(fac, params.b3)
    return params.with_b3(root.x)


def fd_schrodinger_spectrum(v_func, u_max=12.0, n=2400, k=6):
    """Lowest k eigenvalues of -psi'' + V psi by dense finite differences.

    Independent oracle: second-order central differences with Dirichlet
    walls far in the exponentially forbidden region.
    """
    u = np.linspace(-u_max, u_max, n)
    h = u[1] - u[0]
    main = 2.0 / h**2 + np.array([v_func(x) for x in u])
    off = -np.ones(n - 1) / h**2
    vals = np.linalg.eigvalsh(
        np.diag(main) + np.diag(off, 1) + np.diag(off, -1)
    )
    return np.sort(vals)[:k]

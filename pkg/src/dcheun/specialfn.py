"""Complex special functions used by every solution family.

Provides the complex gamma function, the irregular confluent
hypergeometric function U(a, b, z) on its principal branch, generalized
Laguerre polynomials for complex parameters, and the Kummer
transformation that connects alternative forms of U.

U(a, b, z) is evaluated by one of three strategies:

1. exact polynomial path when ``a`` is zero or a negative integer,
   via U(-l, 1+alpha, y) = (-1)^l l! L_l^alpha(y);
2. for moderate ``|z|``, the two-term connection through the regular
   Kummer function M, with near-integer ``b`` handled by a symmetric
   perturbation average;
3. for large ``|z|``, the asymptotic descending series truncated at its
   smallest term.

A cancellation monitor falls back to arbitrary precision (mpmath) when
the double-precision route would lose too many digits.
"""

from __future__ import annotations

import cmath
from functools import lru_cache

import mpmath
import scipy.special as _sp

from .errors import BranchError, ConvergenceError, DomainError, PoleError

_EPS = 2.220446049250313e-16
_ASYMPTOTIC_CUTOFF = 30.0
_B_PERTURB = 1e-7
_FALLBACK_TOL = 1e-11


def _as_complex(x) -> complex:
    z = complex(x)
    if not (cmath.isfinite(z)):
        raise DomainError(f"non-finite argument {x!r}")
    return z


def _is_nonpositive_integer(z: complex, tol: float = 1e-12) -> bool:
    return abs(z.imag) <= tol and z.real <= 0.5 and abs(z.real - round(z.real)) <= tol


def gamma(z) -> complex:
    """Complex gamma function, >= 12 significant digits for |z| <= 50."""
    z = _as_complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"gamma pole at z = {z}")
    return complex(_sp.gamma(z))


def rgamma(z) -> complex:
    """Reciprocal gamma 1/gamma(z); entire, zero at the poles of gamma."""
    return complex(_sp.rgamma(_as_complex(z)))


def laguerre(l: int, alpha, y) -> complex:
    """Generalized Laguerre polynomial L_l^alpha(y), complex alpha and y.

    Uses the standard ascending three-term recurrence, exact for the
    polynomial degree l >= 0.
    """
    if l < 0 or int(l) != l:
        raise DomainError(f"polynomial degree must be a nonnegative integer, got {l}")
    alpha = _as_complex(alpha)
    y = _as_complex(y)
    if l == 0:
        return 1.0 + 0.0j
    prev, cur = 1.0 + 0.0j, 1.0 + alpha - y
    for n in range(1, l):
        prev, cur = cur, ((2 * n + 1 + alpha - y) * cur - (n + alpha) * prev) / (n + 1)
    return cur


def kummer_transform(a, b, y):
    """Parameter map of the Kummer relation U(a,b,y) = y^(1-b) U(1+a-b, 2-b, y).

    Returns ``(a', b', prefactor_exponent)`` = (1+a-b, 2-b, 1-b).  Applying
    the map twice composes to the identity with total exponent 0.
    """
    a = _as_complex(a)
    b = _as_complex(b)
    _as_complex(y)
    return 1 + a - b, 2 - b, 1 - b


def _kummer_m(a: complex, b: complex, z: complex, max_terms: int = 700):
    """Regular Kummer series M(a,b,z); returns (sum, largest |term|)."""
    s = 1.0 + 0.0j
    term = 1.0 + 0.0j
    maxabs = 1.0
    for k in range(max_terms):
        term *= (a + k) * z / ((b + k) * (k + 1))
        s += term
        t = abs(term)
        if t > maxabs:
            maxabs = t
        if t <= _EPS * abs(s) and k > 3:
            return s, maxabs
    raise ConvergenceError(f"Kummer series did not converge for M({a}, {b}, {z})")


def _u_asymptotic(a: complex, b: complex, z: complex):
    """Descending series z^(-a) * 2F0(a, a-b+1; -1/z), optimal truncation.

    Returns (value, relative error estimate).
    """
    s = 1.0 + 0.0j
    term = 1.0 + 0.0j
    best = abs(term)
    for k in range(120):
        new = term * (a + k) * (a - b + 1 + k) / (-(k + 1) * z)
        if abs(new) >= abs(term) and k > 1:
            break  # divergent tail reached; stop at the smallest term
        term = new
        s += term
        best = abs(term)
        if best <= _EPS * abs(s):
            break
    pref = cmath.exp(-a * cmath.log(z))
    return pref * s, best / max(abs(s), 1e-300)


def _u_connection(a: complex, b: complex, z: complex):
    """Two-term M-series connection; returns (value, relative error estimate)."""
    m1, p1 = _kummer_m(a, b, z)
    m2, p2 = _kummer_m(a - b + 1, 2 - b, z)
    c1 = gamma(1 - b) * rgamma(a - b + 1)
    c2 = gamma(b - 1) * rgamma(a) * cmath.exp((1 - b) * cmath.log(z))
    val = c1 * m1 + c2 * m2
    scale = max(abs(c1) * p1, abs(c2) * p2, 1e-300)
    return val, _EPS * scale / max(abs(val), 1e-300)


def _u_mpmath(a: complex, b: complex, z: complex) -> complex:
    with mpmath.workdps(30):
        return complex(mpmath.hyperu(mpmath.mpc(a), mpmath.mpc(b), mpmath.mpc(z)))


@lru_cache(maxsize=200_000)
def _hyp_u_cached(a: complex, b: complex, z: complex) -> complex:
    # Polynomial degeneration: exact for a in {0, -1, -2, ...}.
    if _is_nonpositive_integer(a):
        l = int(round(-a.real))
        sign = -1.0 if l % 2 else 1.0
        fact = 1.0
        for k in range(2, l + 1):
            fact *= k
        return sign * fact * laguerre(l, b - 1, z)

    if abs(z) >= _ASYMPTOTIC_CUTOFF:
        val, err = _u_asymptotic(a, b, z)
        if err < _FALLBACK_TOL:
            return val
        return _u_mpmath(a, b, z)

    b_off = abs(b.imag) <= 2 * _B_PERTURB and abs(b.real - round(b.real)) <= 2 * _B_PERTURB
    if b_off:
        # b at (or extremely close to) an integer: symmetric perturbation
        # average cancels the O(delta) drift of each branch.
        vp, ep = _u_connection(a, b + _B_PERTURB, z)
        vm, em = _u_connection(a, b - _B_PERTURB, z)
        val = 0.5 * (vp + vm)
        err = max(ep, em, _B_PERTURB ** 2)
    else:
        val, err = _u_connection(a, b, z)
    if err < _FALLBACK_TOL:
        return val
    return _u_mpmath(a, b, z)


def hyp_u(a, b, z) -> complex:
    """Irregular confluent hypergeometric function U(a, b, z), principal branch.

    Parameters
    ----------
    a, b, z : complex
        ``z`` must be nonzero (z = 0 is a branch point in general).

    Raises
    ------
    BranchError
        at z = 0.
    ConvergenceError
        when no strategy reaches the working tolerance.
    """
    a = _as_complex(a)
    b = _as_complex(b)
    z = _as_complex(z)
    if z == 0:
        raise BranchError("U(a, b, z) has a branch point at z = 0")
    return _hyp_u_cached(a, b, z)


def hyp_u_dz(a, b, z, order: int = 1) -> complex:
    """Derivative d^k/dz^k U(a,b,z) via the parameter-shift relation."""
    a = _as_complex(a)
    b = _as_complex(b)
    c = 1.0 + 0.0j
    for j in range(order):
        c *= -(a + j)
    return c * hyp_u(a + order, b + order, z)


def whittaker_w(kappa, mu, y) -> complex:
    """Irregular Whittaker function W_{kappa,mu}(y) expressed through U."""
    kappa = _as_complex(kappa)
    mu = _as_complex(mu)
    y = _as_complex(y)
    return (
        cmath.exp(-y / 2)
        * cmath.exp((mu + 0.5) * cmath.log(y))
        * hyp_u(0.5 - kappa + mu, 2 * mu + 1, y)
    )

"""Three-term recurrence engine.

Coefficient generation for one- and two-sided series, continued-fraction
characteristic equations (modified Lentz), minimal-solution diagnostics,
finite-series detection, and the small tridiagonal eigenproblems that
arise from terminating series.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import DcheParams
from .errors import CFBreakdownError, GenerationError, NoConvergence, TheoremViolation

FORMS = ("STANDARD", "FORM_R1A", "FORM_R2A", "FORM_R3A")

_TINY = 1e-30
_INTEGER_TOL = 1e-9


@dataclass(frozen=True)
class ThreeTermCoeffs:
    """Closures (alpha(n), beta(n), gamma(n)) plus the truncation form.

    For FORM_R2A and FORM_R3A the value alpha(-1) participates in the
    first rows; for STANDARD/FORM_R1A it is implicitly zero.  Closures
    must be pure functions of n.
    """

    alpha: Callable[[int], complex]
    beta: Callable[[int], complex]
    gamma: Callable[[int], complex]
    form: str = "STANDARD"
    two_sided: bool = False

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown recurrence form {self.form!r}")


@dataclass
class CoeffSeq:
    """Series coefficients b_n, n from n_min upward, normalized b_0 = 1."""

    values: list
    n_min: int = 0
    finite: bool = False

    @property
    def n_max(self) -> int:
        return self.n_min + len(self.values) - 1

    def b(self, n: int) -> complex:
        if n < self.n_min or n > self.n_max:
            return 0.0j
        return self.values[n - self.n_min]

    def row_residuals(self, coeffs: ThreeTermCoeffs):
        """Relative residual of each interior recurrence row on re-substitution."""
        out = []
        lo = self.n_min + 1 if self.n_min < 0 else 1
        start = 2 if coeffs.form == "FORM_R2A" else lo
        for n in range(start, self.n_max):
            terms = (
                coeffs.alpha(n) * self.b(n + 1),
                coeffs.beta(n) * self.b(n),
                coeffs.gamma(n) * self.b(n - 1),
            )
            scale = max(abs(t) for t in terms) or 1.0
            out.append(abs(sum(terms)) / scale)
        return out


def generate(coeffs: ThreeTermCoeffs, n_max: int, finite_n: Optional[int] = None) -> CoeffSeq:
    """Forward generation of a one-sided sequence with b_0 = 1.

    The first rows follow the selected truncation form.  If ``finite_n``
    is given the series is a terminating one: exactly N = finite_n
    coefficients (0 <= n <= N-1) are produced and the finite flag is set.
    """
    if coeffs.two_sided:
        raise GenerationError("use generate_two_sided for two-sided coefficients")
    if finite_n is not None:
        n_max = finite_n - 1
    if n_max < 0:
        raise GenerationError("n_max must be >= 0")
    b = [1.0 + 0.0j]
    if n_max >= 1:
        a0 = coeffs.alpha(0)
        if a0 == 0:
            raise GenerationError("alpha(0) = 0: cannot advance the recurrence")
        if coeffs.form == "FORM_R3A":
            b.append(-(coeffs.beta(0) + coeffs.alpha(-1)) / a0)
        else:
            b.append(-coeffs.beta(0) / a0)
    start = 1
    if coeffs.form == "FORM_R2A" and n_max >= 2:
        a1 = coeffs.alpha(1)
        if a1 == 0:
            raise GenerationError("alpha(1) = 0: cannot advance the recurrence")
        b.append(-(coeffs.beta(1) * b[1] + (coeffs.alpha(-1) + coeffs.gamma(1)) * b[0]) / a1)
        start = 2
    for n in range(start, n_max):
        if len(b) != n + 1:
            continue  # row already produced by the special second row
        an = coeffs.alpha(n)
        if an == 0:
            raise GenerationError(f"alpha({n}) = 0: cannot advance the recurrence")
        b.append(-(coeffs.beta(n) * b[n] + coeffs.gamma(n) * b[n - 1]) / an)
    return CoeffSeq(values=b[: n_max + 1], finite=finite_n is not None)


def generate_minimal(coeffs: ThreeTermCoeffs, n_max: int, depth: int = 60) -> CoeffSeq:
    """Minimal-solution sequence b_0 = 1, ..., b_{n_max} by backward recursion.

    Forward generation of a minimal solution is unstable: roundoff seeds
    the dominant branch, which overtakes after a few dozen terms.  Ratios
    b_n / b_{n-1} are instead started ``depth`` rows beyond n_max and
    recursed downward, which damps the dominant branch.  Consistent with
    the n = 0 row only when the characteristic equation holds.
    """
    if coeffs.two_sided:
        raise GenerationError("use generate_two_sided for two-sided coefficients")
    if n_max < 0:
        raise GenerationError("n_max must be >= 0")
    r = 0.0j
    ratios = []
    for n in range(n_max + depth, 0, -1):
        den = coeffs.beta(n) + coeffs.alpha(n) * r
        if den == 0:
            den = _TINY
        r = -coeffs.gamma(n) / den
        if n <= n_max:
            ratios.append(r)
    ratios.reverse()
    b = [1.0 + 0.0j]
    for rn in ratios:
        b.append(b[-1] * rn)
    return CoeffSeq(values=b)


def lentz(a: Callable[[int], complex], b: Callable[[int], complex], depth: int, tol: float):
    """Value of a(1)/(b(1) + a(2)/(b(2) + ...)) by the modified Lentz algorithm."""
    f = _TINY
    c = f
    d = 0.0j
    for j in range(1, depth + 1):
        aj, bj = a(j), b(j)
        d = bj + aj * d
        if d == 0:
            d = _TINY
        c = bj + aj / c
        if c == 0:
            c = _TINY
        d = 1.0 / d
        delta = c * d
        f *= delta
        if not cmath.isfinite(f):
            raise CFBreakdownError("continued fraction overflowed despite rescue")
        if abs(delta - 1.0) < tol and j > 2:
            return f
    return f


def _tail_fraction(coeffs: ThreeTermCoeffs, direction: int, depth: int, tol: float) -> complex:
    """Right tail (direction=+1): a0 g1/(b1-) a1 g2/(b2-)...; left mirrors it."""
    if direction > 0:
        def a(j):
            s = 1.0 if j == 1 else -1.0
            return s * coeffs.alpha(j - 1) * coeffs.gamma(j)

        def b(j):
            return coeffs.beta(j)
    else:
        def a(j):
            s = 1.0 if j == 1 else -1.0
            return s * coeffs.alpha(-j) * coeffs.gamma(-j + 1)

        def b(j):
            return coeffs.beta(-j)

    return lentz(a, b, depth, tol)


def char_value(coeffs: ThreeTermCoeffs, depth: int = 60, tol: float = 1e-14) -> complex:
    """Characteristic function whose root selects the minimal solution.

    One-sided: beta(0) - K with K the infinite continued fraction built
    from the selected truncation form.  Two-sided: beta(0) minus both the
    left and right tails.  A root of char_value = 0 is the condition for
    the generated sequence to be the minimal solution.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if coeffs.two_sided:
        right = _tail_fraction(coeffs, +1, depth, tol)
        left = _tail_fraction(coeffs, -1, depth, tol)
        return coeffs.beta(0) - left - right
    if coeffs.form == "FORM_R3A":
        return coeffs.beta(0) + coeffs.alpha(-1) - _tail_fraction(coeffs, +1, depth, tol)
    if coeffs.form == "FORM_R2A":
        def a(j):
            if j == 1:
                return coeffs.alpha(0) * (coeffs.alpha(-1) + coeffs.gamma(1))
            return -coeffs.alpha(j - 1) * coeffs.gamma(j)

        return coeffs.beta(0) - lentz(a, coeffs.beta, depth, tol)
    return coeffs.beta(0) - _tail_fraction(coeffs, +1, depth, tol)


@dataclass
class RootResult:
    x: complex
    residual: float
    iterations: int


def char_root(
    factory: Callable[[complex], ThreeTermCoeffs],
    guess: complex,
    tol: float = 1e-11,
    depth: int = 80,
    max_iter: int = 200,
) -> RootResult:
    """Secant root of x -> char_value(factory(x)) starting from guess.

    ``x`` is whatever scalar parametrizes the coefficients (a constant
    term, a phase parameter, an energy).  Raises NoConvergence after
    ``max_iter`` steps; multi-start from perturbed guesses is advised.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")

    def f(x):
        return char_value(factory(x), depth=depth, tol=min(tol * 1e-3, 1e-14))

    x0 = complex(guess)
    x1 = x0 * (1 + 1e-4) + 1e-4 * (1 + 0.3j)
    f0, f1 = f(x0), f(x1)
    for it in range(1, max_iter + 1):
        if abs(f1) < tol:
            return RootResult(x=x1, residual=abs(f1), iterations=it)
        denom = f1 - f0
        if denom == 0:
            x2 = x1 + 1e-7 * (1 + 1j)
        else:
            x2 = x1 - f1 * (x1 - x0) / denom
        x0, f0 = x1, f1
        x1 = x2
        f1 = f(x1)
        if abs(f1) < tol or (abs(x1 - x0) < 1e-15 * max(1.0, abs(x1)) and abs(f1) < 1e3 * tol):
            return RootResult(x=x1, residual=abs(f1), iterations=it + 1)
    raise NoConvergence(
        f"secant iteration stalled at |char_value| = {abs(f1):.3e} after {max_iter} steps; "
        "try a different starting guess (multi-start)"
    )


@dataclass
class RatioReport:
    skipped: bool
    fitted: complex = 0.0
    expected: Optional[complex] = None
    passed: Optional[bool] = None
    growing: bool = False


def minimal_ratio_check(seq: CoeffSeq, expected_const: Optional[complex] = None) -> RatioReport:
    """Check that b_{n+1}/b_n decays like const/n (minimal solution pattern).

    The dominant solution has ratios growing like -n instead.  For a
    finite series the test is meaningless and is skipped with a flag.
    ``expected_const`` is the predicted limit of n * b_{n+1}/b_n.
    """
    if seq.finite:
        return RatioReport(skipped=True)
    vals = seq.values
    if len(vals) < 20:
        raise ValueError("need at least 20 coefficients for the ratio check")
    n_hi = len(vals) - 2
    fitted = []
    for n in range(max(1, n_hi - 8), n_hi + 1):
        if vals[n] == 0:
            continue
        fitted.append(n * vals[n + 1] / vals[n])
    c = fitted[-1]
    growing = abs(vals[-1]) > abs(vals[len(vals) // 2]) and abs(c) > 10 * max(
        1.0, abs(expected_const or 1.0)
    )
    passed = None
    if expected_const is not None:
        passed = (not growing) and abs(c - expected_const) <= 0.2 * abs(expected_const)
    return RatioReport(skipped=False, fitted=c, expected=expected_const, passed=passed, growing=growing)


# Finite-series conditions per solution pair: the displayed offsets
# B2/2 + i*eta (pairs 1, 3) or B2/2 - i*eta (pairs 2, 4) must sit at the
# stated integer.  Pairs 5..8 are the sign-flipped images (eta -> -eta).
def finite_series_condition(pair_id: int, params: DcheParams) -> Optional[int]:
    """N >= 1 when the pair's series terminates with 0 <= n <= N-1, else None."""
    if pair_id not in range(1, 9):
        raise ValueError("pair_id must be 1..8")
    ie = params.i_eta
    if pair_id in (5, 6, 7, 8):
        ie = -ie
        pair_id -= 4
    half = params.b2 / 2
    if pair_id in (1, 3):
        x = 1 - (half + ie)
    else:
        x = (half - ie) - 1
    n = round(x.real)
    if n >= 1 and abs(x - n) <= _INTEGER_TOL:
        return n
    return None


@dataclass
class EigenResult:
    values: list
    certified: bool
    products: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.values)


def tridiag_eigen(coeffs: ThreeTermCoeffs, size: int) -> EigenResult:
    """All eigenvalues of the size x size tridiagonal coefficient matrix.

    Diagonal beta(j), superdiagonal alpha(j), subdiagonal gamma(j).  When
    every product alpha(j) * gamma(j+1) is real and positive (the product
    is invariant under the i^n rescaling that makes pure-imaginary
    off-diagonals real) the eigenvalues are certified real and distinct
    and are returned sorted ascending; otherwise a TheoremViolation
    warning is issued and eigenvalues are sorted by real part.
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    m = np.zeros((size, size), dtype=complex)
    for j in range(size):
        m[j, j] = coeffs.beta(j)
        if j + 1 < size:
            m[j, j + 1] = coeffs.alpha(j)
            m[j + 1, j] = coeffs.gamma(j + 1)
    ev = np.linalg.eigvals(m)
    products = [complex(m[j, j + 1] * m[j + 1, j]) for j in range(size - 1)]
    scale = max((abs(p) for p in products), default=1.0) or 1.0
    diag_real = all(abs(m[j, j].imag) <= 1e-12 * max(1.0, abs(m[j, j])) for j in range(size))
    certified = diag_real and all(
        abs(p.imag) <= 1e-10 * scale and p.real > 0 for p in products
    )
    if certified:
        vals = [complex(v) for v in sorted(float(v.real) for v in ev)]
    else:
        if size > 1:
            warnings.warn(
                "a product alpha_j * gamma_{j+1} is not real-positive: eigenvalues "
                "are not certified real and distinct",
                TheoremViolation,
            )
        vals = sorted((complex(v) for v in ev), key=lambda v: (v.real, v.imag))
    return EigenResult(values=vals, certified=certified, products=products)


def generate_two_sided(
    coeffs: ThreeTermCoeffs,
    window: Optional[int] = None,
    depth: int = 60,
    tail_tol: float = 1e-16,
) -> CoeffSeq:
    """Two-sided minimal sequence b_n, |n| <= window, normalized b_0 = 1.

    Ratios toward each tail are evaluated by backward recursion started
    deep in the tail (minimal-solution selection).  If ``window`` is None
    it is doubled from 8 until both tail coefficients are below
    tail_tol * max|b_n|, capped at 128.
    """
    if not coeffs.two_sided:
        raise GenerationError("coefficients are not two-sided")

    def build(w: int) -> CoeffSeq:
        r = 0.0j
        right = []
        for n in range(w + depth, 0, -1):
            den = coeffs.beta(n) + coeffs.alpha(n) * r
            if den == 0:
                den = _TINY
            r = -coeffs.gamma(n) / den
            if n <= w:
                right.append(r)  # r = b_n / b_{n-1}
        right.reverse()
        l = 0.0j
        left = []
        for m in range(w + depth, 0, -1):
            den = coeffs.beta(-m) + coeffs.gamma(-m) * l
            if den == 0:
                den = _TINY
            l = -coeffs.alpha(-m) / den
            if m <= w:
                left.append(l)  # l = b_{-m} / b_{-m+1}
        left.reverse()
        vals = [0.0j] * (2 * w + 1)
        vals[w] = 1.0 + 0.0j
        acc = 1.0 + 0.0j
        for n in range(1, w + 1):
            acc *= right[n - 1]
            vals[w + n] = acc
        acc = 1.0 + 0.0j
        for m in range(1, w + 1):
            acc *= left[m - 1]
            vals[w - m] = acc
        return CoeffSeq(values=vals, n_min=-w)

    if window is not None:
        return build(window)
    w = 8
    while True:
        seq = build(w)
        mx = max(abs(v) for v in seq.values)
        if (abs(seq.values[0]) <= tail_tol * mx and abs(seq.values[-1]) <= tail_tol * mx) or w >= 128:
            return seq
        w *= 2

"""Three-term recurrence engine: generation, continued fractions, eigenproblems."""

import math

import numpy as np
import pytest

from dcheun.core import DcheParams
from dcheun.errors import GenerationError, NoConvergence, TheoremViolation
from dcheun.recurrence import (
    CoeffSeq,
    ThreeTermCoeffs,
    char_root,
    char_value,
    finite_series_condition,
    generate,
    generate_minimal,
    generate_two_sided,
    lentz,
    minimal_ratio_check,
    tridiag_eigen,
)


def bessel_coeffs(x: float) -> ThreeTermCoeffs:
    """J_{n}(x) satisfies J_{n+1} - (2n/x) J_n + J_{n-1} = 0.

    J_n is the minimal solution; everything about it is tabulated, so it
    serves as an exact oracle for the minimal-solution machinery.
    """
    return ThreeTermCoeffs(
        alpha=lambda n: 1.0,
        beta=lambda n: -2.0 * n / x,
        gamma=lambda n: 1.0,
    )


def test_generate_forward_matches_hand_rolled():
    coeffs = ThreeTermCoeffs(
        alpha=lambda n: n + 1.0,
        beta=lambda n: 2.0 * n - 1.0,
        gamma=lambda n: 0.5 * n,
    )
    seq = generate(coeffs, 6)
    b = [1.0 + 0.0j]
    b.append(-coeffs.beta(0) * b[0] / coeffs.alpha(0))
    for n in range(1, 6):
        b.append(-(coeffs.beta(n) * b[n] + coeffs.gamma(n) * b[n - 1]) / coeffs.alpha(n))
    assert seq.values == pytest.approx(b)
    assert max(seq.row_residuals(coeffs)) < 1e-14


def test_generate_rejects_vanishing_leading_coefficient():
    coeffs = ThreeTermCoeffs(alpha=lambda n: float(n), beta=lambda n: 1.0, gamma=lambda n: 1.0)
    with pytest.raises(GenerationError):
        generate(coeffs, 3)


def test_minimal_generation_reproduces_bessel():
    from scipy.special import jv

    x = 1.7
    seq = generate_minimal(bessel_coeffs(x), 12, depth=80)
    for n in range(13):
        ref = jv(n, x) / jv(0, x)
        assert abs(seq.b(n) - ref) < 1e-12 * max(1.0, abs(ref)), n


def test_forward_generation_of_minimal_solution_degrades():
    # forward recursion seeds the dominant branch; by n ~ 20 the relative
    # error is catastrophic, which is why generate_minimal exists
    from scipy.special import jv

    x = 1.7
    fwd = generate(bessel_coeffs(x), 20)
    ref = jv(20, x) / jv(0, x)
    assert abs(fwd.b(20) - ref) > 1e3 * abs(ref)


def test_lentz_known_continued_fraction():
    # tanh(1) = 1/(1+ 1/(3+ 1/(5+ ...)))
    val = lentz(lambda j: 1.0, lambda j: 2.0 * j - 1.0, depth=40, tol=1e-15)
    assert abs(val - math.tanh(1.0)) < 1e-14


def test_char_value_vanishes_on_minimal_solution():
    # the Bessel recurrence admits a minimal solution for every x, but the
    # characteristic equation holds only where beta(0) balances the tail;
    # use the n >= 1 rows shifted so that row 0 is the J_1 row
    x = 2.404825557695773  # first zero of J_0: b_0 = J_1 normalization works
    coeffs = ThreeTermCoeffs(
        alpha=lambda n: 1.0,
        beta=lambda n: -2.0 * (n + 1) / x,
        gamma=lambda n: 1.0,
    )
    # row n reads alpha b_{n+1} + beta b_n + gamma b_{n-1} with b_{-1} = J_0(x) = 0,
    # so char_value(coeffs) = beta(0) - CF must vanish at a zero of J_0
    assert abs(char_value(coeffs, depth=120)) < 1e-12


def test_char_root_finds_bessel_zero():
    def fac(x):
        return ThreeTermCoeffs(
            alpha=lambda n: 1.0,
            beta=lambda n, x=x: -2.0 * (n + 1) / x,
            gamma=lambda n: 1.0,
        )

    r = char_root(fac, 2.3)
    assert abs(r.x - 2.404825557695773) < 1e-10
    assert r.residual < 1e-10


def test_char_root_reports_stall():
    def fac(x):
        return ThreeTermCoeffs(
            alpha=lambda n: 1.0, beta=lambda n: 1.0 + 0 * x, gamma=lambda n: 1.0
        )

    with pytest.raises(NoConvergence):
        char_root(fac, 0.3, max_iter=5)


def test_minimal_ratio_check_flags_dominant_branch():
    x = 1.7
    minimal = generate_minimal(bessel_coeffs(x), 30, depth=80)
    rep = minimal_ratio_check(minimal, expected_const=None)
    assert not rep.growing
    dominant = generate(bessel_coeffs(x), 30)
    rep = minimal_ratio_check(dominant)
    assert rep.growing
    finite = CoeffSeq(values=[1.0, 2.0], finite=True)
    assert minimal_ratio_check(finite).skipped


def test_finite_series_condition_offsets():
    # pairs 1, 3 terminate when B2/2 + i eta = 1 - N; pairs 2, 4 when
    # B2/2 - i eta = 1 + N; 5..8 are the eta-flipped images
    p = DcheParams(1.0, 0.6, 0.0, 1.0, (1 - 0.3 - 3) / 1j)  # i eta = -2.3 -> pair1 N=3
    assert finite_series_condition(1, p) == 3
    assert finite_series_condition(3, p) == 3
    assert finite_series_condition(2, p) is None
    p2 = DcheParams(1.0, 0.6, 0.0, 1.0, (0.3 - 1 - 2) / 1j)  # i eta = -2.7 -> pair2 N=2
    assert finite_series_condition(2, p2) == 2
    assert finite_series_condition(4, p2) == 2
    # eta flip: pair 5 sees -i eta
    p5 = DcheParams(1.0, 0.6, 0.0, 1.0, -(1 - 0.3 - 3) / 1j)
    assert finite_series_condition(5, p5) == 3
    with pytest.raises(ValueError):
        finite_series_condition(9, p)


def test_generate_finite_length():
    coeffs = ThreeTermCoeffs(
        alpha=lambda n: n + 1.0, beta=lambda n: -1.0, gamma=lambda n: 0.1 * n
    )
    seq = generate(coeffs, 50, finite_n=4)
    assert seq.finite and len(seq.values) == 4


def test_tridiag_eigen_analytic_2x2():
    # [[1, 2], [3, 4]]: eigenvalues (5 +- sqrt(33))/2
    coeffs = ThreeTermCoeffs(
        alpha=lambda n: 2.0, beta=lambda n: 1.0 + 3.0 * n, gamma=lambda n: 3.0
    )
    r = tridiag_eigen(coeffs, 2)
    exact = sorted([(5 - math.sqrt(33)) / 2, (5 + math.sqrt(33)) / 2])
    assert [v.real for v in r.values] == pytest.approx(exact, abs=1e-12)
    assert r.certified
    assert r.products == [pytest.approx(6.0)]


def test_tridiag_eigen_imaginary_offdiagonals_still_certified():
    # pure-imaginary off-diagonals with positive products are similar to a
    # real symmetric-like matrix via diag(i^n): still certified
    coeffs = ThreeTermCoeffs(
        alpha=lambda n: 2.0j, beta=lambda n: float(n), gamma=lambda n: -1.5j
    )
    r = tridiag_eigen(coeffs, 4)
    assert r.certified
    assert all(abs(v.imag) < 1e-10 for v in r.values)
    gaps = np.diff([v.real for v in r.values])
    assert np.all(gaps > 1e-8)


def test_tridiag_eigen_violation_warns():
    coeffs = ThreeTermCoeffs(
        alpha=lambda n: 1.0, beta=lambda n: float(n), gamma=lambda n: -1.0
    )
    with pytest.warns(TheoremViolation):
        r = tridiag_eigen(coeffs, 3)
    assert not r.certified


def test_two_sided_generation_consistency():
    # a symmetric two-sided recurrence with rapidly growing |beta(n)| has a
    # minimal solution decaying in both directions; rows must re-substitute
    def fac(x):
        return ThreeTermCoeffs(
            alpha=lambda n: 1.0,
            beta=lambda n, x=x: x if n == 0 else -(4.0 * n * n + 3.0),
            gamma=lambda n: 1.0,
            two_sided=True,
        )

    # the central row only closes when beta(0) balances both tails; tune it
    root = char_root(fac, -3.0)
    coeffs = fac(root.x)
    seq = generate_two_sided(coeffs, window=12)
    assert abs(seq.b(0) - 1.0) < 1e-15
    assert max(seq.row_residuals(coeffs)) < 1e-10
    # central row closes as well once the characteristic equation holds
    central = coeffs.alpha(0) * seq.b(1) + coeffs.beta(0) * seq.b(0) + coeffs.gamma(0) * seq.b(-1)
    assert abs(central) < 1e-10
    assert abs(seq.b(12)) < 1e-12 and abs(seq.b(-12)) < 1e-12

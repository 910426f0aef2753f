"""Quasi-exactly-solvable hyperbolic potentials and radial parameter maps.

Maps two hyperbolic Schrodinger potentials onto the equation through
z = e^u, computes the algebraic part of the spectrum from tridiagonal
eigenproblems, the infinite-series part from continued-fraction roots,
assembles eigenfunctions (with matching of the two series pieces when
they do not terminate), and checks the regularity conditions
psi(u) -> 0 as u -> +-infinity.  Also provides the parameter maps for
two radial potentials that reduce to the algebraic normal forms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import DcheParams, GaugeMap, VarMap
from .errors import (
    DegenerateError,
    DomainError,
    MatchFailure,
    NoRoots,
    NotQes,
    TheoremViolation,
)
from .recurrence import (
    ThreeTermCoeffs,
    char_root,
    char_value,
    finite_series_condition,
    generate,
    generate_minimal,
    tridiag_eigen,
)
from .solutions import build_pair_power

KINDS = ("DOUBLE_MORSE", "SECOND_TYPE")

_HALF_INT_TOL = 1e-9


@dataclass(frozen=True)
class QesProblem:
    """A hyperbolic potential with strength B, asymmetry C and spin-like s.

    DOUBLE_MORSE: V(u) = (B^2/4)(sinh u - C/B)^2 - B(s + 1/2) cosh u.
    SECOND_TYPE:  V(u) = (B^2/4) sinh^2 u - B(s + 1/2) sinh u (C = 0).
    The reduced energy is E := 2 m E_phys / (hbar a)^2.
    """

    kind: str
    B: float
    s: float
    C: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown potential kind {self.kind!r}")
        if self.B <= 0:
            raise DomainError("B must be positive")
        if self.s < 0:
            raise DomainError("s must be nonnegative")
        if self.kind == "SECOND_TYPE" and self.C != 0:
            raise DomainError("the sinh-forced potential has no asymmetry parameter")
        if self.C < 0:
            raise DomainError("C must be nonnegative")

    @property
    def qes_flag(self) -> bool:
        """True when s is a nonnegative integer or half-integer."""
        return abs(2 * self.s - round(2 * self.s)) <= _HALF_INT_TOL


def potential(problem: QesProblem, u: float) -> float:
    B, C, s = problem.B, problem.C, problem.s
    if problem.kind == "DOUBLE_MORSE":
        return (B**2 / 4) * (math.sinh(u) - C / B) ** 2 - B * (s + 0.5) * math.cosh(u)
    return (B**2 / 4) * math.sinh(u) ** 2 - B * (s + 0.5) * math.sinh(u)


def _psi_gauge(params: DcheParams) -> GaugeMap:
    # U(z) = gauge.transport(psi) with z = e^u: U = z^{(1-B2)/2} e^{B1/(2z)} psi(ln z)
    return GaugeMap(
        exp_inv=params.b1 / 2, power=(1 - params.b2) / 2, varmap=VarMap("log", 1.0)
    )


def map_double_morse(B: float, C: float, s: float, energy: complex = 0.0):
    """Equation parameters and gauge for the asymmetric cosh-forced potential.

    (B1, B2, B3, omega, i eta) =
    (B/2, 1+C-2s, E+B^2/8+s^2-sC, iB/4, -C/2-1/2-s), with z = e^u and
    psi(u) = z^{(B2-1)/2} e^{-B1/(2z)} U(z).  B3 is affine in the energy.
    """
    if B <= 0:
        raise DomainError("B must be positive")
    params = DcheParams(
        b1=B / 2,
        b2=1 + C - 2 * s,
        b3=energy + B**2 / 8 + s**2 - s * C,
        omega=1j * B / 4,
        eta=(-C / 2 - 0.5 - s) / 1j,
    )
    return params, _psi_gauge(params)


def map_second_type(B: float, s: float, energy: complex = 0.0):
    """Equation parameters and gauge for the sinh-forced potential.

    (B1, B2, B3, i omega, i eta) = (-B/2, 1-2s, E+B^2/8+s^2, -B/4, -1/2-s),
    with z = e^u and the same gauge as the cosh-forced case.
    """
    if B <= 0:
        raise DomainError("B must be positive")
    params = DcheParams(
        b1=-B / 2,
        b2=1 - 2 * s,
        b3=energy + B**2 / 8 + s**2,
        omega=(-B / 4) / 1j,
        eta=(-0.5 - s) / 1j,
    )
    return params, _psi_gauge(params)


def problem_params(problem: QesProblem, energy: complex = 0.0) -> DcheParams:
    if problem.kind == "DOUBLE_MORSE":
        return map_double_morse(problem.B, problem.C, problem.s, energy)[0]
    return map_second_type(problem.B, problem.s, energy)[0]


@dataclass
class SpectrumResult:
    energies: list
    method: str
    certificates: dict = field(default_factory=dict)


def _quasi_poly_matrix_coeffs(problem: QesProblem, route: str) -> ThreeTermCoeffs:
    """Eigenvalue form of the terminating recurrence: M b = E b.

    DOUBLE_MORSE route PAIR1 has diagonal -s(s+C) - n(n-C-2s),
    superdiagonal -(n+1) and subdiagonal (B^2/4)(n-2s-1); PAIR3 is the
    image under C -> -C.  SECOND_TYPE quasi-polynomials (used only as
    regularity counterexamples) follow the analogous closure.
    """
    B, s = problem.B, problem.s
    C = problem.C if route == "PAIR1" else -problem.C
    if problem.kind == "DOUBLE_MORSE":
        return ThreeTermCoeffs(
            alpha=lambda n: -(n + 1.0),
            beta=lambda n: -s * (s + C) - n * (n - C - 2 * s),
            gamma=lambda n: (B**2 / 4) * (n - 2 * s - 1),
        )
    return ThreeTermCoeffs(
        alpha=lambda n: -(n + 1.0),
        beta=lambda n: -(s**2) - B**2 / 4 - n * (n - 2 * s),
        gamma=lambda n: -(B**2 / 4) * (n - 2 * s - 1),
    )


def quasi_polynomial_spectrum(problem: QesProblem, route: str = "PAIR1") -> SpectrumResult:
    """Energies of the terminating series, for either potential kind.

    For the sinh-forced potential the resulting eigenfunctions are not
    regular; they are exposed only as regularity counterexamples.
    """
    if route not in ("PAIR1", "PAIR3"):
        raise ValueError("route must be PAIR1 or PAIR3")
    if not problem.qes_flag:
        raise NotQes(f"s = {problem.s} is not an integer or half-integer")
    size = int(round(2 * problem.s)) + 1
    tc = _quasi_poly_matrix_coeffs(problem, route)
    res = tridiag_eigen(tc, size)
    certs = {
        "offdiag_products": [
            complex(tc.alpha(j) * tc.gamma(j + 1)) for j in range(size - 1)
        ],
        "certified_real_distinct": res.certified,
    }
    energies = [v.real if res.certified else v for v in res.values]
    return SpectrumResult(energies=energies, method="TRIDIAG", certificates=certs)


def qes_spectrum(problem: QesProblem, route: str = "PAIR1") -> SpectrumResult:
    """The 2s+1 real distinct algebraic energies of the cosh-forced potential."""
    if problem.kind != "DOUBLE_MORSE":
        raise DomainError(
            "terminating series of the sinh-forced potential are not regular; "
            "use infinite_spectrum"
        )
    return quasi_polynomial_spectrum(problem, route)


def _series_pair_id(problem: QesProblem) -> int:
    return 1 if problem.kind == "DOUBLE_MORSE" else 2


def energy_coeff_factory(problem: QesProblem) -> Callable[[complex], ThreeTermCoeffs]:
    """Recurrence coefficients of the regular series pair as a function of E."""
    from .solutions import power_coeffs

    pair = _series_pair_id(problem)

    def factory(energy: complex) -> ThreeTermCoeffs:
        return power_coeffs(pair, problem_params(problem, energy))

    return factory


def infinite_spectrum(
    problem: QesProblem,
    bracket,
    count: Optional[int] = None,
    depth: int = 80,
    grid: int = 400,
    tol: float = 1e-10,
) -> SpectrumResult:
    """Energies from roots of the characteristic continued fraction.

    Scans ``bracket = (lo, hi)`` for sign changes of the (real)
    characteristic value, polishes each by secant iteration, and keeps
    roots validated by an eigenfunction whose two series pieces match.
    Raises NoRoots when the bracket contains none.

    A characteristic root only guarantees that both series of the pair
    converge and solve the equation; it does not by itself make them
    proportional, so regularity at both ends is a runtime check, not an
    assumption.  Terminating (quasi-exactly-solvable) energies pass the
    check and reproduce the tridiagonal spectrum; non-terminating roots
    are kept only when the derivative matching succeeds, and brackets
    holding none raise NoRoots.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    factory = energy_coeff_factory(problem)
    xs = np.linspace(lo, hi, grid)
    vals = []
    for x in xs:
        try:
            vals.append(complex(char_value(factory(x), depth=depth)).real)
        except Exception:
            vals.append(math.nan)
    roots = []
    for i in range(len(xs) - 1):
        a, b = vals[i], vals[i + 1]
        if math.isnan(a) or math.isnan(b) or a * b > 0:
            continue
        try:
            r = char_root(factory, complex(xs[i]), tol=tol, depth=depth)
        except Exception:
            continue
        e = r.x.real
        if not (lo - 1e-9 <= e <= hi + 1e-9):
            continue
        if any(abs(e - q) < 1e-8 for q in roots):
            continue
        # poles of the continued fraction also change sign; a genuine
        # eigenvalue must admit a matched regular eigenfunction
        try:
            eigenfunction(problem, e)
        except MatchFailure:
            continue
        roots.append(e)
        if count is not None and len(roots) >= count:
            break
    if not roots:
        raise NoRoots(f"no spectrum found in [{lo}, {hi}]")
    return SpectrumResult(
        energies=sorted(roots),
        method="CONTINUED_FRACTION",
        certificates={"char_depth": depth},
    )


@dataclass
class Eigenfunction:
    """Evaluable wavefunction: psi(u) -> (value, dpsi/du, d2psi/du2)."""

    psi: Callable[[float], tuple]
    problem: QesProblem
    energy: complex
    pair_id: int
    finite: bool
    mismatch: float
    parity: Optional[str] = None
    match_u: Optional[float] = None

    def __call__(self, u):
        return self.psi(u)


def _member_to_psi(params: DcheParams, member) -> Callable[[float], tuple]:
    """Wrap a z-plane pair member as psi(u) with z = e^u.

    psi = P(u) V(u) with log P = ((B2-1)/2) u - (B1/2) e^{-u} and
    V(u) = member(e^u); derivatives by product and chain rule.
    """
    b1, b2 = params.b1, params.b2

    def psi(u: float):
        z = cmath.exp(u)
        v, d1, d2 = member(z)
        logp = ((b2 - 1) / 2) * u - (b1 / 2) * cmath.exp(-u)
        pre = cmath.exp(logp)
        g = (b2 - 1) / 2 + b1 / (2 * z)
        gp = -b1 / (2 * z)
        dv = d1 * z
        d2v = d2 * z * z + d1 * z
        val = pre * v
        dval = pre * (g * v + dv)
        d2val = pre * ((g * g + gp) * v + 2 * g * dv + d2v)
        return val, dval, d2val

    return psi


def _parity_psi(problem: QesProblem, coeffs, parity: str) -> Callable[[float], tuple]:
    """Even/odd combination of the two terminating members at C = 0.

    psi(u) = e^{-(B/2) cosh u} sum_n b_n (B/2)^{-n} h((n-s)u) with
    h = cosh (even) or sinh (odd).
    """
    B, s = problem.B, problem.s
    terms = [
        (coeffs.b(n) * (B / 2.0) ** (-n), n - s) for n in range(coeffs.n_max + 1)
    ]

    def psi(u: float):
        sv = sd = sd2 = 0.0j
        for c, k in terms:
            if parity == "EVEN":
                h, hp = cmath.cosh(k * u), cmath.sinh(k * u)
            else:
                h, hp = cmath.sinh(k * u), cmath.cosh(k * u)
            sv += c * h
            sd += c * k * hp
            sd2 += c * k * k * h
        logp = -(B / 2) * math.cosh(u)
        pre = cmath.exp(logp)
        g = -(B / 2) * math.sinh(u)
        gp = -(B / 2) * math.cosh(u)
        val = pre * sv
        dval = pre * (g * sv + sd)
        d2val = pre * ((g * g + gp) * sv + 2 * g * sd + sd2)
        return val, dval, d2val

    return psi


def eigenfunction(
    problem: QesProblem,
    energy: complex,
    pair_choice: Optional[int] = None,
    parity: Optional[str] = None,
    match_u: float = 0.0,
    mismatch_tol: float = 1e-6,
    n_terms: int = 60,
) -> Eigenfunction:
    """Wavefunction at a candidate energy, with an eigenvalue diagnostic.

    Terminating series give a single globally valid quasi-polynomial;
    the diagnostic is the relative residual of the closing recurrence
    row.  Non-terminating series are pieced from the member convergent
    at large e^u (u >= match_u) and the member convergent at small e^u
    (u <= match_u), each scaled to unit value at the matching point; the
    diagnostic is the relative derivative mismatch there.  A diagnostic
    above ``mismatch_tol`` raises MatchFailure (the energy is not an
    eigenvalue).  ``parity`` EVEN/ODD builds the symmetric/antisymmetric
    combination (terminating series at C = 0 only).
    """
    if pair_choice is None:
        pair_choice = _series_pair_id(problem)
    params = problem_params(problem, energy)
    from .solutions import power_coeffs

    tc = power_coeffs(pair_choice, params)
    n_fin = finite_series_condition(pair_choice, params)
    if n_fin is not None:
        seq = generate(tc, n_fin - 1, finite_n=n_fin)
        # closing row: alpha_{N-1} b_N vanishes only at an eigenvalue
        n = n_fin - 1
        terms = (tc.beta(n) * seq.b(n), tc.gamma(n) * seq.b(n - 1))
        scale = max(max(abs(t) for t in terms), max(abs(v) for v in seq.values))
        mismatch = abs(sum(terms)) / scale
        if mismatch > mismatch_tol:
            raise MatchFailure(
                f"closing-row residual {mismatch:.3e} at energy {energy}: "
                "not an eigenvalue"
            )
        if parity is not None:
            if problem.C != 0:
                raise DomainError("parity combinations exist only for C = 0")
            if parity not in ("EVEN", "ODD"):
                raise ValueError("parity must be EVEN or ODD")
            psi = _parity_psi(problem, seq, parity)
            # the combination of the wrong parity cancels identically
            probe = max(abs(psi(u)[0]) for u in (0.4, 0.9, 1.7))
            scale = max(abs(v) for v in seq.values)
            if probe < 1e-12 * scale:
                raise DomainError(
                    f"the {parity} combination vanishes at energy {energy}; "
                    "the eigenfunction has the opposite parity"
                )
        else:
            u_inf, _ = build_pair_power(pair_choice, params, n_terms)
            psi = _member_to_psi(params, u_inf)
        return Eigenfunction(
            psi=psi, problem=problem, energy=energy, pair_id=pair_choice,
            finite=True, mismatch=mismatch, parity=parity,
        )

    if parity is not None:
        raise DomainError("parity combinations require a terminating series")
    u_inf, u_zero = build_pair_power(pair_choice, params, n_terms)
    p_inf = _member_to_psi(params, u_inf)
    p_zero = _member_to_psi(params, u_zero)
    vi, di, _ = p_inf(match_u)
    vz, dz, _ = p_zero(match_u)
    if vi == 0 or vz == 0:
        raise MatchFailure("a series piece vanishes at the matching point")
    di, dz = di / vi, dz / vz
    mismatch = abs(di - dz) / max(abs(di), abs(dz), 1.0)
    if mismatch > mismatch_tol:
        raise MatchFailure(
            f"derivative mismatch {mismatch:.3e} at u* = {match_u}: "
            f"energy {energy} is not an eigenvalue"
        )

    def psi(u: float):
        if u >= match_u:
            v, d1, d2 = p_inf(u)
            return v / vi, d1 / vi, d2 / vi
        v, d1, d2 = p_zero(u)
        return v / vz, d1 / vz, d2 / vz

    return Eigenfunction(
        psi=psi, problem=problem, energy=energy, pair_id=pair_choice,
        finite=False, mismatch=mismatch, match_u=match_u,
    )


def schrodinger_residual(
    efn: Eigenfunction, u_grid: Sequence[float]
) -> float:
    """max |psi'' + (E - V) psi| over the grid, relative to max |psi|."""
    worst = 0.0
    norm = 0.0
    res = []
    for u in u_grid:
        v, _, d2 = efn.psi(u)
        r = d2 + (efn.energy - potential(efn.problem, u)) * v
        res.append(abs(r))
        norm = max(norm, abs(v))
    return max(res) / max(norm, 1e-300)


@dataclass
class RegularityReport:
    passed: bool
    tail_plus: float
    tail_minus: float
    interior_max: float
    rate_plus: float
    rate_minus: float
    predicted_rate: float


def regularity_check(
    psi: Callable, problem: QesProblem, u_max: float = 10.0,
    tail_frac: float = 1e-6,
) -> RegularityReport:
    """Decay of |psi| toward u = +-u_max.

    Passes when both tails fall below ``tail_frac`` of the interior
    maximum on [-6, 6] and the measured log-decrements have the sign of
    the dominant prefactor rate (B/2) sinh(u) cosh-well decay.
    """

    def val(u):
        try:
            out = psi(u)
        except OverflowError:
            return math.inf
        return abs(out[0]) if isinstance(out, tuple) else abs(out)

    interior = max(val(u) for u in np.linspace(-6.0, 6.0, 49))
    tp, tm = val(u_max), val(-u_max)
    # log-decrement over the last half-unit at each end; a tail that
    # underflows to zero counts as decaying
    rp = math.log(max(val(u_max - 0.5), 1e-300)) - math.log(max(tp, 1e-300))
    rm = math.log(max(val(-u_max + 0.5), 1e-300)) - math.log(max(tm, 1e-300))
    pred = (problem.B / 2) * (math.cosh(u_max) - math.cosh(u_max - 0.5))
    passed = (
        interior > 0
        and tp < tail_frac * interior
        and tm < tail_frac * interior
        and (rp > 0 or tp == 0.0)
        and (rm > 0 or tm == 0.0)
    )
    return RegularityReport(
        passed=passed, tail_plus=tp, tail_minus=tm, interior_max=interior,
        rate_plus=rp, rate_minus=rm, predicted_rate=pred,
    )


RADIAL_KINDS = ("INVERSE_POWER", "EVEN_POWER")


def map_radial(kind: str, v1, v2, v3, v4, energy, l) -> list:
    """Equation parameters for two radial potentials, both B1 sign branches.

    INVERSE_POWER, V(r) = V1/r + V2/r^2 + V3/r^3 + V4/r^4, matches the
    algebraic normal form in z = r:
    omega^2 = E, 2 eta omega = V1, B1^2 = 4 V4, B1(1 - B2/2) = -V3,
    B3 - B2^2/4 + B2/2 = -l(l+1) - V2.

    EVEN_POWER, V(r) = V1 r^2 + V2/r^2 + V3/r^4 + V4/r^6, matches the
    quadratic-variable normal form in rho = r:
    4 omega^2 = -V1, 8 eta omega = -E, B1^2 = V4, 4 B1(1 - B2/2) = -V3,
    4(B3 - B2^2/4 + B2/2 - 3/16) = -l(l+1) - V2.
    """
    if kind not in RADIAL_KINDS:
        raise ValueError(f"kind must be one of {RADIAL_KINDS}")
    v1, v2, v3, v4 = map(complex, (v1, v2, v3, v4))
    energy = complex(energy)
    if v4 == 0:
        raise DegenerateError("V4 = 0: the singular rank drops and B1 would vanish")
    out = []
    if kind == "INVERSE_POWER":
        omega = cmath.sqrt(energy)
        eta = v1 / (2 * omega) if omega != 0 else 0.0
        for b1 in (2 * cmath.sqrt(v4), -2 * cmath.sqrt(v4)):
            b2 = 2 * (1 + v3 / b1)
            b3 = -l * (l + 1) - v2 + b2 * b2 / 4 - b2 / 2
            out.append(DcheParams(b1, b2, b3, omega, eta))
        return out
    omega = cmath.sqrt(-v1) / 2
    eta = -energy / (8 * omega) if omega != 0 else 0.0
    for b1 in (cmath.sqrt(v4), -cmath.sqrt(v4)):
        b2 = 2 * (1 + v3 / (4 * b1))
        b3 = (-l * (l + 1) - v2) / 4 + b2 * b2 / 4 - b2 / 2 + 3.0 / 16.0
        out.append(DcheParams(b1, b2, b3, omega, eta))
    return out

"""Solution families for the two-point confluent equation.

Four pairs of power / hypergeometric series (with sign-flipped images
5..8), two-sided Coulomb-type pairs with a free phase parameter, and the
one-sided truncated Coulomb pairs.  Each solution evaluates its value
and two derivatives; pairs share a single coefficient sequence.
"""

from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .core import DcheParams, GaugeMap, apply_rule
from .errors import DenominatorError, DomainError, NoConvergence, SectorWarning
from .recurrence import (
    CoeffSeq,
    ThreeTermCoeffs,
    char_value,
    finite_series_condition,
    generate,
    generate_minimal,
    generate_two_sided,
)
from .specialfn import hyp_u, hyp_u_dz

FAMILIES = ("POWER_DESC", "POWER_ASC", "HYP_U_IN_1/Z", "HYP_U_IN_Z", "COULOMB_NU")

_SECTOR = (-1.5 * cmath.pi, 1.5 * cmath.pi)
_TRUNC_TOL = 1e-16
_DEN_TOL = 1e-9


@dataclass(frozen=True)
class TermScheme:
    """Structure of the n-th basis term, before the overall prefactor.

    t_n(z) = (pow_const * z)^(pow_sign * n) * U(a0 + n, b0 + db n, h z^m)

    The power factor is dropped when pow_sign = 0 and the U factor when
    ``h`` is None.  m = +1 puts the U argument proportional to z, m = -1
    to 1/z.
    """

    pow_const: complex = 1.0
    pow_sign: int = 0
    a0: complex = 0.0
    b0: complex = 0.0
    db: int = 1
    h: Optional[complex] = None
    m: int = 1

    def term(self, n: int, z: complex):
        """(value, d1, d2) of the bare term t_n at z."""
        v = 1.0 + 0.0j
        l1 = 0.0j  # (log of power factor)' pieces handled additively
        l2 = 0.0j
        if self.pow_sign and n:
            k = self.pow_sign * n
            v = cmath.exp(k * cmath.log(self.pow_const * z))
            l1 = k / z
            l2 = -k / (z * z)
        if self.h is None:
            return v, v * l1, v * (l1 * l1 + l2)
        a = self.a0 + n
        b = self.b0 + self.db * n
        if self.m == 1:
            w, dw, d2w = self.h * z, self.h, 0.0j
        else:
            w, dw, d2w = self.h / z, -self.h / z**2, 2 * self.h / z**3
        u0 = hyp_u(a, b, w)
        u1 = hyp_u_dz(a, b, w, 1)
        u2 = hyp_u_dz(a, b, w, 2)
        g0 = u0
        g1 = u1 * dw
        g2 = u2 * dw * dw + u1 * d2w
        return (
            v * g0,
            v * (l1 * g0 + g1),
            v * ((l1 * l1 + l2) * g0 + 2 * l1 * g1 + g2),
        )


@dataclass(frozen=True)
class DcheSolution:
    """One member of a solution pair; callable as z -> (value, d1, d2)."""

    family: str
    pair_id: int
    variant: str  # AT_INF | AT_ZERO
    params: DcheParams
    coeffs: CoeffSeq
    gauge: GaugeMap  # prefactor multiplying the term series
    scheme: TermScheme
    sector: Tuple[float, float] = _SECTOR
    sector_of: str = ""        # which combination the sector constrains
    halfplane_sign: int = 0    # sign s with s*Re(B1/z) > 0 required (0: none)
    nu: Optional[complex] = None

    @property
    def domain(self) -> str:
        return "|z|>0" if self.variant == "AT_INF" else "|z|<inf"

    @property
    def finite(self) -> bool:
        return self.coeffs.finite

    def __call__(self, z: complex):
        return evaluate(self, z)


def evaluate(sol: DcheSolution, z, series_tol: float = 1e-10):
    """Value and two derivatives of the solution at z.

    Terms are summed until three consecutive terms fall below the
    truncation floor relative to the running maximum.  A SectorWarning is
    issued when the member's half-plane condition on Re(B1/z) fails.
    """
    z = complex(z)
    if z == 0:
        raise DomainError("solutions are singular or undefined at z = 0")
    if sol.halfplane_sign:
        if sol.halfplane_sign * (sol.params.b1 / z).real <= 0:
            warnings.warn(
                f"Re(B1/z) is on the wrong side for this member "
                f"(needs sign {sol.halfplane_sign:+d})",
                SectorWarning,
            )
    s0 = s1 = s2 = 0.0j
    running_max = 0.0
    small = 0
    last = 0.0
    seq = sol.coeffs
    for i, bn in enumerate(seq.values):
        n = seq.n_min + i
        if bn == 0:
            continue
        t0, t1, t2 = sol.scheme.term(n, z)
        s0 += bn * t0
        s1 += bn * t1
        s2 += bn * t2
        last = abs(bn * t0)
        running_max = max(running_max, last)
        if seq.n_min == 0:
            if last <= _TRUNC_TOL * running_max:
                small += 1
                if small >= 3:
                    break
            else:
                small = 0
    if (
        not seq.finite
        and seq.n_min == 0
        and running_max > 0
        and last > series_tol * running_max
    ):
        raise NoConvergence(
            f"series tail still at {last / running_max:.2e} of its peak; "
            "increase n_terms"
        )
    p, dp, d2p = sol.gauge.prefactor_derivatives(z)
    return (
        p * s0,
        dp * s0 + p * s1,
        d2p * s0 + 2 * dp * s1 + p * s2,
    )


# Coefficient tables for the four power/hypergeometric pairs.
def power_coeffs(pair_id: int, params: DcheParams) -> ThreeTermCoeffs:
    """Three-term coefficient closures for pairs 1..4 of the power family."""
    params.require_nondegenerate()
    b1, b2, b3 = params.b1, params.b2, params.b3
    ie = params.i_eta
    iwb = 1j * params.omega * b1
    if pair_id == 1:
        const = iwb + b3 + (b2 / 2 + ie) * (1 + ie - b2 / 2)
        return ThreeTermCoeffs(
            alpha=lambda n: n + 1.0 + 0.0j,
            beta=lambda n: n * (n + 1 + 2 * ie) + const,
            gamma=lambda n: 2 * iwb * (n + ie + b2 / 2 - 1),
        )
    if pair_id == 2:
        const = -iwb + b3 + (b2 / 2 + ie) * (1 + ie - b2 / 2)
        return ThreeTermCoeffs(
            alpha=lambda n: n + 1.0 + 0.0j,
            beta=lambda n: n * (n + 1 + 2 * ie) + const,
            gamma=lambda n: -2 * iwb * (n + 1 + ie - b2 / 2),
        )
    if pair_id == 3:
        return ThreeTermCoeffs(
            alpha=lambda n: n + 1.0 + 0.0j,
            beta=lambda n: n * (n + b2 - 1) + iwb + b3,
            gamma=lambda n: 2 * iwb * (n + ie + b2 / 2 - 1),
        )
    if pair_id == 4:
        return ThreeTermCoeffs(
            alpha=lambda n: n + 1.0 + 0.0j,
            beta=lambda n: n * (n + 3 - b2) + 2 - iwb - b2 + b3,
            gamma=lambda n: -2 * iwb * (n + 1 + ie - b2 / 2),
        )
    raise ValueError("pair_id must be 1..4")


def _power_pair_layout(pair_id: int, params: DcheParams):
    """(gauge, scheme_inf, scheme_zero, families, halfplane sign) for pairs 1..4."""
    b1, b2 = params.b1, params.b2
    ie = params.i_eta
    iw = 1j * params.omega
    if pair_id == 1:
        g = GaugeMap(exp_z=iw, power=-ie - b2 / 2)
        inf = TermScheme(pow_const=-2 * iw, pow_sign=-1)
        zero = TermScheme(a0=ie + b2 / 2, b0=2 + 2 * ie, db=1, h=b1, m=-1)
        return g, g, inf, zero, ("POWER_DESC", "HYP_U_IN_1/Z"), +1
    if pair_id == 2:
        g = GaugeMap(exp_z=iw, exp_inv=b1, power=-ie - b2 / 2)
        inf = TermScheme(pow_const=-2 * iw, pow_sign=-1)
        zero = TermScheme(a0=2 + ie - b2 / 2, b0=2 + 2 * ie, db=1, h=-b1, m=-1)
        return g, g, inf, zero, ("POWER_DESC", "HYP_U_IN_1/Z"), -1
    if pair_id == 3:
        g = GaugeMap(exp_z=iw)
        inf = TermScheme(a0=ie + b2 / 2, b0=b2, db=1, h=-2 * iw, m=1)
        zero = TermScheme(pow_const=1 / b1, pow_sign=1)
        return g, g, inf, zero, ("HYP_U_IN_Z", "POWER_ASC"), +1
    if pair_id == 4:
        g = GaugeMap(exp_z=iw, exp_inv=b1, power=2 - b2)
        inf = TermScheme(a0=2 + ie - b2 / 2, b0=4 - b2, db=1, h=-2 * iw, m=1)
        zero = TermScheme(pow_const=-1 / b1, pow_sign=1)
        return g, g, inf, zero, ("HYP_U_IN_Z", "POWER_ASC"), -1
    raise ValueError("pair_id must be 1..4")


def build_pair_power(pair_id: int, params: DcheParams, n_terms: int = 60):
    """Pair (U at infinity, U at zero) of the power/hypergeometric family.

    Both members share one coefficient sequence.  When the termination
    condition holds, n_terms is clipped to the finite length N and the
    series is generated exactly; otherwise the minimal solution is built
    (meaningful when the constant term satisfies the characteristic
    equation).
    """
    tc = power_coeffs(pair_id, params)
    n_fin = finite_series_condition(pair_id, params)
    if n_fin is not None:
        seq = generate(tc, n_fin - 1, finite_n=n_fin)
    else:
        seq = generate_minimal(tc, n_terms)
    g_inf, g_zero, s_inf, s_zero, fams, hp = _power_pair_layout(pair_id, params)
    u_inf = DcheSolution(
        family=fams[0], pair_id=pair_id, variant="AT_INF", params=params,
        coeffs=seq, gauge=g_inf, scheme=s_inf, sector_of="-2i*omega*z",
    )
    u_zero = DcheSolution(
        family=fams[1], pair_id=pair_id, variant="AT_ZERO", params=params,
        coeffs=seq, gauge=g_zero, scheme=s_zero,
        sector_of=("B1/z" if hp > 0 else "-B1/z"), halfplane_sign=hp,
    )
    return u_inf, u_zero


def r3_family(pair_id: int, params: DcheParams, n_terms: int = 60):
    """Pairs 5..8: sign-flipped images of pairs 1..4.

    The sign-flip rule has an identity gauge, so the members are the
    pairs built at the flipped parameters, relabeled to solve the
    original equation; asymptotics change to e^{-i omega z} z^{i eta - B2/2}.
    """
    if pair_id not in (1, 2, 3, 4):
        raise ValueError("pair_id must be 1..4")
    p3, _ = apply_rule("r3", params)
    u_inf, u_zero = build_pair_power(pair_id, p3, n_terms)
    u_inf = replace(u_inf, pair_id=pair_id + 4, params=params, sector_of="2i*omega*z")
    u_zero = replace(u_zero, pair_id=pair_id + 4, params=params)
    return u_inf, u_zero


# Coulomb-type pairs with a free phase parameter (two-sided series).
def coulomb_nu_coeffs(pair_id: int, params: DcheParams, nu) -> ThreeTermCoeffs:
    """Fractional coefficient closures of the two-sided Coulomb pairs."""
    params.require_nondegenerate()
    if pair_id not in (1, 2):
        raise ValueError("pair_id must be 1 or 2 for the phase-parameter family")
    b1, b2, b3 = params.b1, params.b2, params.b3
    ie = params.i_eta
    nu = complex(nu)
    iwb = 1j * params.omega * b1
    ewb = params.eta * params.omega * b1
    if pair_id == 1:
        def alpha(n):
            return (iwb * (n + nu + 2 - b2 / 2) * (n + nu + 1 - ie)
                    / (2 * (n + nu + 1) * (n + nu + 1.5)))

        def beta(n):
            return (b3 + (n + nu + 1 - b2 / 2) * (n + nu + b2 / 2)
                    + ewb * (b2 / 2 - 1) / ((n + nu) * (n + nu + 1)))

        def gamma(n):
            return (iwb * (n + nu + b2 / 2 - 1) * (n + nu + ie)
                    / (2 * (n + nu) * (n + nu - 0.5)))
    else:
        def alpha(n):
            return (iwb * (n + nu + b2 / 2) * (n + nu + 1 - ie)
                    / (2 * (n + nu + 1) * (n + nu + 1.5)))

        def beta(n):
            return (-b3 - (n + nu + 1 - b2 / 2) * (n + nu + b2 / 2)
                    - ewb * (b2 / 2 - 1) / ((n + nu) * (n + nu + 1)))

        def gamma(n):
            return (iwb * (n + nu + 1 - b2 / 2) * (n + nu + ie)
                    / (2 * (n + nu) * (n + nu - 0.5)))

    return ThreeTermCoeffs(alpha=alpha, beta=beta, gamma=gamma, two_sided=True)


def _check_nu_denominators(nu: complex, window: int):
    for n in range(-window - 1, window + 2):
        for off in (0.0, 0.5, -0.5, 1.0):
            if abs(n + nu + off) < _DEN_TOL:
                raise DenominatorError(
                    f"coefficient denominator n + nu + {off} vanishes at n = {n}; "
                    "shift nu to the companion characteristic root"
                )


def build_pair_coulomb_nu(pair_id: int, params: DcheParams, nu, window: int = 24):
    """Two-sided Coulomb pair with phase parameter nu.

    ``nu`` should solve the two-tail characteristic equation; a residual
    check is performed and a warning issued if it fails.
    """
    nu = complex(nu)
    tc = coulomb_nu_coeffs(pair_id, params, nu)
    _check_nu_denominators(nu, window)
    cv = char_value(tc)
    if abs(cv) > 1e-6 * max(1.0, abs(tc.beta(0))):
        warnings.warn(
            f"phase parameter does not satisfy the characteristic equation "
            f"(|value| = {abs(cv):.2e}); series will not solve the equation",
            UserWarning,
        )
    seq = generate_two_sided(tc, window=window)
    b1, b2 = params.b1, params.b2
    ie = params.i_eta
    iw = 1j * params.omega
    if pair_id == 1:
        g_inf = GaugeMap(exp_z=iw, power=nu + 1 - b2 / 2)
        g_zero = GaugeMap(exp_z=iw, power=-nu - b2 / 2)
        s_zero = TermScheme(pow_const=1 / b1, pow_sign=-1,
                            a0=nu + b2 / 2, b0=2 * nu + 2, db=2, h=b1, m=-1)
        hp = +1
    else:
        g_inf = GaugeMap(exp_z=iw, exp_inv=b1, power=nu + 1 - b2 / 2)
        g_zero = GaugeMap(exp_z=iw, exp_inv=b1, power=-nu - b2 / 2)
        s_zero = TermScheme(pow_const=-1 / b1, pow_sign=-1,
                            a0=nu + 2 - b2 / 2, b0=2 * nu + 2, db=2, h=-b1, m=-1)
        hp = -1
    s_inf = TermScheme(pow_const=-2 * iw, pow_sign=1,
                       a0=nu + 1 + ie, b0=2 * nu + 2, db=2, h=-2 * iw, m=1)
    u_inf = DcheSolution(
        family="COULOMB_NU", pair_id=pair_id, variant="AT_INF", params=params,
        coeffs=seq, gauge=g_inf, scheme=s_inf, sector_of="-2i*omega*z", nu=nu,
    )
    u_zero = DcheSolution(
        family="COULOMB_NU", pair_id=pair_id, variant="AT_ZERO", params=params,
        coeffs=seq, gauge=g_zero, scheme=s_zero,
        sector_of=("B1/z" if hp > 0 else "-B1/z"), halfplane_sign=hp, nu=nu,
    )
    return u_inf, u_zero


# Truncated (one-sided) Coulomb pairs.
def _coulomb_layout(pair_id: int, params: DcheParams):
    """(gauge_inf, gauge_zero, scheme_inf, scheme_zero, halfplane sign)."""
    b1, b2 = params.b1, params.b2
    ie = params.i_eta
    iw = 1j * params.omega
    if pair_id == 1:
        return (
            GaugeMap(exp_z=iw, power=1 + ie - b2 / 2),
            GaugeMap(exp_z=iw, power=-ie - b2 / 2),
            TermScheme(pow_const=-2 * iw, pow_sign=1,
                       a0=1 + 2 * ie, b0=2 + 2 * ie, db=2, h=-2 * iw, m=1),
            TermScheme(pow_const=1 / b1, pow_sign=-1,
                       a0=ie + b2 / 2, b0=2 + 2 * ie, db=2, h=b1, m=-1),
            +1,
        )
    if pair_id == 2:
        return (
            GaugeMap(exp_z=iw, exp_inv=b1, power=1 + ie - b2 / 2),
            GaugeMap(exp_z=iw, exp_inv=b1, power=-ie - b2 / 2),
            TermScheme(pow_const=-2 * iw, pow_sign=1,
                       a0=1 + 2 * ie, b0=2 + 2 * ie, db=2, h=-2 * iw, m=1),
            TermScheme(pow_const=-1 / b1, pow_sign=-1,
                       a0=2 + ie - b2 / 2, b0=2 + 2 * ie, db=2, h=-b1, m=-1),
            -1,
        )
    if pair_id == 3:
        return (
            GaugeMap(exp_z=iw),
            GaugeMap(exp_z=iw, power=1 - b2),
            TermScheme(pow_const=-2 * iw, pow_sign=1,
                       a0=b2 / 2 + ie, b0=b2, db=2, h=-2 * iw, m=1),
            TermScheme(pow_const=1 / b1, pow_sign=-1,
                       a0=b2 - 1, b0=b2, db=2, h=b1, m=-1),
            +1,
        )
    if pair_id == 4:
        return (
            GaugeMap(exp_z=iw, exp_inv=b1, power=2 - b2),
            GaugeMap(exp_z=iw, exp_inv=b1, power=-1),
            TermScheme(pow_const=-2 * iw, pow_sign=1,
                       a0=2 - b2 / 2 + ie, b0=4 - b2, db=2, h=-2 * iw, m=1),
            TermScheme(pow_const=-1 / b1, pow_sign=-1,
                       a0=3 - b2, b0=4 - b2, db=2, h=-b1, m=-1),
            -1,
        )
    raise ValueError("pair_id must be 1..4")


def _coulomb_raw(pair_id: int, params: DcheParams):
    """Displayed fractional closures; 0/0 entries are handled separately."""
    b1, b2, b3 = params.b1, params.b2, params.b3
    ie = params.i_eta
    iwb = 1j * params.omega * b1
    ewb = params.eta * params.omega * b1
    if pair_id == 1:
        return (
            lambda n: iwb * (n + 1) * (n + 2 + ie - b2 / 2)
            / (2 * (n + 1 + ie) * (n + ie + 1.5)),
            lambda n: b3 + (n + 1 + ie - b2 / 2) * (n + ie + b2 / 2)
            + ewb * (b2 / 2 - 1) / ((n + ie) * (n + 1 + ie)),
            lambda n: iwb * (n + 2 * ie) * (n + b2 / 2 + ie - 1)
            / (2 * (n + ie) * (n + ie - 0.5)),
        )
    if pair_id == 2:
        return (
            lambda n: -iwb * (n + 1) * (n + b2 / 2 + ie)
            / (2 * (n + 1 + ie) * (n + ie + 1.5)),
            lambda n: b3 + (n + 1 + ie - b2 / 2) * (n + ie + b2 / 2)
            + ewb * (b2 / 2 - 1) / ((n + ie) * (n + 1 + ie)),
            lambda n: -iwb * (n + 2 * ie) * (n - b2 / 2 + ie + 1)
            / (2 * (n + ie) * (n + ie - 0.5)),
        )
    if pair_id == 3:
        return (
            lambda n: iwb * (n + 1) * (n + b2 / 2 - ie)
            / (2 * (n + b2 / 2) * (n + b2 / 2 + 0.5)),
            lambda n: b3 + n * (n + b2 - 1)
            + ewb * (b2 / 2 - 1) / ((n + b2 / 2 - 1) * (n + b2 / 2)),
            lambda n: iwb * (n + b2 - 2) * (n + b2 / 2 - 1 + ie)
            / (2 * (n + b2 / 2 - 1) * (n + b2 / 2 - 1.5)),
        )
    if pair_id == 4:
        return (
            lambda n: iwb * (n + 1) * (n + 2 - b2 / 2 - ie)
            / (2 * (n + 2 - b2 / 2) * (n + 2.5 - b2 / 2)),
            lambda n: -b3 - (n + 1) * (n + 2 - b2)
            - ewb * (b2 / 2 - 1) / ((n + 1 - b2 / 2) * (n + 2 - b2 / 2)),
            lambda n: iwb * (n + 2 - b2) * (n + 1 - b2 / 2 + ie)
            / (2 * (n + 1 - b2 / 2) * (n + 0.5 - b2 / 2)),
        )
    raise ValueError("pair_id must be 1..4")


def _near_value(x: complex, v: float) -> bool:
    return abs(x - v) < _DEN_TOL


def coulomb_form(pair_id: int, params: DcheParams) -> str:
    """Recurrence form for the truncated Coulomb pair at these parameters.

    Pairs 1-2 switch on i*eta (R2A at -1/2, R3A at 0), pairs 3-4 on B2.
    Parameter values that make a denominator vanish without a defined
    form raise DenominatorError with the applicable remedy.
    """
    ie = params.i_eta
    b2 = params.b2
    if pair_id in (1, 2):
        if _near_value(ie, -0.5):
            return "FORM_R2A"
        if _near_value(ie, 0.0):
            return "FORM_R3A"
        # other negative integers / half-integers leave 0 in a denominator
        two = 2 * ie
        if abs(two.imag) < _DEN_TOL and two.real < -1 and _near_value(two, round(two.real)):
            raise DenominatorError(
                "i*eta is a negative integer or half-integer below -1/2; apply "
                "the sign-reversal rule (eta, omega) -> (-eta, -omega) first"
            )
        return "FORM_R1A"
    if pair_id == 3:
        if _near_value(b2, 1.0):
            return "FORM_R2A"
        if _near_value(b2, 2.0):
            return "FORM_R3A"
        two = 2 * b2
        if abs(two.imag) < _DEN_TOL and two.real <= 0.5 and _near_value(two, round(two.real)):
            raise DenominatorError("B2 makes a denominator vanish; use the companion pair 4")
        return "FORM_R1A"
    if pair_id == 4:
        if _near_value(b2, 3.0):
            return "FORM_R2A"
        if _near_value(b2, 2.0):
            return "FORM_R3A"
        two = 2 * b2
        if abs(two.imag) < _DEN_TOL and two.real >= 7.5 and _near_value(two, round(two.real)):
            raise DenominatorError("B2 makes a denominator vanish; use the companion pair 3")
        return "FORM_R1A"
    raise ValueError("pair_id must be 1..4")


def _project_rows(pair_id: int, params: DcheParams, form: str):
    """First-row data for the degenerate parameter values, by projection.

    At the degenerate values the basis term t_{-1} coincides with t_0
    (R3A) or t_1 (R2A), so the displayed first-row coefficients are 0/0.
    The row is recovered by applying the full differential operator to
    t_0 and projecting the result onto the surviving neighbor terms at
    sample points; the projected row is then rescaled to the displayed
    normalization through a well-defined closure coefficient.
    """
    g_inf, _, s_inf, _, _ = _coulomb_layout(pair_id, params)
    b1, b2, b3 = params.b1, params.b2, params.b3
    w, eta = params.omega, params.eta

    def lterm(n, z):
        p, dp, d2p = g_inf.prefactor_derivatives(z)
        t0, t1, t2 = s_inf.term(n, z)
        f0 = p * t0
        f1 = dp * t0 + p * t1
        f2 = d2p * t0 + 2 * dp * t1 + p * t2
        return (
            z * z * f2 + (b1 + b2 * z) * f1
            + (b3 - 2 * eta * w * z + w * w * z * z) * f0,
            f0,
        )

    zs = [0.9 * cmath.exp(0.5j * k) + 0.3 for k in range(6)]
    rows_l = []
    rows_t = []
    for z in zs:
        lv, t0v = lterm(0, z)
        t1v = g_inf.prefactor(z) * s_inf.term(1, z)[0]
        rows_l.append(lv)
        rows_t.append((t1v, t0v))
    a_mat = np.array(rows_t, dtype=complex)
    b_vec = np.array(rows_l, dtype=complex)
    sol, *_ = np.linalg.lstsq(a_mat, b_vec, rcond=None)
    p0f, q0f = complex(sol[0]), complex(sol[1])
    resid = np.max(np.abs(a_mat @ sol - b_vec)) / max(np.max(np.abs(b_vec)), 1e-30)
    if resid > 1e-8:
        raise DenominatorError(
            f"degenerate first row could not be resolved (projection residual {resid:.1e})"
        )
    alpha_raw, beta_raw, gamma_raw = _coulomb_raw(pair_id, params)
    if form == "FORM_R3A":
        # row 0 reads q0f b0 + r1 b1 = 0; rescale to the displayed alpha(0)
        a0 = alpha_raw(0)
        # r1 = coefficient of t0 in L[t1]; obtain it by one more projection
        rows_l2 = []
        rows_t2 = []
        for z in zs:
            lv, _ = lterm(1, z)
            pv = g_inf.prefactor(z)
            t2v = pv * s_inf.term(2, z)[0]
            t1v = pv * s_inf.term(1, z)[0]
            t0v = pv * s_inf.term(0, z)[0]
            rows_l2.append(lv)
            rows_t2.append((t2v, t1v, t0v))
        sol2, *_ = np.linalg.lstsq(np.array(rows_t2, dtype=complex),
                                   np.array(rows_l2, dtype=complex), rcond=None)
        r1 = complex(sol2[2])
        beta0_eff = q0f * a0 / r1
        return {"beta0_eff": beta0_eff}
    # FORM_R2A: the folded t_{-1} contribution lands in the row for t_1;
    # rescale via the well-defined alpha(1) against the projected r2.
    rows_l2 = []
    rows_t2 = []
    for z in zs:
        lv, _ = lterm(2, z)
        pv = g_inf.prefactor(z)
        rows_l2.append(lv)
        rows_t2.append(tuple(pv * s_inf.term(k, z)[0] for k in (3, 2, 1)))
    sol2, *_ = np.linalg.lstsq(np.array(rows_t2, dtype=complex),
                               np.array(rows_l2, dtype=complex), rcond=None)
    r2 = complex(sol2[2])
    a1 = alpha_raw(1)
    gamma1_eff = p0f * a1 / r2
    return {"gamma1_eff": gamma1_eff}


def coulomb_coeffs(pair_id: int, params: DcheParams) -> ThreeTermCoeffs:
    """Coefficient closures for the truncated Coulomb pairs, form-selected.

    For the degenerate parameter values the ill-defined first-row entries
    are replaced by projection-derived effective values; alpha(-1) is
    folded into them and reported as zero.
    """
    form = coulomb_form(pair_id, params)
    alpha_raw, beta_raw, gamma_raw = _coulomb_raw(pair_id, params)
    if form == "FORM_R1A":
        return ThreeTermCoeffs(
            alpha=alpha_raw, beta=beta_raw, gamma=gamma_raw, form="FORM_R1A"
        )
    eff = _project_rows(pair_id, params, form)
    if form == "FORM_R3A":
        beta0 = eff["beta0_eff"]

        def beta(n):
            return beta0 if n == 0 else beta_raw(n)

        def alpha(n):
            return 0.0j if n == -1 else alpha_raw(n)

        def gamma(n):
            if n == 0:
                return 0.0j  # never used: the n=0 row has no b_{-1} column
            return gamma_raw(n)

        return ThreeTermCoeffs(alpha=alpha, beta=beta, gamma=gamma, form="FORM_R3A")
    gamma1 = eff["gamma1_eff"]

    def alpha2(n):
        return 0.0j if n == -1 else alpha_raw(n)

    def gamma2(n):
        return gamma1 if n == 1 else gamma_raw(n)

    return ThreeTermCoeffs(alpha=alpha2, beta=beta_raw, gamma=gamma2, form="FORM_R2A")


def build_pair_coulomb(pair_id: int, params: DcheParams, n_terms: int = 60):
    """Truncated Coulomb pair (U at infinity, U at zero).

    Termination follows the same condition, with the same N, as the
    corresponding power/hypergeometric pair.
    """
    tc = coulomb_coeffs(pair_id, params)
    n_fin = finite_series_condition(pair_id, params)
    if n_fin is not None:
        seq = generate(tc, n_fin - 1, finite_n=n_fin)
    else:
        seq = generate_minimal(tc, n_terms)
    g_inf, g_zero, s_inf, s_zero, hp = _coulomb_layout(pair_id, params)
    u_inf = DcheSolution(
        family="HYP_U_IN_Z", pair_id=pair_id, variant="AT_INF", params=params,
        coeffs=seq, gauge=g_inf, scheme=s_inf, sector_of="-2i*omega*z",
    )
    u_zero = DcheSolution(
        family="HYP_U_IN_1/Z", pair_id=pair_id, variant="AT_ZERO", params=params,
        coeffs=seq, gauge=g_zero, scheme=s_zero,
        sector_of=("B1/z" if hp > 0 else "-B1/z"), halfplane_sign=hp,
    )
    return u_inf, u_zero

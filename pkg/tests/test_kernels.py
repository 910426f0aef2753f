"""Integral relations: kernels, transforms, boundary terms, closed forms."""

import warnings

import pytest

from dcheun.core import DcheParams
from dcheun.errors import BranchError, ConditionError
from dcheun.kernels import (
    KernelSpec,
    appendix_closed_form,
    appendix_integral,
    kernel_value,
    r3_companion,
    verify_adjoint,
    verify_boundary_terms,
    verify_transform,
    whittaker_index_check,
)
from dcheun.recurrence import finite_series_condition, tridiag_eigen
from dcheun.solutions import build_pair_power, power_coeffs

# i eta = -1.3 satisfies the K1 condition Re(B2/2 - i eta - 1) > 0 and
# terminates pair 1 at N = 2; i eta = -2.7 does the same for K2 / pair 2
P_K1 = DcheParams(1.0, 0.6, 0.2, 0.5j, 1.3j)
P_K2 = DcheParams(1.0, 0.6, 0.2, 0.5j, 2.7j)


def closing_b3(pair_id: int, p: DcheParams, n_fin: int) -> complex:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ev = tridiag_eigen(power_coeffs(pair_id, p.with_b3(0.0)), n_fin)
    return -complex(ev.values[0])


@pytest.fixture(scope="module")
def k1_setup():
    n = finite_series_condition(1, P_K1)
    assert n == 2
    pp = P_K1.with_b3(closing_b3(1, P_K1, n))
    return pp, build_pair_power(1, pp), KernelSpec("K1", pp)


@pytest.fixture(scope="module")
def k2_setup():
    n = finite_series_condition(2, P_K2)
    assert n == 2
    pp = P_K2.with_b3(closing_b3(2, P_K2, n))
    return pp, build_pair_power(2, pp), KernelSpec("K2", pp)


def test_adjoint_identity_both_kernels():
    assert verify_adjoint(KernelSpec("K1", P_K1)) < 1e-6
    assert verify_adjoint(KernelSpec("K2", P_K2)) < 1e-6


def test_adjoint_identity_fault_injection():
    # a corrupted power exponent must break the identity (sensitivity check
    # that the verifier is not trivially passing)
    assert verify_adjoint(KernelSpec("K1", P_K1), exponent_shift=0.01) > 1e-4


def test_adjoint_identity_sign_flipped_companion():
    comp = r3_companion(KernelSpec("K1", P_K1))
    assert comp.params.omega == -P_K1.omega and comp.params.eta == -P_K1.eta
    assert verify_adjoint(comp) < 1e-6


def test_kernel_branch_point_rejected():
    spec = KernelSpec("K1", P_K1)
    # solve xi(z, t) = 1 for t at fixed z
    z = 1.0
    t = P_K1.b1 / (-2j * P_K1.omega * z)
    with pytest.raises(BranchError):
        kernel_value(spec, z, t)


def test_transform_ratio_constancy_k1(k1_setup):
    pp, pair, spec = k1_setup
    rep = verify_transform(pair, spec, [0.8, 1.1, 1.4, 0.9 + 0.3j])
    assert rep.passed and rep.max_rel_dev < 1e-6


def test_transform_ratio_constancy_k2(k2_setup):
    pp, pair, spec = k2_setup
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = verify_transform(pair, spec, [-0.8, -1.1, -1.4])
    assert rep.passed and rep.max_rel_dev < 1e-6


def test_transform_wrong_halfplane_rejected(k1_setup):
    _, pair, spec = k1_setup
    with pytest.raises(ConditionError):
        verify_transform(pair, spec, [-1.0])


def test_transform_violated_parameter_condition_rejected():
    # Re(B2/2 - i eta - 1) = -0.2 < 0: boundary terms would not vanish
    p_bad = DcheParams(1.0, 0.6, 0.3, 0.5j, 0.5j)
    pair = build_pair_power(1, p_bad)
    with pytest.raises(ConditionError):
        verify_transform(pair, KernelSpec("K1", p_bad), [1.0])


def test_transform_fault_injection_breaks_constancy(k1_setup):
    _, pair, spec = k1_setup
    rep = verify_transform(pair, spec, [0.8, 1.1, 1.4], exponent_shift=0.05)
    assert not rep.passed and rep.max_rel_dev > 1e-3


@pytest.mark.parametrize("which,z", [("K1", 1.1), ("K2", -1.1)])
def test_boundary_term_decay(which, z, k1_setup, k2_setup):
    _, pair, spec = k1_setup if which == "K1" else k2_setup
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        br = verify_boundary_terms(pair, spec, z)
    assert br.vanishes_at_1 and br.vanishes_at_inf
    assert abs(br.fitted_eps_slope - br.predicted_eps_slope) < 0.05 * abs(
        br.predicted_eps_slope
    )
    assert abs(br.fitted_decay_rate - br.predicted_decay_rate) < 0.05 * abs(
        br.predicted_decay_rate
    )


def test_boundary_term_negative_control():
    # violated parameter condition: the finite-endpoint term must not vanish
    p_bad = DcheParams(1.0, 0.6, 0.3, 0.5j, 0.5j)
    pair = build_pair_power(1, p_bad)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        br = verify_boundary_terms(pair, KernelSpec("K1", p_bad), 1.1)
    assert not br.vanishes_at_1


def test_appendix_a1_quadrature_vs_closed_form(rng):
    for _ in range(20):
        kw = dict(
            alpha=rng.uniform(0.3, 1.5) + 1j * rng.uniform(-0.3, 0.3),
            beta=rng.uniform(0.2, 2.0) + 1j * rng.uniform(-0.3, 0.3),
            y=rng.uniform(0.5, 2.5) + 1j * rng.uniform(-0.4, 0.4),
        )
        lhs = appendix_integral("A1", **kw)
        rhs = appendix_closed_form("A1", **kw)
        assert abs(lhs - rhs) / abs(rhs) < 1e-8


@pytest.mark.parametrize("which", ["A2", "A3"])
def test_appendix_a2_a3_quadrature_vs_closed_form(which, rng):
    for _ in range(20):
        kw = dict(
            kappa=rng.uniform(-0.5, 0.5) + 1j * rng.uniform(-0.2, 0.2),
            lam=rng.uniform(-0.3, 0.3),
            mu=rng.uniform(0.3, 1.2),
            a=rng.uniform(0.8, 2.0),
        )
        lhs = appendix_integral(which, **kw)
        rhs = appendix_closed_form(which, **kw)
        assert abs(lhs - rhs) / abs(rhs) < 1e-8


def test_appendix_preconditions():
    with pytest.raises(ConditionError):
        appendix_integral("A1", alpha=-0.5, beta=1.0, y=1.0)
    with pytest.raises(ConditionError):
        appendix_integral("A2", kappa=0.3, lam=0.2, mu=-0.1, a=1.5)


def test_whittaker_index_misprint_detected():
    # the identity holds with second index lam + mu/2 and fails with the
    # misprinted lam - mu/2
    assert whittaker_index_check(0.3, 0.2, 0.8, 1.5, corrected=True) < 1e-8
    assert whittaker_index_check(0.3, 0.2, 0.8, 1.5, corrected=False) > 1e-3

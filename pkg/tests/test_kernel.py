import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cbpnet.kernel import (AttachmentKernel, KernelError, NoMalthusianRoot, UncertifiedError, eval_kernel,
                           malthusian_rate, rho_hat, validate_assumptions)


def partial_sum(f, theta, terms):
    """Plain truncated series (no tail), the independent oracle."""
    i = np.arange(1, terms + 1, dtype=np.float64)
    fi = f(i)
    logs = np.cumsum(np.log(fi) - np.log(theta + fi))
    return float(np.exp(logs).sum())


# values of the truncated series at 10**6 terms, computed once and frozen
FROZEN_PARTIAL_LINEAR_THETA3 = 0.499999999997
FROZEN_PARTIAL_LINEAR1_THETA4 = 0.6666666666666662


def test_eval_kernel_examples():
    assert eval_kernel(AttachmentKernel.linear(1, 0), 5) == 5
    assert eval_kernel(AttachmentKernel.constant(2.5), 99) == 2.5
    assert eval_kernel(AttachmentKernel.linear(1, 0.5), 3) == 3.5


def test_eval_kernel_rejects_bad_index():
    with pytest.raises(ValueError):
        eval_kernel(AttachmentKernel.linear(1, 0), 0)


def test_custom_nonpositive_rejected():
    with pytest.raises(KernelError):
        AttachmentKernel.custom([1.0, 0.0, 2.0], growth="bounded")


def test_rho_constant_geometric():
    r = rho_hat(AttachmentKernel.constant(2.0), 4.0)
    assert abs(r.value - 0.5) <= max(r.remainder_bound, 1e-15)
    assert not r.divergent


def test_rho_linear_closed_form_matches_partial_sums():
    oracle = partial_sum(lambda i: i, 3.0, 10**6)
    assert oracle == pytest.approx(FROZEN_PARTIAL_LINEAR_THETA3, abs=1e-15)
    r = rho_hat(AttachmentKernel.linear(1, 0), 3.0)
    # the partial sum misses a tail of order 1/N; the closed form is 1/2
    assert abs(r.value - 0.5) < 1e-13
    assert abs(r.value - oracle) < 1e-11
    oracle = partial_sum(lambda i: i + 1.0, 4.0, 10**6)
    assert oracle == pytest.approx(FROZEN_PARTIAL_LINEAR1_THETA4, abs=1e-15)
    assert rho_hat(AttachmentKernel.linear(1, 1), 4.0).value == pytest.approx(2 / 3, abs=1e-13)


def test_rho_linear_divergent():
    assert rho_hat(AttachmentKernel.linear(1, 0), 1.0).divergent
    assert rho_hat(AttachmentKernel.linear(1, 0), 0.5).divergent


def test_rho_rejects_bad_arguments():
    with pytest.raises(ValueError):
        rho_hat(AttachmentKernel.linear(1, 0), 0.0)
    with pytest.raises(ValueError):
        rho_hat(AttachmentKernel.linear(1, 0), 1.0, eps=0.0)


@settings(max_examples=60, deadline=None)
@given(c=st.floats(0.2, 3.0), beta=st.floats(0.0, 3.0), t1=st.floats(0.05, 20.0), dt=st.floats(0.01, 10.0))
def test_rho_monotone_in_theta(c, beta, t1, dt):
    k = AttachmentKernel.linear(c, beta)
    a, b = rho_hat(k, t1), rho_hat(k, t1 + dt)
    if a.divergent:
        return
    assert a.value >= b.value - 1e-12


@settings(max_examples=60, deadline=None)
@given(beta=st.floats(0.05, 20.0), theta=st.floats(0.05, 50.0))
def test_rho_constant_exact(beta, theta):
    r = rho_hat(AttachmentKernel.constant(beta), theta)
    assert abs(r.value - beta / theta) <= r.remainder_bound + 1e-12 * beta / theta


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_malthusian_constant(beta):
    assert abs(malthusian_rate(AttachmentKernel.constant(beta)).lam - beta) <= 1e-10


@pytest.mark.parametrize("beta", [0.0, 0.5, 1.0])
def test_malthusian_linear(beta):
    res = malthusian_rate(AttachmentKernel.linear(1, beta))
    assert abs(res.lam - (2 + beta)) <= 1e-8
    lo, hi = res.bracket
    assert lo <= res.lam <= hi


@settings(max_examples=25, deadline=None)
@given(c=st.floats(0.1, 2.0), beta=st.floats(0.05, 2.0))
def test_solver_consistency(c, beta):
    k = AttachmentKernel.linear(c, beta)
    res = malthusian_rate(k, tol=1e-10)
    r = rho_hat(k, res.lam)
    assert abs(r.value - 1) <= 1e-10 + r.remainder_bound + 1e-12
    # for f(k) = ck + beta the root solves (c + beta)/(theta - c) = 1
    assert res.lam == pytest.approx(2 * c + beta, rel=1e-9)


def test_malthusian_custom_bounded_matches_constant():
    k = AttachmentKernel.custom([1.5] * 20, growth="bounded")
    assert malthusian_rate(k).lam == pytest.approx(1.5, abs=1e-10)


def test_malthusian_custom_linear_matches_linear():
    k = AttachmentKernel.custom(lambda i: i + 0.5, growth="linear", slope=1.0, table_size=50)
    assert malthusian_rate(k).lam == pytest.approx(2.5, abs=1e-9)


def test_uncertified_custom():
    k = AttachmentKernel.custom([1.0, 2.0, 3.0])
    assert not k.certified
    with pytest.raises(UncertifiedError):
        malthusian_rate(k)
    r = rho_hat(k, 2.0)
    assert not r.certified and r.remainder_bound == np.inf
    with pytest.raises(UncertifiedError):
        k.evaluate([4])


def test_no_root_for_zero_slope_custom_that_decays():
    # a kernel whose series stays below one: f drops to a tiny constant
    k = AttachmentKernel.custom([1e-9] * 5, growth="bounded", C_f=1.0, f_star=1e-9)
    res = malthusian_rate(k)
    assert res.lam == pytest.approx(1e-9, rel=1e-6)


def test_validate_assumptions_examples():
    r = validate_assumptions(AttachmentKernel.linear(1, 0), 10**4)
    assert r.ok and r.C_f == 1 and r.f_star == 1
    sq = AttachmentKernel.custom(lambda i: float(i * i), growth="linear", slope=200.0, table_size=100, C_f=1.0)
    r = validate_assumptions(sq, 100)
    assert not r.linear_domination and r.linear_domination_failure == 2
    r = validate_assumptions(AttachmentKernel.constant(0.5), 100)
    assert r.ok and r.lam == pytest.approx(0.5, abs=1e-10)


def test_kernel_json_roundtrip():
    for k in (AttachmentKernel.linear(1, 0.5), AttachmentKernel.constant(2.0),
              AttachmentKernel.custom([1.0, 2.0, 2.5], growth="linear", slope=0.5)):
        k2 = AttachmentKernel.from_dict(k.to_dict())
        assert np.array_equal(k.evaluate(np.arange(1, 30)), k2.evaluate(np.arange(1, 30)))


def test_determinism_and_speed():
    k = AttachmentKernel.linear(1, 0.5)
    t = time.perf_counter()
    a = malthusian_rate(k)
    assert time.perf_counter() - t < 1.0
    assert malthusian_rate(k).lam == a.lam
    assert rho_hat(k, 3.0).value == rho_hat(k, 3.0).value

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from mnlab.weights import (
    LogPowerWeight,
    StandardWeight,
    TabulatedWeight,
    audit_dcheck,
    audit_dhat,
    audit_gaps,
    audit_weight,
    choose_K,
    dcheck_passes,
    dhat_passes,
    lemma_3_2_check,
    lemma_a_constants,
    omega_hat,
    r_grid,
    weight_from_dict,
    weight_shift,
)

INV_LOG = LogPowerWeight(-1.0, -2.0)


# -- tails -------------------------------------------------------------------------


def test_omega_hat_examples():
    assert abs(omega_hat(StandardWeight(0.0), 0.75) - 0.25) < 1e-15
    assert abs(omega_hat(StandardWeight(1.0), 0.5) - 0.125) < 1e-15
    assert abs(omega_hat(TabulatedWeight(((0.0, 2.0), (1.0, 2.0))), 0.25) - 1.5) < 1e-14


def test_omega_hat_rejects_unit_radius():
    with pytest.raises(ValueError):
        omega_hat(StandardWeight(0.0), 1.0)


@pytest.mark.parametrize(
    "w",
    [
        StandardWeight(0.5),
        LogPowerWeight(0.0, 1.0),
        LogPowerWeight(1.0, -1.0),
        TabulatedWeight(((0.0, 1.0), (0.3, 4.0), (0.8, 0.5), (1.0, 2.0))),
        TabulatedWeight(((0.0, 1.0), (0.5, 3.0), (1.0, 0.0)), shift=1.5),
    ],
)
def test_tail_matches_quadrature_of_density(w):
    for r in (0.0, 0.3, 0.9, 0.99):
        oracle, _ = integrate.quad(lambda t: float(w.density(t)), r, 1.0, epsabs=0, epsrel=1e-12, limit=200, points=[0.3, 0.5, 0.8])
        assert abs(omega_hat(w, r) - oracle) < 1e-9 * oracle


def test_inverse_log_tail_closed_form():
    for x in (0.5, 1e-5, 1e-30):
        assert abs(INV_LOG.tail_gap(x) - 1 / math.log(math.e / x)) < 1e-12


def test_tails_strictly_decrease():
    r = 1 - 2.0 ** -np.arange(0, 40, 0.5)
    for w in (StandardWeight(0.0), StandardWeight(2.0), LogPowerWeight(0.0, 1.0), INV_LOG):
        t = np.array([omega_hat(w, float(x)) for x in r])
        assert np.all(np.diff(t) < 0)


def test_invalid_weights_rejected():
    with pytest.raises(ValueError):
        StandardWeight(-1.0)
    with pytest.raises(ValueError):
        LogPowerWeight(-1.0, -0.5)
    with pytest.raises(ValueError):
        TabulatedWeight(((0.1, 1.0), (1.0, 1.0)))
    with pytest.raises(ValueError):
        TabulatedWeight(((0.0, -1.0), (1.0, 1.0)))
    with pytest.raises(ValueError):
        weight_from_dict({"kind": "mystery"})


def test_weight_from_dict_roundtrip():
    for w in (StandardWeight(1.0), LogPowerWeight(0.0, 2.0), TabulatedWeight(((0.0, 1.0), (1.0, 3.0)), 0.5)):
        assert weight_from_dict(w.to_dict()) == w


# -- audits ------------------------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0])
def test_standard_audits_closed_form(alpha):
    w = StandardWeight(alpha)
    assert abs(audit_dhat(w) - 2 ** (alpha + 1)) < 1e-9
    assert abs(audit_dcheck(w, 2) - 2 ** (alpha + 1)) < 1e-9
    assert abs(audit_dcheck(w, 3) - 3 ** (alpha + 1)) < 1e-9
    assert choose_K(w) == 2


def test_tabulated_linear_density_matches_alpha_one():
    w = TabulatedWeight(((0.0, 1.0), (1.0, 0.0)))
    assert abs(audit_dhat(w) - 4.0) < 1e-9


def test_inverse_log_weight_fails_lower_doubling():
    # tail(r) / tail(1 - (1 - r) / K) = log(eK / x) / log(e / x) -> 1
    x = float(audit_gaps()[-1])
    assert abs(audit_dcheck(INV_LOG, 2) - math.log(2 * math.e / x) / math.log(math.e / x)) < 1e-9
    assert dhat_passes(INV_LOG)
    for K in (2, 8, 64):
        assert not dcheck_passes(INV_LOG, K)
    audit = audit_weight(INV_LOG)
    assert audit.K is None and not audit.dcheck_pass and not audit.in_D


def test_audit_grid_must_be_inside_unit_interval():
    with pytest.raises(ValueError):
        audit_dhat(StandardWeight(0.0), [0.5, 1.0])


# -- decay constants -------------------------------------------------------------------------


@pytest.mark.parametrize(
    "w, alpha0",
    [(StandardWeight(0.0), 1.0), (StandardWeight(2.0), 3.0), (TabulatedWeight(((0.0, 3.0), (1.0, 3.0))), 1.0)],
)
def test_decay_exponent(w, alpha0):
    c = lemma_a_constants(w)
    assert abs(c.alpha0 - alpha0) < 1e-6
    assert c.C_alpha >= 1


def test_decay_inequality_holds_on_nested_grid():
    for w in (StandardWeight(0.5), LogPowerWeight(0.0, 1.0), LogPowerWeight(1.0, -1.0)):
        c = lemma_a_constants(w)
        x = 2.0 ** (-0.2 * np.arange(200))
        t = w.tail_gap(x)
        # tail(s) <= C ((1 - s) / (1 - t))^alpha0 tail(t) for t <= s
        ratio = t[None, :] / t[:, None] * (x[:, None] / x[None, :]) ** c.alpha0
        assert np.triu(ratio).max() <= c.C_alpha * (1 + 1e-9)


def test_decay_lambda_makes_integral_bounded():
    w = StandardWeight(0.0)
    c = lemma_a_constants(w)
    # for tail = x the ratio is 1 / (1 - lam) - x^(1 - lam) lam / (1 - lam) ... finite iff lam > 1
    assert c.lam > 1.0
    assert math.isfinite(c.C_lam)


# -- radial grid -----------------------------------------------------------------------


def test_r_grid_examples():
    assert np.allclose(r_grid(2, 3), [0.0, 0.5, 0.75, 0.875], atol=0, rtol=0)
    assert abs(r_grid(3, 2)[2] - 8 / 9) < 1e-15
    assert r_grid(5, 1)[0] == 0.0
    with pytest.raises(ValueError):
        r_grid(1, 3)


@given(st.integers(2, 10), st.integers(1, 12))
def test_r_grid_strictly_increasing(K, j_max):
    r = r_grid(K, j_max)
    assert np.all(np.diff(r) > 0) and r[-1] < 1


# -- ring masses ------------------------------------------------------------------------------


def test_ring_mass_examples():
    c1, c2 = lemma_3_2_check(StandardWeight(0.0), 2)
    assert abs(c1 - 1) < 1e-9 and abs(c2 - 2) < 1e-9
    c1, c2 = lemma_3_2_check(StandardWeight(1.0), 2)
    # mass on [r, r'] = (x^2 - x^2 / 4) / 2, tail(r') = x^2 / 8
    assert abs(c1 - 3) < 1e-9 and abs(c2 - 4) < 1e-9


@settings(deadline=None, max_examples=20)
@given(st.floats(0.01, 100))
def test_ring_mass_scale_invariant(c):
    a = lemma_3_2_check(TabulatedWeight(((0.0, 1.0), (0.5, 2.0), (1.0, 1.0))), 2)
    b = lemma_3_2_check(TabulatedWeight(((0.0, c), (0.5, 2 * c), (1.0, c))), 2)
    assert np.allclose(a, b, rtol=1e-9)


def test_ring_mass_requires_audits():
    with pytest.raises(ValueError):
        lemma_3_2_check(INV_LOG, 2)


# -- shifts -------------------------------------------------------------------------------


def test_weight_shift_examples():
    assert weight_shift(StandardWeight(0.5), 1.5) == StandardWeight(2.0)
    w = LogPowerWeight(0.0, 1.0)
    assert weight_shift(w, 0) is w
    with pytest.raises(ValueError):
        weight_shift(w, -1)


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_shift_closure(beta):
    for w in (StandardWeight(0.0), LogPowerWeight(0.0, 1.0), TabulatedWeight(((0.0, 1.0), (1.0, 2.0)))):
        base = audit_weight(w)
        shifted = audit_weight(weight_shift(w, beta))
        assert base.in_D and shifted.in_D
        # the shifted density is the base density times (1 - r)^beta
        r = np.array([0.1, 0.6, 0.95])
        assert np.allclose(weight_shift(w, beta).density(r), w.density(r) * (1 - r) ** beta, rtol=1e-12)


def test_audit_report_fields():
    a = audit_weight(StandardWeight(1.0))
    d = a.to_dict()
    assert d["K"] == 2 and abs(d["C_hat"] - 4) < 1e-9 and d["in_D"]
    assert abs(d["C1"] - 3) < 1e-9 and abs(d["C2"] - 4) < 1e-9 and d["ring_mass_pass"]
    assert "smallest" in d["K_rule"]

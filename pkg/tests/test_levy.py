from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from multistop import (Contract, LevyModel, ModelError, PoleError, RefractionSpec,
                       laplace_exponent, laplace_exponent_derivative, validate)
from multistop.levy import refraction_exp_moment


def test_reference_exponent_values(ref_model):
    assert abs(laplace_exponent(ref_model, 1.0) - (-0.12)) < 1e-12
    assert abs(laplace_exponent_derivative(ref_model, 0.0) - (-0.64)) < 1e-12
    assert abs(laplace_exponent_derivative(ref_model, 1.0) - 0.15) < 1e-12
    assert laplace_exponent(ref_model, 0.0) == 0.0


def test_brownian_and_drift_only():
    bm = LevyModel(drift=0.0, sigma=math.sqrt(2.0))
    assert laplace_exponent(bm, 3.0) == pytest.approx(9.0, rel=1e-15)
    drift = LevyModel(drift=2.0)
    assert laplace_exponent(drift, -1.5) == -3.0
    assert drift.beta0 == math.inf


def test_vectorised_and_complex(rich_model):
    b = np.array([-1.0, 0.3, 1.2])
    vals = laplace_exponent(rich_model, b)
    assert vals.shape == (3,)
    for bi, vi in zip(b, vals):
        assert laplace_exponent(rich_model, float(bi)) == pytest.approx(vi, rel=1e-15)
    z = laplace_exponent(rich_model, 0.5 + 0.25j)
    assert isinstance(z, complex)
    # real on the real axis, conjugate symmetric
    assert laplace_exponent(rich_model, 0.5 - 0.25j) == pytest.approx(z.conjugate())


def test_pole_raises(rich_model):
    with pytest.raises(PoleError):
        laplace_exponent(rich_model, 2.5)
    with pytest.raises(PoleError):
        laplace_exponent(rich_model, -4.0 * (1 + 1e-14))
    with pytest.raises(PoleError):
        laplace_exponent_derivative(rich_model, 6.0)


@pytest.mark.parametrize("kwargs, msg", [
    (dict(drift=0.1, down_jump_rate=1.0, down_mix=((0.5, 1.0), (0.4, 2.0))), "sum"),
    (dict(drift=0.1, down_jump_rate=1.0, down_mix=((0.5, 1.0), (0.5, 1.0))), "merge"),
    (dict(drift=0.1, up_jump_rate=1.0, up_mix=((1.0, -2.0),)), "positive"),
    (dict(drift=0.1, sigma=-1.0), "sigma"),
    (dict(drift=0.1, down_jump_rate=1.0), "non-empty"),
    (dict(drift=0.1, up_jump_rate=1.0, up_mix=((1.5, 2.0), (-0.5, 3.0))), "positive"),
])
def test_model_rejects_bad_parameters(kwargs, msg):
    with pytest.raises(ModelError, match=msg):
        LevyModel(**kwargs)


def test_zero_rate_clears_mixture():
    m = LevyModel(drift=0.3, sigma=0.1, up_jump_rate=0.0, up_mix=((1.0, 0.5),))
    assert m.up_mix == () and m.beta0 == math.inf


def test_contract_and_refraction_validation():
    with pytest.raises(ModelError):
        Contract(strike=0.0, alpha=0.1)
    with pytest.raises(ModelError):
        Contract(strike=1.0, alpha=0.1, n_exercises=0)
    with pytest.raises(ModelError):
        RefractionSpec(shape=0, rate=1.0)
    with pytest.raises(ModelError):
        RefractionSpec(shape=1, rate=0.0)
    with pytest.raises(ModelError):
        RefractionSpec(shape=9, rate=1.0)
    r = RefractionSpec.from_mean(2.0, shape=2)
    assert r.rate == 1.0 and r.mean == 2.0


def test_validate_reference_passes(ref_model, ref_contract, unit_refraction):
    rep = validate(ref_model, ref_contract, unit_refraction)
    assert rep.ok, rep.lines()
    assert {c.name for c in rep.checks} == {"beta0", "assumption", "not_subordinator",
                                           "continuous_law", "refraction_rate",
                                           "refraction_moment"}


def test_validate_names_failures(ref_model):
    rep = validate(ref_model, Contract(50.0, -0.5), RefractionSpec(1, 0.3))
    assert set(rep.failures()) == {"assumption", "refraction_rate", "refraction_moment"}
    rep = validate(LevyModel(drift=0.1, up_jump_rate=1.0, up_mix=((1.0, 0.8),)), Contract(1.0, 1.0))
    assert "beta0" in rep.failures()
    rep = validate(LevyModel(drift=-0.1, down_jump_rate=1.0, down_mix=((1.0, 1.0),)),
                   Contract(1.0, 1.0))
    assert "not_subordinator" in rep.failures()


def test_boundary_assumption():
    # psi(1) == alpha < 0 with psi'(1) < 0 is admissible
    m = LevyModel(drift=-0.3, sigma=0.2)  # psi(1) = -0.28, psi'(1) = -0.26
    alpha = laplace_exponent(m, 1.0)
    rep = validate(m, Contract(1.0, alpha))
    assert rep["assumption"].passed


def test_refraction_moment_closed_form(ref_model):
    # E[exp(-alpha d + X_d)] = (q / (q + alpha - psi(1)))^m
    r = RefractionSpec(2, 1.0)
    assert refraction_exp_moment(ref_model, -0.02, r) == pytest.approx((1 / 1.1) ** 2, rel=1e-14)


rates = st.floats(0.3, 8.0)


@st.composite
def models(draw):
    nd = draw(st.integers(0, 2))
    nu = draw(st.integers(0, 2))
    dr = sorted(set(round(draw(rates), 3) for _ in range(nd)))
    ur = sorted(set(round(draw(st.floats(1.2, 8.0)), 3) for _ in range(nu)))
    dw = np.full(len(dr), 1.0 / len(dr)) if dr else []
    uw = np.full(len(ur), 1.0 / len(ur)) if ur else []
    return LevyModel(drift=draw(st.floats(-1, 1)), sigma=draw(st.floats(0.05, 1.0)),
                     down_jump_rate=draw(st.floats(0.1, 2)) if dr else 0.0,
                     down_mix=tuple(zip(dw, dr)),
                     up_jump_rate=draw(st.floats(0.1, 2)) if ur else 0.0,
                     up_mix=tuple(zip(uw, ur)))


@given(models(), st.floats(-0.9, 1.1))
def test_derivative_matches_finite_difference(model, beta):
    h = 1e-6
    fd = (laplace_exponent(model, beta + h) - laplace_exponent(model, beta - h)) / (2 * h)
    assert laplace_exponent_derivative(model, beta) == pytest.approx(fd, rel=1e-6, abs=1e-6)


@given(models(), st.floats(-0.9, 1.1))
def test_exponent_matches_moment_generating_function(model, beta):
    # the jump MGFs exist only inside the strip between the poles
    assume(-min(model.down_rates, default=np.inf) * 0.95 < beta < min(model.up_rates, default=np.inf) * 0.95)
    # psi = c b + s^2 b^2 / 2 + lambda_d (E e^{-b J_d} - 1) + lambda_u (E e^{b J_u} - 1)
    from scipy.integrate import quad
    d = model.drift * beta + 0.5 * model.sigma**2 * beta**2
    for lam, mix, sign in ((model.down_jump_rate, model.down_mix, -1),
                           (model.up_jump_rate, model.up_mix, 1)):
        for w, r in mix:
            mgf = quad(lambda y: r * math.exp((sign * beta - r) * y), 0, np.inf)[0]
            d += lam * w * (mgf - 1.0)
    assert laplace_exponent(model, beta) == pytest.approx(d, rel=1e-8, abs=1e-10)

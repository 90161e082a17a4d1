from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from multistop import (DegreeCapError, DivergentConvolutionError, ExpMixtureMeasure, ExpPoly,
                       LevyModel, convolve_density, evaluate, integral, integrate_measure,
                       linear_combine, mul_exp, resolvent_density, shift)
from multistop import expfun
from multistop.expfun import from_text, head_integral, reflect, tail_integral, to_text

GOLDEN = Path(__file__).parent / "data" / "golden_exppoly.txt"


def quad_conv(f, r, x, extra=()):
    """Oracle: int f(x+y) r(y) dy split at every kink.

    The range is cut at +-200, where the integrand is below exp(-60), to keep
    quad away from inf * 0 in the overflowing factor.
    """
    pts = sorted({0.0, *[b - x for b in f.breakpoints], *r.breakpoints, *extra})
    edges = [-200.0, *pts, 200.0]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += quad(lambda y: f(x + y) * r(y), a, b, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return total


def test_evaluate_examples():
    assert ExpPoly.exp(1.0)(0.0) == 1.0
    assert ExpPoly.call_payoff(50.0)(math.log(50.0)) == 0.0
    f = ExpPoly.term([0.0, 1.0], -1.0, lo=0.0)
    assert f(2.0) == pytest.approx(2 * math.exp(-2.0), rel=1e-15)
    assert f(-1e-9) == 0.0
    # right-continuous at breakpoints
    g = ExpPoly.constant(1.0).restrict(1.0, None)
    assert g(1.0) == 1.0 and g(np.nextafter(1.0, 0)) == 0.0


def test_vectorised_evaluation():
    f = ExpPoly.call_payoff(2.0) + ExpPoly.term([1, 2, 3], -0.5, lo=-1, hi=2)
    xs = np.linspace(-3, 3, 25)
    assert np.allclose(f(xs), [f(float(x)) for x in xs], rtol=0, atol=0)
    assert evaluate(f, xs).shape == xs.shape


def test_closure_examples():
    a = 0.7
    assert shift(ExpPoly.exp(1.0), a)(0.3) == pytest.approx(math.exp(a) * math.exp(0.3), rel=1e-15)
    f = ExpPoly.call_payoff(3.0) + ExpPoly.term([0, 1], 0.2, lo=-1)
    assert linear_combine([(1.0, f), (-1.0, f)]).is_zero
    ind = ExpPoly.constant(1.0).restrict(0.0, None)
    g = mul_exp(ind, 0.4)
    assert g(2.0) == pytest.approx(math.exp(0.8), rel=1e-15) and g(-0.5) == 0.0


def test_convolution_examples():
    r = resolvent_density(LevyModel(drift=0.0, sigma=1.0), 2.0)
    # standard BM resolvent: sqrt(2p)/2 exp(-sqrt(2p)|y|)
    ys = np.array([-1.3, -0.1, 0.0, 0.4, 2.0])
    assert np.allclose(r(ys), math.sqrt(4.0) / 2 * np.exp(-2.0 * np.abs(ys)), rtol=1e-14)
    one = convolve_density(ExpPoly.constant(1.0), r)
    assert np.allclose(one(np.linspace(-5, 5, 11)), 1.0, rtol=1e-14)
    g = convolve_density(ExpPoly.exp(1.0), r)
    assert g(0.3) == pytest.approx(math.exp(0.3) * 2.0 / 1.5, rel=1e-14)
    ind = ExpPoly.constant(1.0).restrict(0.0, None)
    e = ExpPoly.term([1.0], -1.0, lo=0.0)
    h = convolve_density(ind, e)
    assert h(1.0) == pytest.approx(1.0, rel=1e-15)
    assert h(-0.7) == pytest.approx(math.exp(-0.7), rel=1e-14)


def test_divergent_convolution_reports_tail():
    r = ExpPoly((0.0,), [{2.0: [1.0]}, {-1.5: [1.0]}])
    with pytest.raises(DivergentConvolutionError) as e:
        convolve_density(ExpPoly.exp(1.5), r)
    assert e.value.tail == "right" and e.value.growth == 1.5 and e.value.decay == 1.5
    with pytest.raises(DivergentConvolutionError) as e:
        convolve_density(ExpPoly.exp(-2.5), r)
    assert e.value.tail == "left"


def test_exponent_collision_yields_polynomial():
    # e^{-y} density against f = e^{x} 1{x<0}: integrand e^{x+y} e^{-y} is flat in y
    f = ExpPoly.exp(1.0).restrict(None, 0.0)
    r = ExpPoly.term([1.0], -1.0, lo=0.0)
    g = convolve_density(f, r)
    for x in (-2.0, -0.5):
        assert g(x) == pytest.approx(-x * math.exp(x), rel=1e-13)
    assert g.max_degree() == 1


def test_integrate_measure_examples():
    assert integrate_measure(ExpPoly.constant(1.0), ExpMixtureMeasure(1.0), 3.0) == 1.0
    m = ExpMixtureMeasure(0.0, ((1.0, 2.0),))
    b = 0.8
    assert integrate_measure(ExpPoly.exp(1.0), m, b) == pytest.approx(math.exp(b), rel=1e-14)
    with pytest.raises(DivergentConvolutionError):
        integrate_measure(ExpPoly.exp(2.5), m, b)


def test_integrals_against_quadrature():
    f = ExpPoly.call_payoff(5.0).restrict(None, 3.0) + ExpPoly.term([1, -0.5, 0.25], -0.8, lo=-2)
    for lo, hi in [(-1.0, 2.5), (0.3, np.inf), (-np.inf, 1.0)]:
        ref = quad(f, max(lo, -60), min(hi, 60), points=[math.log(5.0), 3.0] if np.isfinite(lo) and np.isfinite(hi) else None,
                   limit=200, epsabs=1e-13)[0]
        assert integral(f, lo, hi) == pytest.approx(ref, rel=1e-9)
    t, h = tail_integral(ExpPoly.term([1.0], -2.0, lo=0)), head_integral(ExpPoly.term([1.0], 1.0, hi=0))
    assert t(0.5) == pytest.approx(math.exp(-1.0) / 2, rel=1e-14)
    assert h(-1.0) == pytest.approx(math.exp(-1.0), rel=1e-14)


def test_reflect():
    f = ExpPoly.term([1, 2], 0.3, lo=-1, hi=2)
    g = reflect(f)
    xs = np.array([-1.5, -0.5, 0.2, 0.9])
    assert np.allclose(g(xs), f(-xs), rtol=1e-14)


def test_degree_cap():
    with pytest.raises(DegreeCapError):
        ExpPoly((), [{0.0: np.ones(expfun.MAX_DEGREE + 2)}])


def test_canonical_merge_and_dedup():
    f = ExpPoly.exp(0.5)
    bps, pieces = f.with_breakpoints([-1.0, 0.3, 2.0])
    g = ExpPoly(bps, pieces)
    assert g.breakpoints == () and len(g.pieces) == 1
    h = ExpPoly((1.0, 1.0 + 1e-13), [{}, {0.0: [1.0]}, {0.0: [1.0]}])
    assert h.breakpoints == (1.0,)


def test_serialisation_golden():
    f = (ExpPoly.call_payoff(50.0) + ExpPoly.term([0.5, -0.25, 0.125], -1.5, lo=3.0, hi=4.5)
         + ExpPoly((3.5,), [{1.25: [2.0]}, {}]))
    text = to_text(f)
    assert text == GOLDEN.read_text()
    g = from_text(text)
    xs = np.linspace(2.0, 6.0, 41)
    assert np.array_equal(g(xs), f(xs))


# -- property tests -----------------------------------------------------------

@st.composite
def exppolys(draw, growth=(-0.9, 0.9), max_pieces=3):
    n_bp = draw(st.integers(0, max_pieces - 1))
    bps = sorted(set(round(draw(st.floats(-2.0, 2.0)), 3) for _ in range(n_bp)))
    pieces = []
    for i in range(len(bps) + 1):
        terms = {}
        for _ in range(draw(st.integers(0, 2))):
            th = round(draw(st.floats(*growth)), 3)
            coeffs = [round(draw(st.floats(-2, 2)), 3) for _ in range(draw(st.integers(1, 3)))]
            terms[th] = coeffs
        pieces.append(terms)
    return ExpPoly(bps, pieces)


@st.composite
def densities(draw):
    # two-sided density with decay rates strictly faster than the f growth bound
    left = {round(draw(st.floats(1.2, 4.0)), 3): [round(draw(st.floats(0.1, 1.0)), 3)]}
    right = {}
    for _ in range(draw(st.integers(1, 2))):
        right[-round(draw(st.floats(1.2, 4.0)), 3)] = [round(draw(st.floats(0.1, 1.0)), 3),
                                                      round(draw(st.floats(0.0, 0.5)), 3)]
    return ExpPoly((0.0,), [left, right])


@settings(max_examples=100)
@given(exppolys(), densities(), st.floats(-3.0, 3.0))
def test_convolution_matches_quadrature(f, r, x):
    g = convolve_density(f, r)
    ref = quad_conv(f, r, x)
    assert abs(g(x) - ref) <= 1e-8 * max(abs(ref), 1.0)


@settings(max_examples=30)
@given(exppolys(), exppolys(), densities(), st.floats(-2, 2), st.floats(-2, 2))
def test_convolution_is_linear(f1, f2, r, a, b):
    lhs = convolve_density(linear_combine([(a, f1), (b, f2)]), r)
    rhs = linear_combine([(a, convolve_density(f1, r)), (b, convolve_density(f2, r))])
    xs = np.linspace(-3, 3, 13)
    assert np.allclose(lhs(xs), rhs(xs), rtol=1e-10, atol=1e-10)


@settings(max_examples=30)
@given(exppolys(), densities(), st.floats(-1.5, 1.5))
def test_shift_commutes_with_convolution(f, r, a):
    xs = np.linspace(-3, 3, 13)
    lhs = convolve_density(shift(f, a), r)(xs)
    rhs = shift(convolve_density(f, r), a)(xs)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-10)


@settings(max_examples=50)
@given(exppolys(), st.lists(st.floats(-3, 3), max_size=4), st.randoms(use_true_random=False))
def test_canonical_form_is_unique(f, extra, rnd):
    bps, pieces = f.with_breakpoints(extra)
    g = ExpPoly(bps, pieces)
    assert np.allclose(g.breakpoints, f.breakpoints, rtol=0, atol=expfun.BREAKPOINT_TOL)
    xs = np.array([rnd.uniform(-4, 4) for _ in range(50)])
    # inside the merge tolerance either side of a breakpoint is a valid answer
    near = [b for b in (*f.breakpoints, *extra)]
    xs = xs[[all(abs(x - b) > 1e-9 for b in near) for x in xs]]
    assert np.allclose(g(xs), f(xs), rtol=1e-12, atol=1e-12)


@settings(max_examples=50)
@given(exppolys(), st.floats(-2, 2), st.floats(-1, 1))
def test_shift_and_mul_exp_pointwise(f, a, c):
    xs = np.linspace(-3, 3, 17)
    assert np.allclose(shift(f, a)(xs), f(xs + a), rtol=1e-12, atol=1e-12)
    assert np.allclose(mul_exp(f, c)(xs), np.exp(c * xs) * f(xs), rtol=1e-12, atol=1e-12)


@settings(max_examples=40)
@given(exppolys(growth=(-0.9, 0.9)), st.floats(-2, 2))
def test_integrate_measure_matches_quadrature(f, b):
    m = ExpMixtureMeasure(0.3, ((0.7, 1.5), (-0.2, 3.0)))
    pts = sorted({0.0, *[x - b for x in f.breakpoints if x > b]})
    ref = 0.3 * f(b)
    edges = [*pts, 200.0]
    for lo, hi in zip(edges[:-1], edges[1:]):
        ref += quad(lambda y: f(b + y) * m.density(y), lo, hi, epsabs=1e-14, epsrel=1e-13)[0]
    assert integrate_measure(f, m, b) == pytest.approx(ref, rel=1e-8, abs=1e-10)

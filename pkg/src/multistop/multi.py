"""Multiple exercises separated by random refraction periods.

The k-th threshold is the unique root of the first-order function

    u0_k(x) = (exp(x1) - exp(x)) / psi_plus(-1) + R[u_{k-1}](x)

where R[f](x) = E[exp(-alpha delta) f(x + X_delta)] for the Erlang refraction
period delta.  R is exact in the ExpPoly algebra: an Erlang(m, q) time is a sum
of m exponential times, so R is m convolutions with the resolvent density at
rate q + alpha, times (q / (q + alpha))^m.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import BracketFailureError, MultistopError, RateTooSmallError
from .expfun import ExpPoly, convolve_density, integrate_measure, linear_combine
from .levy import Contract, LevyModel, RefractionSpec
from .single import SingleStopSolution, require_valid, single_u, solve_single
from .wiener_hopf import WienerHopfFactor, resolvent_density

log = logging.getLogger(__name__)

BRACKET_OFFSET = 1e-12
MAX_BISECTIONS = 200


@lru_cache(maxsize=256)
def _cached_resolvent(model: LevyModel, p: float) -> ExpPoly:
    return resolvent_density(model, p)


@dataclass(frozen=True)
class RefractionOperator:
    """f -> E[exp(-alpha delta) f(x + X_delta)]."""

    model: LevyModel
    refraction: RefractionSpec
    alpha: float

    def __post_init__(self):
        if not self.rate > 0:
            raise RateTooSmallError(
                f"refraction rate + alpha = {self.rate!r} must be > 0")

    @property
    def rate(self) -> float:
        return self.refraction.rate + self.alpha

    @property
    def scale(self) -> float:
        return (self.refraction.rate / self.rate) ** self.refraction.shape

    def __call__(self, f: ExpPoly) -> ExpPoly:
        r = _cached_resolvent(self.model, self.rate)
        g = f
        for _ in range(self.refraction.shape):
            g = convolve_density(g, r)
        return g * self.scale


def refraction_operator(f: ExpPoly, model: LevyModel, refraction: RefractionSpec,
                        alpha: float) -> ExpPoly:
    return RefractionOperator(model, refraction, alpha)(f)


def u_tilde0(k: int, prior_u: ExpPoly, single: SingleStopSolution, R) -> ExpPoly:
    base = single_u(single.x1_star, single.psi_plus_m1)
    if k == 1 or prior_u.is_zero:
        return base
    return base + R(prior_u)


@dataclass(frozen=True)
class ThresholdDiagnostics:
    k: int
    iterations: int
    residual: float
    bracket: tuple[float, float]
    width: float


def solve_threshold(k: int, u0: ExpPoly, bracket: tuple[float, float]) -> tuple[float, ThresholdDiagnostics]:
    """Bisection for the sign change of ``u0`` on (log K, x1]; runs to machine precision."""
    lo, hi = bracket[0] + BRACKET_OFFSET, bracket[1]
    f_lo, f_hi = u0(lo), u0(hi)
    if not (f_lo > 0 and f_hi <= 0):
        raise BracketFailureError(
            f"k={k}: first-order function does not change sign on [{lo!r}, {hi!r}]: "
            f"u0(lo)={f_lo!r}, u0(hi)={f_hi!r}")
    if f_hi == 0.0:
        return hi, ThresholdDiagnostics(k, 0, 0.0, (lo, hi), 0.0)
    a, b, fa, fb = lo, hi, f_lo, f_hi
    it = 0
    while it < MAX_BISECTIONS:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = u0(m)
        it += 1
        if fm == 0.0:
            a = b = m
            fa = fb = 0.0
            break
        if fm > 0:
            a, fa = m, fm
        else:
            b, fb = m, fm
    x, res = (a, fa) if abs(fa) <= abs(fb) else (b, fb)
    return x, ThresholdDiagnostics(k, it, abs(res), (lo, hi), b - a)


def update_u(k: int, u0: ExpPoly, x_k: float) -> ExpPoly:
    return u0.restrict(x_k, None)


def value_function(k: int, prior_v: ExpPoly, x_k: float, factor: WienerHopfFactor, R,
                   strike: float) -> tuple[ExpPoly, ExpPoly]:
    """(v_k, phi_k) with phi_k = payoff + R[v_{k-1}]."""
    payoff = ExpPoly.call_payoff(strike)
    phi = payoff if (k == 1 or prior_v.is_zero) else payoff + R(prior_v)
    below = {}
    for a, r, nb in zip(factor.A, factor.rho, factor.nu_bar):
        below[float(r)] = [a * integrate_measure(phi, nb, x_k)]
    v = linear_combine([(1.0, phi.restrict(x_k, None)), (1.0, ExpPoly((x_k,), [below, {}]))])
    return v, phi


@dataclass(frozen=True)
class SolveResult:
    thresholds: tuple[float, ...]
    values: tuple[ExpPoly, ...]
    u_functions: tuple[ExpPoly, ...]
    phi_functions: tuple[ExpPoly, ...]
    diagnostics: tuple[ThresholdDiagnostics, ...]
    single: SingleStopSolution = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.thresholds)


def solve_all(model: LevyModel, contract: Contract, refraction: RefractionSpec | None = None,
              *, check: bool = True) -> SolveResult:
    """Thresholds and value functions for k = 1..n exercises."""
    n = contract.n_exercises
    if n > 1 and refraction is None:
        raise ValueError("a refraction period is required for more than one exercise")
    if check:
        require_valid(model, contract, refraction if n > 1 else None)
    single = solve_single(model, contract, check=False)
    factor = single.factor
    R = RefractionOperator(model, refraction, contract.alpha) if n > 1 else None
    logk = contract.log_strike

    thresholds = [single.x1_star]
    values = [single.v1]
    us = [single.u1]
    phis = [ExpPoly.call_payoff(contract.strike)]
    diags = [ThresholdDiagnostics(1, 0, 0.0, (logk, single.x1_star), 0.0)]
    for k in range(2, n + 1):
        try:
            u0 = u_tilde0(k, us[-1], single, R)
            xk, d = solve_threshold(k, u0, (logk, single.x1_star))
            uk = update_u(k, u0, xk)
            vk, phik = value_function(k, values[-1], xk, factor, R, contract.strike)
        except MultistopError as e:
            e.last_valid_k = k - 1
            # add_note needs 3.11; __notes__ is what it writes to
            e.__notes__ = [*getattr(e, "__notes__", []), f"aborted at k={k}; last valid k={k - 1}"]
            raise
        log.debug("k=%d threshold=%r residual=%g", k, xk, d.residual)
        thresholds.append(xk)
        values.append(vk)
        us.append(uk)
        phis.append(phik)
        diags.append(d)
    return SolveResult(tuple(thresholds), tuple(values), tuple(us), tuple(phis), tuple(diags), single)

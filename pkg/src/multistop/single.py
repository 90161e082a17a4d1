"""Closed-form solution of the one-exercise perpetual call."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BelowStrikeError, ValidationFailedError
from .expfun import ExpPoly
from .levy import Contract, LevyModel, RefractionSpec, validate
from .wiener_hopf import WienerHopfFactor, build_factor, psi_plus


@dataclass(frozen=True)
class SingleStopSolution:
    x1_star: float
    v1: ExpPoly
    u1: ExpPoly
    factor: WienerHopfFactor
    strike: float

    @property
    def psi_plus_m1(self) -> float:
        return psi_plus(self.factor, -1.0)


def require_valid(model: LevyModel, contract: Contract, refraction: RefractionSpec | None = None):
    report = validate(model, contract, refraction)
    if not report.ok:
        raise ValidationFailedError(report)
    return report


def threshold_x1(factor: WienerHopfFactor, strike: float) -> float:
    """log(K psi_plus(-1))."""
    return math.log(strike * psi_plus(factor, -1.0))


def g1(factor: WienerHopfFactor, strike: float, x, b: float):
    """Value of exercising once at the first up-crossing of ``b`` from ``x``."""
    if b < math.log(strike):
        raise BelowStrikeError(f"exercise level {b} below log-strike {math.log(strike)}")
    xa = np.asarray(x, dtype=float)
    pp = psi_plus(factor, -1.0)
    below = np.zeros_like(xa)
    for a, r in zip(factor.A, factor.rho):
        below = below + a * np.exp(-r * (b - xa)) * (r * math.exp(b) / (r - 1.0) - strike * pp)
    below = below / pp
    out = np.where(xa < b, below, np.maximum(np.exp(xa) - strike, 0.0))
    return float(out) if out.ndim == 0 else out


def single_u(x1: float, pp: float) -> ExpPoly:
    """(exp(x1) - exp(x)) / psi_plus(-1) on the whole line."""
    e = math.exp(x1) / pp
    return ExpPoly((x1,), [{0.0: [e], 1.0: [-e]}, {0.0: [e], 1.0: [-e]}])


def solve_single(model: LevyModel, contract: Contract, *, check: bool = True) -> SingleStopSolution:
    if check:
        require_valid(model, contract)
    factor = build_factor(model, contract.alpha)
    K = contract.strike
    x1 = threshold_x1(factor, K)
    pp = psi_plus(factor, -1.0)
    # anchored at x1: K [K psi_plus(-1)]^{-rho} exp(rho x) = K exp(rho (x - x1))
    below = {float(r): [K * a / (r - 1.0)] for a, r in zip(factor.A, factor.rho)}
    above = {1.0: [math.exp(x1)], 0.0: [-K]}
    v1 = ExpPoly((x1,), [below, above])
    u1 = single_u(x1, pp).restrict(x1, None)
    return SingleStopSolution(x1_star=x1, v1=v1, u1=u1, factor=factor, strike=K)

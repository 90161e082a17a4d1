"""Invariant suite plus Monte Carlo cross-checks behind ``multistop check``."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .expfun import ExpPoly, integral
from .levy import Contract, LevyModel, RefractionSpec, laplace_exponent_derivative
from .montecarlo import (SimConfig, estimate_resolvent, ks_distance, simulate_first_passage,
                         simulate_strategy_value)
from .multi import SolveResult, solve_all, value_function
from .wiener_hopf import (distribution_function, erlang_resolvent_density, first_passage_transform,
                          overshoot_law, psi_plus, resolvent_density, resolvent_mean)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{tag} {self.name}: measured={self.measured:.6e} tol={self.tolerance:.1e}{extra}"


def _le(name, measured, tol, detail=""):
    return CheckResult(name, bool(measured <= tol), float(measured), tol, detail)


def analytic_checks(model: LevyModel, contract: Contract, refraction: RefractionSpec | None,
                    result: SolveResult, grid: np.ndarray) -> list[CheckResult]:
    out = []
    f = result.single.factor
    betas = np.geomspace(0.05, 20.0, 20)
    prod = psi_plus(f, betas)
    out.append(_le("wh_partial_fraction", np.max(np.abs(prod / f.partial_fraction(betas) - 1)), 1e-10))
    out.append(_le("wh_at_zero", abs(psi_plus(f, 0.0) - 1.0), 1e-12))
    err = 0.0
    for r, nb in zip(f.rho, f.nu_bar):
        err = max(err, np.max(np.abs(nb.laplace(betas) / (r / (r + betas) / prod) - 1)))
    out.append(_le("wh_nu_bar_transform", err, 1e-10))
    atom, dens = overshoot_law(f, 1.0)
    fp = first_passage_transform(f, 0.0, 1.0)
    out.append(_le("overshoot_mass", abs(atom + dens.total_mass - fp), 1e-10))

    if refraction is not None:
        p = refraction.rate + contract.alpha
        r = resolvent_density(model, p)
        out.append(_le("resolvent_mass", abs(integral(r) - 1.0), 1e-10, f"p={p:.6g}"))
        mean = resolvent_mean(r)
        out.append(_le("resolvent_mean", abs(mean - laplace_exponent_derivative(model, 0.0) / p), 1e-8))

    logk = contract.log_strike
    th = np.array(result.thresholds)
    ordered = bool(th[-1] > logk and np.all(np.diff(th) <= 0))
    out.append(CheckResult("thresholds_ordered", ordered, float(np.max(np.diff(th), initial=0.0)), 0.0,
                           "log K < x_n <= ... <= x_1"))
    res = max(d.residual for d in result.diagnostics)
    out.append(_le("first_order_residual", res, 1e-9))
    fit = max(abs(v(np.nextafter(x, -np.inf)) - phi(x))
              for v, phi, x in zip(result.values, result.phi_functions, result.thresholds))
    out.append(_le("continuous_fit", fit, 1e-8))
    V = np.array([v(grid) for v in result.values])
    gap = float(np.min(np.diff(V, axis=0))) if len(V) > 1 else math.inf
    out.append(CheckResult("values_increasing_in_k", gap > 0 or len(V) == 1, gap, 0.0,
                           "min v_k - v_(k-1) on grid"))
    dom = 0.0
    eq = 0.0
    for v, phi, x in zip(result.values, result.phi_functions, result.thresholds):
        d = v(grid) - phi(grid)
        dom = max(dom, float(np.max(-d)))
        eq = max(eq, float(np.max(np.abs(d[grid >= x]), initial=0.0)))
    out.append(_le("value_dominates_payoff", dom, 1e-8))
    out.append(_le("value_equals_payoff_above", eq, 1e-8))
    v1b, _ = value_function(1, ExpPoly(), result.thresholds[0], f, None, contract.strike)
    out.append(_le("base_case", float(np.max(np.abs(v1b(grid) - result.values[0](grid)))), 1e-10))
    h = 1e-6
    worst = 0.0
    for k, v in enumerate(result.values, 1):
        der = (v(grid + h) - v(grid)) / h
        worst = max(worst, float(np.max(-der)), float(np.max(der - k * np.exp(grid + h))))
    out.append(_le("derivative_bounds", worst, 1e-4, "0 <= v_k' <= k e^x"))
    return out


def mc_checks(model: LevyModel, contract: Contract, refraction: RefractionSpec | None,
              result: SolveResult, sim: SimConfig) -> list[CheckResult]:
    out = []
    f = result.single.factor
    x0 = contract.log_strike
    fp = simulate_first_passage(model, contract.alpha, x0, x0 + 1.0, sim).estimate
    exact = first_passage_transform(f, x0, x0 + 1.0)
    out.append(_mc("mc_first_passage", fp, exact))
    one = replace(contract, n_exercises=1)
    est = simulate_strategy_value(model, one, None, result.thresholds[:1], x0, sim)
    out.append(_mc("mc_value_k1", est, result.values[0](x0)))
    if result.n > 1:
        est = simulate_strategy_value(model, contract, refraction, result.thresholds, x0, sim)
        out.append(_mc(f"mc_value_k{result.n}", est, result.values[-1](x0)))
    if refraction is not None:
        p = refraction.rate + contract.alpha
        dens = erlang_resolvent_density(model, p, refraction.shape)
        cdf = distribution_function(dens)
        samples = estimate_resolvent(model, p, sim, shape=refraction.shape)
        d = ks_distance(samples, cdf)
        out.append(_le("mc_resolvent_ks", d, 1.63 / math.sqrt(len(samples))))
    return out


def _mc(name, est, exact):
    z = abs(est.mean - exact) / est.std_error if est.std_error > 0 else abs(est.mean - exact)
    ok = z <= 3.0 and est.usable
    detail = (f"mc={est.mean:.6e} se={est.std_error:.3e} exact={exact:.6e} "
              f"truncated={est.truncation_fraction:.1e}")
    return CheckResult(name, ok, z, 3.0, detail)


def run_checks(model: LevyModel, contract: Contract, refraction: RefractionSpec | None,
               sim: SimConfig, grid_points: int = 401, mc: bool = True) -> list[CheckResult]:
    result = solve_all(model, contract, refraction)
    grid = np.linspace(contract.log_strike - 2.0, result.thresholds[0] + 2.0, grid_points)
    out = analytic_checks(model, contract, refraction, result, grid)
    if mc:
        out.extend(mc_checks(model, contract, refraction, result, sim))
    return out

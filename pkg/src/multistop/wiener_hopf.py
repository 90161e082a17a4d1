"""Rational Wiener-Hopf factor of a hyper-exponential jump diffusion.

With ``rho`` the roots of psi(beta) = alpha at or above Phi(alpha) and ``eta``
the up-jump rates, the ascending factor is

    psi_plus(beta) = prod rho / (rho + beta) * prod (1 + beta / eta).

Everything here (first-passage transforms, overshoot laws, the auxiliary
measures nu and nu_bar_i, resolvent densities) follows from partial fractions
of rational functions whose poles are known exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfStripError
from .expfun import ExpMixtureMeasure, ExpPoly, convolve_density, head_integral, reflect
from .levy import LevyModel, laplace_exponent_derivative
from .roots import RootSet, solve_roots

__all__ = [
    "ExpMixtureMeasure",
    "WienerHopfFactor",
    "build_factor",
    "psi_plus",
    "first_passage_transform",
    "overshoot_law",
    "resolvent_density",
    "resolvent_mean",
    "erlang_resolvent_density",
    "density_convolution",
    "distribution_function",
]


@dataclass(frozen=True)
class WienerHopfFactor:
    alpha: float
    roots: RootSet
    A: tuple[float, ...]
    psi_plus_inf: float
    phi_inf: float
    nu: ExpMixtureMeasure
    nu_bar: tuple[ExpMixtureMeasure, ...]

    @property
    def rho(self) -> np.ndarray:
        return np.array(self.roots.i_alpha)

    @property
    def eta(self) -> np.ndarray:
        return np.array(self.roots.j_set)

    @property
    def phi(self) -> float:
        return self.roots.phi

    @property
    def inv_phi_inf(self) -> float:
        return 0.0 if math.isinf(self.phi_inf) else 1.0 / self.phi_inf

    def psi_plus(self, beta):
        return psi_plus(self, beta)

    def partial_fraction(self, beta):
        """psi_plus(inf) + sum A_i rho_i / (rho_i + beta)."""
        b = np.asarray(beta, dtype=float)
        out = self.psi_plus_inf + sum(a * r / (r + b) for a, r in zip(self.A, self.rho))
        return float(out) if np.ndim(out) == 0 else out


def _residue_terms(num_roots: np.ndarray, eta: np.ndarray) -> list[tuple[float, float]]:
    """Partial fractions of prod (r + beta)/r * prod eta/(eta + beta) at beta = -eta_j.

    Returns (c_j, eta_j) with the rational function equal to const + sum c_j / (eta_j + beta).
    """
    out = []
    for j, ej in enumerate(eta):
        c = float(np.prod((num_roots - ej) / num_roots)) if num_roots.size else 1.0
        others = np.delete(eta, j)
        c *= ej * float(np.prod(others / (others - ej))) if others.size else ej
        out.append((float(c), float(ej)))
    return out


def _measure_from(num_roots: np.ndarray, eta: np.ndarray) -> ExpMixtureMeasure:
    # transform equals 1 at beta = 0, which fixes the atom
    terms = _residue_terms(num_roots, eta)
    atom = 1.0 - sum(c / e for c, e in terms)
    return ExpMixtureMeasure(float(atom), tuple(terms))


def build_factor(model: LevyModel, alpha: float) -> WienerHopfFactor:
    """Wiener-Hopf factor at discount level ``alpha`` (alpha <= 0 allowed)."""
    roots = solve_roots(model, alpha)
    rho = np.array(roots.i_alpha)
    eta = np.array(roots.j_set)
    A = []
    for i, ri in enumerate(rho):
        others = np.delete(rho, i)
        a = float(np.prod(others / (others - ri))) if others.size else 1.0
        a *= float(np.prod((eta - ri) / eta)) if eta.size else 1.0
        A.append(a)
    ratio = float(np.prod(rho) / np.prod(eta)) if eta.size else float(np.prod(rho))
    if len(rho) == len(eta) + 1:
        psi_inf, phi_inf = 0.0, ratio
        nu_terms = _residue_terms(rho, eta)
        # 1/psi_plus - beta/phi_inf is bounded; value 1 at beta = 0
        nu = ExpMixtureMeasure(float(1.0 - sum(c / e for c, e in nu_terms)), tuple(nu_terms))
    elif len(rho) == len(eta):
        psi_inf, phi_inf = ratio, math.inf
        nu = _measure_from(rho, eta)
    else:
        raise ValueError(f"unexpected root layout: |I|={len(rho)}, |J|={len(eta)}")
    nu_bar = tuple(_measure_from(np.delete(rho, i), eta) for i in range(len(rho)))
    return WienerHopfFactor(alpha=float(alpha), roots=roots, A=tuple(A), psi_plus_inf=psi_inf,
                            phi_inf=phi_inf, nu=nu, nu_bar=nu_bar)


def psi_plus(factor: WienerHopfFactor, beta):
    """Product form of the ascending factor; analytic for beta > -rho_1."""
    b = np.asarray(beta, dtype=float)
    rho, eta = factor.rho, factor.eta
    if np.any(b <= -rho[0]):
        raise OutOfStripError(f"beta={beta!r} outside the strip beta > -{rho[0]:.12g}")
    out = np.ones_like(b)
    for r in rho:
        out = out * r / (r + b)
    for e in eta:
        out = out * (1.0 + b / e)
    return float(out) if out.ndim == 0 else out


def first_passage_transform(factor: WienerHopfFactor, x: float, b: float, beta: float = 0.0) -> float:
    """E_x[exp(-alpha tau_b - beta (X_tau - b)); tau_b < inf]."""
    if x >= b:
        return math.exp(-beta * (x - b))
    gap = b - x
    s = sum(a * r / (r + beta) * math.exp(-r * gap) for a, r in zip(factor.A, factor.rho))
    return s / psi_plus(factor, beta)


def overshoot_law(factor: WienerHopfFactor, gap: float) -> tuple[float, ExpMixtureMeasure]:
    """Discounted law of the overshoot when starting ``gap`` below the barrier.

    Returns the mass of continuous crossing and the overshoot density on y > 0.
    """
    if not gap > 0:
        raise ValueError(f"gap must be > 0, got {gap}")
    w = [a * math.exp(-r * gap) for a, r in zip(factor.A, factor.rho)]
    atom = factor.inv_phi_inf * sum(wi * r for wi, r in zip(w, factor.rho))
    acc: dict[float, float] = {}
    for wi, nb in zip(w, factor.nu_bar):
        for c, th in nb.terms:
            acc[th] = acc.get(th, 0.0) + wi * c
    return atom, ExpMixtureMeasure(0.0, tuple((c, th) for th, c in sorted(acc.items())))


def resolvent_density(model: LevyModel, p: float) -> ExpPoly:
    """Density of X_e - X_0 for e ~ Exp(p) independent of X.

    Partial fractions of p / (p - psi(beta)): a positive root rho contributes
    (p / psi'(rho)) exp(-rho y) on y >= 0, a negative root zeta contributes
    (-p / psi'(zeta)) exp(-zeta y) on y < 0.
    """
    if not p > 0:
        raise ValueError(f"p must be > 0, got {p}")
    rs = solve_roots(model, p)
    left: dict[float, np.ndarray] = {}
    right: dict[float, np.ndarray] = {}
    for r in rs.all_roots:
        d = laplace_exponent_derivative(model, r)
        if r > 0:
            right[-r] = np.array([p / d])
        else:
            left[-r] = np.array([-p / d])
    return ExpPoly((0.0,), [left, right])


def resolvent_mean(density: ExpPoly) -> float:
    """Mean of a density from :func:`resolvent_density` (pure exponentials anchored at 0)."""
    total = 0.0
    for terms, side in ((density.pieces[0], -1.0), (density.pieces[-1], 1.0)):
        for th, c in terms.items():
            # int over the half line of y * c * exp(th * y)
            total += side * c[0] / th**2
    return total


def density_convolution(r1: ExpPoly, r2: ExpPoly) -> ExpPoly:
    """Density of Y1 + Y2 for independent Y1 ~ r1, Y2 ~ r2."""
    return convolve_density(r2, reflect(r1))


def erlang_resolvent_density(model: LevyModel, p: float, shape: int) -> ExpPoly:
    """Density of X_delta - X_0 for delta ~ Erlang(shape, p)."""
    r = resolvent_density(model, p)
    out = r
    for _ in range(shape - 1):
        out = density_convolution(out, r)
    return out


def distribution_function(density: ExpPoly) -> ExpPoly:
    """CDF of an ExpPoly density."""
    return head_integral(density)

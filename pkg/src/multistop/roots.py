"""Real roots of psi(beta) = q.

For hyper-exponential jumps the roots interlace with the poles of psi, so each
root can be bracketed from the pole layout alone and polished with a bracketing
solver.  ``numpy.roots`` on the cleared polynomial is only used as a
cross-check in the tests.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

from .errors import DegenerateRootsError, NoRootInStripError
from .levy import LevyModel, laplace_exponent, laplace_exponent_derivative

log = logging.getLogger(__name__)

ROOT_RTOL = 1e-12
MIN_SEPARATION = 1e-8
RETRY_SHIFT = 1e-9
_FAR = 1e12


@dataclass(frozen=True)
class RootSet:
    """Classified roots of psi(beta) = q, all real and simple, ascending."""

    q: float
    all_roots: tuple[float, ...]
    phi: float | None
    i_alpha: tuple[float, ...]
    j_set: tuple[float, ...]

    @property
    def positive(self) -> tuple[float, ...]:
        return tuple(r for r in self.all_roots if r > 0)

    @property
    def negative(self) -> tuple[float, ...]:
        return tuple(r for r in self.all_roots if r < 0)


def characteristic_polynomial(model: LevyModel, q: float) -> np.ndarray:
    """Monic polynomial (descending coefficients) whose roots solve psi(beta) = q.

    Built as (psi(beta) - q) * prod(mu_i + beta) * prod(theta_j - beta).
    """
    down = [(w, mu) for w, mu in model.down_mix]
    up = [(p, th) for p, th in model.up_mix]
    factors = [np.array([mu, 1.0]) for _, mu in down] + [np.array([th, -1.0]) for _, th in up]

    def prod(polys):
        out = np.array([1.0])
        for f in polys:
            out = P.polymul(out, f)
        return out

    full = prod(factors)
    cont = np.array([-q, model.drift, 0.5 * model.sigma**2])
    total = P.polymul(cont, full)
    for i, (w, mu) in enumerate(down):
        others = prod(factors[:i] + factors[i + 1:])
        # lambda * w * mu / (mu + beta) - lambda * w, cleared
        total = P.polyadd(total, model.down_jump_rate * w * mu * others)
        total = P.polysub(total, model.down_jump_rate * w * full)
    nd = len(down)
    for j, (p, th) in enumerate(up):
        k = nd + j
        others = prod(factors[:k] + factors[k + 1:])
        total = P.polyadd(total, model.up_jump_rate * p * th * others)
        total = P.polysub(total, model.up_jump_rate * p * full)
    total = P.polytrim(total, tol=0.0)
    # drop numerically vanished leading terms (e.g. sigma = 0 or exact cancellation)
    scale = np.max(np.abs(total))
    while len(total) > 1 and abs(total[-1]) <= 1e-14 * scale:
        total = total[:-1]
    desc = total[::-1]
    return desc / desc[0]


def _limit_sign_at(model: LevyModel, q: float, direction: int) -> float:
    """Sign of psi(beta) - q as beta -> direction * infinity."""
    if model.sigma > 0:
        return 1.0
    if model.drift != 0:
        return math.copysign(1.0, model.drift * direction)
    const = -model.down_jump_rate - model.up_jump_rate - q
    return math.copysign(1.0, const) if const != 0 else 0.0


def _near_pole(model: LevyModel, q: float, pole: float, side: int, want: float) -> float:
    """A point next to ``pole`` (on ``side``) where sign(psi - q) == want."""
    scale = max(1.0, abs(pole))
    eps = 1e-6 * scale
    for _ in range(40):
        b = pole + side * eps
        if np.sign(laplace_exponent(model, b) - q) == want:
            return b
        eps *= 0.5
    raise DegenerateRootsError(f"could not separate a root from the pole at {pole}")


def _far_point(model: LevyModel, q: float, start: float, direction: int) -> tuple[float, float]:
    """Walk outwards from ``start`` until psi - q takes its limiting sign."""
    want = _limit_sign_at(model, q, direction)
    step = 1.0
    b = start + direction * step
    while abs(b) < _FAR:
        val = laplace_exponent(model, b) - q
        if np.sign(val) == want and want != 0:
            return b, want
        step *= 2.0
        b = start + direction * step
    return b, float(np.sign(laplace_exponent(model, b) - q))


def _root(model: LevyModel, q: float, a: float, b: float) -> float:
    f = lambda x: laplace_exponent(model, x) - q  # noqa: E731
    return brentq(f, a, b, xtol=1e-300, rtol=max(ROOT_RTOL * 1e-2, 4 * np.finfo(float).eps),
                  maxiter=500)


def _convex_segment_roots(model: LevyModel, q: float, lo_pole, hi_pole) -> list[float]:
    """Roots on the central segment where psi is strictly convex."""
    dpsi = lambda x: laplace_exponent_derivative(model, x)  # noqa: E731

    # end points with psi - q at its limiting sign (or +inf side for poles)
    if lo_pole is None:
        left, lsign = _far_point(model, q, 0.0 if hi_pole is None else min(0.0, hi_pole - 1.0), -1)
    else:
        left, lsign = _near_pole(model, q, lo_pole, +1, 1.0), 1.0
    if hi_pole is None:
        right, rsign = _far_point(model, q, 0.0 if lo_pole is None else max(0.0, lo_pole + 1.0), +1)
    else:
        right, rsign = _near_pole(model, q, hi_pole, -1, 1.0), 1.0

    dl, dr = dpsi(left), dpsi(right)
    if dl < 0 < dr:
        m = brentq(dpsi, left, right, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        fm = laplace_exponent(model, m) - q
        roots = []
        if fm >= 0:
            if abs(fm) <= 1e-12 * (1 + abs(q)):
                raise DegenerateRootsError(f"double root of psi(beta)={q} near {m}")
            return roots  # complex pair, caller notices the count mismatch
        if lsign > 0:
            roots.append(_root(model, q, left, m))
        if rsign > 0:
            roots.append(_root(model, q, m, right))
        return roots
    # monotone on the segment: at most one crossing
    if lsign * rsign < 0:
        return [_root(model, q, left, right)]
    return []


def _solve_once(model: LevyModel, q: float) -> list[float]:
    neg = sorted(-model.down_rates)  # ascending, most negative first
    pos = sorted(model.up_rates)
    roots: list[float] = []

    # outer left
    if neg:
        near = _near_pole(model, q, neg[0], -1, -1.0)
        far, s = _far_point(model, q, neg[0], -1)
        if s > 0:
            roots.append(_root(model, q, far, near))
    for a, b in zip(neg[:-1], neg[1:]):
        roots.append(_root(model, q, _near_pole(model, q, a, +1, 1.0),
                           _near_pole(model, q, b, -1, -1.0)))
    roots.extend(_convex_segment_roots(model, q, neg[-1] if neg else None, pos[0] if pos else None))
    for a, b in zip(pos[:-1], pos[1:]):
        roots.append(_root(model, q, _near_pole(model, q, a, +1, -1.0),
                           _near_pole(model, q, b, -1, 1.0)))
    if pos:
        near = _near_pole(model, q, pos[-1], +1, -1.0)
        far, s = _far_point(model, q, pos[-1], +1)
        if s > 0:
            roots.append(_root(model, q, near, far))
    return sorted(roots)


def _classify(model: LevyModel, q: float, roots: list[float]) -> RootSet:
    beta0 = model.beta0
    inside = [r for r in roots if 0 < r < beta0]
    phi = max(inside) if inside else None
    i_alpha = tuple(r for r in roots if phi is not None and r >= phi)
    return RootSet(q=float(q), all_roots=tuple(roots), phi=phi, i_alpha=i_alpha,
                   j_set=tuple(sorted(model.up_rates.tolist())))


def expected_root_count(model: LevyModel) -> int:
    return model.continuous_degree + len(model.down_mix) + len(model.up_mix)


def _check(model: LevyModel, q: float, roots: list[float]) -> None:
    want = expected_root_count(model)
    if len(roots) != want:
        raise DegenerateRootsError(
            f"found {len(roots)} real roots of psi(beta)={q}, expected {want} (complex pair?)")
    gaps = np.diff(roots)
    if gaps.size and gaps.min() <= MIN_SEPARATION:
        raise DegenerateRootsError(f"roots of psi(beta)={q} closer than {MIN_SEPARATION:g}")


def solve_roots(model: LevyModel, q: float, *, retry: bool = True) -> RootSet:
    """All real roots of psi(beta) = q, classified.

    On nearly coincident roots a single retry at ``q + 1e-9`` is made (with a
    warning) before DegenerateRootsError propagates.
    """
    try:
        roots = _solve_once(model, q)
        _check(model, q, roots)
    except DegenerateRootsError:
        if not retry:
            raise
        log.warning("degenerate roots at q=%r; retrying at q+%g", q, RETRY_SHIFT)
        q = q + RETRY_SHIFT
        roots = _solve_once(model, q)
        _check(model, q, roots)
    return _classify(model, q, roots)


def phi_alpha(model: LevyModel, q: float) -> float:
    """Largest root of psi(beta) = q inside (0, beta0)."""
    beta0 = model.beta0
    dpsi = lambda x: laplace_exponent_derivative(model, x)  # noqa: E731
    if math.isinf(beta0):
        hi = 1.0
        while laplace_exponent(model, hi) <= q:
            hi *= 2.0
            if hi > _FAR:
                raise NoRootInStripError(f"psi stays below q={q} on (0, inf)")
    else:
        hi = _near_pole(model, q, beta0, -1, 1.0)
    if q > 0:
        lo = 0.0
    else:
        # convex on (0, beta0): use the minimiser as the lower bracket
        if dpsi(0.0) >= 0:
            raise NoRootInStripError(f"psi >= 0 >= q={q} on (0, beta0)")
        lo = brentq(dpsi, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        if laplace_exponent(model, lo) >= q:
            raise NoRootInStripError(f"min of psi on (0, beta0) exceeds q={q}")
    return _root(model, q, lo, hi)

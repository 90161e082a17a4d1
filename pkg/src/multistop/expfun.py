"""Piecewise exponential-polynomial functions on the real line.

An :class:`ExpPoly` is a finite list of pieces separated by sorted breakpoints
(pieces are left-closed).  On each piece the function is

    sum_theta  p_theta(x - a) * exp(theta * (x - a))

where ``a`` is the piece anchor (its left breakpoint, or the first breakpoint
for the leftmost piece) and ``p_theta`` is a polynomial stored as ascending
coefficients.  Anchoring keeps the polynomial arguments small, which is what
keeps high-degree pieces well conditioned.

The class is closed under linear combination, shifts, multiplication by
exponentials, restriction to intervals, definite/tail integration and
convolution against exponential-polynomial densities, which is everything the
stopping recursion needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import comb

from .errors import DegreeCapError, DivergentConvolutionError

MAX_DEGREE = 64
COLLISION_TOL = 1e-10
BREAKPOINT_TOL = 1e-12
EXPONENT_TOL = 1e-12
_MERGE_RTOL = 1e-13

Terms = dict  # theta -> ascending coefficient array


# ---------------------------------------------------------------------------
# polynomial helpers (ascending coefficients)

def _trim(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    n = len(c)
    while n > 1 and c[n - 1] == 0.0:
        n -= 1
    return c[:n]


def _poly_shift(c: np.ndarray, d: float) -> np.ndarray:
    """Coefficients of p(t + d)."""
    c = np.asarray(c, dtype=float)
    n = len(c)
    if n == 1 or d == 0.0:
        return c.copy()
    out = np.zeros(n)
    for k in range(n):
        if c[k] == 0.0:
            continue
        j = np.arange(k + 1)
        out[: k + 1] += c[k] * comb(k, j) * d ** (k - j)
    return out


def _is_zero(c: np.ndarray) -> bool:
    return not np.any(c)


def _antiderivative(c: np.ndarray, theta: float) -> tuple[np.ndarray, float]:
    """(H, g) with d/dt [H(t) exp(g t)] = c(t) exp(theta t)."""
    if abs(theta) < COLLISION_TOL:
        return P.polyint(c), 0.0
    out = np.zeros(len(c))
    deriv = np.asarray(c, dtype=float)
    sign = 1.0
    for t in range(len(c)):
        out[: len(deriv)] += sign * deriv / theta ** (t + 1)
        deriv = P.polyder(deriv) if len(deriv) > 1 else np.zeros(0)
        if deriv.size == 0:
            break
        sign = -sign
    return out, theta


def _eval_terms(terms: Terms, t):
    out = np.zeros_like(t, dtype=float)
    for theta, c in terms.items():
        if theta == 0.0:
            out = out + P.polyval(t, c)
        else:
            out = out + P.polyval(t, c) * np.exp(theta * t)
    return out


def _limit_terms(terms: Terms, sign: float) -> float:
    """Limit of the terms as t -> sign * inf; the dominant term decides."""
    best = None
    for theta, c in terms.items():
        nz = np.flatnonzero(c)
        if nz.size == 0:
            continue
        key = (sign * theta, int(nz[-1]))
        if best is None or key > best[0]:
            best = (key, c[nz[-1]])
    if best is None:
        return 0.0
    (rate, deg), lead = best
    if rate < 0:
        return 0.0
    if rate == 0 and deg == 0:
        return float(lead)
    return math.copysign(math.inf, lead * (sign ** deg if rate == 0 else 1.0))


def _reanchor(terms: Terms, d: float) -> Terms:
    """Express terms in t' = t - d (i.e. move the anchor right by d)."""
    if d == 0.0:
        return dict(terms)
    return {th: _poly_shift(c, d) * math.exp(th * d) for th, c in terms.items()}


def _add_term(terms: Terms, theta: float, c: np.ndarray) -> None:
    for key in terms:
        if abs(key - theta) <= EXPONENT_TOL * max(1.0, abs(theta)):
            a, b = terms[key], np.asarray(c, dtype=float)
            n = max(len(a), len(b))
            s = np.zeros(n)
            s[: len(a)] += a
            s[: len(b)] += b
            terms[key] = s
            return
    terms[theta] = np.asarray(c, dtype=float).copy()


def _clean(terms: Terms) -> Terms:
    out = {}
    for th, c in terms.items():
        c = _trim(c)
        if not _is_zero(c):
            out[float(th)] = c
    return dict(sorted(out.items()))


def _terms_close(a: Terms, b: Terms) -> bool:
    if set(a) != set(b):
        return False
    for th in a:
        x, y = a[th], b[th]
        n = max(len(x), len(y))
        xx = np.zeros(n)
        yy = np.zeros(n)
        xx[: len(x)] = x
        yy[: len(y)] = y
        scale = max(np.max(np.abs(xx)), np.max(np.abs(yy)), 1e-300)
        if np.max(np.abs(xx - yy)) > _MERGE_RTOL * scale:
            return False
    return True


def _scale_terms(terms: Terms, s: float) -> Terms:
    return {th: c * s for th, c in terms.items()}


# ---------------------------------------------------------------------------

class ExpPoly:
    """Piecewise exponential-polynomial function on R (immutable)."""

    __slots__ = ("breakpoints", "pieces")

    def __init__(self, breakpoints: Sequence[float] = (), pieces: Sequence[Terms] | None = None,
                 anchors: Sequence[float] | None = None):
        bps = [float(b) for b in breakpoints]
        if any(b2 < b1 for b1, b2 in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be sorted")
        if pieces is None:
            pieces = [{} for _ in range(len(bps) + 1)]
        if len(pieces) != len(bps) + 1:
            raise ValueError(f"{len(bps)} breakpoints need {len(bps) + 1} pieces, got {len(pieces)}")
        canon = _canonical_anchors(bps)
        anchors = canon if anchors is None else [float(a) for a in anchors]
        norm = []
        for terms, a, ca in zip(pieces, anchors, canon):
            t = {}
            for th, c in terms.items():
                _add_term(t, float(th), np.asarray(c, dtype=float))
            if a != ca:
                t = _reanchor(t, ca - a)
            norm.append(_clean(t))
        bps, norm = _dedup(bps, norm)
        bps, norm = _merge(bps, norm)
        for terms in norm:
            for c in terms.values():
                if len(c) - 1 > MAX_DEGREE:
                    raise DegreeCapError(f"polynomial degree {len(c) - 1} exceeds cap {MAX_DEGREE}")
        object.__setattr__(self, "breakpoints", tuple(bps))
        object.__setattr__(self, "pieces", tuple(norm))

    def __setattr__(self, name, value):
        raise AttributeError("ExpPoly is immutable")

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls) -> "ExpPoly":
        return cls()

    @classmethod
    def constant(cls, c: float) -> "ExpPoly":
        return cls((), [{0.0: np.array([float(c)])}])

    @classmethod
    def exp(cls, theta: float, coeff: float = 1.0) -> "ExpPoly":
        """coeff * exp(theta * x) on R."""
        return cls((), [{float(theta): np.array([float(coeff)])}])

    @classmethod
    def term(cls, coeffs: Sequence[float], theta: float, lo: float | None = None,
             hi: float | None = None) -> "ExpPoly":
        """sum_k coeffs[k] x^k exp(theta x) on [lo, hi), zero elsewhere."""
        base = {float(theta): np.asarray(coeffs, dtype=float)}
        return cls((), [base]).restrict(lo, hi)

    @classmethod
    def call_payoff(cls, strike: float) -> "ExpPoly":
        """(exp(x) - K) on [log K, inf), zero below."""
        k = math.log(strike)
        # anchored at log K: exp(x) = K exp(x - log K)
        return cls((k,), [{}, {1.0: np.array([strike]), 0.0: np.array([-strike])}])

    # -- basic queries -----------------------------------------------------
    @property
    def anchors(self) -> tuple[float, ...]:
        return tuple(_canonical_anchors(list(self.breakpoints)))

    def piece_index(self, x):
        return np.searchsorted(np.asarray(self.breakpoints), x, side="right")

    def intervals(self) -> list[tuple[float, float]]:
        edges = [-math.inf, *self.breakpoints, math.inf]
        return list(zip(edges[:-1], edges[1:]))

    def max_degree(self) -> int:
        return max((len(c) - 1 for terms in self.pieces for c in terms.values()), default=0)

    def right_growth(self) -> float:
        """Largest exponent on the rightmost piece (-inf when it vanishes)."""
        return max(self.pieces[-1], default=-math.inf)

    def left_growth(self) -> float:
        """Smallest exponent on the leftmost piece (+inf when it vanishes)."""
        return min(self.pieces[0], default=math.inf)

    @property
    def is_zero(self) -> bool:
        return all(not t for t in self.pieces)

    # -- evaluation --------------------------------------------------------
    def __call__(self, x):
        return evaluate(self, x)

    # -- algebra -----------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = ExpPoly.constant(other)
        return linear_combine([(1.0, self), (1.0, other)])

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = ExpPoly.constant(other)
        return linear_combine([(1.0, self), (-1.0, other)])

    def __rsub__(self, other):
        return ExpPoly.constant(other) - self

    def __neg__(self):
        return self * -1.0

    def __mul__(self, s):
        if not isinstance(s, (int, float, np.floating)):
            return NotImplemented
        return ExpPoly(self.breakpoints, [_scale_terms(t, float(s)) for t in self.pieces])

    __rmul__ = __mul__

    def restrict(self, lo: float | None = None, hi: float | None = None) -> "ExpPoly":
        """Multiply by the indicator of [lo, hi)."""
        lo = -math.inf if lo is None else float(lo)
        hi = math.inf if hi is None else float(hi)
        bps = sorted(set(self.breakpoints) | {b for b in (lo, hi) if math.isfinite(b)})
        pieces = []
        anchors = _canonical_anchors(bps)
        edges = [-math.inf, *bps, math.inf]
        for i, a in enumerate(anchors):
            left, right = edges[i], edges[i + 1]
            mid = _interior_point(left, right)
            if lo <= mid < hi:
                pieces.append(self._terms_at(mid, a))
            else:
                pieces.append({})
        return ExpPoly(bps, pieces)

    def _terms_at(self, x: float, anchor: float) -> Terms:
        """Terms of the piece containing x, re-anchored at ``anchor``."""
        i = int(self.piece_index(x))
        own = self.anchors[i]
        return _reanchor(self.pieces[i], anchor - own)

    def with_breakpoints(self, bps: Iterable[float]) -> tuple[list[float], list[Terms]]:
        """Pieces refined onto a superset of breakpoints (not canonicalised)."""
        bps = sorted(set(self.breakpoints) | set(float(b) for b in bps))
        anchors = _canonical_anchors(bps)
        edges = [-math.inf, *bps, math.inf]
        return bps, [self._terms_at(_interior_point(edges[i], edges[i + 1]), a)
                     for i, a in enumerate(anchors)]

    # -- serialisation -----------------------------------------------------
    def to_text(self) -> str:
        return to_text(self)

    @classmethod
    def from_text(cls, text: str) -> "ExpPoly":
        return from_text(text)

    def __repr__(self) -> str:
        return f"ExpPoly(breakpoints={list(self.breakpoints)}, pieces={len(self.pieces)})"


def _canonical_anchors(bps: Sequence[float]) -> list[float]:
    if not bps:
        return [0.0]
    return [bps[0], *bps]


def _interior_point(left: float, right: float) -> float:
    if math.isinf(left) and math.isinf(right):
        return 0.0
    if math.isinf(left):
        return right - 1.0
    if math.isinf(right):
        return left + 1.0
    return 0.5 * (left + right)


def _dedup(bps: list[float], pieces: list[Terms]):
    out_b, out_p = [], [pieces[0]]
    for b, p in zip(bps, pieces[1:]):
        if out_b and abs(b - out_b[-1]) <= BREAKPOINT_TOL:
            # drop the zero-width piece; keep the right one re-anchored to the kept point
            out_p[-1] = _clean(_reanchor(p, out_b[-1] - b))
            continue
        out_b.append(b)
        out_p.append(p)
    return out_b, out_p


def _merge(bps: list[float], pieces: list[Terms]):
    if not bps:
        return bps, pieces
    anchors = _canonical_anchors(bps)
    out_b: list[float] = []
    out_p = [pieces[0]]
    out_a = [anchors[0]]
    for b, p, a in zip(bps, pieces[1:], anchors[1:]):
        prev, pa = out_p[-1], out_a[-1]
        # express previous piece at the new anchor and compare
        if _terms_close(_clean(_reanchor(prev, a - pa)), p):
            continue
        out_b.append(b)
        out_p.append(p)
        out_a.append(a)
    # re-anchor merged pieces to canonical anchors of the reduced breakpoint list
    canon = _canonical_anchors(out_b)
    fixed = [_clean(_reanchor(p, c - a)) if c != a else p for p, a, c in zip(out_p, out_a, canon)]
    return out_b, fixed


# ---------------------------------------------------------------------------
# public operations

def evaluate(f: ExpPoly, x):
    """Pointwise value; pieces are left-closed so the function is right-continuous."""
    xa = np.asarray(x, dtype=float)
    idx = f.piece_index(xa)
    anchors = np.asarray(f.anchors)
    out = np.zeros_like(xa, dtype=float)
    for i, terms in enumerate(f.pieces):
        if not terms:
            continue
        mask = idx == i
        if not np.any(mask):
            continue
        t = xa[mask] - anchors[i]
        with np.errstate(invalid="ignore", over="ignore"):
            out[mask] = _eval_terms(terms, t)
        inf = mask & np.isinf(xa)
        if np.any(inf):
            out[inf] = [_limit_terms(terms, math.copysign(1.0, v)) for v in xa[inf]]
    if out.ndim == 0:
        return float(out)
    return out


def linear_combine(fs: Sequence[tuple[float, ExpPoly]]) -> ExpPoly:
    """sum_k a_k f_k."""
    fs = [(float(a), f) for a, f in fs if a != 0.0]
    if not fs:
        return ExpPoly()
    bps = sorted(set(b for _, f in fs for b in f.breakpoints))
    anchors = _canonical_anchors(bps)
    edges = [-math.inf, *bps, math.inf]
    pieces = []
    for i, a in enumerate(anchors):
        mid = _interior_point(edges[i], edges[i + 1])
        acc: Terms = {}
        for s, f in fs:
            for th, c in f._terms_at(mid, a).items():
                _add_term(acc, th, s * c)
        pieces.append(acc)
    return ExpPoly(bps, pieces)


def shift(f: ExpPoly, a: float) -> ExpPoly:
    """g(x) = f(x + a)."""
    bps = [b - a for b in f.breakpoints]
    anchors = [s - a for s in f.anchors]
    return ExpPoly(bps, [dict(t) for t in f.pieces], anchors=anchors)


def mul_exp(f: ExpPoly, c: float) -> ExpPoly:
    """g(x) = exp(c x) f(x)."""
    pieces = []
    for terms, a in zip(f.pieces, f.anchors):
        k = math.exp(c * a)
        t: Terms = {}
        for th, coef in terms.items():
            _add_term(t, th + c, coef * k)
        pieces.append(t)
    return ExpPoly(f.breakpoints, pieces)


def reflect(f: ExpPoly) -> ExpPoly:
    """g(x) = f(-x) (left-closed convention restored up to breakpoint values)."""
    bps = [-b for b in reversed(f.breakpoints)]
    anchors = [-a for a in reversed(f.anchors)]
    pieces = []
    for terms in reversed(f.pieces):
        t = {}
        for th, c in terms.items():
            flip = c * (-1.0) ** np.arange(len(c))
            t[-th] = flip
        pieces.append(t)
    return ExpPoly(bps, pieces, anchors=anchors)


def _piece_antiderivative(terms: Terms) -> Terms:
    out: Terms = {}
    for th, c in terms.items():
        h, g = _antiderivative(c, th)
        _add_term(out, g, h)
    return out


def _check_right_decay(f: ExpPoly, what: str, decay: float | None = None) -> None:
    for th, c in f.pieces[-1].items():
        if th > -COLLISION_TOL:
            raise DivergentConvolutionError(
                f"{what}: term exp({th:.6g} x) does not decay as x -> +inf", tail="right",
                growth=th if decay is None else th + decay, decay=decay)


def _check_left_decay(f: ExpPoly, what: str, decay: float | None = None) -> None:
    for th, c in f.pieces[0].items():
        if th < COLLISION_TOL:
            raise DivergentConvolutionError(
                f"{what}: term exp({th:.6g} x) does not decay as x -> -inf", tail="left",
                growth=th if decay is None else th - decay, decay=decay)


def tail_integral(f: ExpPoly) -> ExpPoly:
    """T(x) = integral of f over [x, inf)."""
    if f.pieces[-1]:
        _check_right_decay(f, "tail integral")
    anchors = f.anchors
    edges = [*f.breakpoints, math.inf]
    pieces: list[Terms] = [None] * len(f.pieces)
    carry = 0.0  # T at the right edge of the current piece
    for i in range(len(f.pieces) - 1, -1, -1):
        anti = _piece_antiderivative(f.pieces[i])
        right = edges[i]
        at_right = 0.0 if math.isinf(right) else float(_eval_terms(anti, np.float64(right - anchors[i])))
        # T(x) = carry + A(right) - A(x)
        t = _scale_terms(anti, -1.0)
        _add_term(t, 0.0, np.array([carry + at_right]))
        pieces[i] = t
        if i > 0:
            left = f.breakpoints[i - 1]
            carry = carry + at_right - float(_eval_terms(anti, np.float64(left - anchors[i])))
    return ExpPoly(f.breakpoints, pieces)


def head_integral(f: ExpPoly) -> ExpPoly:
    """H(x) = integral of f over (-inf, x]."""
    if f.pieces[0]:
        _check_left_decay(f, "head integral")
    anchors = f.anchors
    edges = [-math.inf, *f.breakpoints]
    pieces: list[Terms] = []
    carry = 0.0  # H at the left edge of the current piece
    for i, terms in enumerate(f.pieces):
        anti = _piece_antiderivative(terms)
        left = edges[i]
        at_left = 0.0 if math.isinf(left) else float(_eval_terms(anti, np.float64(left - anchors[i])))
        t = dict(anti)
        _add_term(t, 0.0, np.array([carry - at_left]))
        pieces.append(t)
        if i < len(f.breakpoints):
            right = f.breakpoints[i]
            carry = carry - at_left + float(_eval_terms(anti, np.float64(right - anchors[i])))
    return ExpPoly(f.breakpoints, pieces)


def integral(f: ExpPoly, lo: float = -math.inf, hi: float = math.inf) -> float:
    """Definite integral of f over [lo, hi]."""
    if lo >= hi:
        return 0.0
    g = f.restrict(None if math.isinf(lo) else lo, None if math.isinf(hi) else hi)
    if g.is_zero:
        return 0.0
    if math.isfinite(lo):
        return float(evaluate(tail_integral(g), lo))
    if math.isfinite(hi):
        return float(evaluate(head_integral(g), hi))
    x0 = g.breakpoints[0] if g.breakpoints else 0.0
    return float(evaluate(tail_integral(g), x0) + evaluate(head_integral(g), x0))


def _iterated(f: ExpPoly, times: int, op) -> ExpPoly:
    for _ in range(times):
        f = op(f)
    return f


def _one_sided(f: ExpPoly, lam: float, degree: int, side: str) -> ExpPoly:
    """x -> int_0^inf f(x + s*y) y^degree exp(-|lam| y) dy for s = +1 ('right') or -1 ('left').

    Uses the repeated-integration identity
    int_x^inf (z - x)^l / l! h(z) dz = T^{l+1} h (x), with h = f exp(lam z).
    ``lam`` is the exponent in y of the density on that side (negative on the
    right, positive on the left) written in the original orientation.
    """
    center = f.breakpoints[len(f.breakpoints) // 2] if f.breakpoints else 0.0
    h = mul_exp(shift(f, center), lam)  # h(z) = f(z + center) exp(lam z)
    if side == "right":
        try:
            t = _iterated(h, degree + 1, tail_integral)
        except DivergentConvolutionError as e:
            raise DivergentConvolutionError(
                f"convolution diverges on the right: f grows like exp({f.right_growth():.6g} x) "
                f"but the density decays like exp({lam:.6g} y)", tail="right",
                growth=f.right_growth(), decay=-lam) from e
    else:
        try:
            t = _iterated(h, degree + 1, head_integral)
        except DivergentConvolutionError as e:
            raise DivergentConvolutionError(
                f"convolution diverges on the left: f behaves like exp({f.left_growth():.6g} x) "
                f"but the density decays like exp({lam:.6g} y)", tail="left",
                growth=f.left_growth(), decay=lam) from e
    out = shift(mul_exp(t, -lam), -center) * float(math.factorial(degree))
    return out


def convolve_density(f: ExpPoly, r: ExpPoly) -> ExpPoly:
    """g(x) = integral f(x + y) r(y) dy, in closed form.

    ``r`` may have any number of pieces but every bounded piece must be
    integrable as a difference of tails; in practice densities here have a
    single breakpoint at 0.
    """
    if f.is_zero or r.is_zero:
        return ExpPoly()
    out: list[tuple[float, ExpPoly]] = []
    edges = [-math.inf, *r.breakpoints, math.inf]
    for i, (terms, anchor) in enumerate(zip(r.pieces, r.anchors)):
        if not terms:
            continue
        lo, hi = edges[i], edges[i + 1]
        if math.isinf(hi) and math.isinf(lo):
            raise DivergentConvolutionError("density piece covering all of R is not integrable")
        for lam, coef in terms.items():
            if math.isinf(hi):
                out.extend(_right_piece(f, lam, coef, anchor, lo))
            elif math.isinf(lo):
                out.extend(_left_piece(f, lam, coef, anchor, hi))
            else:
                # [lo, hi) = [lo, inf) - [hi, inf) when the right tail converges, else via the left
                try:
                    a = _right_piece(f, lam, coef, anchor, lo)
                    b = _right_piece(f, lam, coef, anchor, hi)
                except DivergentConvolutionError:
                    a = _left_piece(f, lam, coef, anchor, hi)
                    b = _left_piece(f, lam, coef, anchor, lo)
                out.extend(a)
                out.extend((-s, g) for s, g in b)
    return linear_combine(out)


def _right_piece(f, lam, coef, anchor, start):
    # density term coef(y - anchor) exp(lam (y - anchor)) on [start, inf), re-anchored at start
    c = _poly_shift(coef, start - anchor) * math.exp(lam * (start - anchor))
    parts = []
    for l, cl in enumerate(c):
        if cl == 0.0:
            continue
        g = _one_sided(f, lam, l, "right")  # int_0^inf f(x+y) y^l e^{lam y} dy
        parts.append((float(cl), shift(g, start)))
    return parts


def _left_piece(f, lam, coef, anchor, end):
    # density term on (-inf, end): write y = end - y', y' > 0
    c = _poly_shift(coef, end - anchor) * math.exp(lam * (end - anchor))
    parts = []
    for l, cl in enumerate(c):
        if cl == 0.0:
            continue
        # (y - end)^l = (-y')^l ; exp(lam (y - end)) = exp(-lam y')
        g = _one_sided(f, lam, l, "left")  # int_0^inf f(x-y') y'^l e^{-lam y'} dy'
        parts.append((float(cl) * (-1.0) ** l, shift(g, end)))
    return parts


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpMixtureMeasure:
    """Signed measure on [0, inf): atom at 0 plus density sum c_j exp(-theta_j y)."""

    atom0: float
    terms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        decays = [th for _, th in self.terms]
        if any(th <= 0 for th in decays):
            raise ValueError("decays must be positive")
        if len(set(decays)) != len(decays):
            raise ValueError("decays must be distinct")

    def laplace(self, beta):
        """int exp(-beta y) m(dy), valid for beta > -min(theta)."""
        b = np.asarray(beta, dtype=float)
        out = self.atom0 + sum(c / (th + b) for c, th in self.terms) if self.terms else \
            self.atom0 + 0.0 * b
        return float(out) if np.ndim(out) == 0 else out

    @property
    def total_mass(self) -> float:
        return self.laplace(0.0)

    @property
    def min_decay(self) -> float:
        return min((th for _, th in self.terms), default=math.inf)

    def density(self, y):
        y = np.asarray(y, dtype=float)
        out = sum(c * np.exp(-th * y) for c, th in self.terms) if self.terms else 0.0 * y
        out = np.where(y >= 0, out, 0.0)
        return float(out) if out.ndim == 0 else out

    def density_mass(self) -> float:
        return sum(c / th for c, th in self.terms)

    def as_exppoly(self) -> ExpPoly:
        """Density part as an ExpPoly supported on [0, inf)."""
        return ExpPoly((0.0,), [{}, {-th: np.array([c]) for c, th in self.terms}])

    def scaled(self, s: float) -> "ExpMixtureMeasure":
        return ExpMixtureMeasure(self.atom0 * s, tuple((c * s, th) for c, th in self.terms))


def combine_measures(parts: Sequence[tuple[float, ExpMixtureMeasure]]) -> ExpMixtureMeasure:
    atom = 0.0
    acc: dict[float, float] = {}
    for s, m in parts:
        atom += s * m.atom0
        for c, th in m.terms:
            acc[th] = acc.get(th, 0.0) + s * c
    return ExpMixtureMeasure(atom, tuple((c, th) for th, c in sorted(acc.items())))


def integrate_measure(f: ExpPoly, m: ExpMixtureMeasure, from_point: float) -> float:
    """int_[0,inf) f(from_point + y) m(dy)."""
    total = m.atom0 * evaluate(f, from_point) if m.atom0 != 0.0 else 0.0
    if not m.terms:
        return float(total)
    g = shift(f, from_point).restrict(0.0, None)
    for c, th in m.terms:
        h = mul_exp(g, -th)
        if h.pieces[-1]:
            try:
                _check_right_decay(h, "measure integral")
            except DivergentConvolutionError as e:
                raise DivergentConvolutionError(
                    f"f grows like exp({f.right_growth():.6g} x) but the measure decays like "
                    f"exp(-{th:.6g} y)", tail="right", growth=f.right_growth(), decay=th) from e
        total += c * float(evaluate(tail_integral(h), 0.0))
    return float(total)


# ---------------------------------------------------------------------------
# plain-text serialisation

def to_text(f: ExpPoly) -> str:
    lines = ["# ExpPoly: value on piece = sum_theta poly(x - anchor) * exp(theta * (x - anchor))",
             "breakpoints " + " ".join(repr(b) for b in f.breakpoints)]
    for i, (terms, a) in enumerate(zip(f.pieces, f.anchors)):
        lines.append(f"piece {i} anchor {a!r} terms {len(terms)}")
        for th, c in terms.items():
            lines.append(f"  theta {th!r} coeffs " + " ".join(repr(float(v)) for v in c))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> ExpPoly:
    bps: list[float] = []
    pieces: list[Terms] = []
    anchors: list[float] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        if tok[0] == "breakpoints":
            bps = [float(v) for v in tok[1:]]
        elif tok[0] == "piece":
            anchors.append(float(tok[3]))
            pieces.append({})
        elif tok[0] == "theta":
            pieces[-1][float(tok[1])] = np.array([float(v) for v in tok[3:]])
        else:
            raise ValueError(f"unrecognised line: {raw!r}")
    return ExpPoly(bps, pieces, anchors=anchors)

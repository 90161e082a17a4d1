"""Jump-diffusion Lévy model with hyper-exponential jumps in both directions.

The log-price follows

    X_t = X_0 + drift * t + sigma * B_t - sum(down jumps) + sum(up jumps)

with compound-Poisson jumps whose magnitudes are finite mixtures of
exponentials.  Its Laplace exponent ``psi(beta) = log E[exp(beta X_1)]`` is a
rational function of ``beta``, which is what makes everything downstream
closed-form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ModelError, PoleError

_WEIGHT_TOL = 1e-12
_POLE_TOL = 1e-12


def _as_mix(mix: Sequence[tuple[float, float]], name: str) -> tuple[tuple[float, float], ...]:
    out = tuple((float(w), float(r)) for w, r in mix)
    if not out:
        return out
    weights = np.array([w for w, _ in out])
    rates = np.array([r for _, r in out])
    if np.any(weights <= 0):
        raise ModelError(f"{name}: weights must be strictly positive, got {weights.tolist()}")
    if np.any(rates <= 0) or not np.all(np.isfinite(rates)):
        raise ModelError(f"{name}: rates must be finite and strictly positive, got {rates.tolist()}")
    if abs(weights.sum() - 1.0) > _WEIGHT_TOL:
        raise ModelError(f"{name}: weights sum to {weights.sum()!r}, expected 1")
    if len(set(rates.tolist())) != len(rates):
        raise ModelError(
            f"{name}: duplicate rates {sorted(rates.tolist())}; merge the weights of equal rates "
            "into a single component"
        )
    return out


@dataclass(frozen=True)
class LevyModel:
    """Drift + Brownian motion + two-sided hyper-exponential compound Poisson jumps.

    ``down_mix`` and ``up_mix`` are sequences of ``(weight, rate)`` pairs; a jump
    of the corresponding sign has magnitude with density
    ``sum(w * rate * exp(-rate * y))``.
    """

    drift: float
    sigma: float = 0.0
    down_jump_rate: float = 0.0
    down_mix: tuple[tuple[float, float], ...] = ()
    up_jump_rate: float = 0.0
    up_mix: tuple[tuple[float, float], ...] = ()
    beta0: float = field(init=False)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "drift", float(self.drift))
        set_(self, "sigma", float(self.sigma))
        set_(self, "down_jump_rate", float(self.down_jump_rate))
        set_(self, "up_jump_rate", float(self.up_jump_rate))
        if self.sigma < 0:
            raise ModelError(f"sigma must be >= 0, got {self.sigma}")
        if self.down_jump_rate < 0 or self.up_jump_rate < 0:
            raise ModelError("jump arrival rates must be >= 0")
        down = _as_mix(self.down_mix, "down_mix")
        up = _as_mix(self.up_mix, "up_mix")
        if self.down_jump_rate > 0 and not down:
            raise ModelError("down_jump_rate > 0 requires a non-empty down_mix")
        if self.up_jump_rate > 0 and not up:
            raise ModelError("up_jump_rate > 0 requires a non-empty up_mix")
        # a zero arrival rate switches the mixture off entirely
        set_(self, "down_mix", down if self.down_jump_rate > 0 else ())
        set_(self, "up_mix", up if self.up_jump_rate > 0 else ())
        set_(self, "beta0", min(r for _, r in self.up_mix) if self.up_mix else math.inf)

    # -- convenience views -------------------------------------------------
    @property
    def down_rates(self) -> np.ndarray:
        return np.array([r for _, r in self.down_mix], dtype=float)

    @property
    def down_weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.down_mix], dtype=float)

    @property
    def up_rates(self) -> np.ndarray:
        return np.array([r for _, r in self.up_mix], dtype=float)

    @property
    def up_weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.up_mix], dtype=float)

    @property
    def poles(self) -> np.ndarray:
        """Sorted real poles of psi: ``-mu_i`` (down) and ``theta_j`` (up)."""
        return np.sort(np.concatenate([-self.down_rates, self.up_rates]))

    @property
    def spectrally_negative(self) -> bool:
        return not self.up_mix

    @property
    def minus_j_subordinator(self) -> bool:
        """True when the spectrally negative part J has -J increasing."""
        return self.sigma == 0 and self.drift < 0

    @property
    def continuous_degree(self) -> int:
        """Degree contributed by the continuous part (2 with diffusion, 1 with drift only)."""
        if self.sigma > 0:
            return 2
        return 1 if self.drift != 0 else 0

    @property
    def mean(self) -> float:
        """E[X_1] = psi'(0)."""
        return laplace_exponent_derivative(self, 0.0)

    def laplace_exponent(self, beta):
        return laplace_exponent(self, beta)

    def laplace_exponent_derivative(self, beta):
        return laplace_exponent_derivative(self, beta)


@dataclass(frozen=True)
class Contract:
    """Perpetual call stream: strike, effective discount rate, number of exercises."""

    strike: float
    alpha: float
    n_exercises: int = 1

    def __post_init__(self):
        if not self.strike > 0:
            raise ModelError(f"strike must be > 0, got {self.strike}")
        if int(self.n_exercises) != self.n_exercises or self.n_exercises < 1:
            raise ModelError(f"n_exercises must be an integer >= 1, got {self.n_exercises}")
        object.__setattr__(self, "n_exercises", int(self.n_exercises))
        object.__setattr__(self, "strike", float(self.strike))
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def log_strike(self) -> float:
        return math.log(self.strike)


MAX_SHAPE = 8


@dataclass(frozen=True)
class RefractionSpec:
    """Erlang(shape, rate) refraction period; mean is ``shape / rate``."""

    shape: int
    rate: float

    def __post_init__(self):
        if int(self.shape) != self.shape or self.shape < 1:
            raise ModelError(f"Erlang shape must be an integer >= 1, got {self.shape}")
        if self.shape > MAX_SHAPE:
            raise ModelError(f"Erlang shape {self.shape} exceeds the supported maximum {MAX_SHAPE}")
        if not self.rate > 0:
            raise ModelError(f"Erlang rate must be > 0, got {self.rate}")
        object.__setattr__(self, "shape", int(self.shape))
        object.__setattr__(self, "rate", float(self.rate))

    @classmethod
    def from_mean(cls, mean: float, shape: int = 1) -> "RefractionSpec":
        if not mean > 0:
            raise ModelError(f"mean refraction time must be > 0, got {mean}")
        return cls(shape=shape, rate=shape / mean)

    @property
    def mean(self) -> float:
        return self.shape / self.rate


def _check_poles(model: LevyModel, beta) -> None:
    poles = model.poles
    if poles.size == 0:
        return
    b = np.asarray(beta)
    dist = np.abs(b[..., None] - poles)
    if np.any(dist < _POLE_TOL * np.maximum(1.0, np.abs(poles))):
        raise PoleError(f"beta={beta!r} is within {_POLE_TOL:g} (relative) of a pole of psi")


def laplace_exponent(model: LevyModel, beta):
    """psi(beta) for real/complex scalars or numpy arrays.

    Raises PoleError when ``beta`` sits on (or within 1e-12 of) a pole.
    """
    _check_poles(model, beta)
    b = np.asarray(beta)
    out = model.drift * b + 0.5 * model.sigma**2 * b * b
    if model.down_mix:
        s = sum(w * mu / (mu + b) for w, mu in model.down_mix)
        out = out + model.down_jump_rate * (s - 1.0)
    if model.up_mix:
        s = sum(p * th / (th - b) for p, th in model.up_mix)
        out = out + model.up_jump_rate * (s - 1.0)
    if np.ndim(out) == 0:
        return out.item() if isinstance(out, np.ndarray) else out
    return out


def laplace_exponent_derivative(model: LevyModel, beta):
    """Exact psi'(beta)."""
    _check_poles(model, beta)
    b = np.asarray(beta)
    out = model.drift + model.sigma**2 * b
    if model.down_mix:
        out = out - model.down_jump_rate * sum(w * mu / (mu + b) ** 2 for w, mu in model.down_mix)
    if model.up_mix:
        out = out + model.up_jump_rate * sum(p * th / (th - b) ** 2 for p, th in model.up_mix)
    if np.ndim(out) == 0:
        return out.item() if isinstance(out, np.ndarray) else out
    return out


def refraction_exp_moment(model: LevyModel, alpha: float, refraction: RefractionSpec) -> float:
    """E[exp(-alpha * delta + X_delta)] for Erlang delta; inf when it diverges."""
    denom = refraction.rate + alpha - laplace_exponent(model, 1.0)
    if denom <= 0:
        return math.inf
    return (refraction.rate / denom) ** refraction.shape


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        return [f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}" for c in self.checks]

    def __str__(self) -> str:
        return "\n".join(self.lines())


def validate(model: LevyModel, contract: Contract,
             refraction: RefractionSpec | None = None) -> ValidationReport:
    """Check every standing assumption; never raises.

    Check names:
      ``assumption``     psi(1) < alpha, or psi(1) = alpha < 0 with psi'(1) < 0
      ``beta0``          beta0 > 1
      ``not_subordinator`` -X is not a subordinator
      ``continuous_law`` sigma > 0 or drift != 0 (X_delta has no atoms)
      ``refraction_rate`` q + alpha > 0
      ``refraction_moment`` E[exp(-alpha delta + X_delta)] <= 1
    """
    alpha = contract.alpha
    checks = []

    beta0_ok = model.beta0 > 1
    checks.append(Check("beta0", beta0_ok, f"beta0={model.beta0:.6g}"))

    if beta0_ok:
        psi1 = laplace_exponent(model, 1.0)
        dpsi1 = laplace_exponent_derivative(model, 1.0)
        strict = psi1 < alpha
        boundary = psi1 == alpha and alpha < 0 and dpsi1 < 0
        checks.append(Check("assumption", strict or boundary,
                            f"psi(1)={psi1:.12g}, alpha={alpha:.12g}, psi'(1)={dpsi1:.6g}"))
    else:
        checks.append(Check("assumption", False, "psi(1) undefined: beta0 <= 1"))

    nonsub = model.sigma > 0 or model.drift > 0 or bool(model.up_mix)
    checks.append(Check("not_subordinator", nonsub,
                        f"sigma={model.sigma:g}, drift={model.drift:g}, up_jumps={bool(model.up_mix)}"))
    cont = model.sigma > 0 or model.drift != 0
    checks.append(Check("continuous_law", cont, f"sigma={model.sigma:g}, drift={model.drift:g}"))

    if refraction is not None:
        qa = refraction.rate + alpha
        checks.append(Check("refraction_rate", qa > 0, f"q+alpha={qa:.12g}"))
        if beta0_ok and qa > 0:
            moment = refraction_exp_moment(model, alpha, refraction)
            checks.append(Check("refraction_moment", moment <= 1.0,
                                f"E[exp(-alpha*delta+X_delta)]={moment:.12g}"))
        else:
            checks.append(Check("refraction_moment", False, "moment diverges"))
    return ValidationReport(tuple(checks))


def reference_model() -> LevyModel:
    """Spectrally negative benchmark: drift 0.36, sigma 0.2, Exp(1) down jumps at rate 1.

    Paired with alpha = -0.02 it gives alpha - psi(1) = 0.1.
    """
    return LevyModel(drift=0.36, sigma=0.2, down_jump_rate=1.0, down_mix=((1.0, 1.0),))

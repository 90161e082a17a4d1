"""Monte Carlo oracle for first passage, threshold strategies and resolvents.

Paths are simulated exactly, without a time grid.  Between jump epochs the
process is a drifted Brownian motion, for which the first-passage time to a
level is inverse Gaussian (defective when the drift points away), and the
endpoint conditioned on not crossing is drawn by rejection against the
Brownian-bridge crossing probability.  Jump sizes, and therefore overshoots,
are drawn exactly.

Random numbers are drawn in fixed-size blocks (one value per path per event),
so runs that differ only in thresholds see common random numbers up to the
point where their paths diverge.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .levy import Contract, LevyModel, RefractionSpec

DEFAULT_KILL = 20.0
_REJECT_ROUNDS = 64


@dataclass(frozen=True)
class SimConfig:
    seed: int = 12345
    n_paths: int = 100_000
    horizon: float = 500.0
    step: float = 1e-3  # kept for interface compatibility; the scheme has no time step
    workers: int = 1
    kill_distance: float = DEFAULT_KILL

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ValueError(f"n_paths must be an integer >= 1, got {self.n_paths}")
        if not self.step <= 1e-2:
            raise ValueError(f"step must be <= 1e-2, got {self.step}")
        if not self.horizon >= 100:
            raise ValueError(f"horizon must be >= 100, got {self.horizon}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ValueError(f"workers must be an integer >= 1, got {self.workers}")
        if not self.kill_distance > 0:
            raise ValueError("kill_distance must be > 0")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n: int
    truncation_fraction: float
    killed_fraction: float = 0.0

    @property
    def usable(self) -> bool:
        return self.truncation_fraction < 1e-3

    def within(self, value: float, n_se: float = 3.0) -> bool:
        return abs(self.mean - value) <= n_se * self.std_error

    @classmethod
    def from_samples(cls, values: np.ndarray, truncated: int, killed: int) -> "McEstimate":
        n = len(values)
        se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(float(values.mean()), se, n, truncated / n, killed / n)


@dataclass(frozen=True)
class FirstPassageResult:
    estimate: McEstimate
    overshoots: np.ndarray  # X_tau - b for paths that crossed before the horizon
    creep_fraction: float


class _Streams:
    """Counter-style streams: every block of draws is keyed by (seed, worker, *key).

    Keying by (phase, iteration, purpose) keeps path i on the same random
    numbers across runs that differ only in thresholds.
    """

    def __init__(self, seed: int, worker: int):
        self.base = [int(seed) & (2**64 - 1), int(worker)]

    def gen(self, *key: int) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(np.random.SeedSequence(self.base + list(key))))


def _jump_sampler(mix):
    weights = np.array([w for w, _ in mix])
    rates = np.array([r for _, r in mix])
    cum = np.cumsum(weights)
    cum[-1] = 1.0
    return cum, rates


def _hyperexp(u_comp: np.ndarray, e_std: np.ndarray, cum: np.ndarray, rates: np.ndarray) -> np.ndarray:
    idx = np.minimum(np.searchsorted(cum, u_comp, side="right"), len(rates) - 1)
    return e_std / rates[idx]


class _Dynamics:
    def __init__(self, model: LevyModel):
        self.c = model.drift
        self.s = model.sigma
        self.ld = model.down_jump_rate
        self.lu = model.up_jump_rate
        self.lam = self.ld + self.lu
        self.down = _jump_sampler(model.down_mix) if model.down_mix else None
        self.up = _jump_sampler(model.up_mix) if model.up_mix else None

    # -- passage of drifted BM over distance a > 0 -------------------------
    def hitting_time(self, rng, a: np.ndarray) -> np.ndarray:
        n = len(a)
        c, s = self.c, self.s
        safe = np.where(a > 0, a, 1.0)
        if s == 0.0:
            rng.random(n)  # keep block sizes fixed
            return safe / c if c > 0 else np.full(n, np.inf)
        shape = safe**2 / s**2
        if c != 0.0:
            mean = safe / abs(c)
            t = rng.wald(mean, shape)
        else:
            z = rng.standard_normal(n)
            t = shape / np.maximum(z * z, 1e-300)
        u = rng.random(n)
        if c < 0:
            hit = u < np.exp(2.0 * c * safe / s**2)
            t = np.where(hit, t, np.inf)
        return t

    def endpoint_below(self, rng, a: np.ndarray, e: np.ndarray) -> np.ndarray:
        """W_e given max_{[0,e]} W < a, for drifted BM started at 0."""
        n = len(a)
        c, s = self.c, self.s
        if s == 0.0:
            return c * e
        out = np.empty(n)
        todo = np.arange(n)
        rounds = 0
        while todo.size:
            size = n if rounds < _REJECT_ROUNDS else todo.size
            z = rng.standard_normal(size)
            u = rng.random(size)
            if size == n:
                z, u = z[todo], u[todo]
            ee, aa = e[todo], a[todo]
            w = c * ee + s * np.sqrt(ee) * z
            ok = (w < aa) & (u < -np.expm1(-2.0 * aa * (aa - w) / (s * s * ee)))
            out[todo[ok]] = w[ok]
            todo = todo[~ok]
            rounds += 1
        return out

    def jumps(self, rng, n: int) -> np.ndarray:
        """One jump per path (signed)."""
        u_type = rng.random(n)
        u_comp = rng.random(n)
        e_std = rng.standard_exponential(n)
        out = np.zeros(n)
        if self.lam == 0:
            return out
        is_down = u_type < self.ld / self.lam
        if self.down is not None:
            out = np.where(is_down, -_hyperexp(u_comp, e_std, *self.down), out)
        if self.up is not None:
            out = np.where(~is_down, _hyperexp(u_comp, e_std, *self.up), out)
        return out

    def increment(self, rng, dt: np.ndarray) -> np.ndarray:
        """Exact sample of X_{dt} - X_0 for each entry of dt."""
        n = len(dt)
        x = self.c * dt + self.s * np.sqrt(dt) * rng.standard_normal(n)
        for rate, sampler, sign in ((self.ld, self.down, -1.0), (self.lu, self.up, 1.0)):
            if sampler is None:
                continue
            counts = rng.poisson(rate * dt)
            total = int(counts.sum())
            if total:
                sizes = _hyperexp(rng.random(total), rng.standard_exponential(total), *sampler)
                owner = np.repeat(np.arange(n), counts)
                x = x + sign * np.bincount(owner, weights=sizes, minlength=n)
        return x


_MAIN, _REJECT, _FF, _RESOLVENT = 0, 1, 2, 3


def _passage(dyn: _Dynamics, st: _Streams, x: np.ndarray, t: np.ndarray, b: float,
             active: np.ndarray, horizon: float, kill: float, phase: int = 0):
    """Advance active paths to their first up-crossing of ``b``.

    Returns (crossed, creep, truncated, killed) masks; x and t are updated in place.
    """
    n = len(x)
    crossed = np.zeros(n, bool)
    creep = np.zeros(n, bool)
    truncated = np.zeros(n, bool)
    killed = np.zeros(n, bool)
    live = active.copy()
    # already above the level: immediate crossing
    now = live & (x >= b)
    crossed |= now
    live &= ~now
    it = 0
    while live.any():
        rng = st.gen(phase, it, _MAIN)
        it += 1
        a = np.where(live, b - x, 1.0)
        e = rng.standard_exponential(n) / dyn.lam if dyn.lam > 0 else np.full(n, np.inf)
        th = dyn.hitting_time(rng, a)
        jumps = dyn.jumps(rng, n)
        idx = np.flatnonzero(live)
        ti, ei = th[idx], e[idx]
        first = np.minimum(ti, ei)
        late = t[idx] + first > horizon
        truncated[idx[late]] = True
        live[idx[late]] = False
        go = ~late
        # creeping crossings
        cr = go & (ti < ei)
        ci = idx[cr]
        t[ci] += ti[cr]
        x[ci] = b
        crossed[ci] = True
        creep[ci] = True
        live[ci] = False
        # jump epochs without prior crossing
        jm = go & ~(ti < ei)
        ji = idx[jm]
        if ji.size:
            w = dyn.endpoint_below(st.gen(phase, it, _REJECT), a[ji], e[ji])
            x[ji] += w + jumps[ji]
            t[ji] += e[ji]
            over = x[ji] >= b
            crossed[ji[over]] = True
            live[ji[over]] = False
            gone = x[ji] < b - kill
            killed[ji[gone]] = True
            live[ji[gone]] = False
    return crossed, creep, truncated, killed


def _worker_first_passage(args):
    model, alpha, x0, b, n, seed, worker, horizon, kill = args
    dyn, st = _Dynamics(model), _Streams(seed, worker)
    x = np.full(n, float(x0))
    t = np.zeros(n)
    crossed, creep, trunc, killed = _passage(dyn, st, x, t, b, np.ones(n, bool), horizon, kill)
    vals = np.where(crossed, np.exp(-alpha * t), 0.0)
    return vals, x[crossed] - b, int(trunc.sum()), int(killed.sum()), int(creep.sum())


def _worker_strategy(args):
    model, contract, refraction, thresholds, x0, n, seed, worker, horizon, kill = args
    dyn, st = _Dynamics(model), _Streams(seed, worker)
    x = np.full(n, float(x0))
    t = np.zeros(n)
    total = np.zeros(n)
    alive = np.ones(n, bool)
    trunc = np.zeros(n, bool)
    killed = np.zeros(n, bool)
    K, alpha = contract.strike, contract.alpha
    for k in range(len(thresholds), 0, -1):
        crossed, _, tr, kl = _passage(dyn, st, x, t, thresholds[k - 1], alive, horizon, kill, phase=k)
        total[crossed] += np.exp(-alpha * t[crossed]) * np.maximum(np.exp(x[crossed]) - K, 0.0)
        trunc |= tr
        killed |= kl
        alive = crossed
        if k > 1:
            ff = st.gen(k, 0, _FF)
            delta = ff.gamma(refraction.shape, 1.0 / refraction.rate, size=n)
            inc = dyn.increment(ff, delta)
            x[alive] += inc[alive]
            t[alive] += delta[alive]
            late = alive & (t > horizon)
            trunc |= late
            alive &= ~late
    return total, int(trunc.sum()), int(killed.sum())


def _split(n: int, workers: int) -> list[int]:
    return [len(c) for c in np.array_split(np.arange(n), workers)]


def _run(fn, jobs, workers):
    if workers == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def simulate_first_passage(model: LevyModel, alpha: float, x: float, b: float,
                           config: SimConfig) -> FirstPassageResult:
    """E_x[exp(-alpha tau_b) ; tau_b <= T] with overshoot samples."""
    if not x < b:
        raise ValueError("simulate_first_passage needs x < b")
    sizes = _split(config.n_paths, config.workers)
    jobs = [(model, alpha, x, b, n, config.seed, w, config.horizon, config.kill_distance)
            for w, n in enumerate(sizes)]
    out = _run(_worker_first_passage, jobs, config.workers)
    vals = np.concatenate([o[0] for o in out])
    over = np.concatenate([o[1] for o in out])
    est = McEstimate.from_samples(vals, sum(o[2] for o in out), sum(o[3] for o in out))
    return FirstPassageResult(est, over, sum(o[4] for o in out) / config.n_paths)


def simulate_strategy_value(model: LevyModel, contract: Contract, refraction: RefractionSpec | None,
                            thresholds, x: float, config: SimConfig) -> McEstimate:
    """Discounted payoff of the threshold strategy.

    ``thresholds[k - 1]`` is the exercise level used while k rights remain, the
    same indexing as ``SolveResult.thresholds``.
    """
    thresholds = [float(v) for v in thresholds]
    if len(thresholds) != contract.n_exercises:
        raise ValueError(f"need {contract.n_exercises} thresholds, got {len(thresholds)}")
    if len(thresholds) > 1 and refraction is None:
        raise ValueError("refraction is required for more than one exercise")
    sizes = _split(config.n_paths, config.workers)
    jobs = [(model, contract, refraction, thresholds, x, n, config.seed, w, config.horizon,
             config.kill_distance) for w, n in enumerate(sizes)]
    out = _run(_worker_strategy, jobs, config.workers)
    vals = np.concatenate([o[0] for o in out])
    return McEstimate.from_samples(vals, sum(o[1] for o in out), sum(o[2] for o in out))


def _worker_resolvent(args):
    model, p, shape, n, seed, worker = args
    dyn, st = _Dynamics(model), _Streams(seed, worker)
    rng = st.gen(0, 0, _RESOLVENT)
    dt = rng.gamma(shape, 1.0 / p, size=n)
    return dyn.increment(rng, dt)


def estimate_resolvent(model: LevyModel, p: float, config: SimConfig, shape: int = 1) -> np.ndarray:
    """Samples of X_e - X_0 with e ~ Erlang(shape, p) (exponential by default)."""
    if not p > 0:
        raise ValueError(f"p must be > 0, got {p}")
    sizes = _split(config.n_paths, config.workers)
    jobs = [(model, p, shape, n, config.seed, w) for w, n in enumerate(sizes)]
    return np.concatenate(_run(_worker_resolvent, jobs, config.workers))


def ks_distance(samples: np.ndarray, cdf) -> float:
    """Kolmogorov-Smirnov distance that stays correct when the law has atoms."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    uniq, counts = np.unique(x, return_counts=True)
    right = np.cumsum(counts) / n
    left = right - counts / n
    f_right = np.asarray(cdf(uniq), dtype=float)
    f_left = np.asarray(cdf(np.nextafter(uniq, -np.inf)), dtype=float)
    return float(max(np.max(np.abs(right - f_right)), np.max(np.abs(left - f_left))))

"""INI run configuration for the command-line front end.

Sections and keys (everything else is rejected)::

    [model]       drift, sigma, down_jump_rate, down_mix, up_jump_rate, up_mix
    [contract]    strike, alpha, n_exercises
    [refraction]  shape, rate | mean
    [mc]          seed, n_paths, horizon, step, workers, kill_distance
    [output]      grid_points, grid_lo, grid_hi, sweep_means

Mixtures are written ``weight:rate`` separated by commas, e.g. ``0.3:1, 0.7:4``.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MultistopError
from .levy import Contract, LevyModel, RefractionSpec
from .montecarlo import SimConfig

_SCHEMA = {
    "model": {"drift", "sigma", "down_jump_rate", "down_mix", "up_jump_rate", "up_mix"},
    "contract": {"strike", "alpha", "n_exercises"},
    "refraction": {"shape", "rate", "mean"},
    "mc": {"seed", "n_paths", "horizon", "step", "workers", "kill_distance"},
    "output": {"grid_points", "grid_lo", "grid_hi", "sweep_means"},
}
_REQUIRED = {"model": {"drift"}, "contract": {"strike", "alpha"}}


class ConfigError(MultistopError):
    """Malformed or incomplete configuration file."""


@dataclass(frozen=True)
class OutputSpec:
    grid_points: int = 401
    grid_lo: float | None = None
    grid_hi: float | None = None
    sweep_means: tuple[float, ...] = tuple(0.5 * i for i in range(1, 21))


@dataclass(frozen=True)
class RunConfig:
    model: LevyModel
    contract: Contract
    refraction: RefractionSpec | None
    sim: SimConfig = field(default_factory=SimConfig)
    output: OutputSpec = field(default_factory=OutputSpec)
    refraction_shape: int = 1

    def grid_bounds(self, x1_star: float) -> tuple[float, float]:
        lo = self.contract.log_strike - 2.0 if self.output.grid_lo is None else self.output.grid_lo
        hi = x1_star + 2.0 if self.output.grid_hi is None else self.output.grid_hi
        return lo, hi


def _line_of(text: str, section: str, key: str | None) -> int | None:
    cur = None
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"\[(.+)\]$", line)
        if m:
            cur = m.group(1).strip()
            if key is None and cur == section:
                return i
            continue
        if cur == section and key is not None and re.match(rf"{re.escape(key)}\s*[=:]", line):
            return i
    return None


class _Reader:
    def __init__(self, parser: configparser.ConfigParser, text: str, source: str):
        self.p, self.text, self.source = parser, text, source

    def fail(self, section: str, key: str | None, msg: str):
        line = _line_of(self.text, section, key)
        where = f"{self.source}:{line}" if line else self.source
        what = f"[{section}] {key}" if key else f"[{section}]"
        raise ConfigError(f"{where}: {what}: {msg}")

    def has(self, section, key):
        return self.p.has_section(section) and self.p.has_option(section, key)

    def get(self, section, key, conv, default=None):
        if not self.has(section, key):
            return default
        raw = self.p.get(section, key)
        try:
            return conv(raw)
        except (ValueError, TypeError) as e:
            self.fail(section, key, f"cannot parse {raw!r}: {e}")


def _int(raw: str) -> int:
    v = float(raw)
    if v != int(v):
        raise ValueError("expected an integer")
    return int(v)


def _mix(raw: str) -> tuple[tuple[float, float], ...]:
    raw = raw.strip()
    if not raw:
        return ()
    out = []
    for part in raw.split(","):
        w, sep, r = part.partition(":")
        if not sep:
            raise ValueError(f"mixture component {part.strip()!r} is not weight:rate")
        out.append((float(w), float(r)))
    return tuple(out)


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(v) for v in raw.replace(",", " ").split())


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise ConfigError(f"{source}: {e}") from e
    rd = _Reader(parser, text, source)
    for section in parser.sections():
        if section not in _SCHEMA:
            rd.fail(section, None, f"unknown section (expected one of {sorted(_SCHEMA)})")
        for key in parser.options(section):
            if key not in _SCHEMA[section]:
                rd.fail(section, key, f"unknown key (expected one of {sorted(_SCHEMA[section])})")
    for section, keys in _REQUIRED.items():
        for key in sorted(keys):
            if not rd.has(section, key):
                raise ConfigError(f"{source}: [{section}] {key}: required key missing")

    def build(section, fn):
        try:
            return fn()
        except (ValueError, TypeError) as e:
            rd.fail(section, None, str(e))

    model = build("model", lambda: LevyModel(
        drift=rd.get("model", "drift", float),
        sigma=rd.get("model", "sigma", float, 0.0),
        down_jump_rate=rd.get("model", "down_jump_rate", float, 0.0),
        down_mix=rd.get("model", "down_mix", _mix, ()),
        up_jump_rate=rd.get("model", "up_jump_rate", float, 0.0),
        up_mix=rd.get("model", "up_mix", _mix, ()),
    ))
    contract = build("contract", lambda: Contract(
        strike=rd.get("contract", "strike", float),
        alpha=rd.get("contract", "alpha", float),
        n_exercises=rd.get("contract", "n_exercises", _int, 1),
    ))

    shape = rd.get("refraction", "shape", _int, 1)
    rate = rd.get("refraction", "rate", float)
    mean = rd.get("refraction", "mean", float)
    if rate is not None and mean is not None:
        rd.fail("refraction", "mean", "give either rate or mean, not both")
    if rate is not None:
        refraction = build("refraction", lambda: RefractionSpec(shape, rate))
    elif mean is not None:
        refraction = build("refraction", lambda: RefractionSpec.from_mean(mean, shape))
    else:
        refraction = None

    sim = build("mc", lambda: SimConfig(
        seed=rd.get("mc", "seed", _int, SimConfig.seed),
        n_paths=rd.get("mc", "n_paths", _int, SimConfig.n_paths),
        horizon=rd.get("mc", "horizon", float, SimConfig.horizon),
        step=rd.get("mc", "step", float, SimConfig.step),
        workers=rd.get("mc", "workers", _int, SimConfig.workers),
        kill_distance=rd.get("mc", "kill_distance", float, SimConfig.kill_distance),
    ))
    means = rd.get("output", "sweep_means", _floats, OutputSpec.sweep_means)
    if any(not (m > 0 and math.isfinite(m)) for m in means):
        rd.fail("output", "sweep_means", "means must be positive and finite")
    output = build("output", lambda: OutputSpec(
        grid_points=rd.get("output", "grid_points", _int, OutputSpec.grid_points),
        grid_lo=rd.get("output", "grid_lo", float),
        grid_hi=rd.get("output", "grid_hi", float),
        sweep_means=tuple(means),
    ))
    if output.grid_points < 2:
        rd.fail("output", "grid_points", "need at least 2 grid points")
    return RunConfig(model, contract, refraction, sim, output, refraction_shape=shape)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config: {e}") from e
    return parse_config(text, str(path))

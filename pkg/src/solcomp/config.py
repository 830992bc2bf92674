"""Experiment configuration read from a TOML file with flat tables.

Example::

    seed = 20240611
    output_dir = "out"

    [lattice]
    h = 1.0
    lo = 0
    hi = 63
    boundary = "zero"

    [nonlinearity]
    s0 = 0.25

    [coding]
    sigma2 = 8.5
    N = 64

    [macro]
    alpha = 0.7
    beta = 0.1
    m = -0.1

Optional tables: ``[theorem]``, ``[evolution]``, ``[minimize]``, ``[axioms]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .evolution import IntegratorConfig
from .field import LatticeParams, make_nonlinearity_cubic_like


class ConfigError(ValueError):
    pass


# stream ids for the seed fan-out: SeedSequence(seed, spawn_key=(stream, member))
STREAM_SAMPLER = 0
STREAM_TAIL = 1
STREAM_CALIBRATION = 2
STREAM_INITIAL = 3
STREAM_AXIOMS = 4
STREAM_MINIMIZE = 5


def stream(seed: int, kind: int, member: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(kind, member)))


@dataclass(frozen=True)
class CodingSection:
    sigma: float
    N: int = 64


@dataclass(frozen=True)
class MacroSection:
    alpha: float = 0.7
    beta: float = 0.1
    m: float = -0.1


@dataclass(frozen=True)
class TheoremSection:
    ensemble_size: int = 100
    kind: str = "mixed"
    calibration_size: int = 64
    n_target: int = 32
    width: int = 64
    gamma: float | None = None
    mu: float | None = None
    n: int | None = None
    a: int = 1


@dataclass(frozen=True)
class EvolutionSection:
    dt: float = 1e-3
    scheme: str = "strang_split"
    steps_per_sample: int = 100
    t_end: float = 1.0
    initial: str = "random"
    initial_file: str | None = None

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(self.dt, self.scheme, self.steps_per_sample)


@dataclass(frozen=True)
class MinimizeSection:
    step: float = 1e-3
    max_iters: int = 20000
    tol: float = 1e-6


@dataclass(frozen=True)
class AxiomsSection:
    estimator: str = "lz78"
    corpus_size: int = 200
    max_len: int = 256
    field_codings: int = 50
    exhaustive_len: int = 10
    splits_per_string: int = 1


@dataclass(frozen=True)
class ExperimentConfig:
    lattice: LatticeParams
    s0: float
    coding: CodingSection
    macro: MacroSection = MacroSection()
    theorem: TheoremSection = TheoremSection()
    evolution: EvolutionSection = EvolutionSection()
    minimize: MinimizeSection = MinimizeSection()
    axioms: AxiomsSection = AxiomsSection()
    seed: int = 0
    output_dir: Path = field(default=Path("out"))

    @property
    def nl(self):
        return make_nonlinearity_cubic_like(self.s0)

    @property
    def sigma(self) -> float:
        return self.coding.sigma


def _section(cls, raw: dict, name: str):
    known = {f.name for f in fields(cls)}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"[{name}] unknown keys: {', '.join(sorted(extra))}")
    try:
        return cls(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{name}] {exc}") from None


def parse_config(raw: dict, base_dir: Path | None = None) -> ExperimentConfig:
    allowed = {"seed", "output_dir", "lattice", "nonlinearity", "coding", "macro",
               "theorem", "evolution", "minimize", "axioms"}
    extra = set(raw) - allowed
    if extra:
        raise ConfigError(f"unknown top-level keys: {', '.join(sorted(extra))}")
    for required in ("lattice", "coding"):
        if required not in raw:
            raise ConfigError(f"missing [{required}] table")
    lattice = _section(LatticeParams, dict(raw["lattice"]), "lattice")
    s0 = raw.get("nonlinearity", {}).get("s0", 0.25)
    if not (isinstance(s0, (int, float)) and s0 > 0):
        raise ConfigError(f"[nonlinearity] s0 must be positive, got {s0!r}")

    coding = dict(raw["coding"])
    if "sigma2" in coding:
        if "sigma" in coding:
            raise ConfigError("[coding] give sigma or sigma2, not both")
        s2 = coding.pop("sigma2")
        if not (isinstance(s2, (int, float)) and s2 > 0):
            raise ConfigError(f"[coding] sigma2 must be positive, got {s2!r}")
        coding["sigma"] = math.sqrt(s2)
    coding = _section(CodingSection, coding, "coding")
    if not coding.sigma > 0 or int(coding.N) != coding.N or coding.N < 1:
        raise ConfigError("[coding] needs sigma > 0 and a positive integer N")

    macro = _section(MacroSection, dict(raw.get("macro", {})), "macro")
    theorem = _section(TheoremSection, dict(raw.get("theorem", {})), "theorem")
    if theorem.ensemble_size < 0 or theorem.calibration_size < 1:
        raise ConfigError("[theorem] ensemble_size >= 0 and calibration_size >= 1 required")
    if theorem.kind not in ("mixed", "multi_bump", "single_bump_nonregular"):
        raise ConfigError(f"[theorem] unknown kind {theorem.kind!r}")
    evolution = _section(EvolutionSection, dict(raw.get("evolution", {})), "evolution")
    try:
        evolution.integrator()
    except ValueError as exc:
        raise ConfigError(f"[evolution] {exc}") from None
    if evolution.initial not in ("random", "ground_state", "zero", "file"):
        raise ConfigError(f"[evolution] unknown initial {evolution.initial!r}")
    if evolution.initial == "file" and not evolution.initial_file:
        raise ConfigError("[evolution] initial = 'file' needs initial_file")
    if evolution.t_end < 0:
        raise ConfigError("[evolution] t_end must be non-negative")
    minimize = _section(MinimizeSection, dict(raw.get("minimize", {})), "minimize")
    axioms = _section(AxiomsSection, dict(raw.get("axioms", {})), "axioms")

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be a 64-bit non-negative integer, got {seed!r}")
    out = Path(raw.get("output_dir", "out"))
    if base_dir is not None and not out.is_absolute():
        out = base_dir / out
    if evolution.initial_file and base_dir is not None:
        p = Path(evolution.initial_file)
        if not p.is_absolute():
            evolution = EvolutionSection(**{**evolution.__dict__, "initial_file": str(base_dir / p)})
    return ExperimentConfig(lattice, float(s0), coding, macro, theorem, evolution, minimize,
                            axioms, seed, out)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(raw, base_dir=path.parent)

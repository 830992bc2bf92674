"""Random shape fields in the multi-bump and irregular single-bump macrostates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .field import Nonlinearity, ShapeField, charge, internal_energy
from .macrostate import MacroKind, MacroParams, classify

Kind = Literal["multi_bump", "single_bump_nonregular", "mixed"]


class SamplerExhaustedError(RuntimeError):
    pass


@dataclass(frozen=True)
class SamplerConfig:
    width: int = 64
    background_prob: float = 0.35
    background_max: float = 0.3
    max_tries: int = 2000


def _bump(rng, kind_dip: bool):
    if kind_dip:
        left = rng.uniform(0.9, 1.4, size=rng.integers(1, 4))
        dip = rng.uniform(0.55, 0.75, size=rng.integers(1, 3))
        right = rng.uniform(0.9, 1.4, size=rng.integers(1, 4))
        return np.concatenate([left, dip, right])
    return rng.uniform(0.6, 1.4, size=rng.integers(1, 5))


def _draw(rng, kind: str, cfg: SamplerConfig) -> np.ndarray:
    vals = np.zeros(cfg.width)
    if kind == "multi_bump":
        bumps = [_bump(rng, rng.random() < 0.3) for _ in range(rng.integers(2, 4))]
    else:
        bumps = [_bump(rng, True)]
    total = sum(b.size for b in bumps) + 3 * len(bumps)
    pos = int(rng.integers(4, max(5, cfg.width // 2 - total)))
    for b in bumps:
        vals[pos : pos + b.size] = b
        pos += b.size + int(rng.integers(2, 6))
    # low background in U^+ that gives s^+ something to code
    span = slice(2, cfg.width - 2)
    bg = np.where(rng.random(cfg.width) < cfg.background_prob,
                  rng.uniform(0, cfg.background_max, cfg.width), 0.0)
    vals[span] = np.where(vals[span] == 0, bg[span], vals[span])
    return vals


def sample_field(
    rng: np.random.Generator,
    kind: Kind,
    nl: Nonlinearity,
    mp: MacroParams,
    h: float = 1.0,
    cfg: SamplerConfig = SamplerConfig(),
) -> ShapeField:
    """Draw until the field has charge ``sigma^2``, ``J <= m`` and the requested class."""
    wanted = {
        "multi_bump": {MacroKind.MULTI_BUMP},
        "single_bump_nonregular": {MacroKind.SINGLE_NONREGULAR},
        "mixed": {MacroKind.MULTI_BUMP, MacroKind.SINGLE_NONREGULAR},
    }[kind]
    for _ in range(cfg.max_tries):
        draw_kind = kind
        if kind == "mixed":
            draw_kind = "multi_bump" if rng.random() < 0.5 else "single_bump_nonregular"
        vals = _draw(rng, draw_kind, cfg)
        vals *= mp.sigma / math.sqrt(math.fsum(vals**2))
        u = ShapeField.from_values(vals, h=h)
        if abs(charge(u) - mp.sigma**2) > 1e-12 * mp.sigma**2:
            continue
        if internal_energy(u, nl) > mp.m:
            continue
        if classify(u, nl, mp).kind in wanted:
            return u
    raise SamplerExhaustedError(f"no {kind} field after {cfg.max_tries} draws")


def sample_ensemble(
    seed: int, count: int, kind: Kind, nl: Nonlinearity, mp: MacroParams, h: float = 1.0,
    cfg: SamplerConfig = SamplerConfig(),
) -> list[ShapeField]:
    """``count`` fields; member ``i`` uses its own spawned stream so subsets are reproducible."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [sample_field(np.random.default_rng(s), kind, nl, mp, h, cfg) for s in children]

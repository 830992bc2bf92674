"""Minimisation of ``J`` on the charge sphere and plateau witnesses of negative energy."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .evolution import laplacian
from .field import (
    LatticeParams,
    Nonlinearity,
    ShapeField,
    charge,
    internal_energy,
    make_plateau,
)
from .io import append_jsonl, read_field, write_field


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class MinimizeConfig:
    sigma: float
    step: float = 1e-3
    max_iters: int = 20000
    # J is compared in floating point, so residuals much below ~1e-9 |grad J|
    # cannot be certified by descent alone
    tol: float = 1e-6

    def __post_init__(self):
        for name in ("sigma", "step", "tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")


@dataclass(frozen=True)
class GroundState:
    u: ShapeField
    J_value: float
    lagrange_omega: float
    residual: float
    iterations: int = 0
    converged: bool = False

    def metadata(self) -> dict:
        return {
            "J_value": self.J_value,
            "lagrange_omega": self.lagrange_omega,
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def grad_J(u: ShapeField, nl: Nonlinearity) -> np.ndarray:
    v = u.values
    return -2.0 * laplacian(v, u.params) / u.params.h**2 - 2.0 * v * nl.f(v * v)


def _project(x: np.ndarray, sigma2: float) -> np.ndarray:
    x = np.maximum(x, 0.0)
    norm2 = math.fsum(x * x)
    if norm2 == 0:
        return x
    return x * math.sqrt(sigma2 / norm2)


def stationarity(u: ShapeField, nl: Nonlinearity, sigma2: float) -> tuple[float, float]:
    """``(lambda, residual)`` with ``lambda = <grad J, u> / sigma^2``.

    At sites pinned to zero only the part of ``grad J - lambda u`` pushing
    below zero counts, since the clamp absorbs the rest.
    """
    g = grad_J(u, nl)
    lam = float(np.dot(g, u.values)) / sigma2
    r = g - lam * u.values
    r = np.where(u.values > 0, r, np.minimum(r, 0.0))
    return lam, float(np.linalg.norm(r))


def minimize_fixed_charge(u0: ShapeField, nl: Nonlinearity, cfg: MinimizeConfig) -> GroundState:
    """Projected gradient descent with backtracking; only non-increasing steps are accepted."""
    sigma2 = cfg.sigma**2
    if not charge(u0) > 0:
        raise ValueError("initial field has zero charge")
    u = u0.with_values(_project(u0.values, sigma2))
    J = internal_energy(u, nl)
    step = cfg.step
    it = 0
    rises = 0
    converged = False
    for it in range(1, cfg.max_iters + 1):
        lam, res = stationarity(u, nl, sigma2)
        if res <= cfg.tol:
            converged = True
            break
        g = grad_J(u, nl)
        while True:
            cand = u.with_values(_project(u.values - step * g, sigma2))
            Jc = internal_energy(cand, nl)
            if not math.isfinite(Jc):
                raise DivergenceError(f"non-finite J after {it} iterations")
            if Jc <= J:
                break
            step *= 0.5
            if step < 1e-300:
                break
        if step < 1e-300:
            break
        rises = rises + 1 if Jc > J else 0
        if rises >= 100:
            raise DivergenceError("J increased over 100 consecutive accepted steps")
        if np.array_equal(cand.values, u.values):
            # projection returned the same point: nothing left to gain at this precision
            break
        u, J = cand, Jc
        step *= 1.5
    lam, res = stationarity(u, nl, sigma2)
    return GroundState(u, J, lam, res, it, converged or res <= cfg.tol)


def plateau_energy(s: float, n: int, h: float, nl: Nonlinearity) -> float:
    """``J`` of the plateau of height ``sqrt(s)`` on ``2n+1`` sites (closed form)."""
    return 2 * s / h**2 - (2 * n + 1) * float(nl.F(s))


def hylomorphy_witness(sigma2: float, nl: Nonlinearity, params: LatticeParams) -> ShapeField | None:
    """Widest plateau of charge ``sigma2`` with ``J < 0`` that fits the window, if any.

    Heights ``s <= s0`` are skipped since ``F(s) <= 0`` there.
    """
    center = (params.lo + params.hi) // 2
    n_max = min(center - params.lo, params.hi - center)
    for n in range(n_max, -1, -1):
        s = sigma2 / (2 * n + 1)
        if s <= nl.s0:
            continue
        u = make_plateau(math.sqrt(s), n, center, params)
        if internal_energy(u, nl) < 0:
            return u
    return None


def _starts(sigma2: float, params: LatticeParams, rng: np.random.Generator) -> list[np.ndarray]:
    x = params.indices - (params.lo + params.hi) // 2
    out = []
    for n in (0, 2, 8):
        out.append(np.where(np.abs(x) <= n, 1.0, 0.0))
    for w in (1.0, 2.0, 4.0):
        out.append(np.exp(-0.5 * (x / w) ** 2))
    for _ in range(2):
        out.append(rng.random(params.size) * np.exp(-0.5 * (x / 6.0) ** 2))
    return out


def multistart(
    sigma2: float, nl: Nonlinearity, cfg: MinimizeConfig, params: LatticeParams, seed: int = 0
) -> list[GroundState]:
    rng = np.random.default_rng(seed)
    return [
        minimize_fixed_charge(ShapeField(params, v), nl, cfg) for v in _starts(sigma2, params, rng)
    ]


def estimate_m_sigma(
    sigma2: float,
    nl: Nonlinearity,
    cfg: MinimizeConfig | None = None,
    params: LatticeParams | None = None,
    seed: int = 0,
) -> float:
    """Best ``J`` over eight seeded starts; an upper bound on the infimum."""
    cfg = cfg or MinimizeConfig(sigma=math.sqrt(sigma2))
    params = params or LatticeParams(h=1.0, lo=0, hi=63)
    return min(gs.J_value for gs in multistart(sigma2, nl, cfg, params, seed))


def ground_state(
    sigma2: float,
    nl: Nonlinearity,
    cfg: MinimizeConfig | None = None,
    params: LatticeParams | None = None,
    seed: int = 0,
) -> GroundState:
    cfg = cfg or MinimizeConfig(sigma=math.sqrt(sigma2))
    params = params or LatticeParams(h=1.0, lo=0, hi=63)
    return min(multistart(sigma2, nl, cfg, params, seed), key=lambda g: g.J_value)


def in_S(u: ShapeField, nl: Nonlinearity, m: float, sigma: float) -> bool:
    return internal_energy(u, nl) <= m and abs(charge(u) - sigma**2) <= 1e-10


def write_ground_state(directory, gs: GroundState, stem: str = "ground_state") -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_field(d / f"{stem}.txt", gs.u)
    meta = d / f"{stem}.jsonl"
    if meta.exists():
        meta.unlink()
    append_jsonl(meta, gs.metadata())


def read_ground_state(directory, stem: str = "ground_state") -> GroundState:
    d = Path(directory)
    u = read_field(d / f"{stem}.txt")
    rec = json.loads((d / f"{stem}.jsonl").read_text().splitlines()[-1])
    return GroundState(u, rec["J_value"], rec["lagrange_omega"], rec["residual"],
                       rec["iterations"], rec["converged"])

"""Lattice fields, the nonlinearity and the energy/charge functionals.

Fields live on a finite window ``lo..hi`` of the integer lattice. Sites
outside the window are implicit zeros (``boundary="zero"``) or the window
wraps around (``boundary="periodic"``).

Difference terms are indexed by the right endpoint: the term
``|u_l - u_{l-1}|^2`` belongs to site ``l``. With a zero boundary there is
one extra term at ``hi + 1`` (the drop back to the implicit zeros), which is
always attributed to ``U^+``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Literal

import numpy as np

Boundary = Literal["zero", "periodic"]


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeParams:
    h: float = 1.0
    lo: int = 0
    hi: int = 0
    boundary: Boundary = "zero"

    def __post_init__(self):
        if not self.h > 0:
            raise FieldError(f"lattice spacing must be positive, got h={self.h}")
        if self.hi < self.lo:
            raise FieldError(f"empty window lo={self.lo} hi={self.hi}")
        if self.boundary not in ("zero", "periodic"):
            raise FieldError(f"unknown boundary {self.boundary!r}")

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def diff_indices(self) -> np.ndarray:
        """Lattice indices carrying a difference term."""
        if self.boundary == "periodic":
            return self.indices
        return np.arange(self.lo, self.hi + 2)


def _freeze(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    if arr.ndim != 1:
        raise FieldError("field values must be one-dimensional")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ShapeField:
    """Non-negative modulus profile ``u``."""

    params: LatticeParams
    values: np.ndarray

    def __post_init__(self):
        vals = _freeze(self.values, float)
        if vals.size != self.params.size:
            raise FieldError(f"expected {self.params.size} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise FieldError("non-finite shape values")
        if np.any(vals < 0):
            raise FieldError("shape values must be non-negative")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values, h: float = 1.0, lo: int = 0, boundary: Boundary = "zero"):
        values = np.asarray(values, dtype=float)
        params = LatticeParams(h=h, lo=lo, hi=lo + values.size - 1, boundary=boundary)
        return cls(params, values)

    def with_values(self, values) -> "ShapeField":
        return ShapeField(self.params, values)

    def at(self, ell: int) -> float:
        """Value at lattice index ``ell`` (zero outside a zero-boundary window)."""
        p = self.params
        if p.boundary == "periodic":
            return float(self.values[(ell - p.lo) % p.size])
        if ell < p.lo or ell > p.hi:
            return 0.0
        return float(self.values[ell - p.lo])

    def extend(self, left: int = 0, right: int = 0) -> "ShapeField":
        """Zero-pad the window; only meaningful for the zero boundary."""
        if self.params.boundary != "zero":
            raise FieldError("cannot extend a periodic window")
        params = replace(self.params, lo=self.params.lo - left, hi=self.params.hi + right)
        return ShapeField(params, np.concatenate([np.zeros(left), self.values, np.zeros(right)]))

    def shifted(self, offset: int) -> "ShapeField":
        params = replace(self.params, lo=self.params.lo + offset, hi=self.params.hi + offset)
        return ShapeField(params, self.values)


@dataclass(frozen=True)
class PhaseField:
    params: LatticeParams
    values: np.ndarray

    def __post_init__(self):
        vals = _freeze(self.values, float)
        if vals.size != self.params.size:
            raise FieldError(f"expected {self.params.size} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise FieldError("non-finite phase values")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class ComplexField:
    params: LatticeParams
    values: np.ndarray

    def __post_init__(self):
        vals = _freeze(self.values, complex)
        if vals.size != self.params.size:
            raise FieldError(f"expected {self.params.size} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise FieldError("non-finite complex amplitudes")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values, h: float = 1.0, lo: int = 0, boundary: Boundary = "zero"):
        values = np.asarray(values, dtype=complex)
        params = LatticeParams(h=h, lo=lo, hi=lo + values.size - 1, boundary=boundary)
        return cls(params, values)


@dataclass(frozen=True)
class Nonlinearity:
    """Potential ``F`` with derivative ``f`` and thresholds ``s1 < s0``."""

    F: Callable[[np.ndarray], np.ndarray]
    f: Callable[[np.ndarray], np.ndarray]
    s0: float
    s1: float
    name: str = "custom"

    def check(self, grid_size: int = 2001) -> list[str]:
        """Spot-check (F1)-(F3) on a grid; returns the list of failed checks."""
        failures = []
        s0, s1 = self.s0, self.s1
        if not s1 < s0:
            failures.append("s1 < s0")
        if float(self.F(np.array([0.0]))[0]) != 0.0:
            failures.append("F(0) = 0")
        below = np.linspace(0, s0, grid_size)[1:-1]
        above = np.linspace(s0, 10 * s0 + 10, grid_size)[1:]
        if np.any(self.F(below) > 0):
            failures.append("F <= 0 on (0, s0)")
        if np.any(self.F(above) <= 0):
            failures.append("F > 0 on (s0, inf)")
        if np.any(self.f(np.linspace(0, s1, grid_size)[1:-1]) > 0):
            failures.append("F non-increasing on (0, s1)")
        if np.any(self.f(above) < 0):
            failures.append("F non-decreasing on (s0, inf)")
        small = s0 * np.logspace(-1, -8, 8)
        ratios = np.abs(self.F(small) / small)
        if not (np.all(np.diff(ratios) <= 0) and ratios[-1] < 1e-6):
            failures.append("F(s)/s -> 0")
        return failures


def make_nonlinearity_cubic_like(s0: float = 0.25) -> Nonlinearity:
    """``F(s) = s^2 (s - s0)``, so ``f(s) = 3 s^2 - 2 s0 s`` and ``s1 = 2 s0 / 3``."""
    if not s0 > 0:
        raise FieldError(f"s0 must be positive, got {s0}")

    def F(s):
        s = np.asarray(s, dtype=float)
        return s * s * (s - s0)

    def f(s):
        s = np.asarray(s, dtype=float)
        return 3.0 * s * s - 2.0 * s0 * s

    return Nonlinearity(F=F, f=f, s0=s0, s1=2.0 * s0 / 3.0, name="cubic")


@dataclass(frozen=True)
class RegionSplit:
    minus: np.ndarray
    plus: np.ndarray
    components: list[tuple[int, int]] = field(default_factory=list)

    @property
    def hylomorphic(self) -> bool:
        return self.minus.size > 0


def _neighbour_diffs(values: np.ndarray, params: LatticeParams) -> np.ndarray:
    """``x_l - x_{l-1}`` for every index in ``params.diff_indices()``."""
    if params.boundary == "periodic":
        return values - np.roll(values, 1)
    padded = np.concatenate([[0], values, [0]])
    return padded[1:] - padded[:-1]


def charge(u: ShapeField) -> float:
    return math.fsum(u.values * u.values)


def charge_complex(psi: ComplexField) -> float:
    return math.fsum(psi.values.real**2 + psi.values.imag**2)


def energy_density(u: ShapeField, nl: Nonlinearity) -> np.ndarray:
    """Per-index terms of J over ``diff_indices``; they sum to ``internal_energy``."""
    p = u.params
    d = _neighbour_diffs(u.values, p)
    terms = d * d / p.h**2
    terms[: p.size] -= nl.F(u.values * u.values)
    return terms


def internal_energy(u: ShapeField, nl: Nonlinearity) -> float:
    return math.fsum(energy_density(u, nl))


def energy_complex(psi: ComplexField, nl: Nonlinearity) -> float:
    p = psi.params
    d = _neighbour_diffs(psi.values, p)
    grad = (d.real**2 + d.imag**2) / p.h**2
    pot = nl.F(psi.values.real**2 + psi.values.imag**2)
    return math.fsum(grad) - math.fsum(pot)


def _wrap(angle):
    # into (-pi, pi]
    return np.pi - np.mod(np.pi - angle, 2 * np.pi)


def kinetic_energy(u: ShapeField, theta: PhaseField) -> float:
    """Small-phase-difference kinetic energy ``h^-2 sum u_l^2 |theta_l - theta_{l-1}|^2``."""
    if u.params != theta.params:
        raise FieldError("shape and phase fields live on different windows")
    p = u.params
    if p.boundary == "periodic":
        prev = np.roll(theta.values, 1)
    else:
        prev = np.concatenate([[0.0], theta.values[:-1]])
    dtheta = _wrap(theta.values - prev)
    return math.fsum(u.values**2 * dtheta**2) / p.h**2


def kinetic_energy_exact(u: ShapeField, theta: PhaseField) -> float:
    """Exact phase part of the energy, ``E(u e^{i theta}) - J(u)``."""
    if u.params != theta.params:
        raise FieldError("shape and phase fields live on different windows")
    p = u.params
    if p.boundary == "periodic":
        u_prev, th_prev = np.roll(u.values, 1), np.roll(theta.values, 1)
    else:
        u_prev = np.concatenate([[0.0], u.values[:-1]])
        th_prev = np.concatenate([[0.0], theta.values[:-1]])
    return math.fsum(2 * u.values * u_prev * (1 - np.cos(theta.values - th_prev))) / p.h**2


def region_split(u: ShapeField, nl: Nonlinearity) -> RegionSplit:
    idx = u.params.indices
    mask = u.values * u.values > nl.s0
    minus = idx[mask]
    components = []
    if minus.size:
        breaks = np.flatnonzero(np.diff(minus) != 1)
        starts = np.concatenate([[0], breaks + 1])
        ends = np.concatenate([breaks, [minus.size - 1]])
        components = [(int(minus[s]), int(minus[e])) for s, e in zip(starts, ends)]
        if u.params.boundary == "periodic" and len(components) > 1:
            first, last = components[0], components[-1]
            if first[0] == u.params.lo and last[1] == u.params.hi:
                # run wrapping around the window; stored as (start, end) with start > end
                components = [(last[0], first[1])] + components[1:-1]
    return RegionSplit(minus=minus, plus=idx[~mask], components=components)


def minus_mask(u: ShapeField, nl: Nonlinearity) -> np.ndarray:
    """Boolean mask over ``diff_indices``: True where the index lies in ``U^-``."""
    m = u.values * u.values > nl.s0
    if u.params.boundary == "periodic":
        return m
    return np.concatenate([m, [False]])


def split_energy(u: ShapeField, nl: Nonlinearity) -> tuple[float, float]:
    """``(J^+, J^-)``: each difference term goes to the region of its right endpoint."""
    terms = energy_density(u, nl)
    m = minus_mask(u, nl)
    return math.fsum(terms[~m]), math.fsum(terms[m])


def is_hylomorphic(u: ShapeField, nl: Nonlinearity) -> bool:
    return bool(np.any(u.values * u.values > nl.s0))


def polar_decompose(psi: ComplexField) -> tuple[ShapeField, PhaseField]:
    u = np.abs(psi.values)
    theta = np.angle(psi.values)
    # np.angle gives (-pi, pi] except for -0.0 imaginary parts
    theta = np.where(theta <= -np.pi, np.pi, theta)
    theta = np.where(u == 0, 0.0, theta)
    return ShapeField(psi.params, u), PhaseField(psi.params, theta)


def compose(u: ShapeField, theta: PhaseField) -> ComplexField:
    return ComplexField(u.params, u.values * np.exp(1j * theta.values))


def make_vanishing(sigma: float, n: int, center: int, params: LatticeParams) -> ShapeField:
    """Plateau of height ``sigma / sqrt(2n+1)`` on ``center-n..center+n``."""
    if n < 0:
        raise FieldError("plateau half-width must be non-negative")
    if center - n < params.lo or center + n > params.hi:
        raise FieldError(
            f"plateau [{center - n}, {center + n}] overflows window [{params.lo}, {params.hi}]"
        )
    eps = sigma / math.sqrt(2 * n + 1)
    values = np.zeros(params.size)
    values[center - n - params.lo : center + n + 1 - params.lo] = eps
    return ShapeField(params, values)


def make_plateau(height: float, n: int, center: int, params: LatticeParams) -> ShapeField:
    """Plateau of the given height on ``2n+1`` sites."""
    if center - n < params.lo or center + n > params.hi:
        raise FieldError("plateau overflows window")
    values = np.zeros(params.size)
    values[center - n - params.lo : center + n + 1 - params.lo] = height
    return ShapeField(params, values)

"""Coarse-grained symbolic coding of a shape field.

Each difference ``u_i - u_{i-1}`` is binned into ``N`` half-open bins of
width ``sigma/N`` (the last bin closed at ``sigma``), giving ``omega_i``.
The sign of the difference is kept as ``s_i`` only when ``omega_i >= 2``;
otherwise ``s_i`` is the empty symbol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import RegionSplit, ShapeField

PLUS, MINUS, EMPTY = 1, -1, 0
# slack on the domain check: charge sigma^2 can put a single site at sigma + ulp
DOMAIN_RTOL = 1e-12


class CodingDomainError(ValueError):
    pass


@dataclass(frozen=True)
class CodingParams:
    sigma: float
    N: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")

    @property
    def width(self) -> float:
        return self.sigma / self.N

    def edges(self) -> np.ndarray:
        """Interior bin edges ``sigma k / N`` for ``k = 1..N-1``."""
        return self.sigma * np.arange(1, self.N) / self.N


@dataclass(frozen=True)
class SymbolCoding:
    """``omega`` and ``signs`` are indexed by ``indices`` (the difference sites)."""

    indices: np.ndarray
    omega: np.ndarray
    signs: np.ndarray
    window: tuple[int, int] | None
    params: CodingParams

    @property
    def s_indices(self) -> np.ndarray:
        return self.indices[self.signs != EMPTY]

    @property
    def s_string(self) -> str:
        return signs_to_str(self.signs[self.signs != EMPTY])

    @property
    def window_length(self) -> int:
        if self.window is None:
            return 0
        return self.window[1] - self.window[0] + 1

    def omega_at(self, ell: int) -> int:
        pos = ell - int(self.indices[0])
        if 0 <= pos < self.indices.size:
            return int(self.omega[pos])
        return 1


@dataclass(frozen=True)
class SplitStrings:
    s_plus: str
    s_minus: str
    plus_indices: np.ndarray
    minus_indices: np.ndarray


def signs_to_str(signs) -> str:
    return "".join("+" if s > 0 else "-" for s in signs if s != EMPTY)


def bin_index(d: np.ndarray, cp: CodingParams) -> np.ndarray:
    """1-based bin of each ``|difference|`` in ``d``; half-open edges."""
    return np.searchsorted(cp.edges(), d, side="right") + 1


def count_above(u: ShapeField, cp: CodingParams) -> int:
    return int(np.count_nonzero(u.values >= cp.width))


def encode(u: ShapeField, cp: CodingParams) -> SymbolCoding:
    # charge(u) <= sigma^2 is the caller's precondition (it bounds the window);
    # only amplitudes and differences beyond sigma leave the partition
    p = u.params
    if u.values.size and u.values.max() > cp.sigma * (1 + DOMAIN_RTOL):
        raise CodingDomainError(f"amplitude {u.values.max():.6g} exceeds sigma = {cp.sigma:.6g}")
    if p.boundary == "periodic":
        d = u.values - np.roll(u.values, 1)
    else:
        padded = np.concatenate([[0.0], u.values, [0.0]])
        d = padded[1:] - padded[:-1]
    ad = np.abs(d)
    if ad.size and ad.max() > cp.sigma * (1 + DOMAIN_RTOL):
        raise CodingDomainError(f"difference {ad.max():.6g} exceeds sigma = {cp.sigma:.6g}")
    omega = bin_index(ad, cp)
    signs = np.where(omega >= 2, np.sign(d), 0).astype(np.int8)
    idx = p.diff_indices()
    active = np.flatnonzero(omega >= 2)
    window = (int(idx[active[0]]), int(idx[active[-1]])) if active.size else None
    return SymbolCoding(idx, omega, signs, window, cp)


def split_by_region(sc: SymbolCoding, rs: RegionSplit) -> SplitStrings:
    """Route each symbol to ``U^-`` or ``U^+`` by the site index carrying it."""
    in_minus = np.isin(sc.indices, rs.minus)
    keep = sc.signs != EMPTY
    minus_sel, plus_sel = keep & in_minus, keep & ~in_minus
    return SplitStrings(
        s_plus=signs_to_str(sc.signs[plus_sel]),
        s_minus=signs_to_str(sc.signs[minus_sel]),
        plus_indices=sc.indices[plus_sel],
        minus_indices=sc.indices[minus_sel],
    )


def refine_bins(u: ShapeField, cp: CodingParams, N2: int) -> tuple[SymbolCoding, SymbolCoding]:
    if N2 <= cp.N:
        raise ValueError(f"refined bin count {N2} must exceed N={cp.N}")
    # a non-empty sign at N has |d| >= sigma/N > sigma/N2, so it survives unchanged
    return encode(u, cp), encode(u, CodingParams(cp.sigma, N2))


def format_coding(sc: SymbolCoding) -> str:
    glyph = {PLUS: "+", MINUS: "-", EMPTY: "."}
    win = "none" if sc.window is None else f"{sc.window[0]}:{sc.window[1]}"
    lines = [f"# sigma={sc.params.sigma!r} N={sc.params.N} window={win}\n"]
    for ell, w, s in zip(sc.indices, sc.omega, sc.signs):
        lines.append(f"{ell}\t{w}\t{glyph[int(s)]}\n")
    return "".join(lines)

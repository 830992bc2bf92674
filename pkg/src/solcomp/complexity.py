"""Computable complexity surrogates and the (K1)-(K3) axioms as measurements."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .coding import CodingParams, encode, split_by_region
from .field import Nonlinearity, ShapeField, region_split

BINARY = ("+", "-")


@dataclass(frozen=True)
class ComplexityEstimator:
    name: str
    eval: Callable[[Sequence], int]

    def __call__(self, s) -> int:
        return self.eval(s)


def lz78_complexity(s: Sequence) -> int:
    """Phrase count of the incremental LZ78 parse; a trailing partial phrase counts once."""
    phrases = set()
    count = 0
    cur = ()
    for ch in s:
        cur = cur + (ch,)
        if cur not in phrases:
            phrases.add(cur)
            count += 1
            cur = ()
    return count + (1 if cur else 0)


def lz78_prefix_counts(s: Sequence) -> list[int]:
    """``lz78_complexity(s[:k])`` for every ``k = 0..len(s)`` in one pass."""
    phrases = set()
    complete = 0
    cur = ()
    out = [0]
    for ch in s:
        cur = cur + (ch,)
        if cur not in phrases:
            phrases.add(cur)
            complete += 1
            cur = ()
        out.append(complete + (1 if cur else 0))
    return out


def run_length_complexity(s: Sequence) -> int:
    """Number of maximal constant runs."""
    return sum(1 for _ in itertools.groupby(s))


LZ78 = ComplexityEstimator("lz78", lz78_complexity)
RUN_LENGTH = ComplexityEstimator("run_length", run_length_complexity)
ESTIMATORS = {e.name: e for e in (LZ78, RUN_LENGTH)}


def information_content(u: ShapeField, cp: CodingParams, est: ComplexityEstimator = LZ78) -> int:
    return est(encode(u, cp).s_string)


def information_content_split(
    u: ShapeField, nl: Nonlinearity, cp: CodingParams, est: ComplexityEstimator = LZ78
) -> tuple[int, int]:
    """``(I^+, I^-)``: the estimator on the ``U^+`` and ``U^-`` substrings of ``s``."""
    ss = split_by_region(encode(u, cp), region_split(u, nl))
    return est(ss.s_plus), est(ss.s_minus)


@dataclass(frozen=True)
class AxiomReport:
    k1_margin: float
    k2_violations: int
    k3_violations: int
    corpus_size: int
    k2_fitted_constant: float = 0.0
    k2_checks: int = 0
    k3_checks: int = 0

    def rows(self):
        yield ("K1", 0, self.corpus_size, self.k1_margin)
        yield ("K2", self.k2_violations, self.corpus_size, self.k2_fitted_constant)
        yield ("K3", self.k3_violations, self.corpus_size, 0.0)


AXIOM_COLUMNS = ("axiom", "violations", "corpus_size", "fitted_constant")


def _position_cost(dropped: Iterable[int], c: float) -> float:
    return sum(math.log2(b + 1) + c for b in dropped)


def check_axioms(
    est: ComplexityEstimator,
    corpus: Sequence[str],
    alphabet: Sequence[str] = BINARY,
    rng: np.random.Generator | None = None,
    splits_per_string: int = 1,
) -> AxiomReport:
    """Measure (K1)-(K3) on ``corpus``.

    K1 fits the smallest ``c >= 0`` with ``K(w) <= |w| log2 #A + c``. K2 uses
    that ``c`` for the dropped-position cost; the first inequality is checked
    directly, the second's ``c'`` is fitted on the even-indexed half of the
    random splits and violations are counted on the odd half. K3 is checked on
    one random split into non-empty ``w w'`` per string.
    """
    if len(corpus) == 0:
        raise ValueError("axiom corpus is empty")
    rng = rng if rng is not None else np.random.default_rng(0)
    log_a = math.log2(len(alphabet))
    k = [est(w) for w in corpus]
    c = max(0.0, max(kw - len(w) * log_a for w, kw in zip(corpus, k)))

    k2_first_viol = 0
    second_slack = []
    k3_viol = k3_checks = 0
    for w, kw in zip(corpus, k):
        n = len(w)
        if n == 0:
            continue
        for _ in range(splits_per_string):
            keep = rng.random(n) < 0.5
            sub = "".join(ch for ch, kp in zip(w, keep) if kp)
            comp = "".join(ch for ch, kp in zip(w, keep) if not kp)
            dropped = [i + 1 for i in range(n) if not keep[i]]
            cost = _position_cost(dropped, c)
            if est(sub) > kw + cost + 1e-12:
                k2_first_viol += 1
            second_slack.append(kw - (est(sub) + est(comp) + cost))
        if n >= 2:
            cut = int(rng.integers(1, n))
            k3_checks += 1
            if est(w) < est(w[:cut]) + 1:
                k3_viol += 1
    calib, held = second_slack[0::2], second_slack[1::2]
    c_prime = max([0.0] + calib)
    k2_second_viol = sum(1 for x in held if x > c_prime + 1e-12)
    return AxiomReport(
        k1_margin=c,
        k2_violations=k2_first_viol + k2_second_viol,
        k3_violations=k3_viol,
        corpus_size=len(corpus),
        k2_fitted_constant=c_prime,
        k2_checks=len(second_slack) + len(held),
        k3_checks=k3_checks,
    )


def k3_exhaustive(
    est: ComplexityEstimator = LZ78, max_len: int = 12, alphabet: Sequence[str] = BINARY
) -> tuple[int, int, int]:
    """Check ``K(w w') >= K(w) + 1`` and ``K(w w') >= K(w)`` over all non-empty splits.

    Returns ``(k3_violations, monotonicity_violations, pairs_checked)``.
    """
    k3 = mono = pairs = 0
    for length in range(2, max_len + 1):
        for word in itertools.product(alphabet, repeat=length):
            if est is LZ78:
                pref = lz78_prefix_counts(word)
            else:
                pref = [est(word[:i]) for i in range(length + 1)]
            total = pref[length]
            for cut in range(1, length):
                pairs += 1
                if total < pref[cut] + 1:
                    k3 += 1
                if total < pref[cut]:
                    mono += 1
    return k3, mono, pairs


def random_corpus(rng: np.random.Generator, size: int, max_len: int = 256) -> list[str]:
    lengths = rng.integers(0, max_len + 1, size=size)
    return ["".join(np.where(rng.random(n) < 0.5, "+", "-")) for n in lengths]

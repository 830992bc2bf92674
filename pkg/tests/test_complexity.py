import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from solcomp.coding import CodingParams
from solcomp.complexity import (
    LZ78,
    RUN_LENGTH,
    check_axioms,
    information_content,
    information_content_split,
    k3_exhaustive,
    lz78_complexity,
    lz78_prefix_counts,
    random_corpus,
)
from solcomp.field import ShapeField


@pytest.mark.parametrize(
    "s, k",
    [("", 0), ("+-+-", 3), ("++++", 3), ("+-", 2), ("++-", 2), ("-", 1), ("+-++-+--", 5)],
)
def test_lz78_oracles(s, k):
    assert lz78_complexity(s) == k


def test_run_length():
    assert RUN_LENGTH("") == 0 and RUN_LENGTH("++--+") == 3


def test_information_content(nl):
    cp = CodingParams(1.0, 4)
    assert information_content(ShapeField.from_values(np.zeros(3)), cp) == 0
    assert information_content(ShapeField.from_values([0.6]), cp) == 2
    assert information_content(ShapeField.from_values([0, 0.7, 0.55, 0.8, 0]), cp) == 2
    assert information_content_split(ShapeField.from_values([0, 0.6, 0]), nl, cp) == (1, 1)
    low = ShapeField.from_values([0, 0.4, 0])
    assert information_content_split(low, nl, cp) == (information_content(low, cp), 0)


def test_axioms_on_trivial_corpus():
    rep = check_axioms(LZ78, [""])
    assert rep.k1_margin == 0 and rep.k2_violations == 0 and rep.k3_violations == 0
    with pytest.raises(ValueError):
        check_axioms(LZ78, [])


def test_axioms_report_rows():
    rep = check_axioms(LZ78, random_corpus(np.random.default_rng(0), 300))
    rows = list(rep.rows())
    assert [r[0] for r in rows] == ["K1", "K2", "K3"]
    assert rep.k1_margin == 0.0  # LZ78 never exceeds one phrase per symbol
    assert rep.k3_violations > 0  # short trailing phrases: see the exhaustive count


def test_k3_exhaustive_frozen():
    assert k3_exhaustive(LZ78, 12) == (6780, 0, 81924)
    assert k3_exhaustive(LZ78, 10) == (1372, 0, 16388)
    assert k3_exhaustive(RUN_LENGTH, 8) == (494, 0, 3076)


def test_k3_counterexample():
    # the appended '-' only extends the trailing partial phrase '+'
    assert lz78_complexity("+-+") == 3
    assert lz78_complexity("+-+-") == 3


words = st.text(alphabet="+-", max_size=200)


@given(words)
def test_prefix_counts_match(s):
    pref = lz78_prefix_counts(s)
    assert pref == [lz78_complexity(s[:k]) for k in range(len(s) + 1)]


@given(words, words)
def test_lz78_monotone_under_concatenation(w, w2):
    assert lz78_complexity(w + w2) >= lz78_complexity(w)


@given(words)
def test_lz78_bounded_by_length(s):
    assert lz78_complexity(s) <= len(s)
    assert lz78_complexity(s) == lz78_complexity(s)

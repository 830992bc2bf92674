import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from solcomp.coding import (
    CodingDomainError,
    CodingParams,
    count_above,
    encode,
    format_coding,
    refine_bins,
    split_by_region,
)
from solcomp.field import ShapeField, charge, region_split

CP = CodingParams(1.0, 4)
DIP = ShapeField.from_values([0, 0.7, 0.55, 0.8, 0])


def test_zero_field():
    sc = encode(ShapeField.from_values(np.zeros(5)), CP)
    assert np.all(sc.omega == 1) and sc.s_string == "" and sc.window is None


def test_single_site():
    sc = encode(ShapeField.from_values([0.6]), CP)
    assert sc.omega.tolist() == [3, 3]
    assert sc.s_string == "+-"
    assert sc.window == (0, 1)


def test_dip_field():
    sc = encode(DIP, CP)
    # |diffs| (0, 0.7, 0.15, 0.25, 0.8, 0) over indices 0..5
    assert sc.omega.tolist() == [1, 3, 1, 2, 4, 1]
    # 0.8 - 0.55 rises, so the third symbol is '+'
    assert sc.s_string == "++-"
    assert sc.s_indices.tolist() == [1, 3, 4]
    assert sc.window == (1, 4)


def test_split_dip(nl):
    ss = split_by_region(encode(DIP, CP), region_split(DIP, nl))
    assert (ss.s_minus, ss.s_plus) == ("++", "-")
    assert ss.minus_indices.tolist() == [1, 3]


def test_split_single_site(nl):
    u = ShapeField.from_values([0, 0.6, 0, 0])
    ss = split_by_region(encode(u, CP), region_split(u, nl))
    assert (ss.s_minus, ss.s_plus) == ("+", "-")
    low = ShapeField.from_values([0, 0.4, 0])
    ss = split_by_region(encode(low, CP), region_split(low, nl))
    assert ss.s_minus == "" and ss.s_plus == encode(low, CP).s_string


def test_refine_single_site():
    coarse, fine = refine_bins(ShapeField.from_values([0.6]), CP, 8)
    assert fine.s_string == coarse.s_string == "+-"
    assert fine.omega.tolist() == [5, 5]
    with pytest.raises(ValueError):
        refine_bins(ShapeField.from_values([0.6]), CP, 4)


def test_domain_errors():
    with pytest.raises(CodingDomainError):
        encode(ShapeField.from_values([0.2, 1.3]), CP)
    with pytest.raises(ValueError):
        CodingParams(1.0, 0)


def test_format_coding():
    text = format_coding(encode(ShapeField.from_values([0.6]), CP))
    assert text == "# sigma=1.0 N=4 window=0:1\n0\t3\t+\n1\t3\t-\n"


def test_last_bin_closed():
    sc = encode(ShapeField.from_values([1.0]), CP)
    assert sc.omega.tolist() == [4, 4]


fields = st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=40)


@given(fields, st.integers(1, 30))
def test_sites_above_width_at_most_N2(vals, N):
    v = np.array(vals)
    if np.sum(v**2) < 1e-6:
        return
    v *= 2.0 / np.sqrt(np.sum(v**2))
    u = ShapeField.from_values(v)
    assert count_above(u, CodingParams(2.0 * (1 + 1e-12), N)) <= N**2


@given(fields, st.integers(1, 20), st.integers(2, 8))
def test_sign_stability_under_refinement(vals, N, factor):
    u = ShapeField.from_values(vals)
    sigma = max(1.0, np.sqrt(charge(u)) * 1.01)
    coarse, fine = refine_bins(u, CodingParams(sigma, N), N * factor)
    keep = coarse.signs != 0
    assert np.array_equal(coarse.signs[keep], fine.signs[keep])
    assert np.all(fine.omega >= coarse.omega)

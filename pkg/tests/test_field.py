import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from solcomp.field import (
    ComplexField,
    FieldError,
    LatticeParams,
    PhaseField,
    ShapeField,
    charge,
    charge_complex,
    compose,
    energy_complex,
    internal_energy,
    is_hylomorphic,
    kinetic_energy,
    kinetic_energy_exact,
    make_nonlinearity_cubic_like,
    make_plateau,
    make_vanishing,
    polar_decompose,
    region_split,
    split_energy,
)

shapes = st.lists(st.floats(0, 2, allow_nan=False), min_size=1, max_size=40).map(
    lambda v: ShapeField.from_values(v)
)


def single_site(x, boundary="zero"):
    if boundary == "zero":
        return ShapeField.from_values([x])
    return ShapeField.from_values([x], boundary=boundary)


def test_nonlinearity_values(nl):
    assert nl.F(0.0) == 0
    assert nl.F(0.25) == 0
    assert nl.F(0.5) == 0.0625
    assert nl.f(1 / 6) == pytest.approx(0, abs=1e-15)
    assert nl.s1 == pytest.approx(1 / 6)
    assert nl.check() == []


def test_nonlinearity_rejects_bad_s0():
    with pytest.raises(FieldError):
        make_nonlinearity_cubic_like(0.0)


def test_charge_oracles():
    assert charge(ShapeField.from_values(np.zeros(5))) == 0
    assert charge(single_site(0.6)) == pytest.approx(0.36, abs=1e-16)
    psi = ComplexField.from_values([0.5j])
    assert charge_complex(psi) == 0.25


def test_vanishing_has_charge_sigma2():
    p = LatticeParams(lo=-20, hi=20)
    u = make_vanishing(1.0, 12, 0, p)
    assert u.values.max() == pytest.approx(0.2)
    assert charge(u) == pytest.approx(1.0, rel=1e-14)
    nl = make_nonlinearity_cubic_like(0.25)
    assert internal_energy(u, nl) == pytest.approx(2 * 0.04 - 25 * float(nl.F(0.04)), rel=1e-12)
    assert not is_hylomorphic(u, nl)
    with pytest.raises(FieldError):
        make_vanishing(1.0, 30, 0, p)


def test_vanishing_energy_tends_to_zero_from_above(nl):
    p = LatticeParams(lo=-600, hi=600)
    js = [internal_energy(make_vanishing(2.0, n, 0, p), nl) for n in (10, 50, 200, 500)]
    assert all(j > 0 for j in js)
    assert js == sorted(js, reverse=True)


def test_internal_energy_oracles(nl):
    assert internal_energy(ShapeField.from_values(np.zeros(4)), nl) == 0
    assert internal_energy(single_site(0.6), nl) == pytest.approx(0.705744, abs=1e-14)
    u = make_plateau(math.sqrt(0.5), 8, 0, LatticeParams(lo=-10, hi=10))
    assert internal_energy(u, nl) == pytest.approx(-0.0625, abs=1e-14)


def test_kinetic_energy_oracles():
    p = LatticeParams(lo=0, hi=1)
    u = ShapeField(p, np.array([0.0, 1.0]))
    th = PhaseField(p, np.array([0.0, 0.1]))
    assert kinetic_energy(u, th) == pytest.approx(0.01, abs=1e-15)
    assert kinetic_energy(u, PhaseField(p, np.full(2, 0.7))) == 0
    with pytest.raises(FieldError):
        kinetic_energy(u, PhaseField(LatticeParams(lo=0, hi=2), np.zeros(3)))


def test_energy_complex_reductions(nl):
    u = ShapeField.from_values([0.1, 0.9, 0.4])
    assert energy_complex(ComplexField(u.params, u.values.astype(complex)), nl) == pytest.approx(
        internal_energy(u, nl), rel=1e-14
    )
    p = LatticeParams(lo=0, hi=9, boundary="periodic")
    A = 0.7
    psi = ComplexField(p, np.full(10, A, dtype=complex))
    assert energy_complex(psi, nl) == pytest.approx(-10 * float(nl.F(A * A)), rel=1e-14)


def test_split_single_site(nl):
    jp, jm = split_energy(single_site(0.6), nl)
    assert jm == pytest.approx(0.36 - float(nl.F(0.36)), abs=1e-15)
    assert jp == pytest.approx(0.36, abs=1e-15)
    assert jp + jm == pytest.approx(0.705744, abs=1e-14)


def test_split_extremes(nl):
    low = ShapeField.from_values([0.1, 0.3, 0.2])
    assert split_energy(low, nl) == (internal_energy(low, nl), 0)
    high = ShapeField.from_values([0.9, 0.8, 1.0], boundary="periodic")
    jp, jm = split_energy(high, nl)
    assert jp == 0 and jm == pytest.approx(internal_energy(high, nl), rel=1e-14)


def test_region_split_components(nl):
    rs = region_split(ShapeField.from_values([0, 0.6, 0, 0.6, 0]), nl)
    assert rs.components == [(1, 1), (3, 3)]
    rs = region_split(ShapeField.from_values([0, 0.7, 0.55, 0.8, 0]), nl)
    assert rs.components == [(1, 3)]
    assert not region_split(ShapeField.from_values(np.zeros(3)), nl).hylomorphic


def test_region_split_periodic_wrap(nl):
    u = ShapeField.from_values([0.9, 0.1, 0.1, 0.8], boundary="periodic")
    assert region_split(u, nl).components == [(3, 0)]


def test_polar_conventions():
    u, th = polar_decompose(ComplexField.from_values([0.5j, -1.0, 0.0]))
    assert u.values.tolist() == [0.5, 1.0, 0.0]
    assert th.values.tolist() == [math.pi / 2, math.pi, 0.0]


def test_shape_field_validation():
    with pytest.raises(FieldError):
        ShapeField.from_values([0.1, -0.2])
    with pytest.raises(FieldError):
        ShapeField.from_values([np.nan])
    u = ShapeField.from_values([0.3])
    with pytest.raises(ValueError):
        u.values[0] = 1.0


@given(shapes)
def test_split_sums_to_internal_energy(u):
    nl = make_nonlinearity_cubic_like(0.25)
    jp, jm = split_energy(u, nl)
    assert jp + jm == pytest.approx(internal_energy(u, nl), rel=1e-12, abs=1e-12)


@given(shapes, st.integers(-50, 50))
def test_translation_invariance(u, k):
    nl = make_nonlinearity_cubic_like(0.25)
    assert internal_energy(u.shifted(k), nl) == internal_energy(u, nl)
    assert charge(u.shifted(k)) == charge(u)


@given(shapes, st.integers(0, 5), st.integers(0, 5))
def test_zero_padding_changes_nothing(u, left, right):
    nl = make_nonlinearity_cubic_like(0.25)
    w = u.extend(left, right)
    assert internal_energy(w, nl) == pytest.approx(internal_energy(u, nl), rel=1e-14, abs=1e-15)
    assert charge(w) == charge(u)


@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False), min_size=1, max_size=30))
def test_polar_round_trip(vals):
    psi = ComplexField.from_values(vals)
    u, th = polar_decompose(psi)
    assert np.all(th.values > -math.pi) and np.all(th.values <= math.pi)
    np.testing.assert_allclose(compose(u, th).values, psi.values, atol=1e-12)


@given(st.floats(0.1, 2), st.lists(st.floats(-3, 3), min_size=2, max_size=30))
def test_kinetic_forms_agree_for_small_phase_steps(c, phases):
    # on a constant modulus 2(1 - cos x) = x^2 + O(x^4), so the forms agree to ~1e-6
    p = LatticeParams(lo=0, hi=len(phases) - 1, boundary="periodic")
    u = ShapeField(p, np.full(p.size, c))
    th = PhaseField(p, 1e-3 * np.array(phases))
    k, kx = kinetic_energy(u, th), kinetic_energy_exact(u, th)
    assert kx == pytest.approx(k, rel=1e-5, abs=1e-20)

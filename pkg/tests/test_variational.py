import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from solcomp.field import (
    LatticeParams,
    ShapeField,
    charge,
    internal_energy,
    is_hylomorphic,
    make_nonlinearity_cubic_like,
    make_plateau,
)
from solcomp.variational import (
    MinimizeConfig,
    estimate_m_sigma,
    grad_J,
    ground_state,
    hylomorphy_witness,
    in_S,
    minimize_fixed_charge,
    plateau_energy,
    read_ground_state,
    write_ground_state,
)

NL = make_nonlinearity_cubic_like(0.25)
P64 = LatticeParams(h=1.0, lo=0, hi=63)


def test_grad_oracles():
    assert np.all(grad_J(ShapeField.from_values(np.zeros(4)), NL) == 0)
    g = grad_J(ShapeField.from_values([0.6]), NL)
    assert g[0] == pytest.approx(4 * 0.6 - 2 * 0.6 * float(NL.f(0.36)), rel=1e-15)


@given(st.lists(st.floats(0.01, 1.5), min_size=2, max_size=20), st.floats(0.5, 2.0))
def test_grad_matches_central_differences(vals, h):
    u = ShapeField.from_values(vals, h=h)
    g = grad_J(u, NL)
    eps = 1e-6
    for k in range(len(vals)):
        e = np.zeros(len(vals))
        e[k] = eps
        fd = (internal_energy(u.with_values(u.values + e), NL)
              - internal_energy(u.with_values(u.values - e), NL)) / (2 * eps)
        assert fd == pytest.approx(g[k], rel=1e-5, abs=1e-6)


def test_witness_oracles():
    w = hylomorphy_witness(8.5, NL, P64)
    assert np.count_nonzero(w.values) == 17
    assert w.values.max() == pytest.approx(math.sqrt(0.5))
    assert internal_energy(w, NL) == pytest.approx(-0.0625, abs=1e-14)
    assert is_hylomorphic(w, NL)
    assert hylomorphy_witness(0.01, NL, P64) is None
    assert plateau_energy(0.5, 8, 1.0, NL) == pytest.approx(-0.0625, abs=1e-15)


@given(st.floats(0.3, 30))
def test_witness_always_negative(s2):
    w = hylomorphy_witness(s2, NL, P64)
    if w is not None:
        assert internal_energy(w, NL) < 0 and is_hylomorphic(w, NL)
        assert charge(w) == pytest.approx(s2, rel=1e-12)


def test_minimize_from_witness():
    w = hylomorphy_witness(8.5, NL, P64)
    gs = minimize_fixed_charge(w, NL, MinimizeConfig(math.sqrt(8.5)))
    assert gs.J_value <= -0.0625
    assert abs(charge(gs.u) - 8.5) <= 1e-10
    assert gs.residual < 10 * 1e-6


def test_ground_state_frozen():
    gs = ground_state(8.5, NL, params=P64)
    assert gs.J_value == pytest.approx(-579.1425017895, abs=1e-9)
    assert gs.lagrange_omega == pytest.approx(-420.98079786, abs=1e-6)
    assert gs.u.values.max() == pytest.approx(2.91541138, abs=1e-8)


def test_minimize_descends_monotonically():
    rng = np.random.default_rng(5)
    u0 = ShapeField(P64, rng.random(64))
    cfg = MinimizeConfig(math.sqrt(8.5), max_iters=1)
    u, J = u0, math.inf
    for _ in range(30):
        gs = minimize_fixed_charge(u, NL, cfg)
        assert abs(charge(gs.u) - 8.5) <= 1e-12 * 8.5
        assert gs.J_value <= J
        u, J = gs.u, gs.J_value


def test_small_charge_stays_near_zero():
    m = estimate_m_sigma(0.01, NL)
    assert 0 <= m < 1e-3


def test_m_sigma_bound():
    assert estimate_m_sigma(8.5, NL) <= -0.0625


def test_minimize_errors():
    with pytest.raises(ValueError):
        minimize_fixed_charge(ShapeField(P64, np.zeros(64)), NL, MinimizeConfig(1.0))
    with pytest.raises(ValueError):
        MinimizeConfig(sigma=1.0, step=0)


def test_in_S():
    assert in_S(ShapeField.from_values(np.zeros(3)), NL, 0.0, 0.0)
    w = hylomorphy_witness(8.5, NL, P64)
    assert in_S(w, NL, 0.0, math.sqrt(8.5))
    assert not in_S(w, NL, -0.1, math.sqrt(8.5))


def test_ground_state_files(tmp_path):
    gs = ground_state(2.0, NL, params=LatticeParams(lo=0, hi=15))
    write_ground_state(tmp_path, gs)
    back = read_ground_state(tmp_path)
    assert np.array_equal(back.u.values, gs.u.values)
    assert back.J_value == gs.J_value and back.residual == gs.residual

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from semispec.potential import make_potential, parse_potential
from semispec.turning import (
    BracketError,
    decay_point,
    midpoint_t0,
    turning_data,
    turning_point,
    turning_points,
)

POTENTIALS = {
    "harmonic": make_potential("harmonic"),
    "quartic": make_potential("quartic", 0.1),
    "asym": make_potential("asym", 0.3),
    "coshwell": make_potential("coshwell"),
    "skew": parse_potential("expr:t^2 + 0.2*t^3*tanh(t) + 0.1*t^3/(1 + t^2)"),
}


def quartic_root(a, E):
    # [DERIVED] t^2 solves a u^2 + u - E = 0
    return math.sqrt((-1 + math.sqrt(1 + 4 * a * E)) / (2 * a))


def test_harmonic_examples():
    # [TRIVIAL] t = +-sqrt(E)
    p = POTENTIALS["harmonic"]
    assert turning_points(p, 4.0) == pytest.approx((-2.0, 2.0), abs=1e-13)
    assert turning_points(p, 0.25) == pytest.approx((-0.5, 0.5), abs=1e-13)


def test_quartic_closed_form():
    tm, tp = turning_points(POTENTIALS["quartic"], 1.0)
    assert tp == pytest.approx(quartic_root(0.1, 1.0), abs=1e-13)
    assert tp == pytest.approx(0.9571205687, abs=1e-9)
    assert tm == pytest.approx(-tp, abs=1e-13)


@given(st.sampled_from(sorted(POTENTIALS)), st.floats(1e-3, 50.0))
def test_turning_residual_and_order(name, E):
    p = POTENTIALS[name]
    tm, tp = turning_points(p, E)
    assert tm < 0 < tp
    assert abs(p.V(tm) - E) <= 1e-11 * (1 + E)
    assert abs(p.V(tp) - E) <= 1e-11 * (1 + E)


@pytest.mark.parametrize("name", sorted(POTENTIALS))
def test_turning_points_monotone_in_energy(name):
    p = POTENTIALS[name]
    Es = np.geomspace(1e-3, 30, 40)
    pts = np.array([turning_points(p, E) for E in Es])
    assert np.all(np.diff(pts[:, 1]) > 0)
    assert np.all(np.diff(pts[:, 0]) < 0)


@pytest.mark.parametrize("E", [1.0, 10.0, 100.0])
def test_harmonic_growth(E):
    assert turning_point(POTENTIALS["harmonic"], E, +1) / math.sqrt(E) == pytest.approx(1.0, abs=1e-10)


def test_energy_must_be_positive():
    for E in (0.0, -1.0, math.nan):
        with pytest.raises(ValueError):
            turning_points(POTENTIALS["harmonic"], E)


def test_bracket_cap_reported():
    bounded = parse_potential("expr:1 - exp(-t^2)")
    with pytest.raises(BracketError, match="2\\^60|1.15292e\\+18"):
        turning_point(bounded, 2.0, +1)


# ----------------------------------------------------------------- midpoint


@pytest.mark.parametrize("name", ["harmonic", "quartic", "coshwell"])
@pytest.mark.parametrize("E", [0.01, 1.0, 7.0])
def test_midpoint_of_even_potentials_is_zero(name, E):
    # [TRIVIAL] symmetry
    assert midpoint_t0(POTENTIALS[name], E) == 0.0


def _fine_grid_midpoint(p, E, n=2_000_000):
    # [DERIVED] cumulative midpoint rule between independently bisected turning points
    def root(side):
        lo, hi = 0.0, 1.0
        while p.V(side * hi) < E:
            hi *= 2
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if p.V(side * mid) < E else (lo, mid)
        return side * 0.5 * (lo + hi)

    a, b = root(-1), root(+1)
    h = (b - a) / n
    t = a + h * (np.arange(n) + 0.5)
    cum = np.cumsum(np.sqrt(np.maximum(E - p.V(t), 0.0))) * h
    k = np.searchsorted(cum, 0.5 * cum[-1])
    # linear interpolation inside the panel
    frac = (0.5 * cum[-1] - (cum[k - 1] if k else 0.0)) / (cum[k] - (cum[k - 1] if k else 0.0))
    return a + h * (k + frac)


def test_asym_midpoint_matches_fine_grid():
    p = POTENTIALS["asym"]
    t0 = midpoint_t0(p, 0.5)
    assert abs(t0) > 1e-3
    assert t0 == pytest.approx(_fine_grid_midpoint(p, 0.5), abs=1e-6)


def _half_actions(p, E, t0):
    tm, tp = turning_points(p, E)
    f = lambda t: math.sqrt(max(E - p.V(t), 0.0))  # noqa: E731
    left = quad(f, tm, t0, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    right = quad(f, t0, tp, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return left, right


@given(st.sampled_from(["asym", "skew"]), st.floats(0.02, 8.0))
def test_midpoint_splits_action(name, E):
    # [DERIVED] independent adaptive quadrature of each half
    p = POTENTIALS[name]
    data = turning_data(p, E)
    assert data.t_minus < data.t_zero < data.t_plus
    left, right = _half_actions(p, E, data.t_zero)
    assert abs(left - right) <= 1e-10 * data.action * math.pi + 1e-13


def test_turning_data_fields():
    data = turning_data(POTENTIALS["harmonic"], 3.0)
    assert data.energy == 3.0
    assert data.action == pytest.approx(1.5, abs=1e-12)
    assert math.isnan(turning_data(POTENTIALS["harmonic"], 3.0, with_action=False).action)


@pytest.mark.parametrize("side", [-1, +1])
@pytest.mark.parametrize("name", ["harmonic", "asym"])
def test_decay_point_reaches_exponent(name, side):
    # [DERIVED] adaptive quadrature of sqrt(V - E) beyond the turning point
    p, eps, E = POTENTIALS[name], 0.05, 0.7
    t = decay_point(p, eps, E, side, 20.0)
    tt = turning_point(p, E, side)
    val = quad(lambda s: math.sqrt(max(p.V(s) - E, 0.0)), min(tt, t), max(tt, t), epsabs=1e-12)[0]
    assert side * (t - tt) > 0
    assert val / eps == pytest.approx(20.0, rel=1e-8)

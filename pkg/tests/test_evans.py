import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from semispec.evans import (
    EPS_MIN,
    EvansDomainError,
    StepBudgetError,
    _start_point,
    evans_delta,
    evans_mismatch,
    evans_spectrum,
    hyperbolic_offset,
    prufer_shoot,
)
from semispec.potential import make_potential
from semispec.refsolver import reference_eigenvector, reference_spectrum
from semispec.turning import midpoint_t0, turning_points
from semispec.wkbfun import sign_changes

HARMONIC = make_potential("harmonic")
POTENTIALS = {"harmonic": HARMONIC, "quartic": make_potential("quartic", 0.1), "asym": make_potential("asym", 0.3)}


@lru_cache(maxsize=None)
def spectra(name, eps, E_max=1.0):
    p = POTENTIALS[name]
    return evans_spectrum(p, eps, (0.25 * eps, E_max)), reference_spectrum(p, eps, E_max)


# ------------------------------------------------------------ shooting


def test_mismatch_vanishes_at_exact_eigenvalue():
    # [DERIVED] E = 0.3 is the n = 1 level of t^2 at eps = 0.1
    assert abs(evans_delta(HARMONIC, 0.1, 0.3)) <= 1e-6
    assert abs(evans_delta(HARMONIC, 0.1, 0.1)) <= 1e-6


def test_mismatch_bounded_away_between_eigenvalues():
    # [DERIVED] no eigenvalue at 0.2 (exact spectrum 0.1, 0.3, ...)
    assert abs(evans_delta(HARMONIC, 0.1, 0.2)) > 0.5


def test_delta_changes_sign_across_eigenvalue():
    # [DERIVED] intermediate value theorem around E_1 = 0.3
    assert evans_delta(HARMONIC, 0.1, 0.25) * evans_delta(HARMONIC, 0.1, 0.35) < 0


def test_winding_counts_zeros_above_first_level():
    # [DERIVED] the n = 1 reference eigenvector has one sign change
    _, x, _ = reference_eigenvector(HARMONIC, 0.1, 1)
    assert sign_changes(x) == 1
    t0 = midpoint_t0(HARMONIC, 0.35)
    u = prufer_shoot(HARMONIC, 0.1, 0.35, "u", t0)
    s = prufer_shoot(HARMONIC, 0.1, 0.35, "s", t0)
    assert u.winding + s.winding >= 1


def test_start_point_beyond_hyperbolic_offset():
    eps, E = 0.05, 0.4
    for side in (-1, +1):
        t = _start_point(HARMONIC, eps, E, side)
        assert HARMONIC.V(t) - E >= hyperbolic_offset(eps) * (1 - 1e-12)
    assert hyperbolic_offset(0.001) == 0.5
    assert hyperbolic_offset(1.0) == 2.0


def test_trace_record():
    tr = prufer_shoot(HARMONIC, 0.1, 0.5, "u", record=True)
    assert tr.t[0] == tr.t_start and tr.t[-1] == pytest.approx(tr.t_end, abs=1e-14)
    assert np.all(np.diff(tr.t) > 0)
    assert tr.thetas[0] == tr.theta_start and tr.thetas[-1] == tr.theta
    assert tr.steps == len(tr.t) - 1
    # backward integration for the stable side
    trs = prufer_shoot(HARMONIC, 0.1, 0.5, "s", record=True)
    assert np.all(np.diff(trs.t) < 0)
    assert trs.error_estimate > 0


@given(st.floats(0.02, 2.0), st.sampled_from(["u", "s"]))
def test_winding_nonnegative(E, side):
    assert prufer_shoot(HARMONIC, 0.1, E, side).winding >= 0


def test_shoot_errors():
    with pytest.raises(ValueError):
        prufer_shoot(HARMONIC, 0.1, 0.3, "x")
    with pytest.raises(ValueError):
        prufer_shoot(HARMONIC, 0.1, -0.3, "u")
    with pytest.raises(ValueError):
        prufer_shoot(HARMONIC, 0.0, 0.3, "u")
    with pytest.raises(EvansDomainError, match="enlarge"):
        prufer_shoot(HARMONIC, 0.1, 1.0, "u", t_start=-0.5)
    with pytest.raises(StepBudgetError) as info:
        prufer_shoot(HARMONIC, 0.01, 1.0, "u", max_steps=10)
    assert info.value.steps == 10
    with pytest.raises(ValueError):
        evans_delta(HARMONIC, 0.1, 0.3, direction=(0.0, 0.0))


@pytest.mark.parametrize("E", [0.15, 0.3, 0.37])
def test_projectivization_invariance(E):
    # the line spanned by the start direction is all that matters
    eps = 0.1
    lam = math.sqrt(HARMONIC.V(_start_point(HARMONIC, eps, E, -1)) - E)
    base = evans_delta(HARMONIC, eps, E)
    for c in (1.0, -1.0, 2.0, -0.5, 1024.0, -2.0**-30):
        # exact multiples: bit-identical output
        assert evans_delta(HARMONIC, eps, E, direction=(c, c * lam)) == base
    for c in (3.0, -7.3, 1e-9):
        # the scaled vector itself is rounded, so agreement is to rounding level
        assert evans_delta(HARMONIC, eps, E, direction=(c, c * lam)) == pytest.approx(base, abs=1e-14)


# ------------------------------------------------------- mismatch structure


def test_mismatch_monotone_and_normalized():
    eps = 0.1
    Es = np.linspace(0.02, 1.0, 60)
    D = np.array([evans_mismatch(HARMONIC, eps, E) for E in Es])
    assert np.all(np.diff(D) < 0)
    below = Es < 0.1
    assert np.all((D[below] > 0) & (D[below] < math.pi))


def test_mismatch_moves_by_pi_between_eigenvalues():
    eps = 0.1
    D = [evans_mismatch(HARMONIC, eps, (2 * n + 1) * eps) for n in range(5)]
    for n, d in enumerate(D):
        assert d == pytest.approx(-n * math.pi, abs=1e-6)
    assert np.allclose(np.diff(D), -math.pi, atol=1e-6)


# ------------------------------------------------------------- spectrum


def test_harmonic_spectrum():
    # [DERIVED] exact spectrum
    s = evans_spectrum(HARMONIC, 0.1, (0.05, 1.05))
    assert s.method == "evans"
    assert s.indices == [0, 1, 2, 3, 4]
    assert s.energies == pytest.approx([0.1, 0.3, 0.5, 0.7, 0.9], abs=1e-9)
    assert all(r.residual <= 1e-8 for r in s)


def test_quartic_matches_reference():
    # [DERIVED] oracle equivalence
    ev, ref = spectra("quartic", 0.05)
    assert len(ev) == len(ref) == 10
    assert max(abs(a.energy - b.energy) for a, b in zip(ev, ref)) <= 1e-7


def test_range_starting_mid_spectrum_keeps_indices():
    s = evans_spectrum(HARMONIC, 0.1, (0.4, 0.8))
    assert s.indices == [2, 3]
    assert s.energies == pytest.approx([0.5, 0.7], abs=1e-9)


def test_empty_range_below_ground_state():
    # [TRIVIAL]
    assert len(evans_spectrum(HARMONIC, 0.1, (0.01, 0.08))) == 0


def test_spectrum_domain_guard():
    with pytest.raises(EvansDomainError):
        evans_spectrum(HARMONIC, EPS_MIN / 2, (0.01, 0.1))
    with pytest.raises(ValueError):
        evans_spectrum(HARMONIC, 0.1, (0.5, 0.2))


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(POTENTIALS))
@pytest.mark.parametrize("eps", [0.1, 0.05, 0.02])
def test_oracle_equivalence_grid(name, eps):
    ev, ref = spectra(name, eps)
    assert ev.indices == ref.indices
    for a, b in zip(ev, ref):
        assert abs(a.energy - b.energy) <= 1e-6 * (1 + b.energy)


@pytest.mark.parametrize("name", ["harmonic", "quartic"])
def test_index_matches_eigenvector_sign_changes(name):
    eps = 0.1
    ev, _ = spectra(name, eps, 1.9)
    assert len(ev) >= 9
    for r in ev:
        _, x, lam = reference_eigenvector(POTENTIALS[name], eps, r.n)
        assert lam == pytest.approx(r.energy, abs=1e-3)
        assert sign_changes(x) == r.n


def test_turning_points_bracket_matching_point():
    E = 0.7
    tm, tp = turning_points(POTENTIALS["asym"], E)
    tr = prufer_shoot(POTENTIALS["asym"], 0.05, E, "s")
    assert tr.t_start > tp > tr.t_end > tm

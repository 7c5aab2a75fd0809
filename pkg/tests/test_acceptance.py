"""Acceptance criteria 1-9 at their stated tolerances.

A PASS/FAIL line per criterion is printed in the terminal summary; run with
``-s`` to also see the measured values.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import eigh_tridiagonal

from semispec.action import action_J
from semispec.evans import evans_spectrum
from semispec.harness import bs_remainder_study, gap_study, intermediate_study, low_lying_study
from semispec.potential import make_potential, parse_potential
from semispec.quantize import bohr_sommerfeld_spectrum, melnikov_first_order
from semispec.refsolver import Tridiagonal, reference_eigenvector, reference_spectrum, sturm_count
from semispec.specfun import airy_ai, hermite, hermite_norm_sq
from semispec.wkbfun import build_eigenfunction, count_zeros, sign_changes

from oracles import midpoint_action

HARMONIC = make_potential("harmonic")
QUARTIC = make_potential("quartic", 0.1)
COSHWELL = make_potential("coshwell")
ASYM = make_potential("asym", 0.3)


def crit(k, label):
    return pytest.mark.criterion(k, label)


# ---------------------------------------------------------------- 1


@crit(1, "harmonic exactness: BS 1e-10, evans and reference 1e-6, E_n <= 1")
@pytest.mark.parametrize("eps", [0.2, 0.1, 0.05])
def test_c1_harmonic_exactness(eps):
    # [DERIVED] E_n = (2n+1) eps exactly
    K = math.floor((1.0 / eps - 1.0) / 2.0 + 1e-9) + 1
    exact = np.array([(2 * n + 1) * eps for n in range(K)])
    # E_max halfway to the next level keeps E_n = 1 off the window edge
    E_max = 1.0 + eps / 2
    bs = bohr_sommerfeld_spectrum(HARMONIC, eps, E_max)
    ev = evans_spectrum(HARMONIC, eps, (0.25 * eps, E_max))
    ref = reference_spectrum(HARMONIC, eps, E_max)
    errs = {}
    for name, s, tol in (("bs", bs, 1e-10), ("evans", ev, 1e-6), ("reference", ref, 1e-6)):
        assert s.indices == list(range(K)), name
        errs[name] = float(np.max(np.abs(np.array(s.energies) - exact)))
        assert errs[name] <= tol, name
    print(f"\n[c1] eps={eps} levels={K} max errors {errs}")


# ---------------------------------------------------------------- 2


@crit(2, "evans vs reference, quartic(0.1), eps=0.05, E<=1")
def test_c2_cross_validation():
    eps = 0.05
    ev = evans_spectrum(QUARTIC, eps, (0.25 * eps, 1.0))
    ref = reference_spectrum(QUARTIC, eps, 1.0)
    assert len(ev) == len(ref) > 0
    assert ev.indices == ref.indices
    worst = max(abs(a.energy - b.energy) / (1 + b.energy) for a, b in zip(ev, ref))
    print(f"\n[c2] count={len(ev)} max |dE|/(1+E)={worst:.3e}")
    assert worst <= 1e-6


# ---------------------------------------------------------------- 3


@crit(3, "low-lying order: slope 2.0 +- 0.2, n<=2, quartic(0.1) and coshwell")
@pytest.mark.parametrize("p", [QUARTIC, COSHWELL], ids=lambda p: p.descriptor)
def test_c3_low_lying_order(p):
    r = low_lying_study(p, [0.02, 0.01, 0.005, 0.0025], n_max=2)
    print(f"\n[c3] {p.descriptor} slopes {r.extra['slopes']}")
    assert not r.exact
    assert set(r.extra["slopes"]) == {"0", "1", "2"}
    for s in r.extra["slopes"].values():
        assert abs(s - 2.0) <= 0.2


# ---------------------------------------------------------------- 4


@crit(4, "BS remainder order: slope >= 1.6, quartic(0.1), window [0.25, 0.55]")
def test_c4_bs_remainder_order():
    r = bs_remainder_study(QUARTIC, [0.1, 0.05, 0.025, 0.0125], window=(0.25, 0.55))
    print(f"\n[c4] slope={r.slope:.4f} stderr={r.stderr:.4f} "
          f"even={r.extra.get('slope_even'):.4f} odd={r.extra.get('slope_odd'):.4f}")
    assert r.slope >= 1.6


# ---------------------------------------------------------------- 5


@crit(5, "gap law in [0.9, 1.1] and Sturm completeness, quartic(0.1), eps=0.05")
def test_c5_gap_law():
    r = gap_study(QUARTIC, 0.05, window=(0.3, 0.7))
    gaps = [row["normalized_gap"] for row in r.rows]
    print(f"\n[c5] gaps in [{min(gaps):.6f}, {max(gaps):.6f}], sturm={r.extra['sturm_count']} "
          f"bs={r.extra['bs_count']}")
    assert all(0.9 <= g <= 1.1 for g in gaps)
    assert abs(r.extra["sturm_count"] - r.extra["bs_count"]) <= 1
    assert r.extra["unpartnered"] == []


# ---------------------------------------------------------------- 6


@crit(6, "intermediate residual spread < 3, quartic(0.1), E in [20 eps, 0.3]")
def test_c6_intermediate_boundedness():
    r = intermediate_study(QUARTIC, [0.01, 0.005, 0.0025], c1=20.0, c2=0.3)
    print(f"\n[c6] per-eps maxima {[o for _, o in r.pairs]} spread={r.extra['spread']:.4f}")
    assert all(20 * row["eps"] <= row["energy"] <= 0.3 for row in r.rows)
    assert r.extra["spread"] < 3.0


# ---------------------------------------------------------------- 7


@crit(7, "eigenfunction zeros: WKB and reference have n zeros, eps=0.1, n<=5")
@pytest.mark.parametrize("p", [HARMONIC, QUARTIC], ids=lambda p: p.descriptor)
def test_c7_zero_counts(p):
    eps = 0.1
    for n in range(6):
        _, x, lam = reference_eigenvector(p, eps, n)
        assert sign_changes(x) == n
        assert count_zeros(build_eigenfunction(p, eps, lam, n=n)) == n


# ---------------------------------------------------------------- 8


def _fd2(f, x, h=1e-3):
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


@crit(8, "kernels: Airy residual, Hermite norms, action oracle, Sturm monotonicity")
def test_c8_airy_residual():
    x = np.linspace(-10.0, 10.0, 2001)
    res = np.max(np.abs(_fd2(airy_ai, x) - x * airy_ai(x)))
    print(f"\n[c8] Airy residual {res:.3e}")
    assert res <= 1e-6


@crit(8, "kernels: Airy residual, Hermite norms, action oracle, Sturm monotonicity")
@pytest.mark.parametrize("n", range(11))
def test_c8_hermite_norms(n):
    # [DERIVED] quadrature of exp(-t^2) H_n^2
    val = quad(lambda t: math.exp(-t * t) * hermite(n, t) ** 2, -12, 12, epsabs=0, epsrel=1e-13, limit=400)[0]
    assert abs(hermite_norm_sq(n) - val) <= 1e-8 * val


ACTION_GRID = {
    "harmonic": HARMONIC,
    "quartic": QUARTIC,
    "asym": ASYM,
    "coshwell": COSHWELL,
    "sextic": parse_potential("expr:t^2 + 0.05*t^6 + 0.2*t^3/(1 + t^2)"),
}


@crit(8, "kernels: Airy residual, Hermite norms, action oracle, Sturm monotonicity")
@pytest.mark.parametrize("name", sorted(ACTION_GRID))
def test_c8_action_midpoint_oracle(name):
    # [DERIVED] 1e7-panel midpoint rule
    p = ACTION_GRID[name]
    for E in (0.05, 0.3, 1.0, 3.0, 10.0):
        assert abs(action_J(p, E) - midpoint_action(p, E)) <= 1e-9, E


@crit(8, "kernels: Airy residual, Hermite norms, action oracle, Sturm monotonicity")
def test_c8_sturm_monotonicity():
    rng = np.random.default_rng(20240611)
    violations = 0
    for trial in range(10):
        N = int(rng.integers(5, 200))
        d = rng.normal(size=N) * 10.0 ** rng.integers(-3, 4)
        e = rng.normal(size=N - 1)
        T = Tridiagonal(d, e, 1.0, 0.0, N + 1.0)
        lo, hi = T.gershgorin()
        lams = np.sort(rng.uniform(lo - 1, hi + 1, size=1000))
        counts = np.array([sturm_count(T, lam) for lam in lams])
        violations += int(np.count_nonzero(np.diff(counts) < 0))
        exact = eigh_tridiagonal(d, e, eigvals_only=True)
        clear = np.min(np.abs(lams[:, None] - exact[None, :]), axis=1) > 1e-9 * (1 + np.abs(lams))
        assert np.array_equal(counts[clear], np.searchsorted(exact, lams[clear]))
    assert violations == 0


# ---------------------------------------------------------------- 9


EVEN = [HARMONIC, QUARTIC, make_potential("quartic", 2.0), COSHWELL,
        parse_potential("expr:t^2 + 0.3*t^4*exp(-t^2)")]


@crit(9, "Melnikov term <= 1e-12 for even potentials, n<=5")
@pytest.mark.parametrize("p", EVEN, ids=lambda p: p.descriptor)
def test_c9_melnikov_even(p):
    vals = [abs(melnikov_first_order(p, n)) for n in range(6)]
    assert max(vals) <= 1e-12

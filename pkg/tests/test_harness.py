import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from semispec.harness import (
    STUDIES,
    ScalingReport,
    StudyError,
    bs_remainder_study,
    fit_loglog,
    gap_study,
    intermediate_study,
    low_lying_study,
)
from semispec.potential import parse_potential


@given(st.floats(-3.0, 3.0), st.floats(0.1, 10.0))
def test_fit_recovers_power_law(k, c):
    # [TRIVIAL] exact power law
    eps = [0.1, 0.05, 0.025, 0.0125]
    slope, se = fit_loglog(eps, [c * e**k for e in eps])
    assert slope == pytest.approx(k, abs=1e-9)
    # stderr goes through sqrt(1 - r^2), so exact data sits at ~sqrt(machine eps)
    assert se < 1e-6


def test_fit_needs_two_points():
    with pytest.raises(StudyError):
        fit_loglog([0.1], [1.0])
    slope, se = fit_loglog([0.1, 0.05], [1e-2, 2.5e-3])
    assert slope == pytest.approx(2.0, abs=1e-12) and math.isnan(se)


def test_registry():
    assert set(STUDIES) == {"bs-remainder", "low-lying", "gaps", "intermediate"}


# ----------------------------------------------------------------- studies


def test_harmonic_remainder_is_exact(harmonic):
    # [DERIVED] the quantization rule is exact for t^2
    r = bs_remainder_study(harmonic, [0.1, 0.05])
    assert r.exact and r.passed and r.slope is None
    assert all(o <= 1e-10 for _, o in r.pairs)


def test_quartic_remainder_order(quartic):
    r = bs_remainder_study(quartic, [0.1, 0.05, 0.025, 0.0125])
    assert r.passed and not r.exact
    assert r.slope >= 1.6
    assert [e for e, _ in r.pairs] == [0.1, 0.05, 0.025, 0.0125]
    # both parities scale alike
    assert abs(r.extra["slope_even"] - r.extra["slope_odd"]) <= 0.3
    for row in r.rows:
        assert 0.25 - 1e-12 <= row["n"] * row["eps"] <= 0.55 + 1e-12


@pytest.mark.parametrize("fixture", ["quartic", "coshwell"])
def test_low_lying_order(fixture, request):
    p = request.getfixturevalue(fixture)
    r = low_lying_study(p, [0.02, 0.01, 0.005], n_max=2)
    assert r.passed
    assert set(r.extra["slopes"]) == {"0", "1", "2"}
    assert all(abs(s - 2.0) <= 0.2 for s in r.extra["slopes"].values())


def test_low_lying_harmonic_exact(harmonic):
    r = low_lying_study(harmonic, [0.02, 0.01], n_max=1)
    assert r.exact and r.passed


def test_low_lying_scaled_frequency():
    # [DERIVED] 2 t^2 has levels (2n+1) eps sqrt(2) exactly
    r = low_lying_study(parse_potential("expr:2*t^2"), [0.05, 0.02], n_max=1)
    assert r.exact


def test_gap_law(quartic):
    r = gap_study(quartic, 0.05)
    assert r.passed
    assert all(0.9 <= row["normalized_gap"] <= 1.1 for row in r.rows)
    assert abs(r.extra["sturm_count"] - r.extra["bs_count"]) <= 1
    assert r.extra["unpartnered"] == []


def test_gap_study_needs_two_levels(quartic):
    with pytest.raises(StudyError):
        gap_study(quartic, 0.5, window=(0.3, 0.4))


def test_intermediate_boundedness(quartic):
    r = intermediate_study(quartic, [0.01, 0.005])
    assert r.passed and r.extra["spread"] < 3.0
    assert all(row["energy"] >= 20 * row["eps"] for row in r.rows)


def test_intermediate_harmonic_exact(harmonic):
    assert intermediate_study(harmonic, [0.01, 0.005]).exact


def test_study_argument_checks(quartic):
    with pytest.raises(StudyError):
        bs_remainder_study(quartic, [])
    with pytest.raises(StudyError):
        bs_remainder_study(quartic, [0.1, -0.05])
    with pytest.raises(StudyError):
        bs_remainder_study(quartic, [2.0], window=(0.25, 0.55))
    with pytest.raises(StudyError):
        low_lying_study(quartic, [0.01], n_max=-1)
    with pytest.raises(StudyError):
        intermediate_study(quartic, [0.02])
    with pytest.raises(StudyError):
        gap_study(quartic, 0.0)


# ------------------------------------------------------------ serialization


def test_report_serialization(quartic):
    r = low_lying_study(quartic, [0.02, 0.01], n_max=1)
    data = json.loads(r.to_json())
    assert data["experiment"] == "low-lying"
    assert data["potential"] == quartic.descriptor
    assert data["passed"] is True
    assert data["pairs"] == [list(p) for p in r.pairs]
    rows = list(csv.DictReader(io.StringIO(r.to_csv())))
    assert len(rows) == 4
    assert {"eps", "n", "energy", "deviation"} <= set(rows[0])
    assert float(rows[0]["energy"]) == r.rows[0]["energy"]


def test_report_json_handles_nan():
    r = ScalingReport("x", "p", [(0.1, 1.0)], math.nan, None, "c", False, extra={"v": np.float64(2.0)})
    data = json.loads(r.to_json())
    assert data["slope"] is None and data["extra"]["v"] == 2.0

"""Scaling studies that measure asymptotic orders against the reference solver.

Every study returns a :class:`ScalingReport`. Slopes are least-squares fits
of ``log(observable)`` against ``log(eps)``. A lower-bound threshold passes
when ``slope - 2 stderr >= threshold``; a band ``center +- half_width`` is
checked on the point estimate, with the standard error reported alongside.
When every observable is at rounding level the fit is skipped and the report
is flagged ``exact``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.stats import linregress

from .action import action_derivative, action_J, invert_J
from .parallel import thread_map
from .potential import PotentialModel
from .refsolver import discretize, reference_spectrum, sturm_count
from .spectrum import Spectrum, _jsonable

__all__ = [
    "ScalingReport",
    "StudyError",
    "fit_loglog",
    "bs_remainder_study",
    "low_lying_study",
    "gap_study",
    "intermediate_study",
    "STUDIES",
]

EXACT_TOL = 1e-10


class StudyError(ValueError):
    pass


@dataclass
class ScalingReport:
    experiment: str
    potential: str
    pairs: list[tuple[float, float]]
    slope: float | None
    stderr: float | None
    criterion: str
    passed: bool
    exact: bool = False
    rows: list[dict[str, Any]] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return _jsonable({
            "experiment": self.experiment,
            "potential": self.potential,
            "pairs": [list(p) for p in self.pairs],
            "slope": self.slope,
            "stderr": self.stderr,
            "criterion": self.criterion,
            "passed": self.passed,
            "exact": self.exact,
            "rows": self.rows,
            "extra": self.extra,
        })

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def to_csv(self) -> str:
        """Flat table: the raw rows, one column per key."""
        keys: list[str] = []
        for row in self.rows:
            keys.extend(k for k in row if k not in keys)
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: _fmt(row.get(k)) for k in keys})
        return buf.getvalue()


def _fmt(v: Any) -> Any:
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else v


def fit_loglog(eps: list[float], obs: list[float]) -> tuple[float, float]:
    """Slope and its standard error for ``log obs = slope * log eps + c``."""
    x, y = np.log(np.asarray(eps, dtype=float)), np.log(np.asarray(obs, dtype=float))
    if len(x) < 2:
        raise StudyError("need at least two points for a slope")
    if len(x) == 2:
        return float((y[1] - y[0]) / (x[1] - x[0])), math.nan
    fit = linregress(x, y)
    return float(fit.slope), float(fit.stderr)


def _check_eps_list(eps_list) -> list[float]:
    eps_list = sorted({float(e) for e in eps_list}, reverse=True)
    if not eps_list or eps_list[-1] <= 0:
        raise StudyError("eps_list must contain positive values")
    return eps_list


def _reference_upto(p: PotentialModel, eps: float, n_needed: int, E_guess: float) -> Spectrum:
    E_max = E_guess
    for _ in range(30):
        spec = reference_spectrum(p, eps, E_max)
        if len(spec) > n_needed:
            return spec
        E_max *= 1.25
    raise StudyError(f"could not resolve {n_needed + 1} reference eigenvalues")


def _lower_bound(slope: float, stderr: float, threshold: float) -> bool:
    se = 0.0 if math.isnan(stderr) else stderr
    return slope - 2.0 * se >= threshold


def _window_indices(eps: float, window: tuple[float, float]) -> list[int]:
    lo, hi = window
    return list(range(max(0, math.ceil(lo / eps - 1e-9)), math.floor(hi / eps + 1e-9) + 1))


def bs_remainder_study(p: PotentialModel, eps_list, window=(0.25, 0.55),
                       threshold: float = 1.6) -> ScalingReport:
    """Order of ``max_n |J(E_n^ref) - (n + 1/2) eps|`` over ``n eps`` in ``window``."""
    eps_list = _check_eps_list(eps_list)
    window = tuple(map(float, window))

    def cell(eps: float):
        ns = _window_indices(eps, window)
        if not ns:
            raise StudyError(f"window {window} holds no index at eps={eps}")
        E_guess = 1.05 * invert_J(p, (ns[-1] + 1.5) * eps)
        spec = _reference_upto(p, eps, ns[-1], E_guess)
        rows = []
        for n in ns:
            E = spec[n].energy
            rows.append({"eps": eps, "n": n, "energy": E,
                         "remainder": abs(action_J(p, E) - (n + 0.5) * eps)})
        return rows

    rows = [r for block in thread_map(cell, eps_list) for r in block]
    obs = [max(r["remainder"] for r in rows if r["eps"] == e) for e in eps_list]
    pairs = list(zip(eps_list, obs))
    crit = f"slope - 2 stderr >= {threshold}"
    if max(obs) <= EXACT_TOL:
        return ScalingReport("bs-remainder", p.descriptor, pairs, None, None, crit, True, True, rows)
    slope, se = fit_loglog(eps_list, obs)
    extra: dict[str, Any] = {"window": list(window)}
    for parity, name in ((0, "even"), (1, "odd")):
        po = [max((r["remainder"] for r in rows if r["eps"] == e and r["n"] % 2 == parity), default=math.nan)
              for e in eps_list]
        ok = [(e, o) for e, o in zip(eps_list, po) if o > 0 and math.isfinite(o)]
        if len(ok) >= 2:
            s, s_se = fit_loglog([e for e, _ in ok], [o for _, o in ok])
            extra[f"slope_{name}"] = s
            extra[f"stderr_{name}"] = s_se
    return ScalingReport("bs-remainder", p.descriptor, pairs, slope, se, crit,
                         _lower_bound(slope, se, threshold), False, rows, extra)


def low_lying_study(p: PotentialModel, eps_list, n_max: int = 0, center: float = 2.0,
                    half_width: float = 0.2) -> ScalingReport:
    """Order of ``|E_n^ref - (2n+1) eps omega|`` for each ``n <= n_max``.

    The report's slope is that of the index furthest from ``center``;
    ``extra['slopes']`` holds every index.
    """
    eps_list = _check_eps_list(eps_list)
    if n_max < 0:
        raise StudyError("n_max must be >= 0")
    omega = p.frequency

    def cell(eps: float):
        spec = _reference_upto(p, eps, n_max, 1.3 * (2 * n_max + 3) * eps * omega)
        return [{"eps": eps, "n": n, "energy": spec[n].energy,
                 "deviation": abs(spec[n].energy - (2 * n + 1) * eps * omega)} for n in range(n_max + 1)]

    rows = [r for block in thread_map(cell, eps_list) for r in block]
    crit = f"|slope - {center}| <= {half_width} for every n"
    slopes, errs = {}, {}
    for n in range(n_max + 1):
        obs = [next(r["deviation"] for r in rows if r["eps"] == e and r["n"] == n) for e in eps_list]
        if max(obs) <= EXACT_TOL:
            continue
        slopes[n], errs[n] = fit_loglog(eps_list, obs)
    pairs = [(e, max(r["deviation"] for r in rows if r["eps"] == e)) for e in eps_list]
    if not slopes:
        return ScalingReport("low-lying", p.descriptor, pairs, None, None, crit, True, True, rows,
                             {"slopes": {}, "n_max": n_max})
    worst = max(slopes, key=lambda n: abs(slopes[n] - center))
    passed = all(abs(s - center) <= half_width for s in slopes.values())
    extra = {"slopes": {str(n): s for n, s in slopes.items()},
             "stderrs": {str(n): s for n, s in errs.items()}, "n_max": n_max, "worst_n": worst}
    return ScalingReport("low-lying", p.descriptor, pairs, slopes[worst], errs[worst], crit, passed,
                         False, rows, extra)


def gap_study(p: PotentialModel, eps: float, window=(0.3, 0.7), band=(0.9, 1.1)) -> ScalingReport:
    """Normalized gaps ``(E_{n+1} - E_n) J'(mid) / eps`` for ``n eps`` in ``window``
    plus a Sturm-count completeness check against the Bohr-Sommerfeld indices.
    """
    if not eps > 0:
        raise StudyError("eps must be positive")
    window = tuple(map(float, window))
    ns = _window_indices(eps, window)
    if len(ns) < 2:
        raise StudyError(f"window {window} holds fewer than two indices at eps={eps}")
    E_guess = 1.05 * invert_J(p, (ns[-1] + 1.5) * eps)
    spec = _reference_upto(p, eps, ns[-1] + 1, E_guess)
    rows = []
    for n in ns[:-1]:
        E0, E1 = spec[n].energy, spec[n + 1].energy
        mid = 0.5 * (E0 + E1)
        rows.append({"eps": eps, "n": n, "energy": E0, "next_energy": E1,
                     "normalized_gap": (E1 - E0) * action_derivative(p, mid) / eps})
    gaps = [r["normalized_gap"] for r in rows]
    gaps_ok = all(band[0] <= g <= band[1] for g in gaps)

    # energies halfway (in action) between BS levels bound the window
    E_lo = invert_J(p, ns[0] * eps)
    E_hi = invert_J(p, (ns[-1] + 1) * eps)
    dom = tuple(spec.metadata["domain"])
    T = discretize(p, eps, dom, spec.metadata["grid_sizes"][-1])
    in_window = sturm_count(T, E_hi) - sturm_count(T, E_lo)
    bs_count = len(ns)
    count_ok = abs(in_window - bs_count) <= 1
    unpartnered = []
    for r in spec:
        if E_lo <= r.energy < E_hi:
            J_target = action_J(p, r.energy) / eps - 0.5
            E_bs = invert_J(p, (round(J_target) + 0.5) * eps)
            if abs(E_bs - r.energy) > 0.5 * eps:
                unpartnered.append(r.n)
    extra = {"window": list(window), "energy_window": [E_lo, E_hi], "sturm_count": in_window,
             "bs_count": bs_count, "unpartnered": unpartnered,
             "min_gap": min(gaps), "max_gap": max(gaps)}
    crit = f"normalized gaps in [{band[0]}, {band[1]}], |sturm - bs| <= 1, every level partnered"
    passed = gaps_ok and count_ok and not unpartnered
    return ScalingReport("gaps", p.descriptor, [(eps, max(abs(g - 1.0) for g in gaps))], None, None,
                         crit, passed, False, rows, extra)


def intermediate_study(p: PotentialModel, eps_list, c1: float = 20.0, c2: float = 0.3,
                       factor: float = 3.0) -> ScalingReport:
    """Max normalized residual ``[J(E) - (n+1/2) eps] / [eps^(3/2) (eps/E)^(1/6)]``
    over reference eigenvalues in ``[c1 eps, c2]``; passes when the maxima
    across ``eps_list`` stay within a factor ``factor`` of each other.
    """
    from .quantize import intermediate_residual

    eps_list = _check_eps_list(eps_list)
    if c1 * eps_list[0] >= c2:
        raise StudyError(f"empty regime [{c1} eps, {c2}] for eps={eps_list[0]}")

    def cell(eps: float):
        spec = reference_spectrum(p, eps, c2)
        rows = []
        for r in spec:
            if r.energy < c1 * eps:
                continue
            num = action_J(p, r.energy) - (r.n + 0.5) * eps
            rows.append({"eps": eps, "n": r.n, "energy": r.energy, "numerator": num,
                         "residual": intermediate_residual(p, eps, r.energy, r.n),
                         "weber_ratio": r.energy / (eps * p.frequency)})
        if not rows:
            raise StudyError(f"no reference eigenvalue in [{c1 * eps}, {c2}] at eps={eps}")
        return rows

    rows = [r for block in thread_map(cell, eps_list) for r in block]
    obs = [max(abs(r["residual"]) for r in rows if r["eps"] == e) for e in eps_list]
    pairs = list(zip(eps_list, obs))
    crit = f"max/min of per-eps maxima < {factor}"
    if max(abs(r["numerator"]) for r in rows) <= EXACT_TOL:
        return ScalingReport("intermediate", p.descriptor, pairs, None, None, crit, True, True, rows)
    spread = max(obs) / min(obs)
    slope, se = fit_loglog(eps_list, obs) if len(eps_list) >= 2 else (math.nan, math.nan)
    return ScalingReport("intermediate", p.descriptor, pairs, slope, se, crit, spread < factor, False,
                         rows, {"spread": spread, "c1": c1, "c2": c2})


STUDIES = {
    "bs-remainder": bs_remainder_study,
    "low-lying": low_lying_study,
    "gaps": gap_study,
    "intermediate": intermediate_study,
}

"""Evans-function eigenvalue detection by Prufer-angle shooting.

With ``y = eps x'`` the equation becomes ``eps x' = y``, ``eps y' = (V - E) x``
and the angle ``theta = atan2(y, x)`` obeys

    eps theta' = (V - E) cos^2 theta - sin^2 theta.

The unstable line bundle starts far left of ``t_-`` on the frozen eigendirection
``(1, lambda)``, ``lambda = sqrt(V - E)``, and is integrated forward to the
midpoint ``t0(E)``; the stable one starts right of ``t_+`` on ``(1, -lambda)``
and is integrated backward. The lines coincide iff
``D(E) = theta_u(t0) - theta_s(t0)`` is a multiple of ``pi``. ``D`` decreases
with ``E``, lies in ``(0, pi)`` below the ground state and equals ``-n pi`` at
the ``n``-th eigenvalue.

Zeros of ``x`` are the crossings of ``theta`` through ``pi/2 mod pi``, where
``theta' = -1/eps < 0``, so they are only ever crossed downward in forward time
and the winding follows from the endpoint angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq

from .action import action_J, invert_J
from .parallel import thread_map
from .potential import PotentialModel
from .spectrum import EigenRecord, Spectrum
from .turning import decay_point, midpoint_t0, turning_point, turning_points

__all__ = [
    "PruferTrace",
    "EvansError",
    "EvansDomainError",
    "StepBudgetError",
    "prufer_shoot",
    "evans_mismatch",
    "evans_delta",
    "evans_spectrum",
    "hyperbolic_offset",
    "EPS_MIN",
    "MAX_STEPS",
    "RTOL",
    "ATOL",
]

EPS_MIN = 1e-3
MAX_STEPS = 10_000_000
RTOL = 1e-11
ATOL = 1e-11
# start where (1/eps) int sqrt(V - E) from the turning point reaches this value
START_DECAY = 20.0
# root tolerance on E for eigenvalues
E_TOL = 1e-12
_REFINE_CAP = 12


class EvansError(RuntimeError):
    pass


class EvansDomainError(ValueError):
    """Parameters outside the range the shooting method is built for."""


class StepBudgetError(EvansError):
    def __init__(self, steps: int):
        super().__init__(f"Prufer integration exceeded the step budget of {steps} steps; increase eps")
        self.steps = steps


@dataclass(frozen=True)
class PruferTrace:
    side: str
    energy: float
    theta: float
    theta_start: float
    winding: int
    t_start: float
    t_end: float
    steps: int
    error_estimate: float
    t: np.ndarray | None = field(default=None, repr=False, compare=False)
    thetas: np.ndarray | None = field(default=None, repr=False, compare=False)


def hyperbolic_offset(eps: float) -> float:
    """``V - E`` at the shooting start: ``max(0.5, 2 eps^(2/3))``."""
    return max(0.5, 2.0 * eps ** (2.0 / 3.0))


def _check(eps: float, E: float) -> None:
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    if not E > 0:
        raise ValueError(f"E must be positive, got {E!r}")


def _start_point(p: PotentialModel, eps: float, E: float, side: int) -> float:
    t_hyp = turning_point(p, E + hyperbolic_offset(eps), side)
    t_dec = decay_point(p, eps, E, side, START_DECAY)
    return side * max(side * t_hyp, side * t_dec)


def _winding(theta_hi: float, theta_lo: float) -> int:
    # crossings of pi/2 + m pi strictly between theta_lo and theta_hi
    half = 0.5 * math.pi
    return max(0, math.floor((theta_hi - half) / math.pi) - math.floor((theta_lo - half) / math.pi))


def _line_angle(dx: float, dy: float) -> float:
    # angle of the line through (dx, dy) in (-pi/2, pi/2]; flipping the vector
    # first keeps sign changes of the direction bit-exact
    if dx < 0 or (dx == 0 and dy < 0):
        dx, dy = -dx, -dy
    return math.atan2(dy, dx)


def prufer_shoot(p: PotentialModel, eps: float, E: float, side: str, t_end: float | None = None,
                 t_start: float | None = None, direction: tuple[float, float] | None = None,
                 record: bool = False, max_steps: int = MAX_STEPS) -> PruferTrace:
    """Integrate the Prufer angle of the ``u`` (from the left) or ``s``
    (from the right, backward) line bundle to ``t_end`` (default ``t0(E)``).

    ``direction`` overrides the frozen eigendirection ``(x, y)``; only the
    line it spans matters. ``record`` keeps the accepted ``(t, theta)`` steps.
    """
    _check(eps, E)
    if side not in ("u", "s"):
        raise ValueError("side must be 'u' or 's'")
    sgn = -1 if side == "u" else +1
    if t_end is None:
        t_end = midpoint_t0(p, E)
    if t_start is None:
        t_start = _start_point(p, eps, E, sgn)
    gap = float(p.V(t_start)) - E
    if not gap > 0:
        raise EvansDomainError(f"V(t_start) - E = {gap:.3g} <= 0 at t_start={t_start!r}; enlarge the domain")
    if sgn * (t_start - t_end) <= 0:
        raise EvansDomainError("start point must lie beyond the matching point")
    if direction is None:
        theta0 = -sgn * math.atan(math.sqrt(gap))
    else:
        dx, dy = map(float, direction)
        if dx == 0.0 and dy == 0.0:
            raise ValueError("direction must be nonzero")
        theta0 = _line_angle(dx, dy)

    V = p.V
    inv = 1.0 / eps

    def rhs(t, y):
        c = math.cos(y[0])
        s = math.sin(y[0])
        return np.array([((float(V(t)) - E) * c * c - s * s) * inv])

    solver = DOP853(rhs, t_start, np.array([theta0]), t_end, rtol=RTOL, atol=ATOL,
                    first_step=min(abs(t_end - t_start), eps) * 1e-2)
    ts, ths = ([t_start], [theta0]) if record else (None, None)
    steps = 0
    err = 0.0
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise EvansError(f"Prufer integration failed: {msg}")
        steps += 1
        if steps > max_steps:
            raise StepBudgetError(max_steps)
        if record:
            ts.append(solver.t)
            ths.append(float(solver.y[0]))
    theta = float(solver.y[0])
    # DOP853 controls the local error at rtol/atol per step
    err = steps * max(ATOL, RTOL * abs(theta))
    if side == "u":
        winding = _winding(theta0, theta)
    else:
        winding = _winding(theta, theta0)
    return PruferTrace(side, E, theta, theta0, winding, t_start, float(t_end), steps, err,
                       np.array(ts) if record else None, np.array(ths) if record else None)


def evans_mismatch(p: PotentialModel, eps: float, E: float,
                   direction: tuple[float, float] | None = None) -> float:
    """Unwrapped angle difference ``D(E) = theta_u(t0) - theta_s(t0)``."""
    _check(eps, E)
    t0 = midpoint_t0(p, E)
    u = prufer_shoot(p, eps, E, "u", t0, direction=direction)
    s = prufer_shoot(p, eps, E, "s", t0)
    return u.theta - s.theta


def evans_delta(p: PotentialModel, eps: float, E: float,
                direction: tuple[float, float] | None = None) -> float:
    """``sin(theta_u(t0) - theta_s(t0))``; zero exactly at eigenvalues."""
    return math.sin(evans_mismatch(p, eps, E, direction))


def evans_spectrum(p: PotentialModel, eps: float, E_range: tuple[float, float]) -> Spectrum:
    """Every eigenvalue in the open interval ``E_range``, indexed by winding.

    ``D`` is sampled on a grid uniform in the action (two points per
    ``eps``), cells holding more than one crossing of ``-n pi`` are refined,
    and each crossing is then located by Brent's method.
    """
    if not eps >= EPS_MIN:
        raise EvansDomainError(f"evans requires eps >= {EPS_MIN:g} (step budget), got {eps!r}")
    lo, hi = map(float, E_range)
    if not (0 < lo < hi):
        raise ValueError("E_range must satisfy 0 < lo < hi")
    meta = {"potential": p.descriptor, "eps": eps, "E_range": [lo, hi], "rtol": RTOL,
            "atol": ATOL, "e_tol": E_TOL}

    J_lo, J_hi = action_J(p, lo), action_J(p, hi)
    cells = max(2, int(math.ceil(2.0 * (J_hi - J_lo) / eps)))
    Es = [lo] + [invert_J(p, J_lo + (J_hi - J_lo) * k / cells) for k in range(1, cells)] + [hi]
    Es = sorted(set(Es))
    Ds = thread_map(lambda E: evans_mismatch(p, eps, E), Es)

    def D_of(E: float) -> float:
        return evans_mismatch(p, eps, E)

    n_first = math.floor(-Ds[0] / math.pi) + 1
    n_last = math.ceil(-Ds[-1] / math.pi) - 1
    recs = []
    for n in range(max(n_first, 0), n_last + 1):
        level = -n * math.pi
        # the last grid point still above the level
        i = max(k for k in range(len(Es)) if Ds[k] > level)
        a, b, Da, Db = Es[i], Es[i + 1], Ds[i], Ds[i + 1]
        refine = 0
        while Da - Db > math.pi and refine < _REFINE_CAP:
            m = 0.5 * (a + b)
            Dm = D_of(m)
            if Dm > level:
                a, Da = m, Dm
            else:
                b, Db = m, Dm
            refine += 1
        if not Da > level >= Db:
            raise EvansError(f"could not bracket eigenvalue n={n} (scan grid too coarse)")
        if Db == level:
            E = b
        else:
            E = brentq(lambda x: D_of(x) - level, a, b, xtol=E_TOL, rtol=8.9e-16)
        recs.append(EigenRecord(n, E, "evans", abs(math.sin(D_of(E))), {"refinements": refine}))
    return Spectrum("evans", tuple(recs), meta)

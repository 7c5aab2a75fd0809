"""Turning points ``V(t) = E`` and the equal-action midpoint between them."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad
from scipy.optimize import brentq

from .potential import PotentialModel

__all__ = [
    "TurningData",
    "BracketError",
    "turning_points",
    "turning_point",
    "midpoint_t0",
    "turning_data",
    "decay_point",
    "BRACKET_START",
    "BRACKET_RATIO",
    "BRACKET_CAP",
]

BRACKET_START = 1e-4
BRACKET_RATIO = 2.0
BRACKET_CAP = 2.0**60


class BracketError(RuntimeError):
    pass


@dataclass(frozen=True)
class TurningData:
    energy: float
    t_minus: float
    t_plus: float
    t_zero: float
    action: float = float("nan")


def _check_energy(E: float) -> None:
    if not E > 0:
        raise ValueError(f"energy must be positive, got {E!r}")


def turning_point(p: PotentialModel, E: float, side: int) -> float:
    """Root of ``V(t) = E`` with ``sign(t) = side``.

    Geometric bracket expansion from ``side * 1e-4`` then Brent's method,
    polished by Newton steps on ``V - E``.
    """
    _check_energy(E)
    lo, hi = 0.0, BRACKET_START
    while p.V(side * hi) < E:
        lo, hi = hi, hi * BRACKET_RATIO
        if hi > BRACKET_CAP:
            raise BracketError(f"no turning point for E={E!r} within |t| <= {BRACKET_CAP:g}")
    r = brentq(lambda s: float(p.V(side * s)) - E, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
    t = side * r
    for _ in range(2):
        slope = float(p.dV(t))
        if slope == 0.0:
            break
        step = (float(p.V(t)) - E) / slope
        if abs(step) > 1e-8 * (1.0 + abs(t)):
            break
        t -= step
    return t


def turning_points(p: PotentialModel, E: float) -> tuple[float, float]:
    """``(t_minus, t_plus)`` with ``V(t_minus) = V(t_plus) = E``."""
    return turning_point(p, E, -1), turning_point(p, E, +1)


def midpoint_t0(p: PotentialModel, E: float, turning: tuple[float, float] | None = None) -> float:
    """Point splitting the allowed-region action into equal halves.

    ``F(t) = int_{t-}^t sqrt(E-V) - int_t^{t+} sqrt(E-V)`` is strictly
    increasing (``F' = 2 sqrt(E-V)``) and changes sign on ``(t-, t+)``.
    """
    from .action import allowed_integral, sqrt_kernel

    tm, tp = turning if turning is not None else turning_points(p, E)
    if p.even:
        return 0.0

    def F(t: float) -> float:
        left = allowed_integral(p, E, sqrt_kernel, tm, t, turning=(tm, tp))
        right = allowed_integral(p, E, sqrt_kernel, t, tp, turning=(tm, tp))
        return left - right

    span = tp - tm
    return brentq(F, tm + 1e-12 * span, tp - 1e-12 * span, xtol=1e-14 * max(1.0, span), rtol=8.9e-16)


def turning_data(p: PotentialModel, E: float, with_action: bool = True) -> TurningData:
    from .action import action_J

    tm, tp = turning_points(p, E)
    t0 = midpoint_t0(p, E, (tm, tp))
    J = action_J(p, E, turning=(tm, tp)) if with_action else math.nan
    return TurningData(E, tm, tp, t0, J)


def decay_point(p: PotentialModel, eps: float, E: float, side: int, exponent: float,
                t_turn: float | None = None) -> float:
    """Point beyond the turning point on ``side`` where ``(1/eps) int sqrt(V - E)``,
    measured outward from the turning point, reaches ``exponent``.
    """
    _check_energy(E)
    if t_turn is None:
        t_turn = turning_point(p, E, side)

    def tail(t: float) -> float:
        return math.sqrt(max(float(p.V(t)) - E, 0.0))

    def excess(dist: float) -> float:
        val, _ = quad(tail, t_turn, t_turn + side * dist, limit=200, epsabs=1e-12, epsrel=1e-10)
        return side * val / eps - exponent

    lo, hi = 0.0, max(1e-3, 0.05 * abs(t_turn), eps)
    while excess(hi) < 0:
        lo, hi = hi, 2.0 * hi
        if hi > BRACKET_CAP:
            raise BracketError(f"decay exponent {exponent} not reached within |t| <= {BRACKET_CAP:g}")
    return t_turn + side * brentq(excess, lo, hi, xtol=1e-10 * (1.0 + hi))

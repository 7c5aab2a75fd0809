"""The action ``J(E) = (1/pi) int_{t-}^{t+} sqrt(E - V) dt``, its derivative and inverse.

Integrals over the allowed region are split at the well bottom ``t = 0``.
The left half is mapped by ``t = t- + s^2`` and the right half by
``t = t+ - s^2``; since the turning points are simple roots,
``sqrt(E - V)`` becomes ``s * sqrt(q(s))`` with ``q`` smooth and positive,
so the transformed integrands have no endpoint singularity.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .potential import PotentialModel
from .quadrature import gauss_kronrod
from .turning import BracketError, turning_points

__all__ = [
    "action_J",
    "action_derivative",
    "invert_J",
    "allowed_integral",
    "sqrt_kernel",
    "half_inv_sqrt_kernel",
    "force_kernel",
    "force_integral",
    "InversionError",
]

# kernel(t, sqrt_u) -> integrand, where sqrt_u = sqrt(E - V(t))
Kernel = Callable[[np.ndarray, np.ndarray], np.ndarray]

ABS_TOL = 1e-13
REL_TOL = 1e-14
MAX_LEVELS = 20
# below this multiple of |t*| in s^2, E - V is taken from its Taylor expansion
_TAYLOR_FRACTION = 1e-6


class InversionError(RuntimeError):
    pass


def sqrt_kernel(t: np.ndarray, r: np.ndarray) -> np.ndarray:
    return r


def half_inv_sqrt_kernel(t: np.ndarray, r: np.ndarray) -> np.ndarray:
    return 0.5 / r


def force_kernel(p: PotentialModel) -> Kernel:
    def kernel(t, r):
        return np.asarray(p.dV(t)) ** 2 / r
    return kernel


def _substituted(p: PotentialModel, E: float, kernel: Kernel, t_star: float, sigma: float):
    """Integrand in ``s`` for ``t = t_star + sigma * s^2``."""
    v1 = float(p.dV(t_star))
    v2 = float(p.d2V(t_star))
    cut = _TAYLOR_FRACTION * max(abs(t_star), 1e-300)

    def g(s: np.ndarray) -> np.ndarray:
        s2 = s * s
        t = t_star + sigma * s2
        with np.errstate(divide="ignore", invalid="ignore"):
            q = (E - np.asarray(p.V(t), dtype=float)) / s2
        q = np.where(s2 < cut, -sigma * v1 - 0.5 * v2 * s2, q)
        q = np.maximum(q, 0.0)
        return 2.0 * s * kernel(t, s * np.sqrt(q))
    return g


def allowed_integral(p: PotentialModel, E: float, kernel: Kernel, a: float | None = None,
                     b: float | None = None, turning: tuple[float, float] | None = None,
                     abs_tol: float = ABS_TOL, rel_tol: float = REL_TOL) -> float:
    """``int_a^b kernel(t, sqrt(E - V(t))) dt`` for ``t- <= a <= b <= t+``.

    ``a`` and ``b`` default to the turning points.
    """
    tm, tp = turning if turning is not None else turning_points(p, E)
    a = tm if a is None else a
    b = tp if b is None else b
    if b < a:
        return -allowed_integral(p, E, kernel, b, a, (tm, tp), abs_tol, rel_tol)
    slack = 1e-12 * (tp - tm)
    if a < tm - slack or b > tp + slack:
        raise ValueError(f"[{a}, {b}] leaves the allowed region [{tm}, {tp}]")
    a, b = max(a, tm), min(b, tp)
    total = 0.0
    if a < 0.0:
        hi = min(b, 0.0)
        g = _substituted(p, E, kernel, tm, +1.0)
        total += gauss_kronrod(g, math.sqrt(a - tm), math.sqrt(hi - tm),
                               abs_tol, rel_tol, MAX_LEVELS).value
    if b > 0.0:
        lo = max(a, 0.0)
        g = _substituted(p, E, kernel, tp, -1.0)
        total += gauss_kronrod(g, math.sqrt(tp - b), math.sqrt(tp - lo),
                               abs_tol, rel_tol, MAX_LEVELS).value
    return total


def action_J(p: PotentialModel, E: float, turning: tuple[float, float] | None = None) -> float:
    """``(1/pi) int sqrt(E - V)`` between the turning points."""
    return allowed_integral(p, E, sqrt_kernel, turning=turning) / math.pi


def action_derivative(p: PotentialModel, E: float, turning: tuple[float, float] | None = None) -> float:
    """``J'(E) = (1/pi) int 1 / (2 sqrt(E - V))``; always positive."""
    return allowed_integral(p, E, half_inv_sqrt_kernel, turning=turning) / math.pi


def force_integral(p: PotentialModel, E: float, turning: tuple[float, float] | None = None) -> float:
    """``int V'(t)^2 / sqrt(E - V) dt`` over the allowed region."""
    return allowed_integral(p, E, force_kernel(p), turning=turning)


def invert_J(p: PotentialModel, target: float, tol: float = 1e-12, max_iter: int = 200) -> float:
    """Energy ``E`` with ``|J(E) - target| <= tol``.

    Safeguarded Newton iteration from ``E = 2 * target`` (exact for the
    harmonic well) inside a bracket that starts at ``[0, 2 * target]`` and
    doubles its upper end until ``J`` exceeds the target.
    """
    if not target > 0:
        raise ValueError(f"target action must be positive, got {target!r}")
    lo, hi = 0.0, 2.0 * target
    try:
        while action_J(p, hi) < target:
            lo, hi = hi, 2.0 * hi
            if hi > 2.0**60:
                raise InversionError(f"J never reaches {target!r} below E = 2^60")
    except BracketError as exc:
        raise InversionError(str(exc)) from exc
    E = min(2.0 * target, hi)
    if E <= lo:
        E = 0.5 * (lo + hi)
    for _ in range(max_iter):
        tpts = turning_points(p, E)
        residual = action_J(p, E, tpts) - target
        if abs(residual) <= tol:
            return E
        if residual > 0:
            hi = E
        else:
            lo = E
        step = residual / action_derivative(p, E, tpts)
        candidate = E - step
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        if candidate == E or hi - lo <= 4e-16 * hi:
            return E
        E = candidate
    raise InversionError(f"invert_J did not converge for target {target!r}")

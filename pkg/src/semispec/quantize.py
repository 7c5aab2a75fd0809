"""Asymptotic eigenvalues: Bohr-Sommerfeld, the Weber/Hermite low-lying
formula and the normalized intermediate-regime residual.

For ``V''(0) = c2 != 2`` the low-lying formulas use ``omega = sqrt(c2 / 2)``.
Dividing ``eps^2 x'' = (V - E) x`` by ``omega^2`` gives a problem with
``V/omega^2`` (curvature 2), ``eps/omega`` and ``E/omega^2``, so
``E_n = (2n+1) eps omega`` to leading order.
"""

from __future__ import annotations

import math

import numpy as np

from .action import action_J, invert_J
from .parallel import thread_map
from .potential import PotentialModel
from .specfun import HERMITE_MAX, hermite, hermite_norm_sq
from .spectrum import EigenRecord, Spectrum

__all__ = [
    "bohr_sommerfeld_spectrum",
    "low_lying_spectrum",
    "melnikov_first_order",
    "intermediate_residual",
    "MELNIKOV_NODES",
]

MELNIKOV_NODES = 200
_MELNIKOV_HALF_WIDTH = 12.0


def _check_eps(eps: float) -> None:
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")


def bohr_sommerfeld_spectrum(p: PotentialModel, eps: float, E_max: float) -> Spectrum:
    """Solutions of ``J(E_n) = (n + 1/2) eps`` with ``E_n <= E_max``."""
    _check_eps(eps)
    if not E_max > 0:
        raise ValueError(f"E_max must be positive, got {E_max!r}")
    J_max = action_J(p, E_max)
    count = int(math.floor(J_max / eps - 0.5)) + 1 if J_max >= 0.5 * eps else 0

    def solve(n: int) -> EigenRecord:
        target = (n + 0.5) * eps
        E = invert_J(p, target)
        return EigenRecord(n, E, "bohr-sommerfeld", abs(action_J(p, E) - target), {"action": target})

    recs = [r for r in thread_map(solve, range(count)) if r.energy <= E_max * (1 + 1e-15)]
    meta = {"potential": p.descriptor, "eps": eps, "E_max": E_max, "J_max": J_max}
    return Spectrum("bohr-sommerfeld", tuple(recs), meta)


def melnikov_first_order(p: PotentialModel, n: int) -> float:
    """First-order slope ``e'(0)`` of the Weber eigenvalue ``2n+1``.

    ``int exp(-t^2) H_n(t)^2 t^3 R2(0) dt / (sqrt(pi) 2^n n!)`` with
    ``R2(0) = V'''(0) / (6 omega^2)``, the value for the curvature-2 rescaled
    potential. The integrand is odd; symmetric Gauss-Legendre nodes on
    ``[-12, 12]`` are summed in mirrored pairs, so the result cancels to
    rounding level (zero whenever ``V'''(0) = 0``).
    """
    if not (isinstance(n, (int, np.integer)) and 0 <= n <= HERMITE_MAX):
        raise ValueError(f"n must be an integer in [0, {HERMITE_MAX}]")
    omega2 = p.curvature / 2.0
    r2 = float(p.d3V(0.0)) / (6.0 * omega2)
    x, w = np.polynomial.legendre.leggauss(MELNIKOV_NODES)
    half = MELNIKOV_NODES // 2
    xp, wp = _MELNIKOV_HALF_WIDTH * x[half:], _MELNIKOV_HALF_WIDTH * w[half:]

    def f(t):
        return np.exp(-t * t) * hermite(int(n), t) ** 2 * t**3 * r2

    total = float(np.sum(wp * (f(xp) + f(-xp))))
    return total / hermite_norm_sq(int(n))


def low_lying_spectrum(p: PotentialModel, eps: float, n_max: int) -> Spectrum:
    """``E_n = (2n+1) eps omega + eps^(3/2) omega e'(0)``, ``n = 0..n_max``.

    Asymptotic only, so ``residual`` is left unset.
    """
    _check_eps(eps)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    omega = p.frequency
    recs = []
    for n in range(n_max + 1):
        slope = melnikov_first_order(p, n)
        E = (2 * n + 1) * eps * omega + eps * slope * math.sqrt(eps) * omega
        recs.append(EigenRecord(n, E, "low-lying", math.nan, {"melnikov": slope}))
    meta = {"potential": p.descriptor, "eps": eps, "n_max": n_max, "frequency": omega}
    return Spectrum("low-lying", tuple(recs), meta)


def intermediate_residual(p: PotentialModel, eps: float, E: float, n: int) -> float:
    """``[J(E) - (n + 1/2) eps] / [eps^(3/2) (eps/E)^(1/6)]``."""
    _check_eps(eps)
    if not E > 0:
        raise ValueError(f"E must be positive, got {E!r}")
    return (action_J(p, E) - (n + 0.5) * eps) / (eps**1.5 * (eps / E) ** (1.0 / 6.0))

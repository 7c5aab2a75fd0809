"""WKB eigenfunctions with Airy patches, zero counting and the quasi-diagonal
coefficients ``R_1, R_2`` of the higher-order WKB expansion.

Away from the turning points the eigenfunction is assembled from

* ``(V - E)^(-1/4) exp(-(1/eps) |int sqrt(V - E)|)`` in the forbidden tails,
* ``(E - V)^(-1/4) cos((1/eps) int_{t-}^t sqrt(E - V) - pi/4)`` inside,

and near ``t_-`` (mirrored at ``t_+``) from the local Airy model on
``|t - t_-| <= w``, ``w = 4 (eps^2 / |V'(t_-)|)^(1/3)``. With
``patch="linear"`` this is ``Ai(-eps^(-2/3) (-V'(t_-))^(1/3) (t - t_-))``.
The default ``patch="langer"`` feeds Ai the exact local phase instead,
``z = -(3 S / 2)^(2/3)`` with ``S = (1/eps) int_{t_-}^t sqrt(E - V)`` (and
``+(3 S/2)^(2/3)`` on the forbidden side), times ``(Z / (V - E))^(1/4)``;
both agree to leading order at the turning point, but the linear form loses
phase across the patch when ``w`` is not small against ``|t_-|``. Each
piece gets one amplitude, fitted by least squares on five points around its
seam with the neighbour towards the interior.

When the two Airy patches would overlap (low indices) the five-region form
does not exist and the Weber/Hermite function
``exp(-omega t^2 / (2 eps)) H_n(sqrt(omega/eps) t)`` is returned instead.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .action import action_J, allowed_integral, force_integral, invert_J, sqrt_kernel
from .potential import PotentialModel
from .specfun import HERMITE_MAX, airy_ai, hermite
from .spectrum import EigenRecord, Spectrum
from .turning import decay_point, turning_points

__all__ = [
    "Eigenfunction",
    "QuasiCoefficients",
    "REGIONS",
    "SEAM_TOLERANCE",
    "wkb_phase",
    "build_eigenfunction",
    "count_zeros",
    "sign_changes",
    "eigenfunction_defect",
    "patch_half_width",
    "quasi_coefficients",
    "second_order_phase",
    "corrected_bs_spectrum",
]

REGIONS = ("forbidden-left", "airy-left", "allowed", "airy-right", "forbidden-right", "weber")
SEAM_TOLERANCE = 0.1
PATCH_SCALES = 4.0
# tails extend until (1/eps) int sqrt(V - E) from the turning point reaches this
TAIL_DECAY = 15.0
# the interior must be at least this many patch half-widths long, else Weber
MIN_INTERIOR = 0.5
_SEAM_POINTS = 5
# entries below this fraction of the sup norm are too small to carry a sign
ZERO_FLOOR = 1e-10
_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


@dataclass(frozen=True)
class Eigenfunction:
    grid: np.ndarray
    values: np.ndarray
    regions: np.ndarray
    energy: float
    eps: float
    n: int
    seam_mismatch: float
    seam_tolerance: float = SEAM_TOLERANCE
    boundaries: tuple[float, ...] = ()

    @property
    def seams_ok(self) -> bool:
        return self.seam_mismatch <= self.seam_tolerance

    @property
    def kind(self) -> str:
        return "weber" if len(self.regions) and self.regions[0] == "weber" else "wkb"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "region"])
        for t, x, r in zip(self.grid, self.values, self.regions):
            w.writerow([repr(float(t)), repr(float(x)), r])
        return buf.getvalue()


def patch_half_width(p: PotentialModel, eps: float, t_turn: float) -> float:
    """``4 (eps^2 / |V'(t_turn)|)^(1/3)``."""
    return PATCH_SCALES * (eps * eps / abs(float(p.dV(t_turn)))) ** (1.0 / 3.0)


def wkb_phase(p: PotentialModel, E: float, t_from: float, t_to: float) -> float:
    """``int_{t_from}^{t_to} sqrt(E - V) dt`` inside the allowed region."""
    if t_from == t_to:
        return 0.0
    return allowed_integral(p, E, sqrt_kernel, t_from, t_to)


def _segment_integrals(g: Callable[[np.ndarray], np.ndarray], knots: np.ndarray) -> np.ndarray:
    # 10-point Gauss-Legendre on each [knots[i], knots[i+1]]
    lo, hi = knots[:-1], knots[1:]
    half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    return half * (g(nodes) @ _GL_W)


def _cumulative(g: Callable[[np.ndarray], np.ndarray], t_ref: float, ts: np.ndarray) -> np.ndarray:
    """``int_{t_ref}^{t} g`` for every ``t`` in ``ts``; ``g`` must be smooth between them."""
    ts = np.asarray(ts, dtype=float)
    knots = np.unique(np.concatenate([ts, [t_ref]]))
    if len(knots) == 1:
        return np.zeros_like(ts)
    cum = np.concatenate([[0.0], np.cumsum(_segment_integrals(g, knots))])
    ref = cum[np.searchsorted(knots, t_ref)]
    return cum[np.searchsorted(knots, ts)] - ref


def _lsq_scale(model: np.ndarray, target: np.ndarray) -> float:
    den = float(model @ model)
    return float(model @ target) / den if den > 0 else 0.0


def _index_from_energy(p: PotentialModel, eps: float, E: float) -> int:
    return max(0, int(round(action_J(p, E) / eps - 0.5)))


def _weber(p: PotentialModel, eps: float, E: float, n: int, grid_points: int) -> Eigenfunction:
    if n > HERMITE_MAX:
        raise ValueError(f"Weber form needs n <= {HERMITE_MAX}")
    omega = p.frequency
    # Hermite-Gauss width: bounded where omega t^2 <= (2n+1) eps
    reach = math.sqrt((2 * n + 1) * eps / omega)
    L = reach + math.sqrt(2.0 * TAIL_DECAY * eps / omega)
    t = np.linspace(-L, L, grid_points)
    x = np.exp(-omega * t * t / (2.0 * eps)) * hermite(n, math.sqrt(omega / eps) * t)
    x = x / np.max(np.abs(x))
    x = x * np.sign(x[np.argmax(np.abs(x))])
    regions = np.full(grid_points, "weber", dtype=object)
    return Eigenfunction(t, x, regions, E, eps, n, 0.0, SEAM_TOLERANCE, (-L, L))


def _langer_patch(p: PotentialModel, eps: float, E: float, t_turn: float, side: int,
                  t: np.ndarray) -> np.ndarray:
    """``(Z/(V - E))^(1/4) Ai(eps^(-2/3) Z)`` with ``Z = +-(3/2 |int_{t_turn}^t sqrt|V - E||)^(2/3)``,
    positive on the forbidden side; normalized to ``Ai`` of the linear model
    at leading order.
    """
    t = np.asarray(t, dtype=float)
    d = t - t_turn
    outward = side * d > 0
    sig = np.sqrt(np.abs(d))

    def g_out(u):
        return 2.0 * u * np.sqrt(np.maximum(np.asarray(p.V(t_turn + side * u * u), dtype=float) - E, 0.0))

    def g_in(u):
        return 2.0 * u * np.sqrt(np.maximum(E - np.asarray(p.V(t_turn - side * u * u), dtype=float), 0.0))

    S = np.where(outward, _cumulative(g_out, 0.0, sig), _cumulative(g_in, 0.0, sig))
    Z = np.where(outward, 1.0, -1.0) * (1.5 * S) ** (2.0 / 3.0)
    slope = abs(float(p.dV(t_turn)))
    gap = np.asarray(p.V(t), dtype=float) - E
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(np.abs(d) > 1e-12 * (1.0 + abs(t_turn)), Z / gap, slope ** (-1.0 / 3.0))
    amp = (ratio * slope ** (1.0 / 3.0)) ** 0.25
    return amp * airy_ai(eps ** (-2.0 / 3.0) * Z)


def build_eigenfunction(p: PotentialModel, eps: float, E: float, grid_points: int = 1000,
                        n: int | None = None, patch: str = "langer") -> Eigenfunction:
    """Approximate eigenfunction at (or near) the eigenvalue ``E``.

    ``n`` defaults to the Bohr-Sommerfeld index ``round(J(E)/eps - 1/2)`` and
    is only used by the Weber form. A seam mismatch above ``SEAM_TOLERANCE``
    (relative to the sup norm) marks ``E`` as too far from an eigenvalue; the
    function is still returned, with ``seams_ok`` false.
    """
    if not (eps > 0 and E > 0):
        raise ValueError("eps and E must be positive")
    if grid_points < 200:
        raise ValueError("grid_points must be >= 200")
    if patch not in ("langer", "linear"):
        raise ValueError("patch must be 'langer' or 'linear'")
    if n is None:
        n = _index_from_energy(p, eps, E)
    tm, tp = turning_points(p, E)
    wl, wr = patch_half_width(p, eps, tm), patch_half_width(p, eps, tp)
    if (tp - wr) - (tm + wl) < MIN_INTERIOR * max(wl, wr):
        return _weber(p, eps, E, n, grid_points)

    kl = abs(float(p.dV(tm))) ** (1.0 / 3.0) * eps ** (-2.0 / 3.0)
    kr = abs(float(p.dV(tp))) ** (1.0 / 3.0) * eps ** (-2.0 / 3.0)
    a = min(decay_point(p, eps, E, -1, TAIL_DECAY, tm), tm - 2.0 * wl)
    b = max(decay_point(p, eps, E, +1, TAIL_DECAY, tp), tp + 2.0 * wr)
    grid = np.linspace(a, b, grid_points)

    s_fl, s_al, s_ar, s_fr = tm - wl, tm + wl, tp - wr, tp + wr
    phase_anchor = wkb_phase(p, E, tm, s_al)

    def inside(t):
        return np.sqrt(np.maximum(E - np.asarray(p.V(t), dtype=float), 0.0))

    def outside(t):
        return np.sqrt(np.maximum(np.asarray(p.V(t), dtype=float) - E, 0.0))

    def f_allowed(t):
        t = np.asarray(t, dtype=float)
        phase = phase_anchor + _cumulative(inside, s_al, t)
        amp = (E - np.asarray(p.V(t), dtype=float)) ** -0.25
        return amp * np.cos(phase / eps - 0.25 * math.pi)

    if patch == "linear":
        def f_airy_left(t):
            return airy_ai(-kl * (np.asarray(t, dtype=float) - tm))

        def f_airy_right(t):
            return airy_ai(kr * (np.asarray(t, dtype=float) - tp))
    else:
        def f_airy_left(t):
            return _langer_patch(p, eps, E, tm, -1, t)

        def f_airy_right(t):
            return _langer_patch(p, eps, E, tp, +1, t)

    def f_forb_left(t):
        t = np.asarray(t, dtype=float)
        amp = (np.asarray(p.V(t), dtype=float) - E) ** -0.25
        return amp * np.exp(_cumulative(outside, s_fl, t) / eps)

    def f_forb_right(t):
        t = np.asarray(t, dtype=float)
        amp = (np.asarray(p.V(t), dtype=float) - E) ** -0.25
        return amp * np.exp(-_cumulative(outside, s_fr, t) / eps)

    def seam_points(s, w):
        return s + 0.1 * w * np.arange(-(_SEAM_POINTS // 2), _SEAM_POINTS // 2 + 1)

    pts_al, pts_ar = seam_points(s_al, wl), seam_points(s_ar, wr)
    pts_fl, pts_fr = seam_points(s_fl, wl), seam_points(s_fr, wr)
    A_al = _lsq_scale(f_airy_left(pts_al), f_allowed(pts_al))
    A_ar = _lsq_scale(f_airy_right(pts_ar), f_allowed(pts_ar))
    A_fl = _lsq_scale(f_forb_left(pts_fl), A_al * f_airy_left(pts_fl))
    A_fr = _lsq_scale(f_forb_right(pts_fr), A_ar * f_airy_right(pts_fr))

    regions = np.empty(grid_points, dtype=object)
    x = np.empty(grid_points)
    masks = [
        ("forbidden-left", grid < s_fl, lambda t: A_fl * f_forb_left(t)),
        ("airy-left", (grid >= s_fl) & (grid <= s_al), lambda t: A_al * f_airy_left(t)),
        ("allowed", (grid > s_al) & (grid < s_ar), f_allowed),
        ("airy-right", (grid >= s_ar) & (grid <= s_fr), lambda t: A_ar * f_airy_right(t)),
        ("forbidden-right", grid > s_fr, lambda t: A_fr * f_forb_right(t)),
    ]
    for tag, mask, fn in masks:
        regions[mask] = tag
        if np.any(mask):
            x[mask] = fn(grid[mask])

    sup = float(np.max(np.abs(x)))
    mismatch = max(
        float(np.max(np.abs(A_al * f_airy_left(pts_al) - f_allowed(pts_al)))),
        float(np.max(np.abs(A_ar * f_airy_right(pts_ar) - f_allowed(pts_ar)))),
        float(np.max(np.abs(A_fl * f_forb_left(pts_fl) - A_al * f_airy_left(pts_fl)))),
        float(np.max(np.abs(A_fr * f_forb_right(pts_fr) - A_ar * f_airy_right(pts_fr)))),
    ) / sup
    x = x / sup
    x = x * np.sign(x[np.argmax(np.abs(x))])
    return Eigenfunction(grid, x, regions, E, eps, n, mismatch, SEAM_TOLERANCE,
                         (s_fl, s_al, s_ar, s_fr))


def sign_changes(values: np.ndarray, rel_floor: float = ZERO_FLOOR) -> int:
    """Strict sign changes of ``values`` among entries with
    ``|x| > rel_floor * max|x|``; rounding-level tails carry no sign.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return 0
    v = v[np.abs(v) > rel_floor * np.max(np.abs(v))]
    s = np.sign(v)
    return int(np.count_nonzero(s[1:] != s[:-1]))


def count_zeros(f: Eigenfunction) -> int:
    """Strict sign changes of ``f.values`` outside the one-signed forbidden
    tails (see :func:`sign_changes`).
    """
    keep = (f.regions != "forbidden-left") & (f.regions != "forbidden-right")
    return sign_changes(np.asarray(f.values)[keep])


def eigenfunction_defect(p: PotentialModel, f: Eigenfunction, seam_clearance: int = 3) -> float:
    """``max |eps^2 x'' - (V - E) x| / max |x|`` over the interior grid by
    central differences, skipping ``seam_clearance`` points around each seam.
    """
    t, x = np.asarray(f.grid), np.asarray(f.values)
    h = t[1] - t[0]
    d2 = (x[2:] - 2.0 * x[1:-1] + x[:-2]) / (h * h)
    res = f.eps**2 * d2 - (np.asarray(p.V(t[1:-1]), dtype=float) - f.energy) * x[1:-1]
    keep = np.ones(len(res), dtype=bool)
    tags = f.regions[1:-1]
    keep &= (tags == "allowed") | (tags == "weber")
    for s in f.boundaries:
        k = int(np.searchsorted(t, s)) - 1
        keep[max(k - seam_clearance, 0):k + seam_clearance + 1] = False
    if not np.any(keep):
        return math.nan
    return float(np.max(np.abs(res[keep])) / np.max(np.abs(x)))


# ------------------------------------------------------- quasi-diagonalization


@dataclass(frozen=True)
class QuasiCoefficients:
    """``lambda = i sqrt(E - V)``, ``R_1..R_N`` at one point and ``nu_N(eps)``."""

    t: float
    order: int
    lam: complex
    dlam: complex
    R: tuple[complex, ...]

    def nu(self, eps: float) -> complex:
        """``lambda - eps lambda'/(2 lambda) + eps^2 lambda R_2`` (last term for N = 2)."""
        value = self.lam - 0.5 * eps * self.dlam / self.lam
        if self.order >= 2:
            value += eps * eps * self.lam * self.R[1]
        return value


def quasi_coefficients(p: PotentialModel, E: float, t: float, order: int = 2,
                       eps: float | None = None) -> QuasiCoefficients:
    """Coefficients of the quasi-solution ``f = 1 + eps R_1 + eps^2 R_2`` of

        eps f' = lambda (1 - f^2) + eps lambda'/lambda f,

    namely ``R_1 = lambda'/(2 lambda^2)`` and
    ``R_2 = -R_1^2/2 - R_1'/(2 lambda) + lambda' R_1/(2 lambda^2)``.
    With ``eps`` given, points within a patch half-width of a turning point
    are refused, since ``R_n`` grows like ``(E - V)^(-3n/2)`` there.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    t = float(t)
    mu = E - float(p.V(t))
    if not mu > 0:
        raise ValueError(f"t={t!r} is not inside the allowed region (E - V = {mu:.3g})")
    if eps is not None:
        tm, tp = turning_points(p, E)
        if min(t - tm - patch_half_width(p, eps, tm), tp - patch_half_width(p, eps, tp) - t) <= 0:
            raise ValueError(f"t={t!r} lies within a patch half-width of a turning point")
    d1, d2 = -float(p.dV(t)), -float(p.d2V(t))
    r = math.sqrt(mu)
    lam = 1j * r
    dlam = 1j * d1 / (2.0 * r)
    d2lam = 1j * (d2 / (2.0 * r) - d1 * d1 / (4.0 * r**3))
    R1 = dlam / (2.0 * lam**2)
    R = [R1]
    if order == 2:
        dR1 = d2lam / (2.0 * lam**2) - dlam**2 / lam**3
        R.append(-0.5 * R1 * R1 - dR1 / (2.0 * lam) + dlam * R1 / (2.0 * lam**2))
    return QuasiCoefficients(t, order, lam, dlam, tuple(R))


def second_order_phase(p: PotentialModel, E: float, rel_step: float = 1e-2) -> float:
    """``-(1/24) K''(E)`` with ``K(E) = int V'^2 / sqrt(E - V)``.

    This is the regularized value of ``int Im(lambda R_2)`` across the allowed
    region, the eps^2 phase correction of the WKB quantization condition
    (the first-order term ``-lambda'/(2 lambda)`` is real and shifts no phase).
    ``K''`` uses a five-point central difference.
    """
    h = rel_step * E
    if E - 2 * h <= 0:
        raise ValueError("energy too small for the difference stencil")
    K = [force_integral(p, E + k * h) for k in (-2, -1, 0, 1, 2)]
    d2K = (-K[0] + 16 * K[1] - 30 * K[2] + 16 * K[3] - K[4]) / (12.0 * h * h)
    return -d2K / 24.0


def corrected_bs_spectrum(p: PotentialModel, eps: float, E_max: float) -> Spectrum:
    """Bohr-Sommerfeld with the eps^2 phase term:
    ``J(E) + (eps^2/pi) second_order_phase(E) = (n + 1/2) eps``.

    Each level starts from the plain Bohr-Sommerfeld energy and is refined by
    secant steps. Records carry ``diagnostics['order'] = 2``.
    """
    from scipy.optimize import brentq

    if not (eps > 0 and E_max > 0):
        raise ValueError("eps and E_max must be positive")
    J_max = action_J(p, E_max)
    count = int(math.floor(J_max / eps - 0.5)) + 1 if J_max >= 0.5 * eps else 0
    recs = []
    for n in range(count):
        target = (n + 0.5) * eps
        E0 = invert_J(p, target)

        def g(E):
            return action_J(p, E) + eps * eps / math.pi * second_order_phase(p, E) - target

        lo, hi = 0.8 * E0, 1.2 * E0
        if g(lo) * g(hi) > 0:
            continue
        E = brentq(g, lo, hi, xtol=1e-13, rtol=8.9e-16)
        if E <= E_max:
            recs.append(EigenRecord(n, E, "bohr-sommerfeld", abs(g(E)), {"order": 2, "plain": E0}))
    return Spectrum("bohr-sommerfeld", tuple(recs), {"potential": p.descriptor, "eps": eps,
                                                      "E_max": E_max, "order": 2})

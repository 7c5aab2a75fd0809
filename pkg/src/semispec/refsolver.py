"""Finite-difference reference eigenvalues.

The operator ``-eps^2 d^2/dt^2 + V`` is discretized with second-order central
differences and Dirichlet ends on a truncated interval. Eigenvalues of the
resulting symmetric tridiagonal matrix are found by Sturm-sequence bisection
and extrapolated over three nested grids ``N``, ``2N+1`` and ``4N+3`` (each
halving ``h``), which removes the ``h^2`` and ``h^4`` error terms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numba
import numpy as np
from scipy.linalg import solve_banded

from .parallel import thread_map
from .potential import PotentialModel
from .spectrum import EigenRecord, Spectrum
from .turning import decay_point, turning_point

__all__ = [
    "Tridiagonal",
    "truncation_domain",
    "decay_domain",
    "discretize",
    "sturm_count",
    "tridiagonal_eigenvalues",
    "reference_spectrum",
    "reference_eigenvector",
    "default_grid_size",
    "ResolutionWarning",
    "DECAY_EXPONENT",
]

# eigenfunctions below E_max decay by exp(-DECAY_EXPONENT) before the boundary
DECAY_EXPONENT = 36.0
# base-grid spacing: h <= H_FACTOR * eps / sqrt(E_max), and never above eps / 8
H_FACTOR = 0.05
BISECT_TOL = 1e-13


class ResolutionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Tridiagonal:
    d: np.ndarray
    e: np.ndarray
    h: float
    a: float
    b: float

    def __post_init__(self):
        if len(self.d) < 3 or len(self.e) != len(self.d) - 1:
            raise ValueError("tridiagonal needs N >= 3 diagonal and N-1 off-diagonal entries")

    @property
    def N(self) -> int:
        return len(self.d)

    @property
    def grid(self) -> np.ndarray:
        return _nodes(self.a, self.b, self.N)

    def gershgorin(self) -> tuple[float, float]:
        r = np.zeros(self.N)
        r[:-1] += np.abs(self.e)
        r[1:] += np.abs(self.e)
        return float(np.min(self.d - r)), float(np.max(self.d + r))


def _nodes(a: float, b: float, N: int) -> np.ndarray:
    # weighted form is exactly mirror-symmetric when a = -b
    k = np.arange(1, N + 1)
    return (a * (N + 1 - k) + b * k) / (N + 1)


# ------------------------------------------------------------------ kernels


@numba.njit(cache=True, nogil=True)
def _count(d, e2, lam, tiny):
    q = d[0] - lam
    if abs(q) < tiny:
        q = tiny if q >= 0.0 else -tiny
    count = 1 if q < 0.0 else 0
    for i in range(1, d.shape[0]):
        q = (d[i] - lam) - e2[i - 1] / q
        if abs(q) < tiny:
            q = tiny if q >= 0.0 else -tiny
        if q < 0.0:
            count += 1
    return count


@numba.njit(cache=True, nogil=True)
def _bisect(d, e2, ks, lo0, hi0, tol, tiny):
    out = np.empty(ks.shape[0])
    for j in range(ks.shape[0]):
        k = ks[j]
        lo, hi = lo0, hi0
        while hi - lo > max(tol, 4.4e-16 * max(abs(lo), abs(hi))):
            mid = 0.5 * (lo + hi)
            if _count(d, e2, mid, tiny) > k:
                hi = mid
            else:
                lo = mid
        out[j] = 0.5 * (lo + hi)
    return out


def _tiny(e: np.ndarray) -> float:
    return 1e-280 * max(1.0, float(np.max(e * e)) if len(e) else 1.0)


def sturm_count(T: Tridiagonal, lam: float) -> int:
    """Number of eigenvalues of ``T`` strictly below ``lam``."""
    e = np.asarray(T.e, dtype=float)
    return int(_count(np.asarray(T.d, dtype=float), e * e, float(lam), _tiny(e)))


def tridiagonal_eigenvalues(T: Tridiagonal, ks, tol: float = BISECT_TOL) -> np.ndarray:
    """Eigenvalues with 0-based indices ``ks`` (ascending order) by bisection."""
    ks = np.asarray(ks, dtype=np.int64)
    if ks.size and (ks.min() < 0 or ks.max() >= T.N):
        raise ValueError("eigenvalue index out of range")
    lo, hi = T.gershgorin()
    e = np.asarray(T.e, dtype=float)
    return _bisect(np.asarray(T.d, dtype=float), e * e, ks, lo, hi, tol, _tiny(e))


# ------------------------------------------------------------ discretization


def truncation_domain(p: PotentialModel, E_max: float, margin: float) -> tuple[float, float]:
    """``[a, b]`` with ``V(a) = V(b) = E_max + margin``."""
    if not E_max > 0:
        raise ValueError("E_max must be positive")
    if not margin > 0:
        raise ValueError("margin must be positive")
    level = E_max + margin
    return turning_point(p, level, -1), turning_point(p, level, +1)


def decay_domain(p: PotentialModel, eps: float, E_max: float,
                 exponent: float = DECAY_EXPONENT) -> tuple[float, float]:
    """Interval beyond whose ends every eigenfunction below ``E_max`` has
    decayed by ``exp(-exponent)``, measured by ``(1/eps) int sqrt(V - E_max)``
    from the turning points.
    """
    if not (eps > 0 and E_max > 0):
        raise ValueError("eps and E_max must be positive")
    tm = turning_point(p, E_max, -1)
    tp = turning_point(p, E_max, +1)
    return (decay_point(p, eps, E_max, -1, exponent, tm), decay_point(p, eps, E_max, +1, exponent, tp))


def discretize(p: PotentialModel, eps: float, domain: tuple[float, float], N: int) -> Tridiagonal:
    """Dirichlet central differences on ``N`` interior points of ``domain``."""
    if N < 3:
        raise ValueError("N must be >= 3")
    a, b = map(float, domain)
    if not b > a:
        raise ValueError("domain must have b > a")
    h = (b - a) / (N + 1)
    t = _nodes(a, b, N)
    c = eps * eps / (h * h)
    d = 2.0 * c + np.asarray(p.V(t), dtype=float)
    e = np.full(N - 1, -c)
    return Tridiagonal(d, e, h, a, b)


def default_grid_size(eps: float, E_max: float, domain: tuple[float, float]) -> int:
    h = min(eps / 8.0, H_FACTOR * eps / math.sqrt(E_max))
    return max(3, int(math.ceil((domain[1] - domain[0]) / h)) - 1)


# ------------------------------------------------------------------ spectrum


def _richardson(E0: np.ndarray, E1: np.ndarray, E2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # h, h/2, h/4 with error c1 h^2 + c2 h^4 + ...
    r01 = (4.0 * E1 - E0) / 3.0
    r12 = (4.0 * E2 - E1) / 3.0
    best = (16.0 * r12 - r01) / 15.0
    return best, np.abs(best - r12)


def reference_spectrum(p: PotentialModel, eps: float, E_max: float, N: int | None = None,
                       domain: tuple[float, float] | None = None) -> Spectrum:
    """All eigenvalues below ``E_max``, extrapolated over three nested grids.

    ``N`` is the base grid size (default from ``h <= 0.05 eps / sqrt(E_max)``);
    ``domain`` defaults to :func:`decay_domain`. Each record's ``residual`` is
    ``|E(2N+1) - E(N)|``; ``diagnostics['extrapolation_error']`` estimates the
    error of the extrapolated value.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not E_max > 0:
        raise ValueError("E_max must be positive")
    dom = decay_domain(p, eps, E_max) if domain is None else tuple(map(float, domain))
    N0 = default_grid_size(eps, E_max, dom) if N is None else int(N)
    sizes = [N0, 2 * N0 + 1, 4 * N0 + 3]
    mats = [discretize(p, eps, dom, n) for n in sizes]
    h0 = mats[0].h
    if h0 > eps / 8.0:
        warnings.warn(f"grid spacing h={h0:.3g} exceeds eps/8={eps / 8:.3g}", ResolutionWarning, stacklevel=2)
    count = sturm_count(mats[-1], E_max)
    meta = {
        "potential": p.descriptor,
        "eps": eps,
        "E_max": E_max,
        "domain": list(dom),
        "grid_sizes": sizes,
        "h": h0,
        "bisection_tol": BISECT_TOL,
    }
    if count == 0:
        return Spectrum("reference", (), meta)
    # one extra index so that extrapolated values just under E_max are kept
    ks = np.arange(min(count + 1, sizes[0]))
    vals = thread_map(lambda T: tridiagonal_eigenvalues(T, ks), mats)
    best, err = _richardson(*vals)
    recs = []
    for k in ks:
        if not best[k] < E_max:
            break
        recs.append(EigenRecord(int(k), float(best[k]), "reference", float(abs(vals[1][k] - vals[0][k])),
                                {"extrapolation_error": float(err[k]),
                                 "grid_values": [float(v[k]) for v in vals]}))
    return Spectrum("reference", tuple(recs), meta)


def reference_eigenvector(p: PotentialModel, eps: float, n: int, E_max: float | None = None,
                          N: int | None = None, domain: tuple[float, float] | None = None,
                          ) -> tuple[np.ndarray, np.ndarray, float]:
    """Grid, sup-normalized eigenvector and eigenvalue of the ``n``-th mode.

    Inverse iteration on the base grid, shifted just below the bisected
    eigenvalue.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if E_max is None:
        E_max = 1.5 * (2 * n + 3) * eps * max(p.frequency, 1e-3)
        while True:
            dom = decay_domain(p, eps, E_max) if domain is None else tuple(domain)
            T = discretize(p, eps, dom, default_grid_size(eps, E_max, dom) if N is None else N)
            if sturm_count(T, E_max) > n:
                break
            E_max *= 2.0
    else:
        dom = decay_domain(p, eps, E_max) if domain is None else tuple(domain)
        T = discretize(p, eps, dom, default_grid_size(eps, E_max, dom) if N is None else N)
        if sturm_count(T, E_max) <= n:
            raise ValueError(f"fewer than {n + 1} eigenvalues below E_max={E_max!r}")
    lam = float(tridiagonal_eigenvalues(T, [n])[0])
    gap = min(np.diff(tridiagonal_eigenvalues(T, [max(n - 1, 0), n, n + 1])))
    shift = lam - 1e-6 * max(gap, 1e-300)
    ab = np.zeros((3, T.N))
    ab[0, 1:] = T.e
    ab[1] = T.d - shift
    ab[2, :-1] = T.e
    x = np.ones(T.N)
    for _ in range(4):
        x = solve_banded((1, 1), ab, x)
        x /= np.max(np.abs(x))
    x *= np.sign(x[np.argmax(np.abs(x))])
    return T.grid, x, lam

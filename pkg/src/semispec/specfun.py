"""Airy ``Ai``, ``Ai'`` and physicists' Hermite polynomials."""

from __future__ import annotations

import math
from decimal import Decimal, localcontext

import numpy as np

__all__ = ["airy_ai", "airy_ai_prime", "hermite", "hermite_norm_sq", "SERIES_LIMIT", "HERMITE_MAX"]

# Maclaurin series for |x| <= SERIES_LIMIT, asymptotic expansions beyond
SERIES_LIMIT = 8.0
HERMITE_MAX = 60

# Ai(0) and -Ai'(0), i.e. 3^(-2/3)/Gamma(2/3) and 3^(-1/3)/Gamma(1/3)
_C1 = Decimal("0.35502805388781723926006318600418317639797917419918")
_C2 = Decimal("0.25881940379280679840518356018920396347909113835493")
_PREC = 60


def _series(x: float) -> tuple[float, float]:
    # f, g and their derivatives summed in 60-digit decimal arithmetic;
    # for x > 0 the two series cancel to ~exp(-2/3 x^1.5)
    with localcontext() as ctx:
        ctx.prec = _PREC
        X = Decimal(x)
        x3 = X * X * X
        tiny = Decimal(10) ** -(_PREC - 5)
        f = a = Decimal(1)
        g = b = X
        df = d = X * X / 2
        dg = e = Decimal(1)
        k = 1
        while True:
            a = a * x3 / ((3 * k - 1) * (3 * k))
            b = b * x3 / ((3 * k) * (3 * k + 1))
            e = e * x3 / ((3 * k) * (3 * k - 2))
            if k >= 2:
                d = d * x3 / ((3 * k - 1) * (3 * (k - 1)))
                df += d
            f += a
            g += b
            dg += e
            if k > 3 and max(abs(a), abs(b), abs(d), abs(e)) < tiny:
                break
            k += 1
        ai = _C1 * f - _C2 * g
        aip = _C1 * df - _C2 * dg
        return float(ai), float(aip)


def _uv(zeta: float) -> tuple[list[float], list[float]]:
    us, vs = [1.0], [1.0]
    u = 1.0
    k = 1
    while True:
        u *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
        v = -(6 * k + 1) / (6 * k - 1) * u
        term = abs(u) / zeta**k
        if term > abs(us[-1]) / zeta ** (k - 1) or term < 1e-18:
            break
        us.append(u)
        vs.append(v)
        k += 1
    return us, vs


def _asymptotic(x: float) -> tuple[float, float]:
    z = abs(x)
    zeta = 2.0 / 3.0 * z**1.5
    us, vs = _uv(zeta)
    if x > 0:
        su = sum((-1) ** k * u / zeta**k for k, u in enumerate(us))
        sv = sum((-1) ** k * v / zeta**k for k, v in enumerate(vs))
        pref = math.exp(-zeta) / (2.0 * math.sqrt(math.pi))
        return pref * su / z**0.25, -pref * sv * z**0.25
    pu = sum((-1) ** (k // 2) * u / zeta**k for k, u in enumerate(us) if k % 2 == 0)
    qu = sum((-1) ** (k // 2) * u / zeta**k for k, u in enumerate(us) if k % 2 == 1)
    pv = sum((-1) ** (k // 2) * v / zeta**k for k, v in enumerate(vs) if k % 2 == 0)
    qv = sum((-1) ** (k // 2) * v / zeta**k for k, v in enumerate(vs) if k % 2 == 1)
    phase = zeta + math.pi / 4.0
    s, c = math.sin(phase), math.cos(phase)
    root = math.sqrt(math.pi)
    ai = (s * pu - c * qu) / (root * z**0.25)
    aip = -(c * pv + s * qv) * z**0.25 / root
    return ai, aip


def _airy_pair(x: float) -> tuple[float, float]:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("Airy argument must be finite")
    if abs(x) <= SERIES_LIMIT:
        return _series(x)
    if x > 0 and x > 105.0:
        return 0.0, -0.0
    return _asymptotic(x)


def _vectorize(fn, x):
    if np.ndim(x) == 0:
        return fn(float(x))
    arr = np.asarray(x, dtype=float)
    return np.array([fn(v) for v in arr.ravel()]).reshape(arr.shape)


def airy_ai(x: float | np.ndarray) -> float | np.ndarray:
    """Airy function ``Ai(x)``."""
    return _vectorize(lambda v: _airy_pair(v)[0], x)


def airy_ai_prime(x: float | np.ndarray) -> float | np.ndarray:
    """Derivative ``Ai'(x)``."""
    return _vectorize(lambda v: _airy_pair(v)[1], x)


def hermite(n: int, t: float | np.ndarray) -> float | np.ndarray:
    """Physicists' Hermite polynomial by ``H_{k+1} = 2t H_k - 2k H_{k-1}``."""
    if not (isinstance(n, (int, np.integer)) and 0 <= n <= HERMITE_MAX):
        raise ValueError(f"Hermite degree must be an integer in [0, {HERMITE_MAX}], got {n!r}")
    t = np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    h_prev, h = 1.0 + 0.0 * t, 2.0 * t
    if n == 0:
        return h_prev
    for k in range(1, n):
        h_prev, h = h, 2.0 * t * h - 2.0 * k * h_prev
    return h


def hermite_norm_sq(n: int) -> float:
    """``int exp(-t^2) H_n(t)^2 dt = sqrt(pi) 2^n n!``."""
    if not (isinstance(n, (int, np.integer)) and 0 <= n <= HERMITE_MAX):
        raise ValueError(f"Hermite degree must be an integer in [0, {HERMITE_MAX}], got {n!r}")
    return math.sqrt(math.pi) * math.ldexp(float(math.factorial(n)), n)

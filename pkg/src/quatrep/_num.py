"""Elementwise math that works on float arrays and on mpmath object arrays.

Extended precision is only used to measure quadrature errors that fall
below double-precision roundoff; everything else runs on float64.
"""
from __future__ import annotations

import mpmath
import numpy as np

_ufuncs = {
    name: np.frompyfunc(getattr(mpmath, name), 1, 1)
    for name in ("cos", "sin", "sqrt", "exp", "log")
}
_atan2 = np.frompyfunc(mpmath.atan2, 2, 1)


def is_mp(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object or isinstance(a, mpmath.mpf)


def _apply(name, a):
    if is_mp(a):
        return _ufuncs[name](a)
    return getattr(np, name)(a)


def cos(a):
    return _apply("cos", a)


def sin(a):
    return _apply("sin", a)


def sqrt(a):
    return _apply("sqrt", a)


def exp(a):
    return _apply("exp", a)


def log(a):
    return _apply("log", a)


def atan2(y, x):
    if is_mp(y) or is_mp(x):
        return _atan2(y, x)
    return np.arctan2(y, x)


def pi_like(a):
    return mpmath.mpf(mpmath.pi) if is_mp(a) else np.pi


def const_like(value, a):
    """Turn an exact rational/float constant into the arithmetic of ``a``."""
    return mpmath.mpf(value) if is_mp(a) else float(value)


def to_float(a) -> np.ndarray:
    return np.asarray(a, dtype=float) if not is_mp(a) else np.vectorize(float)(a).astype(float)


def gauss_legendre(n: int, lo=0.0, hi=1.0, dps: int | None = None):
    """Gauss-Legendre nodes and weights on [lo, hi].

    With ``dps`` set, nodes are polished by Newton iteration in mpmath at that
    many decimal digits and returned as object arrays.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    if dps is None:
        half = 0.5 * (hi - lo)
        return lo + half * (x + 1.0), half * w
    with mpmath.workdps(dps + 10):
        xs, ws = [], []
        for x0 in x:
            r = mpmath.mpf(x0)
            for _ in range(100):
                p, dp = _legendre(n, r)
                step = p / dp
                r -= step
                if abs(step) < mpmath.mpf(10) ** (-(dps + 5)):
                    break
            p, dp = _legendre(n, r)
            xs.append(r)
            ws.append(2 / ((1 - r * r) * dp * dp))
        lo_m, hi_m = mpmath.mpf(lo), mpmath.mpf(hi)
        half = (hi_m - lo_m) / 2
        nodes = np.array([lo_m + half * (r + 1) for r in xs], dtype=object)
        weights = np.array([half * wi for wi in ws], dtype=object)
    return nodes, weights


def _legendre(n, x):
    p0, p1 = mpmath.mpf(1), x
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1)
    return p1, dp

"""Quaternion and H^n arithmetic.

Quaternions are stored as trailing axes of length 4 in the basis (e, i, j, k);
a point of H^n is an array of shape (..., n, 4).  Every function accepts
leading batch axes and broadcasts them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _num

E = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])
BASIS = (E, I, J, K)


class QuaternionDomainError(ValueError):
    pass


def _arr(a):
    if isinstance(a, Quaternion):
        return a.as_array()
    a = np.asarray(a)
    if a.dtype != object:
        a = a.astype(float, copy=False)
    return a


def qmul(a, b) -> np.ndarray:
    a, b = _arr(a), _arr(b)
    a0, a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    b0, b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def qconj(a) -> np.ndarray:
    a = _arr(a)
    return a * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm2(a):
    a = _arr(a)
    return (a * a).sum(axis=-1)


def qnorm(a):
    return _num.sqrt(qnorm2(a))


def qinv(a) -> np.ndarray:
    a = _arr(a)
    n2 = qnorm2(a)
    if np.any(np.asarray(n2 == 0)):
        raise ZeroDivisionError("quaternion inverse of zero")
    return qconj(a) / n2[..., None]


def qexp(a) -> np.ndarray:
    """exp(a) = e^{Re a} (cos|v| + v/|v| sin|v|) with v = Im a."""
    a = _arr(a)
    v = a[..., 1:]
    r = _num.sqrt((v * v).sum(axis=-1))
    scale = _num.exp(a[..., 0])
    if _num.is_mp(r):
        sinc = np.array([(_num.sin(x) / x) if x != 0 else 1 for x in r.ravel()], dtype=object).reshape(r.shape)
    else:
        sinc = np.sinc(r / np.pi)
    out = np.concatenate([_num.cos(r)[..., None], v * sinc[..., None]], axis=-1)
    return out * scale[..., None]


def qln(a) -> np.ndarray:
    """Principal logarithm: ln|a| + axis * angle with angle in [0, pi].

    On the negative real axis the axis defaults to i.
    """
    a = _arr(a)
    n = qnorm(a)
    if np.any(np.asarray(n == 0)):
        raise QuaternionDomainError("logarithm of zero quaternion")
    v = a[..., 1:]
    vn = np.sqrt((v * v).sum(axis=-1))
    angle = np.arctan2(vn, a[..., 0])
    safe = np.where(vn > 0, vn, 1.0)
    axis = np.where((vn > 0)[..., None], v / safe[..., None], np.array([1.0, 0.0, 0.0]))
    return np.concatenate([np.log(n)[..., None], axis * angle[..., None]], axis=-1)


def real_part(a):
    return _arr(a)[..., 0]


def imag_part(a) -> np.ndarray:
    a = _arr(a).copy()
    a[..., 0] = 0.0
    return a


@dataclass(frozen=True)
class Quaternion:
    we: float = 0.0
    xi: float = 0.0
    yj: float = 0.0
    zk: float = 0.0

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        a = np.asarray(a, dtype=float).reshape(4)
        return cls(*(float(c) for c in a))

    def as_array(self) -> np.ndarray:
        return np.array([self.we, self.xi, self.yj, self.zk])

    def __array__(self, dtype=None, copy=None):
        return self.as_array() if dtype is None else self.as_array().astype(dtype)

    def __iter__(self):
        return iter((self.we, self.xi, self.yj, self.zk))

    def __add__(self, other):
        return Quaternion.from_array(self.as_array() + _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Quaternion.from_array(self.as_array() - _coerce(other))

    def __rsub__(self, other):
        return Quaternion.from_array(_coerce(other) - self.as_array())

    def __neg__(self):
        return Quaternion.from_array(-self.as_array())

    def __mul__(self, other):
        if np.isscalar(other):
            return Quaternion.from_array(self.as_array() * float(other))
        return Quaternion.from_array(qmul(self, _coerce(other)))

    def __rmul__(self, other):
        if np.isscalar(other):
            return Quaternion.from_array(self.as_array() * float(other))
        return Quaternion.from_array(qmul(_coerce(other), self))

    def __truediv__(self, other):
        if np.isscalar(other):
            return Quaternion.from_array(self.as_array() / float(other))
        return Quaternion.from_array(qmul(self, qinv(_coerce(other))))

    def conj(self) -> "Quaternion":
        return Quaternion.from_array(qconj(self))

    def norm(self) -> float:
        return float(qnorm(self))

    def inverse(self) -> "Quaternion":
        return Quaternion.from_array(qinv(self))

    def exp(self) -> "Quaternion":
        return Quaternion.from_array(qexp(self))

    def ln(self) -> "Quaternion":
        return Quaternion.from_array(qln(self))

    def isclose(self, other, tol: float = 1e-12) -> bool:
        return float(np.abs(self.as_array() - _coerce(other)).max()) <= tol

    def __repr__(self):
        return f"Quaternion({self.we!r}, {self.xi!r}, {self.yj!r}, {self.zk!r})"


def _coerce(x) -> np.ndarray:
    if isinstance(x, Quaternion):
        return x.as_array()
    if np.isscalar(x):
        return np.array([float(x), 0.0, 0.0, 0.0])
    return np.asarray(x, dtype=float)


# --- H^n ----------------------------------------------------------------------

def hpoint(*coords) -> np.ndarray:
    """Stack quaternions into an H^n point of shape (n, 4)."""
    return np.stack([_coerce(c) for c in coords], axis=0)


def as_real(z) -> np.ndarray:
    """(..., n, 4) -> (..., 4n)."""
    z = np.asarray(z)
    return z.reshape(z.shape[:-2] + (z.shape[-2] * 4,))


def as_hpoint(x, n: int | None = None) -> np.ndarray:
    """(..., 4n) -> (..., n, 4)."""
    x = np.asarray(x)
    if n is None:
        n = x.shape[-1] // 4
    if x.shape[-1] != 4 * n:
        raise ValueError(f"expected trailing axis of length {4 * n}, got {x.shape[-1]}")
    return x.reshape(x.shape[:-1] + (n, 4))


def scalar_product(zeta, z) -> np.ndarray:
    """<zeta; z> = sum_l conj(zeta_l) z_l for points of shape (..., n, 4)."""
    zeta, z = _arr(zeta), _arr(z)
    if zeta.shape[-2:] != z.shape[-2:]:
        raise ValueError(f"length mismatch: {zeta.shape[-2]} vs {z.shape[-2]}")
    return qmul(qconj(zeta), z).sum(axis=-2)


def hnorm(z):
    return _num.sqrt(qnorm2(z).sum(axis=-1))


# --- matrix model -------------------------------------------------------------

def channels(q):
    """Complex pair (t, u) with q <-> [[t, u], [-conj(u), conj(t)]]."""
    q = _arr(q)
    return q[..., 0] + 1j * q[..., 1], q[..., 2] + 1j * q[..., 3]


def from_channels(t, u) -> np.ndarray:
    t, u = np.asarray(t, dtype=complex), np.asarray(u, dtype=complex)
    t, u = np.broadcast_arrays(t, u)
    return np.stack([t.real, t.imag, u.real, u.imag], axis=-1)


def to_matrix(q) -> np.ndarray:
    t, u = channels(q)
    row0 = np.stack([t, u], axis=-1)
    row1 = np.stack([-np.conj(u), np.conj(t)], axis=-1)
    return np.stack([row0, row1], axis=-2)


def from_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return from_channels(m[..., 0, 0], m[..., 0, 1])


def complex_to_quat(c) -> np.ndarray:
    """Embed complex numbers in span{e, i}."""
    c = np.asarray(c, dtype=complex)
    zero = np.zeros(c.shape)
    return np.stack([c.real, c.imag, zero, zero], axis=-1)


@dataclass(frozen=True)
class MatrixModel:
    t: complex
    u: complex

    @classmethod
    def of(cls, q) -> "MatrixModel":
        t, u = channels(q)
        return cls(complex(t), complex(u))

    def quaternion(self) -> Quaternion:
        return Quaternion.from_array(from_channels(self.t, self.u))

    def matrix(self) -> np.ndarray:
        return np.array([[self.t, self.u], [-np.conj(self.u), np.conj(self.t)]])


def pure_unit(m, tol: float = 1e-12) -> np.ndarray:
    """Validate/normalize a purely imaginary unit quaternion."""
    m = _coerce(m)
    if abs(m[0]) > tol * max(1.0, float(np.abs(m).max())):
        raise ValueError("axis must be purely imaginary")
    n = float(np.linalg.norm(m))
    if n == 0:
        raise ValueError("axis must be nonzero")
    return m / n


PureUnit = np.ndarray


# --- paths and argument increment --------------------------------------------

@dataclass(frozen=True)
class PathSpec:
    """A parametrized path gamma: [0, 1] -> H around a reference point."""

    gamma: Callable[[np.ndarray], np.ndarray]
    ref: np.ndarray
    samples: int = 4096
    dgamma: Callable[[np.ndarray], np.ndarray] | None = None

    def points(self, s) -> np.ndarray:
        return np.asarray(self.gamma(np.asarray(s, dtype=float)), dtype=float)

    def derivative(self, s, h: float = 1e-6) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.dgamma is not None:
            return np.asarray(self.dgamma(s), dtype=float)
        return (self.points(s + h) - self.points(s - h)) / (2 * h)


def circle_path(center, radius: float, axis=I, windings: float = 1.0, samples: int = 4096) -> PathSpec:
    """center + radius * exp(2 pi windings axis s), s in [0, 1]."""
    c = _coerce(center)
    m = pure_unit(axis)
    w = 2 * np.pi * windings

    def gamma(s):
        s = np.asarray(s, dtype=float)[..., None]
        return c + radius * (np.cos(w * s) * E + np.sin(w * s) * m)

    def dgamma(s):
        s = np.asarray(s, dtype=float)[..., None]
        return radius * w * (-np.sin(w * s) * E + np.cos(w * s) * m)

    return PathSpec(gamma=gamma, ref=c, samples=samples, dgamma=dgamma)


def delta_arg(path: PathSpec, eps: float = 1e-12, max_step: float = np.pi / 2):
    """Total argument increment of a path around ``path.ref``.

    Returns (M, n) with Arg(1) - Arg(0) = 2 pi n M, M a pure unit, n >= 0.
    """
    s = np.linspace(0.0, 1.0, path.samples + 1)
    d = path.points(s) - _coerce(path.ref)
    r = np.linalg.norm(d, axis=-1)
    if np.any(r <= eps):
        raise QuaternionDomainError("path passes through the reference point")
    unit = d / r[:, None]
    im = unit[:, 1:]
    im_n = np.linalg.norm(im, axis=-1)
    angle = np.arctan2(im_n, unit[:, 0])
    prev = angle[0] * (im[0] / im_n[0]) if im_n[0] > 1e-12 else np.zeros(3)
    start = prev.copy()
    step = np.zeros(3)
    for a, v, vn in zip(angle[1:], im[1:], im_n[1:]):
        if vn > 1e-12:
            axis = v / vn
        else:
            pn = float(np.linalg.norm(prev))
            axis = prev / pn if pn > 0 else np.array([1.0, 0.0, 0.0])
        # all logarithms of the unit quaternion: phi * axis with phi = +-a + 2 pi k;
        # pick the one nearest the linear extrapolation (breaks ties at -1)
        target = prev + step
        proj = float(target @ axis)
        best, best_dist = None, np.inf
        for sign in (1.0, -1.0):
            k = np.round((proj - sign * a) / (2 * np.pi))
            for kk in (k - 1, k, k + 1):
                cand = (sign * a + 2 * np.pi * kk) * axis
                dist = float(np.linalg.norm(cand - target))
                if dist < best_dist:
                    best, best_dist = cand, dist
        if float(np.linalg.norm(best - prev)) > max_step:
            raise QuaternionDomainError("path undersampled: argument jump exceeds max_step")
        step = best - prev
        prev = best
    total = prev - start
    mag = float(np.linalg.norm(total))
    if mag < 1e-9:
        return np.array(I), 0.0
    axis = np.concatenate([[0.0], total / mag])
    return axis, mag / (2 * np.pi)


def random_quaternions(rng: np.random.Generator, shape: Sequence[int] | int = ()) -> np.ndarray:
    shape = (shape,) if isinstance(shape, int) else tuple(shape)
    return rng.standard_normal(shape + (4,))

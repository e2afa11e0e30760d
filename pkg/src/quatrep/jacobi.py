"""Real Jacobi matrices of maps H^n -> H^m, rank tests, and local inverses."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .quat import as_hpoint, as_real

HMap = Callable[[np.ndarray], np.ndarray]


class RankDeficiencyError(ValueError):
    pass


class SeriesDivergence(RuntimeError):
    pass


@dataclass(frozen=True)
class JacobiMatrix:
    """Real (4m, 4n) matrix; column p is the image of the p-th real direction."""

    real: np.ndarray
    m: int
    n: int

    def block(self, a: int, b: int) -> np.ndarray:
        """4x4 real block mapping slot b of the source to slot a of the target."""
        return self.real[4 * a:4 * a + 4, 4 * b:4 * b + 4]

    def apply(self, zeta) -> np.ndarray:
        """Differential applied to a direction (n, 4) -> (m, 4)."""
        return as_hpoint(self.real @ as_real(np.asarray(zeta, dtype=float)).reshape(-1), self.m)

    def __matmul__(self, other: "JacobiMatrix") -> "JacobiMatrix":
        if self.n != other.m:
            raise ValueError("shapes do not compose")
        return JacobiMatrix(self.real @ other.real, self.m, other.n)


def _eval(f: HMap, z: np.ndarray) -> np.ndarray:
    out = np.asarray(f(z), dtype=float)
    return out if out.ndim >= 2 else out[None, :]


def jacobi_real(f: HMap, z, h: float = 1e-4, richardson: bool = True) -> JacobiMatrix:
    """Central differences per real coordinate, Richardson-extrapolated over (h, h/2)."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    n = z.shape[0]
    m = _eval(f, z).shape[-2]

    def columns(step):
        cols = []
        for p in range(4 * n):
            e = np.zeros(4 * n)
            e[p] = step
            d = as_hpoint(e, n)
            cols.append(as_real(_eval(f, z + d) - _eval(f, z - d)).reshape(-1) / (2 * step))
        return np.stack(cols, axis=-1)

    A = columns(h)
    if richardson:
        A = (4 * columns(h / 2) - A) / 3
    return JacobiMatrix(A, m, n)


def rank_r(J: JacobiMatrix | np.ndarray, tol: float = 1e-8) -> int:
    A = J.real if isinstance(J, JacobiMatrix) else np.asarray(J, dtype=float)
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s >= tol * s[0]))


def is_regular(J: JacobiMatrix, tol: float = 1e-8) -> bool:
    return rank_r(J, tol) == 4 * min(J.m, J.n)


def chain_check(f: HMap, g: HMap, z, h: float = 1e-4) -> float:
    """Operator-norm distance between J_{g o f}(z) and J_g(f(z)) J_f(z)."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    Jf = jacobi_real(f, z, h)
    Jg = jacobi_real(g, _eval(f, z), h)
    Jgf = jacobi_real(lambda x: g(_eval(f, x)), z, h)
    return float(np.linalg.norm(Jgf.real - (Jg @ Jf).real, 2))


@dataclass(frozen=True)
class LocalInverse:
    """Inverse of f near f(z); ``certificate`` is sup |f(inverse(y)) - y| on the test ball."""

    center: np.ndarray
    value: np.ndarray
    linear_inverse: np.ndarray
    f: HMap
    k_max: int
    certificate: float
    history: tuple

    def normalized(self, w) -> np.ndarray:
        """Solve F(zeta) = w for F = L^{-1}(f(z + .) - f(z)) by zeta_{k+1} = w + g(zeta_k), g = id - F."""
        w = np.asarray(w, dtype=float)
        n = self.center.shape[0]
        zeta = w.copy()
        for _ in range(self.k_max):
            zeta = w + zeta - self._F(zeta, n)
        return zeta

    def _F(self, zeta, n):
        flat = as_real(zeta).reshape(-1, 4 * n)
        vals = np.stack([as_real(_eval(self.f, self.center + as_hpoint(x, n)) - self.value).reshape(-1) for x in flat])
        return as_hpoint(vals @ self.linear_inverse.T, n).reshape(zeta.shape)

    def __call__(self, y) -> np.ndarray:
        y = np.atleast_2d(np.asarray(y, dtype=float))
        n = self.center.shape[0]
        w = as_hpoint(self.linear_inverse @ as_real(y - self.value).reshape(-1), n)
        return self.center + self.normalized(w)


def local_inverse(f: HMap, z, radius: float = 0.1, k_max: int = 30, tol: float = 1e-6,
                  samples: int = 64, seed: int = 0, h: float = 1e-4, rank_tol: float = 1e-8) -> LocalInverse:
    """Local inverse of f near f(z) by fixed-point iteration on the normalized map.

    The certificate is the sup over ``samples`` points w of the ball of radius
    ``radius`` (in normalized coordinates) of |F(zeta(w)) - w|.  Raises
    :class:`RankDeficiencyError` when J_f(z) is not invertible and
    :class:`SeriesDivergence` when the certificate exceeds ``tol``.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    n = z.shape[0]
    J = jacobi_real(f, z, h)
    if J.m != n or rank_r(J, rank_tol) < 4 * n:
        raise RankDeficiencyError(f"real rank {rank_r(J, rank_tol)} < {4 * n}")
    Linv = np.linalg.inv(J.real)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((samples, 4 * n))
    r = radius * rng.random(samples) ** (1.0 / (4 * n))
    W = as_hpoint(g / np.linalg.norm(g, axis=-1, keepdims=True) * r[:, None], n)
    inv = LocalInverse(z, _eval(f, z), Linv, f, 0, np.inf, ())
    history = []
    zeta = W.copy()
    for k in range(1, k_max + 1):
        zeta = W + zeta - inv._F(zeta, n)
        history.append(float(np.max(np.linalg.norm(as_real(inv._F(zeta, n) - W), axis=-1))))
    cert = history[-1] if history else float(np.max(np.linalg.norm(as_real(W), axis=-1)))
    out = LocalInverse(z, inv.value, Linv, f, k_max, cert, tuple(history))
    if not cert <= tol:
        raise SeriesDivergence(f"certificate {cert:.3g} exceeds {tol:.3g} after {k_max} terms")
    return out

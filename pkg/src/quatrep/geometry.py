"""Convexity, plurisubharmonicity, and hulls with separating exponentials."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial import ConvexHull, QhullError

from .kernels import v_rho
from .quat import as_hpoint, as_real, from_channels, qmul, scalar_product

RealFunction = Callable[[np.ndarray], np.ndarray]


class NoSeparation(ValueError):
    """The point lies in the convex hull of K."""


# --- convexity -------------------------------------------------------------------

def _hessian(rho: RealFunction, x: np.ndarray, n: int, h: float) -> np.ndarray:
    D = 4 * n
    H = np.zeros((D, D))
    f0 = float(rho(as_hpoint(x, n)))
    E = np.eye(D) * h
    for a in range(D):
        for b in range(a, D):
            if a == b:
                v = (float(rho(as_hpoint(x + E[a], n))) - 2 * f0 + float(rho(as_hpoint(x - E[a], n)))) / h ** 2
            else:
                v = (float(rho(as_hpoint(x + E[a] + E[b], n))) - float(rho(as_hpoint(x + E[a] - E[b], n)))
                     - float(rho(as_hpoint(x - E[a] + E[b], n))) + float(rho(as_hpoint(x - E[a] - E[b], n)))) / (4 * h * h)
            H[a, b] = H[b, a] = v
    return H


@dataclass(frozen=True)
class ConvexityReport:
    eps0: float
    witness: list
    samples: int

    @property
    def passed(self) -> bool:
        return self.eps0 > 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps0", "witness", "samples", "pass"])
        w.writerow([f"{self.eps0:.17g}", " ".join(f"{v:.17g}" for v in self.witness), self.samples, int(self.passed)])
        return buf.getvalue()


def strict_convexity(rho: RealFunction, samples, h: float = 1e-4) -> ConvexityReport:
    """Smallest finite-difference Hessian eigenvalue of rho over the sample points."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[-2]
    pts = samples.reshape(-1, 4 * n)
    best, witness = np.inf, pts[0]
    for x in pts:
        lam = float(np.linalg.eigvalsh(_hessian(rho, x, n, h))[0])
        if lam < best:
            best, witness = lam, x
    return ConvexityReport(best, [float(v) for v in witness], len(pts))


def leray_margin(rho: RealFunction, zeta, z, eps0: float, grad: Callable | None = None,
                 h: float = 1e-4) -> np.ndarray:
    """Re<v_rho(zeta); zeta - z> - [rho(zeta) - rho(z) + eps0 |zeta - z|^2 / 4].

    v_rho comes from ``grad`` when given, else from central differences with
    step ``h`` (exact up to roundoff for quadratic rho).
    """
    zeta = np.asarray(zeta, dtype=float)
    z = np.asarray(z, dtype=float)
    v = np.asarray(grad(zeta), dtype=float) if grad is not None else v_rho(rho, zeta, h)
    d = zeta - z
    lhs = scalar_product(v, d)[..., 0]
    rhs = np.asarray(rho(zeta)) - np.asarray(rho(z)) + eps0 * (d * d).sum(axis=(-1, -2)) / 4
    return lhs - rhs


# --- plurisubharmonicity ------------------------------------------------------------

@dataclass(frozen=True)
class PSHReport:
    min_laplacian: float
    max_laplacian: float
    witness: dict
    lines: int
    tol: float = 1e-6

    @property
    def subharmonic(self) -> bool:
        return self.min_laplacian >= -self.tol

    @property
    def strict(self) -> bool:
        return self.min_laplacian > self.tol

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["min_laplacian", "max_laplacian", "lines", "subharmonic", "strict"])
        w.writerow([f"{self.min_laplacian:.17g}", f"{self.max_laplacian:.17g}", self.lines,
                    int(self.subharmonic), int(self.strict)])
        return buf.getvalue()


def line_laplacian(rho: RealFunction, v, w, zeta, h: float = 1e-3) -> np.ndarray:
    """4-variable Laplacian of zeta -> rho(v + zeta w) at quaternions zeta (..., 4)."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    zeta = np.asarray(zeta, dtype=float)

    def g(q):
        return np.asarray(rho(v + qmul(q[..., None, :], w)), dtype=float)

    base = g(zeta)
    total = np.zeros(base.shape)
    for m in range(4):
        e = np.zeros(4)
        e[m] = h
        total = total + (g(zeta + e) - 2 * base + g(zeta - e)) / h ** 2
    return total


def plurisubharmonic_check(rho: RealFunction, bases, directions, grid, h: float = 1e-3,
                           tol: float = 1e-6) -> PSHReport:
    bases = np.asarray(bases, dtype=float)
    directions = np.asarray(directions, dtype=float)
    grid = np.asarray(grid, dtype=float).reshape(-1, 4)
    lo, hi, wit = np.inf, -np.inf, {}
    count = 0
    for v in bases:
        for w in directions:
            lap = line_laplacian(rho, v, w, grid, h)
            count += 1
            k = int(np.argmin(lap))
            if lap[k] < lo:
                lo = float(lap[k])
                wit = {"v": as_real(v).tolist(), "w": as_real(w).tolist(), "zeta": grid[k].tolist()}
            hi = max(hi, float(lap.max()))
    return PSHReport(lo, hi, wit, count, tol)


# --- hulls -----------------------------------------------------------------------------

def _flat(K) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    return K.reshape(K.shape[0], -1)


def in_convex_hull(K, w, tol: float = 1e-9) -> bool:
    """LP feasibility of w = sum lambda_k K_k with lambda in the simplex."""
    P = _flat(K)
    x = np.asarray(w, dtype=float).reshape(-1)
    m = P.shape[0]
    A_eq = np.vstack([P.T, np.ones((1, m))])
    b_eq = np.concatenate([x, [1.0]])
    # minimize the l1 residual so that near-boundary points are judged with tolerance
    D = P.shape[1] + 1
    c = np.concatenate([np.zeros(m), np.ones(2 * D)])
    A = np.hstack([A_eq, np.eye(D), -np.eye(D)])
    res = linprog(c, A_eq=A, b_eq=b_eq, bounds=[(0, None)] * (m + 2 * D), method="highs")
    return bool(res.status == 0 and res.fun <= tol)


def closest_hull_point(K, w) -> np.ndarray:
    P = _flat(K)
    x = np.asarray(w, dtype=float).reshape(-1)
    m = P.shape[0]
    lam0 = np.full(m, 1.0 / m)
    res = minimize(
        lambda l: 0.5 * np.sum((P.T @ l - x) ** 2),
        lam0,
        jac=lambda l: P @ (P.T @ l - x),
        bounds=[(0.0, 1.0)] * m,
        constraints=[{"type": "eq", "fun": lambda l: np.sum(l) - 1.0, "jac": lambda l: np.ones(m)}],
        method="SLSQP",
        options={"ftol": 1e-15, "maxiter": 500},
    )
    lam = np.clip(res.x, 0, None)
    lam /= lam.sum()
    return P.T @ lam


@dataclass(frozen=True)
class SeparatingExponential:
    """f(z) = exp(sum_l a_l t_l + b_l conj(u_l) - s), certified against K."""

    direction: np.ndarray  # unit real vector y (4n,)
    shift: float
    n: int
    sup_K: float
    value_at_w: float

    @property
    def coefficients(self):
        y = self.direction.reshape(self.n, 4)
        return y[:, 0] - 1j * y[:, 1], y[:, 2] + 1j * y[:, 3]

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        a, b = self.coefficients
        t = x[..., 0] + 1j * x[..., 1]
        ub = x[..., 2] - 1j * x[..., 3]
        expo = np.sum(a * t + b * ub, axis=-1) - self.shift
        return from_channels(np.exp(expo), 0.0)

    def modulus(self, x) -> np.ndarray:
        """|f| = exp(y . x - s) in closed form, x in real coordinates (..., 4n)."""
        x = np.asarray(x, dtype=float)
        return np.exp(x @ self.direction - self.shift)

    def certificate(self) -> dict:
        return {"direction": self.direction.tolist(), "shift": self.shift,
                "abs_f_w": self.value_at_w, "sup_K_abs_f": self.sup_K}


def _exponential_from_direction(P: np.ndarray, x: np.ndarray, y: np.ndarray, n: int) -> SeparatingExponential:
    y = y / np.linalg.norm(y)
    shift = float(x @ y)
    f = SeparatingExponential(y, shift, n, 0.0, 0.0)
    mods = np.abs(f(as_hpoint(np.vstack([P, x[None]]), n)) @ np.array([1.0, 1.0j, 0, 0]))
    return SeparatingExponential(y, shift, n, float(mods[:-1].max()), float(mods[-1]))


def separating_exponential(K, w) -> SeparatingExponential:
    """Holomorphic exponential with |f(w)| = 1 and sup_K |f| < 1."""
    K = np.asarray(K, dtype=float)
    n = K.shape[-2] if K.ndim == 3 else 1
    P = _flat(K)
    x = np.asarray(w, dtype=float).reshape(-1)
    if in_convex_hull(P, x):
        raise NoSeparation("point lies in the convex hull of K")
    p = closest_hull_point(P, x)
    y = x - p
    if np.linalg.norm(y) < 1e-12:
        raise NoSeparation("point lies on the convex hull of K")
    f = _exponential_from_direction(P, x, y, n)
    if not f.sup_K < 1.0:
        raise NoSeparation("separation failed numerically")
    return f


@dataclass
class HullReport:
    K: np.ndarray
    grid: np.ndarray
    members: list
    registry: list = field(default_factory=list)
    hull_violations: list = field(default_factory=list)

    @property
    def contained(self) -> bool:
        return not self.hull_violations

    def certificates_ok(self, tol: float = 1e-12) -> bool:
        return all(abs(c["abs_f_w"] - 1.0) <= tol and c["sup_K_abs_f"] < 1.0 for c in self.registry)

    def to_json(self) -> str:
        return json.dumps({
            "K": self.K.tolist(),
            "grid_size": int(len(self.grid)),
            "members": [int(i) for i in self.members],
            "registry": self.registry,
            "hull_violations": [int(i) for i in self.hull_violations],
        }, indent=2, sort_keys=True)


def _facet_direction(hull: ConvexHull, x: np.ndarray) -> np.ndarray | None:
    s = hull.equations[:, :-1] @ x + hull.equations[:, -1]
    k = int(np.argmax(s))
    return hull.equations[k, :-1].copy() if s[k] > 1e-9 else None


def hull_estimate(K, grid, family: Sequence[Callable] | None = None, separate: bool = True,
                  tol: float = 1e-12) -> HullReport:
    """Grid points with |f(z)| <= sup_K |f| for every f in the family.

    With ``separate`` the family is extended by a certified separating
    exponential for every grid point outside the convex hull of K.  The
    report lists grid members and any member found outside the convex hull
    by an LP audit.
    """
    K = np.asarray(K, dtype=float)
    grid = np.asarray(grid, dtype=float)
    n = K.shape[-2]
    P, G = _flat(K), _flat(grid)
    fam = list(family or [])
    registry = []
    if separate:
        try:
            hull = ConvexHull(P)
        except (QhullError, ValueError):
            hull = None
        for x in G:
            y = _facet_direction(hull, x) if hull is not None else None
            if y is None:
                if hull is not None or in_convex_hull(P, x):
                    continue
                y = x - closest_hull_point(P, x)
            f = _exponential_from_direction(P, x, y, n)
            fam.append(f)
            registry.append(f.certificate())

    def modulus(f, pts):
        if isinstance(f, SeparatingExponential):
            return f.modulus(pts)
        return np.linalg.norm(np.asarray(f(as_hpoint(pts, n)), dtype=float), axis=-1)

    keep = np.ones(len(G), dtype=bool)
    for f in fam:
        bound = float(np.max(modulus(f, P)))
        keep &= modulus(f, G) <= bound * (1 + tol)
    members = [int(i) for i in np.nonzero(keep)[0]]
    violations = [i for i in members if not in_convex_hull(P, G[i], tol=1e-7)]
    return HullReport(K, G, members, registry, violations)

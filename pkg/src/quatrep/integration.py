"""Quadrature and the integral operators built on the kernels.

Boundaries are star-shaped about a domain center: a direction rule on the
unit sphere S^{4n-1} is mapped to the boundary by the exit distance R(omega),
and the flux of a (4n-1)-form is taken against the outward normal.  Volume
integrals use polar coordinates centered at the evaluation point, which
absorbs the |zeta - z|^{1-4n} singularity of the kernels into the r^{4n-1}
Jacobian.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import mpmath
import numpy as np

from . import _num
from .forms import FormField, FormValue, SurfacePatch, flux_density, pullback
from .kernels import (
    LerayMap,
    leray_phi,
    leray_phi_bar,
    theta_z,
)
from .quat import E, as_hpoint, as_real, pure_unit, qconj, qinv, qmul, PathSpec

HFunction = Callable[[np.ndarray], np.ndarray]


class RefinementNeeded(ValueError):
    """Evaluation point too close to the boundary for the requested rule."""


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    scheme: str = "gauss"  # gauss | trapezoid | montecarlo
    nodes: int = 32
    seed: int = 0
    tol: float = 1e-6
    dps: int | None = None
    radial_nodes: int | None = None
    samples: int = 20000  # Monte Carlo sample count

    def __post_init__(self):
        if self.scheme not in ("gauss", "trapezoid", "montecarlo"):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.nodes < 1:
            raise ValueError("nodes must be positive")

    def coarser(self) -> "QuadratureSpec":
        return replace(self, nodes=max(2, self.nodes // 2), samples=max(100, self.samples // 4),
                       radial_nodes=None if self.radial_nodes is None else max(2, self.radial_nodes // 2))


def _rule_1d(q: QuadratureSpec, lo, hi, periodic: bool = False):
    if q.scheme == "trapezoid":
        n = q.nodes
        h = (hi - lo) / n
        if periodic:
            x = lo + h * np.arange(n)
        else:
            x = lo + h * (np.arange(n) + 0.5)
        return x, np.full(n, h)
    return _num.gauss_legendre(q.nodes, lo, hi, q.dps)


def _tensor(rules):
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    w = wgrids[0]
    for g in wgrids[1:]:
        w = w * g
    return [g.reshape(-1) for g in grids], w.reshape(-1)


def _hopf(eta, xi1, xi2):
    ce, se = _num.cos(eta), _num.sin(eta)
    return np.stack([ce * _num.cos(xi1), ce * _num.sin(xi1), se * _num.cos(xi2), se * _num.sin(xi2)], axis=-1)


def sphere_directions(D: int, q: QuadratureSpec):
    """Directions omega (M, D) and weights (M,) with sum w g(omega) ~ int_{S^{D-1}} g dS."""
    if q.scheme == "montecarlo" or D not in (4, 8):
        rng = np.random.default_rng(q.seed)
        g = rng.standard_normal((q.samples, D))
        omega = g / np.linalg.norm(g, axis=-1, keepdims=True)
        area = 2 * math.pi ** (D / 2) / math.gamma(D / 2)
        return omega, np.full(q.samples, area / q.samples)
    pi = mpmath.pi if q.dps else math.pi
    if D == 4:
        (eta, x1, x2), w = _tensor([_rule_1d(q, 0, pi / 2), _rule_1d(q, 0, 2 * pi, True), _rule_1d(q, 0, 2 * pi, True)])
        omega = _hopf(eta, x1, x2)
        return omega, w * _num.sin(eta) * _num.cos(eta)
    # S^7 as a join of two 3-spheres: (cos a w1, sin a w2)
    o4, w4 = sphere_directions(4, q)
    a, wa = _rule_1d(q, 0, pi / 2)
    ia, i1, i2 = np.meshgrid(np.arange(len(a)), np.arange(len(w4)), np.arange(len(w4)), indexing="ij")
    ia, i1, i2 = ia.ravel(), i1.ravel(), i2.ravel()
    ca, sa = _num.cos(a)[ia], _num.sin(a)[ia]
    omega = np.concatenate([o4[i1] * ca[:, None], o4[i2] * sa[:, None]], axis=-1)
    w = wa[ia] * w4[i1] * w4[i2] * ca ** 3 * sa ** 3
    return omega, w


def _sum(values, weights):
    """Weighted sum over the leading axis in a fixed order."""
    prod = values * weights[(...,) + (None,) * (values.ndim - 1)]
    if prod.dtype == object:
        total = prod[0]
        for row in prod[1:]:
            total = total + row
        return total
    return np.sum(prod, axis=0)


# --- domains ------------------------------------------------------------------

@dataclass(frozen=True)
class DomainSpec:
    """Bounded domain in H^n (real dimension 4n), star-shaped about ``center``."""

    kind: str
    n: int
    center: np.ndarray
    radius: float = 1.0
    radii: tuple = ()
    rho: Callable[[np.ndarray], np.ndarray] | None = None
    grad: Callable[[np.ndarray], np.ndarray] | None = None
    r_max: float = 10.0
    label: str = ""

    @staticmethod
    def ball(n: int = 1, center=None, radius: float = 1.0) -> "DomainSpec":
        c = np.zeros((n, 4)) if center is None else np.asarray(center, dtype=float).reshape(n, 4)
        return DomainSpec("ball", n, c, radius=float(radius), label=f"ball(r={radius})")

    @staticmethod
    def polydisk(n: int, center=None, radii: Sequence[float] = ()) -> "DomainSpec":
        c = np.zeros((n, 4)) if center is None else np.asarray(center, dtype=float).reshape(n, 4)
        radii = tuple(float(r) for r in radii) or (1.0,) * n
        if len(radii) != n:
            raise ValueError("one radius per slot")
        return DomainSpec("polydisk", n, c, radii=radii, label=f"polydisk(r={list(radii)})")

    @staticmethod
    def sublevel(rho, n: int = 1, center=None, r_max: float = 10.0, grad=None, label: str = "sublevel") -> "DomainSpec":
        c = np.zeros((n, 4)) if center is None else np.asarray(center, dtype=float).reshape(n, 4)
        if float(np.asarray(rho(c))) >= 0:
            raise DomainError("center must satisfy rho < 0")
        return DomainSpec("sublevel", n, c, rho=rho, grad=grad, r_max=float(r_max), label=label)

    @property
    def dim(self) -> int:
        return 4 * self.n

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.n, "center": as_real(self.center).tolist(),
                "radius": self.radius, "radii": list(self.radii), "label": self.label}

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "ball":
            return np.linalg.norm(x - as_real(self.center), axis=-1) < self.radius
        if self.kind == "polydisk":
            h = as_hpoint(x, self.n) - self.center
            return np.all(np.linalg.norm(h, axis=-1) < np.array(self.radii), axis=-1)
        return np.asarray(self.rho(as_hpoint(x, self.n))) < 0

    def ray_exit(self, p, omega) -> np.ndarray:
        """Distance t > 0 with p + t omega on the boundary (p interior)."""
        p = np.asarray(p, dtype=float)
        omega = np.asarray(omega, dtype=float)
        p, omega = np.broadcast_arrays(p, omega)
        if self.kind == "ball":
            d = p - as_real(self.center)
            b = (d * omega).sum(-1)
            c = (d * d).sum(-1) - self.radius ** 2
            return -b + np.sqrt(b * b - c)
        if self.kind == "polydisk":
            dh = as_hpoint(p, self.n) - self.center
            oh = as_hpoint(omega, self.n)
            b = (dh * oh).sum(-1)
            a = (oh * oh).sum(-1)
            c = (dh * dh).sum(-1) - np.array(self.radii) ** 2
            safe = np.where(a > 0, a, 1.0)
            t = np.where(a > 0, (-b + np.sqrt(np.maximum(b * b - a * c, 0.0))) / safe, np.inf)
            return t.min(axis=-1)
        return self._bisect(p, omega)

    def _bisect(self, p, omega):
        rho = self.rho
        n = self.n
        lo = np.zeros(p.shape[:-1])
        hi = np.full(p.shape[:-1], self.r_max)
        vals_hi = np.asarray(rho(as_hpoint(p + hi[..., None] * omega, n)))
        if np.any(vals_hi < 0):
            raise DomainError("r_max does not bound the sublevel set")
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            inside = np.asarray(rho(as_hpoint(p + mid[..., None] * omega, n))) < 0
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        t = 0.5 * (lo + hi)
        # secant polish on the smooth defining function
        for _ in range(3):
            f0 = np.asarray(rho(as_hpoint(p + t[..., None] * omega, n)))
            dt = 1e-7 * (1 + t)
            f1 = np.asarray(rho(as_hpoint(p + (t + dt)[..., None] * omega, n)))
            slope = (f1 - f0) / dt
            t = t - np.where(slope != 0, f0 / np.where(slope != 0, slope, 1.0), 0.0)
        return t

    def normal(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "ball":
            d = x - as_real(self.center)
            return d / np.linalg.norm(d, axis=-1, keepdims=True)
        if self.kind == "polydisk":
            dh = as_hpoint(x, self.n) - self.center
            excess = np.linalg.norm(dh, axis=-1) - np.array(self.radii)
            slot = np.argmax(excess, axis=-1)
            mask = (np.arange(self.n) == slot[..., None])[..., None]
            nv = np.where(mask, dh, 0.0)
            nv = as_real(nv)
            return nv / np.linalg.norm(nv, axis=-1, keepdims=True)
        if self.grad is not None:
            g = as_real(np.asarray(self.grad(as_hpoint(x, self.n)), dtype=float))
        else:
            from .kernels import v_rho

            g = as_real(v_rho(self.rho, as_hpoint(x, self.n), 1e-6))
        return g / np.linalg.norm(g, axis=-1, keepdims=True)

    def distance_to_boundary(self, z, probes: int = 512) -> float:
        x = as_real(np.asarray(z, dtype=float)).reshape(-1)
        if self.kind == "ball":
            return float(self.radius - np.linalg.norm(x - as_real(self.center)))
        if self.kind == "polydisk":
            dh = as_hpoint(x, self.n) - self.center
            return float(np.min(np.array(self.radii) - np.linalg.norm(dh, axis=-1)))
        if not bool(self.contains(x)):
            return -1.0
        rng = np.random.default_rng(12345)
        g = rng.standard_normal((probes, self.dim))
        om = g / np.linalg.norm(g, axis=-1, keepdims=True)
        return float(self.ray_exit(np.broadcast_to(x, om.shape), om).min())

    def boundary_nodes(self, q: QuadratureSpec):
        """Boundary points, outward normals and surface weights."""
        omega, w = sphere_directions(self.dim, q)
        c = as_real(self.center).reshape(-1)
        if self.kind == "ball" and q.dps is None:
            return c + self.radius * omega, omega, w * self.radius ** (self.dim - 1)
        if self.kind == "ball":
            r = mpmath.mpf(self.radius)
            return c + r * omega, omega, w * r ** (self.dim - 1)
        R = self.ray_exit(np.broadcast_to(c, omega.shape), omega)
        x = c + R[:, None] * omega
        nu = self.normal(x)
        cosang = (omega * nu).sum(-1)
        return x, nu, w * R ** (self.dim - 1) / cosang


def _check_interior(dom: DomainSpec, z, delta_min: float):
    dist = dom.distance_to_boundary(z)
    if dist < delta_min:
        raise RefinementNeeded(f"point at distance {dist:.3g} from the boundary (minimum {delta_min})")


def _as_point(z, n: int) -> np.ndarray:
    return np.asarray(z, dtype=float).reshape(n, 4)


# --- generic form integration --------------------------------------------------

def integrate_form(F: FormField, patch: SurfacePatch, q: QuadratureSpec | None = None) -> np.ndarray:
    """Quadrature of the pullback density of F over [0,1]^k."""
    q = q or QuadratureSpec()
    if F.degree != patch.k:
        raise ValueError(f"cannot integrate a {F.degree}-form over a {patch.k}-dimensional patch")
    if q.scheme == "montecarlo":
        rng = np.random.default_rng(q.seed)
        s = rng.random((q.samples, patch.k))
        w = np.full(q.samples, 1.0 / q.samples)
    else:
        grids, w = _tensor([_rule_1d(q, 0, 1) for _ in range(patch.k)])
        s = np.stack(grids, axis=-1)
    dens = pullback(F, patch)(s)
    return _sum(dens, w)


def hopf_sphere_patch(center, radius) -> SurfacePatch:
    """S^3(center, radius) over [0,1]^3 with outward (Stokes) orientation."""
    c = np.asarray(center).reshape(-1)

    def angles(s):
        pi = _num.pi_like(s)
        return s[..., 0] * (pi / 2), s[..., 1] * (2 * pi), s[..., 2] * (2 * pi)

    def param(s):
        s = np.asarray(s)
        eta, x1, x2 = angles(s)
        return c + radius * _hopf(eta, x1, x2)

    def jacobian(s):
        s = np.asarray(s)
        pi = _num.pi_like(s)
        eta, x1, x2 = angles(s)
        ce, se = _num.cos(eta), _num.sin(eta)
        c1, s1, c2, s2 = _num.cos(x1), _num.sin(x1), _num.cos(x2), _num.sin(x2)
        z = eta * 0
        d_eta = np.stack([-se * c1, -se * s1, ce * c2, ce * s2], axis=-1) * (pi / 2)
        d_x1 = np.stack([-ce * s1, ce * c1, z, z], axis=-1) * (2 * pi)
        d_x2 = np.stack([z, z, -se * s2, se * c2], axis=-1) * (2 * pi)
        return radius * np.stack([d_eta, d_x1, d_x2], axis=-1)

    # frame (normal, d_eta, d_xi1, d_xi2) has determinant -sin(eta)cos(eta) < 0
    return SurfacePatch(k=3, dim=4, param=param, jacobian=jacobian, orientation=-1)


def theta_field(z) -> FormField:
    z = np.asarray(z)
    n = z.reshape(-1, 4).shape[0]
    zp = z.reshape(n, 4)
    return FormField(lambda x: theta_z(as_hpoint(x, n), zp), 4 * n, 4 * n - 1)


def kernel_normalization(z, eps: float = 1.0, q: QuadratureSpec | None = None) -> tuple[np.ndarray, float]:
    """Integral of theta_z over the sphere S^3(z, eps) and its distance to e.

    With ``q.dps`` set the whole rule runs in mpmath at that precision, so the
    reported error is the discretization error rather than float roundoff.
    """
    q = q or QuadratureSpec()
    z = np.asarray(z, dtype=float).reshape(1, 4)
    if q.dps is None:
        val = integrate_form(theta_field(z), hopf_sphere_patch(z, eps), q)
        return val, float(np.linalg.norm(val - E))
    with mpmath.workdps(q.dps):
        zm = np.array([[mpmath.mpf(float(v)) for v in z.reshape(-1)]], dtype=object)
        epsm = mpmath.mpf(eps)
        val = integrate_form(theta_field(zm), hopf_sphere_patch(zm, epsm), q)
        err = mpmath.sqrt(sum((val[k] - (1 if k == 0 else 0)) ** 2 for k in range(4)))
        return np.array([float(v) for v in val]), float(err) if err > mpmath.mpf(10) ** -300 else 0.0


# --- boundary and volume operators --------------------------------------------

def _boundary_integral(dom: DomainSpec, q: QuadratureSpec, integrand: Callable[[np.ndarray, np.ndarray], np.ndarray]):
    x, nu, w = dom.boundary_nodes(q)
    return _sum(integrand(x, nu), w)


def _f_values(f: HFunction, x, n):
    return np.asarray(f(as_hpoint(x, n)), dtype=float)


def bm_boundary(f: HFunction, dom: DomainSpec, z, q: QuadratureSpec | None = None, delta_min: float = 0.05) -> np.ndarray:
    """Boundary operator: integral over the boundary of f(zeta) theta_z(zeta)."""
    q = q or QuadratureSpec()
    zp = _as_point(z, dom.n)
    _check_interior(dom, zp, delta_min)

    def integrand(x, nu):
        dens = flux_density(theta_z(as_hpoint(x, dom.n), zp), nu)
        return qmul(_f_values(f, x, dom.n), dens)

    return _boundary_integral(dom, q, integrand)


def _one_form(g) -> Callable[[np.ndarray], FormValue]:
    return g.eval if isinstance(g, FormField) else g


def bm_volume(g, dom: DomainSpec, z, q: QuadratureSpec | None = None) -> np.ndarray:
    """Volume operator: integral over the domain of g(zeta) ^ theta_z(zeta) for a 1-form g."""
    q = q or QuadratureSpec()
    n = dom.n
    zp = _as_point(z, n)
    zr = as_real(zp)
    if not bool(dom.contains(zr)):
        raise DomainError("evaluation point outside the domain")
    ev = _one_form(g)
    omega, wdir = sphere_directions(dom.dim, q)
    R = dom.ray_exit(np.broadcast_to(zr, omega.shape), omega)
    nr = q.radial_nodes or q.nodes
    t, wt = _num.gauss_legendre(nr, 0.0, 1.0)
    total = np.zeros(4)
    for ti, wi in zip(t, wt):
        r = ti * R
        x = zr + r[:, None] * omega
        form = ev(x).wedge(theta_z(as_hpoint(x, n), zp))
        dens = form.top() * (r ** (dom.dim - 1) * R)[:, None]
        total = total + wi * _sum(dens, wdir)
    return total


def leray_L(f: HFunction, dom: DomainSpec, psi: LerayMap, z, q: QuadratureSpec | None = None,
            delta_min: float = 0.05) -> np.ndarray:
    """Boundary integral of f(zeta) against the Leray form of psi."""
    q = q or QuadratureSpec()
    zp = _as_point(z, dom.n)
    _check_interior(dom, zp, delta_min)

    def integrand(x, nu):
        dens = flux_density(leray_phi(psi, as_hpoint(x, dom.n), zp), nu)
        return qmul(_f_values(f, x, dom.n), dens)

    return _boundary_integral(dom, q, integrand)


def leray_R(g, dom: DomainSpec, psi: LerayMap, z, q: QuadratureSpec | None = None,
            delta_min: float = 0.05) -> np.ndarray:
    """Integral over boundary x [0, 1] of g ^ phi_bar (product orientation, lambda last)."""
    q = q or QuadratureSpec()
    n = dom.n
    D = dom.dim
    zp = _as_point(z, n)
    _check_interior(dom, zp, delta_min)
    ev = _one_form(g)
    lam, wl = _num.gauss_legendre(q.radial_nodes or q.nodes, 0.0, 1.0)
    x, nu, w = dom.boundary_nodes(q)
    gx = ev(x).extend_dim(D + 1)
    total = np.zeros(4)
    for li, wi in zip(lam, wl):
        form = gx.wedge(leray_phi_bar(psi, as_hpoint(x, n), zp, np.full(len(x), li)))
        # terms ending in d lambda; A is the coefficient form over zeta
        A = FormValue(D, {idx[:-1]: c for idx, c in form.terms.items() if idx and idx[-1] == D})
        total = total + wi * _sum(flux_density(A, nu), w)
    return total


# --- loops ----------------------------------------------------------------------

def cauchy_line(f: HFunction, loop: PathSpec, z, M, n_wind: int, q: QuadratureSpec | None = None) -> np.ndarray:
    """(2 pi n)^{-1} (integral over the loop of f(zeta)(zeta - z)^{-1} d zeta) conj(M)."""
    q = q or QuadratureSpec(scheme="trapezoid", nodes=512)
    if n_wind == 0:
        raise ValueError("winding number must be nonzero")
    m = pure_unit(M)
    zq = np.asarray(z, dtype=float).reshape(4)
    s, w = _rule_1d(q, 0.0, 1.0, periodic=True)
    pts = loop.points(s)
    d = pts - zq
    if np.any(np.linalg.norm(d, axis=-1) < 1e-12):
        raise DomainError("loop passes through the evaluation point")
    fv = np.asarray(f(pts[:, None, :]), dtype=float)
    integrand = qmul(qmul(fv, qinv(d)), loop.derivative(s))
    total = _sum(integrand, w)
    return qmul(total, qconj(m)) / (2 * math.pi * n_wind)


def _circle(M, radius, s):
    ang = 2 * math.pi * s
    return radius * (np.cos(ang)[..., None] * E + np.sin(ang)[..., None] * M)


def _dbar_slice(f: HFunction, M, x, h: float = 1e-5):
    """0.5 (d_x f + (d_y f) M) along the slice x + R e + R M."""
    fx = (np.asarray(f((x + h * E)[..., None, :])) - np.asarray(f((x - h * E)[..., None, :]))) / (2 * h)
    fy = (np.asarray(f((x + h * M)[..., None, :])) - np.asarray(f((x - h * M)[..., None, :]))) / (2 * h)
    return 0.5 * (fx + qmul(fy, M))


def _slice_correction(f, M, centers, radius, q: QuadratureSpec, dbar=None):
    """(1/pi) int_{disk} dbar_M f (zeta - c)^{-1} dA for every center (P, 4)."""
    nr = q.radial_nodes or q.nodes
    rr, wr = _num.gauss_legendre(nr, 0.0, radius)
    th = 2 * math.pi * np.arange(q.nodes) / q.nodes
    wth = 2 * math.pi / q.nodes
    out = np.zeros(centers.shape)
    for r, w in zip(rr, wr):
        for t in th:
            dirq = math.cos(t) * E + math.sin(t) * M
            pts = centers + r * dirq
            g = dbar(pts) if dbar is not None else _dbar_slice(f, M, pts)
            # (zeta - c)^{-1} dA = exp(-M t) dr dt
            out += w * wth * qmul(g, math.cos(t) * E - math.sin(t) * M)
    return out / math.pi


@dataclass(frozen=True)
class TorusSpec:
    radii: tuple
    axes: tuple

    def __post_init__(self):
        if len(self.radii) != 3 or len(self.axes) != 3:
            raise ValueError("three loops required")
        ax = np.array([pure_unit(a)[1:] for a in self.axes])
        if abs(np.linalg.det(ax)) < 1e-8:
            raise ValueError("loop axes are linearly dependent over R")


def torus_cauchy_green(f: HFunction, torus: TorusSpec, z, q: QuadratureSpec | None = None,
                       dom: DomainSpec | None = None, volume: bool = True, dbar=None) -> dict:
    """Nested triple-loop representation at z.

    zeta_3 runs on a circle about z in the slice of M_3, zeta_2 about zeta_3,
    zeta_1 about zeta_2.  The boundary term is the literal triple integral of
    f(zeta_1) dLn(zeta_1 - zeta_2) M_1^{-1} dLn(zeta_2 - zeta_3) M_2^{-1} dLn(zeta_3 - z) M_3^{-1}
    over (2 pi)^3.  The volume term collects the slice Cauchy-Pompeiu
    corrections of the three levels.  Returns boundary, volume and value.
    """
    q = q or QuadratureSpec(scheme="trapezoid", nodes=32)
    zq = np.asarray(z, dtype=float).reshape(4)
    M = [pure_unit(a) for a in torus.axes]
    r1, r2, r3 = (float(r) for r in torus.radii)
    N = q.nodes
    s = np.arange(N) / N
    S1, S2, S3 = np.meshgrid(s, s, s, indexing="ij")
    S1, S2, S3 = S1.ravel(), S2.ravel(), S3.ravel()
    z3 = zq + _circle(M[2], r3, S3)
    z2 = z3 + _circle(M[1], r2, S2)
    z1 = z2 + _circle(M[0], r1, S1)
    if dom is not None and not np.all(dom.contains(z1)):
        raise DomainError("torus leaves the domain")

    def dln(diff, Mj, r, sj):
        ang = 2 * math.pi * sj
        deriv = 2 * math.pi * r * (-np.sin(ang)[..., None] * E + np.cos(ang)[..., None] * Mj)
        return qmul(qinv(diff), deriv)

    kern = qmul(dln(z1 - z2, M[0], r1, S1), qinv(M[0]))
    kern = qmul(kern, qmul(dln(z2 - z3, M[1], r2, S2), qinv(M[1])))
    kern = qmul(kern, qmul(dln(z3 - zq, M[2], r3, S3), qinv(M[2])))
    fv = np.asarray(f(z1[:, None, :]), dtype=float)
    boundary = _sum(qmul(fv, kern), np.full(len(S1), 1.0 / N ** 3)) / (2 * math.pi) ** 3
    vol = np.zeros(4)
    if volume:
        dbars = dbar or {}
        c1 = _slice_correction(f, M[0], z2[: N * N * N : N], r1, q, dbars.get(0))  # centers zeta_2 over (s2, s3)
        vol = vol + c1.mean(axis=0)
        c2 = _slice_correction(f, M[1], z3[: N * N * N : N * N], r2, q, dbars.get(1))
        vol = vol + c2.mean(axis=0)
        c3 = _slice_correction(f, M[2], zq[None, :], r3, q, dbars.get(2))
        vol = vol + c3[0]
    return {"boundary": boundary, "volume": vol, "value": boundary - vol}


# --- records ---------------------------------------------------------------------

def result_record(operator: str, domain: dict | str, point, value, est_error: float, q: QuadratureSpec) -> dict:
    return {
        "operator": operator,
        "domain": domain,
        "point": [float(v) for v in np.asarray(point, dtype=float).reshape(-1)],
        "value": [float(v) for v in np.asarray(value, dtype=float).reshape(4)],
        "est_error": float(est_error),
        "nodes": q.nodes if q.scheme != "montecarlo" else q.samples,
        "seed": q.seed,
    }


def with_error_estimate(fn: Callable[[QuadratureSpec], np.ndarray], q: QuadratureSpec):
    """Run ``fn`` at q and at q.coarser(); the difference is the error estimate."""
    fine = np.asarray(fn(q), dtype=float)
    coarse = np.asarray(fn(q.coarser()), dtype=float)
    return fine, float(np.linalg.norm(fine - coarse))


def export_records(records: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(records, indent=2, sort_keys=True))
        fh.write("\n")

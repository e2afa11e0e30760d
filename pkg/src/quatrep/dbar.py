"""Holomorphy tests, the d-tilde operator and the slice d-bar solver.

Holomorphy is tested in the 2x2 complex matrix model: writing
``f = f11 + f12 j`` with complex ``f11, f12`` (span{e, i}), a function is in
the holomorphic class when in every slot ``f11`` is holomorphic in
``(t, conj(u))`` and ``f12`` is antiholomorphic in the same variables.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .forms import FormField, FormValue
from . import _num
from .integration import DomainSpec, QuadratureSpec, bm_volume
from .quat import E, I, J, K, as_hpoint, as_real, channels, from_channels, qmul

HFunction = Callable[[np.ndarray], np.ndarray]

CHANNELS = ("df11/dtbar", "df11/du", "df12/dubar", "df12/dt")


class SupportError(ValueError):
    """Data is not compactly supported inside the domain."""


# --- finite differences ---------------------------------------------------------

def _partials(f: HFunction, z: np.ndarray, h: float, richardson: bool) -> np.ndarray:
    """Central differences of f at hpoint z (n, 4) in every real coordinate: (4n, 4)."""
    n = z.shape[0]
    D = 4 * n
    shifts = np.eye(D).reshape(D, n, 4)

    def central(step):
        plus = np.asarray(f(z + step * shifts), dtype=float)
        minus = np.asarray(f(z - step * shifts), dtype=float)
        return (plus - minus) / (2 * step)

    d = central(h)
    if richardson:
        d = (4 * central(h / 2) - d) / 3
    return d


def _wirtinger(d: np.ndarray, n: int) -> np.ndarray:
    """(n, 4) complex table of the four CR channels from real partials (4n, 4)."""
    f11 = d[:, 0] + 1j * d[:, 1]
    f12 = d[:, 2] + 1j * d[:, 3]
    out = np.zeros((n, 4), dtype=complex)
    for s in range(n):
        x0, x1, x2, x3 = 4 * s, 4 * s + 1, 4 * s + 2, 4 * s + 3
        out[s, 0] = 0.5 * (f11[x0] + 1j * f11[x1])  # d/dtbar
        out[s, 1] = 0.5 * (f11[x2] - 1j * f11[x3])  # d/du
        out[s, 2] = 0.5 * (f12[x2] + 1j * f12[x3])  # d/dubar
        out[s, 3] = 0.5 * (f12[x0] - 1j * f12[x1])  # d/dt
    return out


@dataclass(frozen=True)
class CRResidual:
    values: np.ndarray  # (n, 4) complex, columns as CHANNELS
    h: float

    @property
    def max_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    @property
    def holomorphic(self) -> bool:
        return self.max_norm == 0.0

    def passes(self, tol: float = 1e-8) -> bool:
        return self.max_norm <= tol

    def rows(self, point) -> list[dict]:
        pt = [float(v) for v in as_real(point).reshape(-1)]
        return [
            {"point": pt, "slot": s, "channel": CHANNELS[c], "residual": float(abs(self.values[s, c])), "h": self.h}
            for s in range(self.values.shape[0])
            for c in range(4)
        ]


def cr_residual(f: HFunction, z, h: float = 1e-5, richardson: bool = False) -> CRResidual:
    z = np.atleast_2d(np.asarray(z, dtype=float))
    return CRResidual(_wirtinger(_partials(f, z, h, richardson), z.shape[0]), h)


def dbar_apply(f: HFunction, z, slot: int = 0, h: float = 1e-5, richardson: bool = False) -> np.ndarray:
    """Slot derivative df11/dtbar + (df12/dt) j as a quaternion.

    Vanishes for holomorphic f; equals g when u solves the slice equation with
    right-hand side g.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    n = z.shape[0]
    if not 0 <= slot < n:
        raise ValueError(f"slot {slot} out of range for n={n}")
    w = _wirtinger(_partials(f, z, h, richardson), n)
    return from_channels(w[slot, 0], w[slot, 3])


def _dbar_coeffs(d: np.ndarray, n: int) -> np.ndarray:
    """Real-generator coefficients (4n, 4) of the d-tilde 1-form from partials (..., 4n, 4)."""
    a = d[..., 0] + 1j * d[..., 1]
    b = d[..., 2] + 1j * d[..., 3]
    alpha = np.zeros_like(a)
    beta = np.zeros_like(b)
    for s in range(n):
        for xr, yr, sgn in ((4 * s, 4 * s + 1, 1), (4 * s + 2, 4 * s + 3, -1)):
            # w = x + sgn*i*y; the dwbar part of dh for complex h
            dbar_a = 0.5 * (a[..., xr] + sgn * 1j * a[..., yr])
            alpha[..., xr] = dbar_a
            alpha[..., yr] = -sgn * 1j * dbar_a
            dbar_b = 0.5 * (b[..., xr] + sgn * 1j * b[..., yr])
            beta[..., xr] = b[..., xr] - dbar_b
            beta[..., yr] = b[..., yr] + sgn * 1j * dbar_b
    # coefficient alpha + beta j as a quaternion
    return from_channels(alpha, beta)


def dbar_form(f: HFunction, n: int = 1, h: float = 1e-5, richardson: bool = False) -> FormField:
    """The d-tilde 1-form of f: (dbar f11) + (d f12) j in real generators.

    Zero exactly when f is holomorphic; it is the 1-form consumed by the
    volume operator in the representation f = B_bd f - B_U (d~ f).
    """
    D = 4 * n

    def ev(x):
        x = np.asarray(x, dtype=float)
        pts = as_hpoint(x, n)
        shifts = np.eye(D).reshape(D, n, 4)

        def central(step):
            plus = np.asarray(f(pts[..., None, :, :] + step * shifts), dtype=float)
            minus = np.asarray(f(pts[..., None, :, :] - step * shifts), dtype=float)
            return (plus - minus) / (2 * step)

        d = central(h)
        if richardson:
            d = (4 * central(h / 2) - d) / 3
        coef = _dbar_coeffs(d, n)
        return FormValue(D, {(p,): coef[..., p, :] for p in range(D)})

    return FormField(ev, D, 1)


def dbar_form_exact(partials: Callable[[np.ndarray], np.ndarray], n: int = 1) -> FormField:
    """Same as :func:`dbar_form` from analytic partials (..., 4n, 4)."""
    D = 4 * n

    def ev(x):
        coef = _dbar_coeffs(np.asarray(partials(as_hpoint(np.asarray(x, dtype=float), n))), n)
        return FormValue(D, {(p,): coef[..., p, :] for p in range(D)})

    return FormField(ev, D, 1)


@dataclass(frozen=True)
class CompatReport:
    max_residual: float
    tol: float
    pairs: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol


def compat_check(fs: Sequence[HFunction], grid, h: float = 1e-4, tol: float = 1e-6) -> CompatReport:
    """max over grid of |d~_k f_j - d~_j f_k| using :func:`dbar_apply`."""
    n = len(fs)
    if n < 2:
        raise ValueError("compatibility needs at least two components")
    grid = np.asarray(grid, dtype=float).reshape(-1, n, 4)
    worst = 0.0
    pairs = []
    for j in range(n):
        for k in range(j + 1, n):
            m = 0.0
            for z in grid:
                r = dbar_apply(fs[j], z, k, h) - dbar_apply(fs[k], z, j, h)
                m = max(m, float(np.linalg.norm(r)))
            pairs.append((j, k, m))
            worst = max(worst, m)
    return CompatReport(worst, tol, pairs)


def dbar_potential(g: HFunction, slot: int, h: float = 1e-4) -> HFunction:
    """z -> dbar_apply(g, z, slot) as a pointwise function (for compatible data)."""

    def f(x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape((-1,) + x.shape[-2:])
        out = np.array([dbar_apply(g, p, slot, h) for p in flat])
        return out.reshape(x.shape[:-2] + (4,))

    return f


# --- operator field ---------------------------------------------------------------

@dataclass(frozen=True)
class OperatorField:
    """Components indexed by basis unit; ``components['e']`` is the function itself."""

    components: dict

    @staticmethod
    def lift(f: HFunction) -> "OperatorField":
        zero = lambda x: np.zeros(np.asarray(x).shape[:-2] + (4,))
        return OperatorField({"e": f, "i": zero, "j": zero, "k": zero})

    @property
    def base(self) -> HFunction:
        return self.components["e"]

    def __call__(self, x):
        return self.base(x)


# --- solver ------------------------------------------------------------------------

def _slice_cauchy(f: HFunction, dom: DomainSpec, z, q: QuadratureSpec, slot: int = 0) -> np.ndarray:
    """(1/pi) int over the complex t-line of ``slot`` through z of f(zeta)(z - zeta)^{-1} dA."""
    z = np.asarray(z, dtype=float).reshape(dom.n, 4)
    nth = q.nodes
    nr = q.radial_nodes or q.nodes
    th = 2 * math.pi * np.arange(nth) / nth
    dirs = np.zeros((nth, dom.n, 4))
    dirs[:, slot, 0] = np.cos(th)
    dirs[:, slot, 1] = np.sin(th)
    R = dom.ray_exit(np.broadcast_to(as_real(z), (nth, dom.dim)), dirs.reshape(nth, -1))
    t, wt = _num.gauss_legendre(nr, 0.0, 1.0)
    r = t[:, None] * R[None, :]  # (nr, nth)
    pts = z + r[..., None, None] * dirs[None]
    fv = np.asarray(f(pts), dtype=float)
    # (z - zeta)^{-1} dA = -exp(-i th) dr dth in polar coordinates about z
    rot = np.stack([-np.cos(th), np.sin(th), 0 * th, 0 * th], axis=-1)
    vals = qmul(fv, rot[None]) * (R[None, :, None] * wt[:, None, None])
    return vals.sum(axis=(0, 1)) * (2 * math.pi / nth) / math.pi


def _support_check(f: HFunction, dom: DomainSpec, q: QuadratureSpec, tol: float = 1e-12):
    x, _, _ = dom.boundary_nodes(QuadratureSpec(nodes=max(6, min(q.nodes, 12))))
    v = np.asarray(f(as_hpoint(x, dom.n)), dtype=float)
    if np.max(np.abs(v)) > tol:
        raise SupportError("data does not vanish on the domain boundary")


def dbar_solve(f: HFunction, dom: DomainSpec, z, q: QuadratureSpec | None = None,
               method: str = "slice", check_support: bool = True) -> np.ndarray:
    """Solution of d~u = f evaluated at z, for f supported inside dom.

    ``slice`` (default) takes the Cauchy transform of f along the t-line of
    the first slot, so df11/dtbar + (df12/dt) j of u reproduces f.
    ``kernel`` evaluates -B_U of the 1-form f11 dtbar + (f12 dt) j with the
    Bochner-Martinelli kernel; it solves only for d-bar-closed data.
    """
    q = q or QuadratureSpec(nodes=64)
    if check_support:
        _support_check(f, dom, q)
    if method == "slice":
        return _slice_cauchy(f, dom, z, q)
    if method == "kernel":
        D = dom.dim

        def ev(x):
            fv = np.asarray(f(as_hpoint(np.asarray(x, dtype=float), dom.n)), dtype=float)
            a = fv[..., 0] + 1j * fv[..., 1]
            b = fv[..., 2] + 1j * fv[..., 3]
            # a dtbar + (b dt) j in slot 0
            return FormValue(D, {
                (0,): from_channels(a, b),
                (1,): from_channels(-1j * a, 1j * b),
            })

        return -bm_volume(FormField(ev, D, 1), dom, z, q)
    raise ValueError(f"unknown method {method!r}")


def dbar_solve_convex(f: HFunction, rho: Callable[[np.ndarray], np.ndarray], z, q: QuadratureSpec | None = None,
                      n: int | None = None, r_max: float = 10.0) -> np.ndarray:
    """Slice solution on {xi : rho(xi, eta) < 0} through z; no support condition."""
    q = q or QuadratureSpec(nodes=64)
    z = np.atleast_2d(np.asarray(z, dtype=float))
    n = n or z.shape[0]
    if float(np.asarray(rho(z))) >= 0:
        raise SupportError("slice domain is empty at this point")
    dom = DomainSpec.sublevel(rho, n, center=z, r_max=r_max)
    return _slice_cauchy(f, dom, z, q)


# --- corpus --------------------------------------------------------------------------

def _tu(x):
    x = np.asarray(x, dtype=float)
    t, u = channels(x)
    return t, u


def constant(c) -> HFunction:
    c = np.asarray(c, dtype=float)
    return lambda x: np.broadcast_to(c, np.asarray(x).shape[:-2] + (4,)).copy()


def affine(a, b, c) -> HFunction:
    """z -> a z b + c on the first slot; holomorphic when b is in span{e, i}."""
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    return lambda x: qmul(qmul(a, np.asarray(x, dtype=float)[..., 0, :]), b) + c


def from_pair(g11: Callable, g12: Callable) -> HFunction:
    """Function with channels f11 = g11(t, u), f12 = g12(t, u), summed over slots."""

    def f(x):
        t, u = _tu(x)
        return from_channels(g11(t, u).sum(axis=-1), g12(t, u).sum(axis=-1))

    return f


def corpus(n: int = 1) -> dict[str, HFunction]:
    """Holomorphic test functions certified by the matrix-model criterion."""
    a = np.array([0.3, -0.2, 0.5, 0.1])
    b = np.array([0.7, 0.4, 0.0, 0.0])
    c = np.array([0.1, 0.2, -0.3, 0.4])
    return {
        "const": constant([0.3, -1.2, 0.7, 2.0]),
        "azb+c": affine(a, b, c),
        "pair(t,2u)": from_pair(lambda t, u: t, lambda t, u: 2 * u),
        "pair(t^2,u*tbar)": from_pair(lambda t, u: t * t, lambda t, u: u * np.conj(t)),
        "pair(exp(t)ubar,2u+tbar^2)": from_pair(lambda t, u: np.exp(t) * np.conj(u),
                                                lambda t, u: 2 * u + np.conj(t) ** 2),
    }


def contrasts() -> dict[str, HFunction]:
    """Non-holomorphic functions."""
    return {
        "conj": lambda x: np.asarray(x, dtype=float)[..., 0, :] * np.array([1.0, -1, -1, -1]),
        "norm2": lambda x: np.sum(np.asarray(x, dtype=float) ** 2, axis=(-1, -2))[..., None] * E,
    }


def radial_bump(center=None, radius: float = 0.6, amp=None, n: int = 1) -> HFunction:
    """Smooth compactly supported bump amp * exp(1 - 1/(1 - |z-c|^2/r^2))."""
    c = np.zeros((n, 4)) if center is None else np.asarray(center, dtype=float).reshape(n, 4)
    amp = np.array([1.0, 0.5, -0.25, 0.75]) if amp is None else np.asarray(amp, dtype=float)

    def f(x):
        s = np.sum((np.asarray(x, dtype=float) - c) ** 2, axis=(-1, -2)) / radius ** 2
        inside = s < 1
        val = np.where(inside, np.exp(1 - 1 / np.where(inside, 1 - s, 1.0)), 0.0)
        return val[..., None] * amp

    return f


def residual_csv(rows: list[dict], nodes: int | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["point", "slot", "channel", "residual", "h", "nodes"])
    for r in rows:
        w.writerow([" ".join(f"{v:.17g}" for v in r["point"]), r.get("slot", 0), r["channel"],
                    f"{r['residual']:.17g}", r["h"], "" if nodes is None else nodes])
    return buf.getvalue()

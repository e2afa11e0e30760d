"""Kernel forms on H^n.

Complex coordinates: slot l of a quaternion point carries ``t_l = x_{4l} + i x_{4l+1}``
and ``u_l = x_{4l+2} + i x_{4l+3}``.  The reproducing kernels work in the
coordinates ``w = (t_1, conj(u_1), ..., t_n, conj(u_n))`` of C^{2n}; complex
numbers sit in span{e, i} of H.  With these coordinates the matrix-model
holomorphic class (``f11`` holomorphic, ``f12`` antiholomorphic in ``w``) is
reproduced exactly, because ``f12 j K = f12 conj(K) j``.

Generators: a form over zeta alone uses ``4n`` generators; paired forms use
``8n`` (zeta block first, then z); homotopy forms append one generator for
lambda after the zeta block.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _num
from .forms import FormValue, dquat, wedge
from .quat import BASIS, E, I, J, qconj, qinv, qmul, scalar_product

ZERO = np.zeros(4)


class AdmissibilityError(ValueError):
    """A Leray map denominator fell below tolerance."""


class KernelSingularity(ValueError):
    pass


# --- complex coordinate forms -------------------------------------------------

def dw(k: int, dim: int, conj: bool = False, offset: int = 0) -> FormValue:
    """d w_k (or d conj(w_k)) with w_{2l} = t_l and w_{2l+1} = conj(u_l)."""
    l, kind = divmod(k, 2)
    base = offset + 4 * l + 2 * kind
    sign = -1.0 if kind == 1 else 1.0
    if conj:
        sign = -sign
    return FormValue(dim, {(base,): E.copy(), (base + 1,): sign * I})


def dalpha(slot: int, dim: int, conj: bool = False, offset: int = 0) -> FormValue:
    """d alpha with zeta = alpha e + beta j, alpha = t."""
    base = offset + 4 * slot
    return FormValue(dim, {(base,): E.copy(), (base + 1,): (-I if conj else I)})


def dbeta(slot: int, dim: int, conj: bool = False, offset: int = 0) -> FormValue:
    """d beta with beta = u."""
    base = offset + 4 * slot + 2
    return FormValue(dim, {(base,): E.copy(), (base + 1,): (-I if conj else I)})


def w_coords(x) -> np.ndarray:
    """Quaternion points (..., n, 4) -> complex coordinates w as (..., 2n, 4)."""
    x = np.asarray(x)
    zero = x[..., 0] * 0
    t = np.stack([x[..., 0], x[..., 1], zero, zero], axis=-1)
    ub = np.stack([x[..., 2], -x[..., 3], zero, zero], axis=-1)
    out = np.stack([t, ub], axis=-2)
    return out.reshape(x.shape[:-2] + (2 * x.shape[-2], 4))


def section_of(q) -> np.ndarray:
    """Complex section s(q) with sum_k s_k w_k(d) = complex part of <q; d>."""
    q = np.asarray(q)
    zero = q[..., 0] * 0
    s_t = np.stack([q[..., 0], -q[..., 1], zero, zero], axis=-1)
    s_u = np.stack([q[..., 2], q[..., 3], zero, zero], axis=-1)
    out = np.stack([s_t, s_u], axis=-2)
    return out.reshape(q.shape[:-2] + (2 * q.shape[-2], 4))


@functools.lru_cache(maxsize=None)
def _volume_coefficient(n: int) -> float:
    N = 2 * n
    dim = 4 * n
    form = wedge(*[dw(k, dim, conj=True) for k in range(N)], *[dw(k, dim) for k in range(N)])
    top = form.top()
    return float(top[0])


def kernel_constant(n: int, like=None):
    """Constant so that the complex Bochner-Martinelli form integrates to e."""
    N = 2 * n
    pi = _num.pi_like(like) if like is not None else math.pi
    return math.factorial(N - 1) / (pi ** N * _num.const_like(_volume_coefficient(n), like if like is not None else 0.0))


@functools.lru_cache(maxsize=None)
def _bm_blocks(n: int, variant: str) -> tuple[FormValue, ...]:
    """Constant forms (wedge_{j != k} dwbar_j) ^ dW for each k."""
    N = 2 * n
    if variant == "zeta":
        dim = 4 * n
        dwb = [dw(k, dim, conj=True) for k in range(N)]
        dW = wedge(*[dw(k, dim) for k in range(N)])
    else:
        dim = 8 * n
        dwb = [dw(k, dim, conj=True) - dw(k, dim, conj=True, offset=4 * n) for k in range(N)]
        if variant == "paired":
            dW = wedge(*[dw(k, dim) for k in range(N)])
        elif variant == "bar":
            dW = wedge(*[dw(k, dim) - dw(k, dim, offset=4 * n) for k in range(N)])
        else:
            raise ValueError(f"unknown kernel variant {variant!r}")
    blocks = []
    for k in range(N):
        rest = [dwb[j] for j in range(N) if j != k]
        blocks.append(wedge(*rest, dW) if rest else dW)
    return tuple(blocks)


def _bm_from_diff(d: np.ndarray, n: int, variant: str) -> FormValue:
    wbar = qconj(w_coords(d))  # conj of complex numbers in span{e,i}
    r2 = (d * d).sum(axis=(-1, -2))
    if np.any(np.asarray(r2 == 0)):
        raise KernelSingularity("kernel evaluated on the diagonal zeta = z")
    N = 2 * n
    scale = kernel_constant(n, like=r2) * r2 ** (-N)
    blocks = _bm_blocks(n, variant)
    out = None
    for k, block in enumerate(blocks):
        coef = wbar[..., k, :] * scale[..., None]
        term = block.lmul(coef if k % 2 == 0 else -coef)
        out = term if out is None else out + term
    return out


def theta_z(zeta, z, n: int | None = None) -> FormValue:
    """Reproducing kernel in zeta (degree 4n-1 over 4n generators)."""
    zeta, z = np.asarray(zeta), np.asarray(z)
    n = zeta.shape[-2] if n is None else n
    return _bm_from_diff(zeta - z, n, "zeta")


def theta_pair(zeta, z, n: int | None = None, variant: str = "paired") -> FormValue:
    """Kernel over 8n generators (zeta block, then z block).

    ``paired``: conjugate differentials of zeta - z, holomorphic ones of zeta.
    ``bar``: all differentials of zeta - z; closed in (zeta, z) jointly.
    """
    zeta, z = np.asarray(zeta), np.asarray(z)
    n = zeta.shape[-2] if n is None else n
    return _bm_from_diff(zeta - z, n, variant)


def kernel(kind: str, zeta, z, n: int | None = None, leray: "LerayMap | None" = None, lam=None) -> FormValue:
    """Dispatch by kernel name: theta_z, theta, theta_bar, phi, phi_bar."""
    if kind == "theta_z":
        return theta_z(zeta, z, n)
    if kind == "theta":
        return theta_pair(zeta, z, n, "paired")
    if kind == "theta_bar":
        return theta_pair(zeta, z, n, "bar")
    if kind in ("phi", "phi_bar") and leray is None:
        raise ValueError(f"{kind} needs a Leray map")
    if kind == "phi":
        return leray_phi(leray, zeta, z)
    if kind == "phi_bar":
        return leray_phi_bar(leray, zeta, z, 0.0 if lam is None else lam)
    raise ValueError(f"unknown kernel kind {kind!r}")


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    n: int
    leray: "LerayMap | None" = None

    def degree(self) -> int:
        return 4 * self.n - 1

    def __call__(self, zeta, z, lam=None) -> FormValue:
        return kernel(self.kind, zeta, z, self.n, self.leray, lam)


# --- named quaternion forms ---------------------------------------------------

_KINDS = ("omega1", "nu1", "omega2", "nu2", "omega4", "omega4_bar")


def elementary_form(kind: str, slot: int, zeta, z=None, n: int | None = None, paired: bool = False) -> FormValue:
    """Named quaternion forms with coefficients frozen at (zeta, z).

    ``slot`` is 1-based.  Unpaired forms use 4n generators; ``paired=True``
    uses 8n generators and replaces d(zeta) by d(zeta) - d(z) where the
    paired definition calls for it.  ``omega4_bar`` is always paired.
    """
    if kind not in _KINDS:
        raise ValueError(f"unknown form kind {kind!r}")
    zeta = np.asarray(zeta, dtype=float)
    n = zeta.shape[-2] if n is None else n
    if not 1 <= slot <= n:
        raise ValueError(f"slot {slot} outside 1..{n}")
    s = slot - 1
    if kind == "omega4_bar":
        paired = True
    dim = 8 * n if paired else 4 * n
    dz = dquat(s, dim)
    dzt = dquat(s, dim, conj=True)
    if paired:
        ddz = dz - dquat(s, dim, offset=4 * n)
        ddzt = dzt - dquat(s, dim, conj=True, offset=4 * n)
    else:
        ddz, ddzt = dz, dzt
    zs = zeta[..., s, :]
    diff_t = qconj(zs - np.asarray(z, dtype=float)[..., s, :]) if z is not None else qconj(zs)

    def omega2(a, at):
        return at.lmul(J).rmul(J).wedge(a.lmul(J).rmul(J))

    if kind == "omega1":
        return ddzt.lmul(diff_t)
    if kind == "nu1":
        return ddzt.rmul(diff_t)
    if kind == "omega2":
        return omega2(ddz, ddzt)
    if kind == "nu2":
        return ddzt.wedge(ddzt)
    nu2 = ddzt.wedge(ddzt)
    if kind == "omega4":
        return nu2.wedge(omega2(dz, dzt))
    return nu2.wedge(omega2(ddz, ddzt))


def literal_kernel(zeta, z) -> FormValue:
    """Slot-sum assembly from omega_4 blocks and the bracket [omega_1 + nu_1] ^ omega_2.

    Kept as a diagnostic: its flux through a sphere around z vanishes, so it
    is not used for integration.
    """
    zeta, z = np.asarray(zeta, dtype=float), np.asarray(z, dtype=float)
    n = zeta.shape[-2]
    d = zeta - z
    r2 = (d * d).sum(axis=(-1, -2))
    scale = math.factorial(2 * n - 1) * (2 * np.pi) ** (-2 * n) * r2 ** (-2 * n)
    total = None
    for s in range(1, n + 1):
        parts = []
        for l in range(1, n + 1):
            if l == s:
                bracket = elementary_form("omega1", l, zeta, z) + elementary_form("nu1", l, zeta, z)
                parts.append(bracket.wedge(elementary_form("omega2", l, zeta)))
            else:
                parts.append(elementary_form("omega4", l, zeta))
        term = wedge(*parts)
        total = term if total is None else total + term
    return total * scale


# --- Leray maps ---------------------------------------------------------------

@dataclass(frozen=True)
class LerayMap:
    """Boundary distinguishing map psi(zeta, z) -> (..., n, 4).

    ``jac`` returns the real Jacobian d psi / d zeta as (..., 4n, 4n) (row =
    output coordinate, column = input coordinate).  Without it central
    differences with step ``h`` are used.
    """

    psi: Callable[[np.ndarray, np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    tol: float = 1e-8
    h: float = 1e-5
    name: str = "custom"

    def __call__(self, zeta, z) -> np.ndarray:
        return np.asarray(self.psi(zeta, z), dtype=float)

    def jacobian(self, zeta, z) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=float)
        if self.jac is not None:
            return np.asarray(self.jac(zeta, z), dtype=float)
        n = zeta.shape[-2]
        cols = []
        for p in range(4 * n):
            step = np.zeros((n, 4))
            step.reshape(-1)[p] = self.h
            dp = (self(zeta + step, z) - self(zeta - step, z)) / (2 * self.h)
            cols.append(dp.reshape(dp.shape[:-2] + (4 * n,)))
        return np.stack(cols, axis=-1)


def difference_map() -> LerayMap:
    """psi(zeta, z) = zeta - z."""

    def jac(zeta, z):
        D = 4 * zeta.shape[-2]
        return np.broadcast_to(np.eye(D), zeta.shape[:-2] + (D, D))

    return LerayMap(psi=lambda zeta, z: np.asarray(zeta, dtype=float) - np.asarray(z, dtype=float),
                    jac=jac, name="difference")


def v_rho(rho: Callable[[np.ndarray], np.ndarray], z, h: float | None = None) -> np.ndarray:
    """Gradient-assembled map sum_m (d rho . S_m) S_m per slot, by central differences."""
    z = np.asarray(z, dtype=float)
    n = z.shape[-2]
    if h is None:
        h = 1e-6 * (float(np.max(np.sqrt((z * z).sum(axis=(-1, -2))))) + 1.0)
    out = np.zeros(z.shape)
    for l in range(n):
        for m in range(4):
            step = np.zeros((n, 4))
            step[l, m] = h
            out[..., l, m] = (np.asarray(rho(z + step)) - np.asarray(rho(z - step))) / (2 * h)
    return out


def v_rho_map(rho: Callable[[np.ndarray], np.ndarray], grad: Callable | None = None,
              hess: Callable | None = None, h: float | None = None) -> LerayMap:
    """Leray map zeta -> v_rho(zeta); analytic gradient/Hessian used when given."""
    if grad is None:
        def psi(zeta, z):
            return v_rho(rho, zeta, h)
    else:
        def psi(zeta, z):
            return np.asarray(grad(np.asarray(zeta, dtype=float)), dtype=float)
    jac = None
    if hess is not None:
        def jac(zeta, z):
            return np.asarray(hess(np.asarray(zeta, dtype=float)), dtype=float)
    return LerayMap(psi=psi, jac=jac, name="v_rho", h=1e-5 if grad is not None else 1e-4)


def _denominator(psi_val, d, tol):
    den = scalar_product(d, psi_val)  # <zeta - z; psi>
    if np.any(np.sqrt((den * den).sum(axis=-1)) < tol):
        raise AdmissibilityError("<psi; zeta - z> vanishes to within tolerance")
    return den


def leray_eta(psi: LerayMap, zeta, z, lam) -> np.ndarray:
    """lambda (zeta-z)|zeta-z|^{-2} + (1-lambda) psi <zeta-z; psi>^{-1}."""
    zeta, z = np.asarray(zeta, dtype=float), np.asarray(z, dtype=float)
    d = zeta - z
    r2 = (d * d).sum(axis=(-1, -2))
    if np.any(r2 == 0):
        raise KernelSingularity("zeta = z")
    p = psi(zeta, z)
    den = _denominator(p, d, psi.tol)
    lam = np.asarray(lam, dtype=float)[..., None, None]
    return lam * d / r2[..., None, None] + (1 - lam) * qmul(p, qinv(den)[..., None, :])


def _psi_section_and_derivative(psi: LerayMap, zeta, z):
    """Section s_psi (..., N, 4) and its derivatives (..., 4n, N, 4) in zeta."""
    zeta, z = np.asarray(zeta, dtype=float), np.asarray(z, dtype=float)
    n = zeta.shape[-2]
    d = zeta - z
    p = psi(zeta, z)
    den = _denominator(p, d, psi.tol)
    c = qinv(den)  # <d; psi>^{-1}
    eta0 = qmul(p, c[..., None, :])
    jac = psi.jacobian(zeta, z)  # (..., 4n, 4n)
    dsec = []
    for q in range(4 * n):
        dpsi = jac[..., :, q].reshape(jac.shape[:-2] + (n, 4))
        unit = np.zeros((n, 4))
        unit.reshape(-1)[q] = 1.0
        dden = qmul(qconj(unit), p).sum(axis=-2) + qmul(qconj(d), dpsi).sum(axis=-2)
        dc = -qmul(c, qmul(dden, c))
        deta = qmul(dpsi, c[..., None, :]) + qmul(p, dc[..., None, :])
        dsec.append(section_of(deta))
    return section_of(eta0), np.stack(dsec, axis=-3)


def _bm_section_and_derivative(zeta, z):
    zeta, z = np.asarray(zeta, dtype=float), np.asarray(z, dtype=float)
    n = zeta.shape[-2]
    d = zeta - z
    r2 = (d * d).sum(axis=(-1, -2))
    eta1 = d / r2[..., None, None]
    dsec = []
    for q in range(4 * n):
        unit = np.zeros((n, 4))
        unit.reshape(-1)[q] = 1.0
        dr2 = 2 * d.reshape(d.shape[:-2] + (4 * n,))[..., q]
        deta = unit / r2[..., None, None] - d * (dr2 / r2 ** 2)[..., None, None]
        dsec.append(section_of(deta))
    return section_of(eta1), np.stack(dsec, axis=-3)


def cauchy_fantappie(s: np.ndarray, ds: list[FormValue], n: int, dim: int, like=None) -> FormValue:
    """kappa sum_k (-1)^k s_k (wedge_{j != k} ds_j) ^ dW for a section s with sum s_k w_k = 1."""
    N = 2 * n
    dW = wedge(*[dw(k, dim) for k in range(N)])
    kappa = kernel_constant(n, like=like)
    out = None
    for k in range(N):
        rest = [ds[j] for j in range(N) if j != k]
        block = wedge(*rest, dW) if rest else dW
        coef = s[..., k, :] * kappa
        term = block.lmul(coef if k % 2 == 0 else -coef)
        out = term if out is None else out + term
    return out


def _ds_forms(dsec: np.ndarray, dim: int, extra: dict[int, np.ndarray] | None = None) -> list[FormValue]:
    """Turn derivative arrays (..., D, N, 4) into a list of N one-forms."""
    D = dsec.shape[-3]
    N = dsec.shape[-2]
    forms = []
    for k in range(N):
        terms = {(q,): dsec[..., q, k, :] for q in range(D)}
        if extra:
            for g, arr in extra.items():
                terms[(g,)] = arr[..., k, :]
        forms.append(FormValue(dim, terms))
    return forms


def leray_phi(psi: LerayMap, zeta, z) -> FormValue:
    """Cauchy-Fantappie form of psi over the 4n zeta generators."""
    zeta = np.asarray(zeta, dtype=float)
    n = zeta.shape[-2]
    s, dsec = _psi_section_and_derivative(psi, zeta, z)
    return cauchy_fantappie(s, _ds_forms(dsec, 4 * n), n, 4 * n)


def leray_phi_bar(psi: LerayMap, zeta, z, lam) -> FormValue:
    """Homotopy form between the psi form (lambda = 0) and theta_z (lambda = 1).

    Lives on 4n + 1 generators; the last one is d lambda.
    """
    zeta = np.asarray(zeta, dtype=float)
    n = zeta.shape[-2]
    D = 4 * n
    s0, ds0 = _psi_section_and_derivative(psi, zeta, z)
    s1, ds1 = _bm_section_and_derivative(zeta, z)
    lam = np.asarray(lam, dtype=float)
    lam_s = lam[..., None, None]
    s = lam_s * s1 + (1 - lam_s) * s0
    ds = lam[..., None, None, None] * ds1 + (1 - lam[..., None, None, None]) * ds0
    forms = _ds_forms(ds, D + 1, extra={D: s1 - s0})
    return cauchy_fantappie(s, forms, n, D + 1)

"""Exterior algebra with quaternion coefficients over real generators.

A :class:`FormValue` is a finite sum of monomials ``a_I dx_I`` where ``I`` is a
strictly increasing tuple of 0-based generator indices and ``a_I`` a
quaternion (array with trailing axis 4, optional leading batch axes).  The
product of monomials is ``(a dx_I) ^ (b dx_J) = (a b) dx_I ^ dx_J``, so real
generators anticommute and coefficients multiply in order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .quat import BASIS, E, qconj, qmul


def _perm_sign(seq: Iterable[int]) -> int:
    seq = list(seq)
    sign = 1
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                sign = -sign
    return sign


class FormValue:
    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[tuple, np.ndarray] | None = None):
        self.dim = int(dim)
        self.terms: dict[tuple, np.ndarray] = {}
        for idx, coef in (terms or {}).items():
            idx = tuple(int(i) for i in idx)
            if list(idx) != sorted(set(idx)):
                sign = _perm_sign(idx)
                if len(set(idx)) < len(idx):
                    continue
                idx, coef = tuple(sorted(idx)), sign * np.asarray(coef)
            if idx and (idx[0] < 0 or idx[-1] >= self.dim):
                raise ValueError(f"generator index out of range in {idx}")
            self.terms[idx] = np.asarray(coef)

    # constructors
    @classmethod
    def zero(cls, dim: int) -> "FormValue":
        return cls(dim)

    @classmethod
    def scalar(cls, q, dim: int) -> "FormValue":
        return cls(dim, {(): np.asarray(q)})

    @classmethod
    def generator(cls, p: int, dim: int, coeff=E) -> "FormValue":
        return cls(dim, {(p,): np.asarray(coeff)})

    # inspection
    def degrees(self) -> set[int]:
        return {len(i) for i in self.terms}

    @property
    def degree(self) -> int:
        degs = self.degrees()
        if len(degs) > 1:
            raise ValueError(f"form has mixed degrees {sorted(degs)}")
        return degs.pop() if degs else 0

    def coefficient(self, idx) -> np.ndarray:
        idx = tuple(idx)
        if idx in self.terms:
            return self.terms[idx]
        shape = self.batch_shape() + (4,)
        return np.zeros(shape)

    def batch_shape(self) -> tuple:
        shapes = [c.shape[:-1] for c in self.terms.values()]
        return np.broadcast_shapes(*shapes) if shapes else ()

    def top(self) -> np.ndarray:
        return self.coefficient(tuple(range(self.dim)))

    def max_abs(self) -> float:
        if not self.terms:
            return 0.0
        return max(float(np.max(np.abs(np.asarray(c, dtype=float)))) for c in self.terms.values())

    def allclose(self, other: "FormValue", tol: float = 1e-12) -> bool:
        return (self - other).max_abs() <= tol

    # algebra
    def _combine(self, other: "FormValue", sign: float) -> "FormValue":
        if self.dim != other.dim:
            raise ValueError("forms live over different generator counts")
        out = dict(self.terms)
        for idx, c in other.terms.items():
            out[idx] = out[idx] + sign * c if idx in out else sign * c
        return FormValue(self.dim, out)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return FormValue(self.dim, {i: -c for i, c in self.terms.items()})

    def __mul__(self, s):
        """Real scalar (or real batch array) scaling."""
        s = np.asarray(s)
        return FormValue(self.dim, {i: c * s[..., None] for i, c in self.terms.items()})

    __rmul__ = __mul__

    def lmul(self, q) -> "FormValue":
        return FormValue(self.dim, {i: qmul(q, c) for i, c in self.terms.items()})

    def rmul(self, q) -> "FormValue":
        return FormValue(self.dim, {i: qmul(c, q) for i, c in self.terms.items()})

    def conj(self) -> "FormValue":
        return FormValue(self.dim, {i: qconj(c) for i, c in self.terms.items()})

    def wedge(self, other: "FormValue") -> "FormValue":
        if self.dim != other.dim:
            raise ValueError("forms live over different generator counts")
        out: dict[tuple, np.ndarray] = {}
        for ia, ca in self.terms.items():
            sa = set(ia)
            for ib, cb in other.terms.items():
                if sa.intersection(ib):
                    continue
                merged = ia + ib
                sign = _perm_sign(merged)
                key = tuple(sorted(merged))
                prod = qmul(ca, cb)
                prod = prod if sign > 0 else -prod
                out[key] = out[key] + prod if key in out else prod
        return FormValue(self.dim, out)

    __xor__ = wedge

    def without(self, generators: Iterable[int]) -> "FormValue":
        """Drop every monomial that contains one of ``generators``."""
        g = set(generators)
        return FormValue(self.dim, {i: c for i, c in self.terms.items() if not g.intersection(i)})

    def restrict_dim(self, dim: int) -> "FormValue":
        """Keep monomials over the first ``dim`` generators only."""
        return FormValue(dim, {i: c for i, c in self.terms.items() if not i or i[-1] < dim})

    def extend_dim(self, dim: int) -> "FormValue":
        return FormValue(dim, self.terms)

    def dump(self, digits: int = 17) -> str:
        """Sorted text listing, 1-based generators, coefficients as 4-tuples."""
        lines = []
        for idx in sorted(self.terms, key=lambda t: (len(t), t)):
            c = np.asarray(self.terms[idx], dtype=float)
            if c.ndim != 1:
                raise ValueError("dump expects an unbatched form")
            if not np.any(c):
                continue
            mono = "^".join(f"dx{i + 1}" for i in idx) if idx else "1"
            coeffs = ", ".join(f"{v:.{digits}g}" for v in c + 0.0)
            lines.append(f"{mono}: ({coeffs})")
        return "\n".join(lines)

    def __repr__(self):
        return f"FormValue(dim={self.dim}, terms={len(self.terms)}, degrees={sorted(self.degrees())})"


def wedge(*forms: FormValue) -> FormValue:
    out = forms[0]
    for f in forms[1:]:
        out = out.wedge(f)
    return out


def dquat(slot: int, dim: int, conj: bool = False, offset: int = 0) -> FormValue:
    """dzeta = e dx_{4s} + i dx_{4s+1} + j dx_{4s+2} + k dx_{4s+3} (0-based slot).

    ``offset`` shifts the generator block, e.g. to address z-differentials.
    """
    base = offset + 4 * slot
    if base + 4 > dim:
        raise ValueError(f"slot {slot} does not fit in {dim} generators")
    terms = {}
    for m, s in enumerate(BASIS):
        terms[(base + m,)] = qconj(s) if conj else s.copy()
    return FormValue(dim, terms)


@dataclass(frozen=True)
class FormField:
    """Point-dependent form: ``eval`` maps real points (..., dim) to FormValue."""

    eval: Callable[[np.ndarray], FormValue]
    dim: int
    degree: int

    def __call__(self, x) -> FormValue:
        return self.eval(np.asarray(x))


def ext_deriv(F: FormField | Callable[[np.ndarray], FormValue], p, h: float = 1e-5,
              richardson: bool | None = None) -> FormValue:
    """Central-difference exterior derivative at real point(s) ``p``.

    Richardson extrapolation (h, h/2) is used when requested, or by default
    when the coefficients at ``p`` exceed unit scale.
    """
    ev = F.eval if isinstance(F, FormField) else F
    p = np.asarray(p, dtype=float)
    base = ev(p)
    dim = base.dim
    if richardson is None:
        richardson = base.max_abs() > 1.0

    def partials(step):
        out = []
        for q in range(dim):
            shift = np.zeros(dim)
            shift[q] = step
            fp, fm = ev(p + shift), ev(p - shift)
            out.append((fp - fm) * (1.0 / (2 * step)))
        return out

    parts = partials(h)
    if richardson:
        fine = partials(h / 2)
        parts = [(f * 4.0 - c) * (1.0 / 3.0) for f, c in zip(fine, parts)]
    result = FormValue.zero(dim)
    for q, dF in enumerate(parts):
        result = result + FormValue.generator(q, dim).wedge(dF)
    return result


# --- patches and pullback -------------------------------------------------------

@dataclass(frozen=True)
class SurfacePatch:
    """k-dimensional parametrized patch s in [0,1]^k -> R^dim.

    ``jacobian`` returns d x / d s with shape (..., dim, k); when it is absent
    central differences of ``param`` are used.
    """

    k: int
    dim: int
    param: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    orientation: int = 1
    fd_step: float = 1e-6

    @property
    def analytic(self) -> bool:
        return self.jacobian is not None

    def jac(self, s) -> np.ndarray:
        s = np.asarray(s)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(s))
        cols = []
        for a in range(self.k):
            d = np.zeros(self.k)
            d[a] = self.fd_step
            cols.append((self.param(s + d) - self.param(s - d)) / (2 * self.fd_step))
        return np.stack(cols, axis=-1)


def _det(m: np.ndarray):
    k = m.shape[-1]
    if m.dtype != object:
        return np.linalg.det(m)
    if k == 1:
        return m[..., 0, 0]
    total = 0
    for c in range(k):
        minor = np.delete(np.delete(m, 0, axis=-2), c, axis=-1)
        term = m[..., 0, c] * _det(minor)
        total = total + term if c % 2 == 0 else total - term
    return total


def pullback_density(form: FormValue, jac: np.ndarray, orientation: int = 1) -> np.ndarray:
    """Coefficient of ds_1 ^ ... ^ ds_k of the pullback of ``form``."""
    k = jac.shape[-1]
    out = None
    for idx, coef in form.terms.items():
        if len(idx) != k:
            raise ValueError(f"degree {len(idx)} form on a {k}-dimensional patch")
        minor = jac[..., list(idx), :]
        det = _det(minor)
        term = coef * det[..., None]
        out = term if out is None else out + term
    if out is None:
        return np.zeros(jac.shape[:-2] + (4,))
    return out if orientation > 0 else -out


def pullback(F: FormField, patch: SurfacePatch) -> Callable[[np.ndarray], np.ndarray]:
    if F.degree != patch.k:
        raise ValueError(f"cannot pull back a {F.degree}-form onto a {patch.k}-dimensional patch")

    def density(s):
        s = np.asarray(s)
        x = patch.param(s)
        return pullback_density(F.eval(x), patch.jac(s), patch.orientation)

    return density


def flux_density(form: FormValue, normal: np.ndarray) -> np.ndarray:
    """Density of a (dim-1)-form against outward unit ``normal`` (..., dim).

    Equals the pullback density of ``form`` per unit surface area when the
    hypersurface carries the boundary orientation (outward normal first).
    """
    dim = form.dim
    out = None
    for p in range(dim):
        idx = tuple(q for q in range(dim) if q != p)
        if idx not in form.terms:
            continue
        term = form.terms[idx] * normal[..., p][..., None]
        term = term if p % 2 == 0 else -term
        out = term if out is None else out + term
    if out is None:
        return np.zeros(np.asarray(normal).shape[:-1] + (4,))
    return out


def all_monomials(dim: int, degree: int):
    return list(itertools.combinations(range(dim), degree))

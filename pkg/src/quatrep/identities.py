"""Exterior-algebra identities among the one-slot quaternion differentials.

With zeta = alpha e + beta j (alpha = t, beta = u complex) each identity is a
pair (lhs, rhs) of forms over four real generators.  The coefficient forms
are constant, so pointwise evaluation at random points only varies the
frozen coefficients of the elementary forms; the residual is reported as the
maximum over all points.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .forms import FormValue, dquat, wedge
from .kernels import dalpha, dbeta, elementary_form
from .quat import E, J

DIM = 4


def _basics(zeta: np.ndarray) -> dict[str, FormValue]:
    p = zeta.reshape(1, 4)
    return {
        "dz": dquat(0, DIM),
        "dzt": dquat(0, DIM, conj=True),
        "da": dalpha(0, DIM),
        "dab": dalpha(0, DIM, conj=True),
        "db": dbeta(0, DIM),
        "dbb": dbeta(0, DIM, conj=True),
        "nu2": elementary_form("nu2", 1, p),
        "omega2": elementary_form("omega2", 1, p),
    }


def _jl(F: FormValue) -> FormValue:
    return F.lmul(J)


def _jlr(F: FormValue) -> FormValue:
    return F.lmul(J).rmul(J)


def _vol() -> FormValue:
    return FormValue(DIM, {(0, 1, 2, 3): E.copy()})


def _zero() -> FormValue:
    return FormValue.zero(DIM)


IDENTITIES: dict[str, Callable[[dict], tuple[FormValue, FormValue]]] = {
    "dbeta j ^ dbetabar j = 0": lambda b: (b["db"].rmul(J).wedge(b["dbb"].rmul(J)), _zero()),
    "nu2 expansion": lambda b: (
        b["nu2"],
        -(b["dab"].wedge(b["db"].rmul(J))) - b["db"].rmul(J).wedge(b["dab"]) - b["db"].wedge(b["dbb"]),
    ),
    "omega2 expansion": lambda b: (
        b["omega2"],
        b["da"].wedge(b["dab"]) + b["da"].wedge(b["dbb"]).rmul(2 * J) - b["db"].wedge(b["dbb"]),
    ),
    "dzeta ^ dzetat ^ omega2 = 0": lambda b: (wedge(b["dz"], b["dzt"], b["omega2"]), _zero()),
    "dzeta ^ dzetat expansion": lambda b: (
        b["dz"].wedge(b["dzt"]),
        b["da"].wedge(b["dab"]) - b["da"].wedge(b["db"]).rmul(2 * J) + b["db"].wedge(b["dbb"]),
    ),
    "nu2 ^ omega2 = 4 vol": lambda b: (b["nu2"].wedge(b["omega2"]), _vol() * 4.0),
    "nu2 ^ omega2 = -da^dab^db^dbb": lambda b: (
        b["nu2"].wedge(b["omega2"]), -wedge(b["da"], b["dab"], b["db"], b["dbb"])),
    "dz ^ j dzt ^ dzt ^ dz = 0": lambda b: (wedge(b["dz"], _jl(b["dzt"]), b["dzt"], b["dz"]), _zero()),
    "dz ^ dzt ^ j dzt ^ dz = 0": lambda b: (wedge(b["dz"], b["dzt"], _jl(b["dzt"]), b["dz"]), _zero()),
    "dz ^ dzt ^ dzt ^ j dz = 0": lambda b: (wedge(b["dz"], b["dzt"], b["dzt"], _jl(b["dz"])), _zero()),
    "dz ^ dzt ^ dzt ^ dz = 0": lambda b: (wedge(b["dz"], b["dzt"], b["dzt"], b["dz"]), _zero()),
    "dz ^ j dzt ^ j dzt ^ dz = 0": lambda b: (wedge(b["dz"], _jl(b["dzt"]), _jl(b["dzt"]), b["dz"]), _zero()),
    "dz ^ j dzt ^ j dzt j ^ j dz j = 0": lambda b: (
        wedge(b["dz"], _jl(b["dzt"]), _jlr(b["dzt"]), _jlr(b["dz"])), _zero()),
    "dz^4 = 0": lambda b: (wedge(b["dz"], b["dz"], b["dz"], b["dz"]), _zero()),
}


@dataclass(frozen=True)
class IdentityResult:
    name: str
    residual: float
    tol: float
    points: int

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol


def check_identities(points: int = 100, seed: int = 0, tol: float = 1e-12) -> list[IdentityResult]:
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((points, 4))
    worst = {name: 0.0 for name in IDENTITIES}
    for p in pts:
        b = _basics(p)
        for name, ident in IDENTITIES.items():
            lhs, rhs = ident(b)
            worst[name] = max(worst[name], (lhs - rhs).max_abs())
    return [IdentityResult(name, worst[name], tol, points) for name in IDENTITIES]


def identity_table(points: int = 100, seed: int = 0, tol: float = 1e-12) -> tuple[list[IdentityResult], float]:
    t0 = time.perf_counter()
    res = check_identities(points, seed, tol)
    return res, time.perf_counter() - t0

"""Verification experiments shared by the command line and the test suite.

Each experiment takes a plain config dict and returns a :class:`Report` of
named checks.  Reports contain no timings or environment data so that
identical configs give byte-identical output.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import dbar as D
from . import geometry as G
from . import jacobi as JB
from .identities import check_identities
from .integration import (
    DomainSpec,
    QuadratureSpec,
    TorusSpec,
    bm_boundary,
    bm_volume,
    cauchy_line,
    kernel_normalization,
    leray_L,
    leray_R,
    torus_cauchy_green,
)
from .kernels import difference_map, leray_phi, theta_z, v_rho_map
from .quat import E, I, J, K, circle_path, delta_arg, qmul


@dataclass
class Check:
    name: str
    ref: str
    value: float
    tol: float
    passed: bool
    relation: str = "<="

    def as_dict(self) -> dict:
        return {"name": self.name, "ref": self.ref, "value": _f(self.value), "tol": _f(self.tol),
                "relation": self.relation, "passed": bool(self.passed)}


@dataclass
class Report:
    experiment: str
    config: dict
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # name -> (header, rows)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, ref: str, value: float, tol: float, relation: str = "<=") -> Check:
        ok = {"<=": value <= tol, ">=": value >= tol, "<": value < tol, ">": value > tol, "==": value == tol}[relation]
        c = Check(name, ref, float(value), float(tol), bool(ok), relation)
        self.checks.append(c)
        return c

    def to_json(self) -> str:
        payload = {
            "experiment": self.experiment,
            "config": _jsonable(self.config),
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "data": _jsonable(self.data),
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def table_csv(self, name: str) -> str:
        header, rows = self.tables[name]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()


def _f(v: float) -> float | str:
    v = float(v)
    if math.isnan(v) or math.isinf(v):
        return str(v)
    return v


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return _f(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


class ConfigError(ValueError):
    def __init__(self, message: str, allowed: list | None = None):
        super().__init__(message)
        self.allowed = allowed or []


def _merge(defaults: dict, cfg: dict | None) -> dict:
    out = dict(defaults)
    out.setdefault("seed", 0)
    for k, v in (cfg or {}).items():
        if k not in out:
            raise ConfigError(f"unknown config key {k!r}; expected one of {sorted(out)}", sorted(out))
        if v is not None:
            out[k] = v
    return out


def _ball_points(rng, count: int, rmax: float, n: int = 1) -> np.ndarray:
    pts = []
    while len(pts) < count:
        p = rng.uniform(-rmax, rmax, 4 * n)
        if np.linalg.norm(p) <= rmax:
            pts.append(p.reshape(n, 4))
    return np.array(pts)


def _norm2(x):
    return np.sum(np.asarray(x, dtype=float) ** 2, axis=(-1, -2))


def _sphere_rho(x):
    return _norm2(x) - 1.0


def _sphere_grad(x):
    return 2.0 * np.asarray(x, dtype=float)


# --- experiments ------------------------------------------------------------------

def verify_forms(cfg: dict | None = None) -> Report:
    c = _merge({"points": 100, "seed": 0, "tol": 1e-12}, cfg)
    rep = Report("verify-forms", c)
    rows = []
    for r in check_identities(c["points"], c["seed"], c["tol"]):
        rep.check(r.name, "one-slot differential identities", r.residual, c["tol"])
        rows.append([r.name, r.residual, int(r.passed)])
    rep.tables["identities"] = (["identity", "residual", "pass"], rows)
    return rep


def kernel_norm(cfg: dict | None = None) -> Report:
    c = _merge({"nodes_list": [8, 16, 32], "dps": 150, "eps": 1.0, "point": [0.1, 0.2, -0.1, 0.05],
                "tol": 1e-3, "nodes": None}, cfg)
    if c["nodes"]:
        N = int(c["nodes"])
        c["nodes_list"] = [max(2, N // 4), max(2, N // 2), N]
    z = np.asarray(c["point"], dtype=float)
    rows, mp_err, dbl_err = [], [], []
    for N in c["nodes_list"]:
        _, e_dbl = kernel_normalization(z, c["eps"], QuadratureSpec(nodes=N))
        e_mp = e_dbl
        if c["dps"]:
            _, e_mp = kernel_normalization(z, c["eps"], QuadratureSpec(nodes=N, dps=int(c["dps"])))
        rows.append([N, e_dbl, e_mp])
        dbl_err.append(e_dbl)
        mp_err.append(e_mp)
    rep = Report("kernel-norm", c)
    rep.tables["convergence"] = (["nodes", "error_double", "error_extended"], rows)
    rep.data["table"] = rows
    rep.check("normalization error at finest rule", "sphere integral of the kernel equals e", dbl_err[-1], c["tol"])
    step = max(mp_err[k + 1] - mp_err[k] for k in range(len(mp_err) - 1))
    rep.check("largest successive error change (extended precision)", "quadrature convergence", step, 0.0, "<")
    return rep


def _reproduction_tolerance(dom, pts, q):
    one = D.constant(E)
    errs = [float(np.linalg.norm(bm_boundary(one, dom, p, q) - E)) for p in pts]
    return max(errs), errs


def reproduce(cfg: dict | None = None) -> Report:
    c = _merge({"nodes": 32, "points": 20, "min_dist": 0.3, "seed": 0, "factor": 10.0,
                "leray": True, "leray_nodes": None, "tol": None}, cfg)
    rng = np.random.default_rng(c["seed"])
    dom = DomainSpec.ball(1)
    pts = _ball_points(rng, c["points"], 1.0 - c["min_dist"])
    q = QuadratureSpec(nodes=int(c["nodes"]))
    norm_err, _ = _reproduction_tolerance(dom, pts, q)
    tol = c["factor"] * norm_err if c["tol"] is None else float(c["tol"])
    rep = Report("reproduce", c)
    rep.data["normalization_error"] = norm_err
    rep.data["tolerance"] = tol
    rows = []
    for name, f in D.corpus().items():
        err = max(float(np.linalg.norm(bm_boundary(f, dom, p, q) - f(p[None])[0])) for p in pts)
        rows.append(["boundary", name, err])
        rep.check(f"boundary reproduction {name}", "boundary operator reproduces holomorphic functions", err, tol)
    for name, f in D.contrasts().items():
        err = min(float(np.linalg.norm(bm_boundary(f, dom, p, q) - f(p[None])[0])) for p in pts)
        rows.append(["boundary-contrast", name, err])
        rep.check(f"contrast {name} violates reproduction", "non-holomorphic contrast",
                  err, c["factor"] * tol, ">=")
    if c["leray"]:
        ql = QuadratureSpec(nodes=int(c["leray_nodes"] or c["nodes"]))
        psi = v_rho_map(_sphere_rho)
        for name, f in D.corpus().items():
            err = max(float(np.linalg.norm(leray_L(f, dom, psi, p, ql) - f(p[None])[0])) for p in pts)
            rows.append(["leray-v_rho", name, err])
            rep.check(f"Leray reproduction {name}", "Leray operator with the gradient map reproduces", err, tol)
    rep.tables["reproduction"] = (["operator", "function", "max_error"], rows)
    return rep


def mb_identity(cfg: dict | None = None) -> Report:
    c = _merge({"nodes": 24, "coarse_nodes": 12, "points": [[0.2, -0.1, 0.3, 0.15], [-0.4, 0.1, 0.0, 0.2]],
                "h": 1e-5, "tol": 5e-2}, cfg)
    dom = DomainSpec.ball(1)
    q = QuadratureSpec(nodes=int(c["nodes"]))
    qc = QuadratureSpec(nodes=int(c["coarse_nodes"]))
    rep = Report("mb-identity", c)
    rows = []
    for name, f in D.contrasts().items():
        for p in c["points"]:
            z = np.asarray(p, dtype=float).reshape(1, 4)
            fz = f(z[None])[0]
            g = D.dbar_form(f, h=c["h"])
            B = bm_boundary(f, dom, z, q)
            V = bm_volume(g, dom, z, q)
            res = float(np.linalg.norm(fz - B + V))
            quad = float(np.linalg.norm((bm_boundary(f, dom, z, qc) - bm_volume(g, dom, z, qc)) - (B - V)))
            fd = float(np.linalg.norm(bm_volume(D.dbar_form(f, h=2 * c["h"]), dom, z, q) - V))
            rows.append([name, " ".join(repr(float(v)) for v in z.reshape(-1)), res, quad, fd])
            rep.check(f"f - B_bd f + B_U d~f for {name} at {list(map(float, z.reshape(-1)))}",
                      "Bochner-Martinelli representation", res, c["tol"])
    rep.tables["budget"] = (["function", "point", "residual", "quadrature_estimate", "fd_estimate"], rows)
    rep.data["budget"] = rows
    return rep


def leray_identity(cfg: dict | None = None) -> Report:
    c = _merge({"nodes": 12, "samples": 100, "seed": 0, "point": [0.2, -0.1, 0.3, 0.15],
                "kernel_tol": 1e-9, "R_tol": 1e-12, "tol": 5e-2}, cfg)
    rng = np.random.default_rng(c["seed"])
    rep = Report("leray-identity", c)
    # pointwise kernel collapse for the difference map
    worst = 0.0
    psi0 = difference_map()
    for _ in range(c["samples"]):
        z = rng.normal(size=(1, 4)) * 0.5
        zeta = z + rng.normal(size=(1, 4))
        worst = max(worst, (leray_phi(psi0, zeta, z) - theta_z(zeta, z)).max_abs())
    rep.check("Leray kernel of zeta - z equals theta_z", "collapse of the Leray form", worst, c["kernel_tol"])
    dom = DomainSpec.ball(1)
    z = np.asarray(c["point"], dtype=float).reshape(1, 4)
    q = QuadratureSpec(nodes=int(c["nodes"]))
    f = D.contrasts()["norm2"]
    g = D.dbar_form(f)
    r0 = float(np.max(np.abs(leray_R(g, dom, psi0, z, q))))
    rep.check("R operator of zeta - z vanishes", "homotopy term vanishes for the difference map", r0, c["R_tol"])
    psi = v_rho_map(_sphere_rho)
    fz = f(z[None])[0]
    L = leray_L(f, dom, psi, z, q)
    R = leray_R(g, dom, psi, z, q)
    V = bm_volume(g, dom, z, q)
    res = float(np.linalg.norm(fz - L + R + V))
    rep.data["terms"] = {"L": L, "R": R, "B_U": V, "f": fz}
    rep.check("f - L f + R d~f + B_U d~f", "Leray-Koppelman representation", res, c["tol"])
    return rep


def line_cauchy(cfg: dict | None = None) -> Report:
    c = _merge({"radius": 0.5, "point": [0.2, -0.1, 0.3, 0.15], "windings": [1, 2], "nodes": 512,
                "tol": 1e-6}, cfg)
    z = np.asarray(c["point"], dtype=float)
    axes = {"i": I, "j": J, "(i+j)/sqrt2": (I + J) / math.sqrt(2)}
    funcs = {"const": D.constant([0.3, -1.2, 0.7, 2.0]), "identity": lambda x: np.asarray(x)[..., 0, :]}
    q = QuadratureSpec(scheme="trapezoid", nodes=int(c["nodes"]))
    rep = Report("line-cauchy", c)
    rows = []
    for (an, ax), w, (fn, f) in itertools.product(axes.items(), c["windings"], funcs.items()):
        loop = circle_path(z, c["radius"], ax, w)
        M, nw = delta_arg(loop)
        val = cauchy_line(f, loop, z, M, round(nw), q)
        err = float(np.linalg.norm(val - f(z[None, None])[0]))
        rows.append([an, w, fn, round(nw), err])
        rep.check(f"{fn} axis {an} winding {w}", "line Cauchy formula", err, c["tol"])
    rep.tables["loops"] = (["axis", "winding", "function", "winding_detected", "error"], rows)
    return rep


def torus_cg(cfg: dict | None = None) -> Report:
    c = _merge({"radii": [0.1, 0.15, 0.2], "point": [0.2, -0.1, 0.3, 0.15], "nodes": 24, "tol": 1e-6,
                "volume_tol": 5e-3}, cfg)
    z = np.asarray(c["point"], dtype=float)
    T = TorusSpec(tuple(c["radii"]), (I, J, K))
    q = QuadratureSpec(scheme="trapezoid", nodes=int(c["nodes"]))
    rep = Report("torus-cg", c)
    rows = []
    fams = dict(D.corpus())
    for name, f in fams.items():
        r = torus_cauchy_green(f, T, z, q, volume=True)
        fz = f(z[None, None])[0]
        eb = float(np.linalg.norm(r["boundary"] - fz))
        ev = float(np.linalg.norm(r["value"] - fz))
        rows.append([name, eb, ev])
        if name in ("const", "azb+c", "pair(t,2u)"):
            rep.check(f"boundary term reproduces {name}", "triple-loop boundary term", eb, c["tol"])
        rep.check(f"boundary plus volume reproduces {name}", "triple-loop Cauchy-Green", ev, c["volume_tol"])
    f = D.contrasts()["norm2"]
    r = torus_cauchy_green(f, T, z, q, volume=True)
    fz = f(z[None, None])[0]
    eb = float(np.linalg.norm(r["boundary"] - fz))
    ev = float(np.linalg.norm(r["value"] - fz))
    rows.append(["norm2", eb, ev])
    rep.check("boundary term misses non-holomorphic |z|^2", "contrast", eb, 10 * c["tol"], ">=")
    rep.check("boundary plus volume reproduces |z|^2", "triple-loop Cauchy-Green", ev, c["volume_tol"])
    rep.tables["torus"] = (["function", "boundary_error", "total_error"], rows)
    return rep


def dbar_solve_study(cfg: dict | None = None) -> Report:
    c = _merge({"nodes": 64, "grid": 5, "half_width": 0.5, "bump_radius": 0.6, "domain_radius": 2.0,
                "h": 1e-4, "tol": 5e-2, "far_tol": 1e-3, "lin_tol": 1e-10, "seed": 0}, cfg)
    dom = DomainSpec.ball(1, radius=c["domain_radius"])
    q = QuadratureSpec(nodes=int(c["nodes"]))
    f = D.radial_bump(radius=c["bump_radius"])

    def u_of(fun):
        def u(x):
            x = np.asarray(x, dtype=float)
            flat = x.reshape(-1, 1, 4)
            return np.array([D.dbar_solve(fun, dom, p, q, check_support=False) for p in flat]).reshape(x.shape[:-2] + (4,))
        return u

    u = u_of(f)
    D.dbar_solve(f, dom, np.zeros((1, 4)), q)  # support check
    g1 = np.linspace(-c["half_width"], c["half_width"], int(c["grid"]))
    res, rows = 0.0, []
    for p in itertools.product(g1, repeat=4):
        z = np.array(p).reshape(1, 4)
        r = float(np.linalg.norm(D.dbar_apply(u, z, 0, c["h"]) - f(z[None])[0]))
        res = max(res, r)
    rep = Report("dbar-solve", c)
    rep.check("sup |d~u - f| on the test grid", "slice solution of the d-bar equation", res, c["tol"])
    far_pts = [[0.0, 0.0, 0.8, 0.0], [0.85, 0.0, 0.0, 0.1], [0.0, 0.7, 0.5, 0.0], [-0.6, -0.6, 0.2, 0.0]]
    far = 0.0
    for p in far_pts:
        z = np.array(p).reshape(1, 4)
        v = float(np.linalg.norm(D.dbar_apply(u, z, 0, c["h"])))
        cr = D.cr_residual(u, z, c["h"])
        rows.append([" ".join(repr(x) for x in p), v] + [float(abs(cr.values[0, k])) for k in range(4)])
        far = max(far, v)
    rep.tables["far_field"] = (["point", "dbar_apply"] + list(D.CHANNELS), rows)
    rep.check("far-field slot derivative of u", "solution holomorphic off the support", far, c["far_tol"])
    f2 = D.radial_bump(center=[0.1, 0.0, 0.0, 0.0], radius=0.4, amp=[0.0, 1.0, 0.0, 2.0])
    rng = np.random.default_rng(c["seed"])
    lin = 0.0
    for z in _ball_points(rng, 5, 0.7):
        a = D.dbar_solve(f, dom, z, q)
        b = D.dbar_solve(f2, dom, z, q)
        s = D.dbar_solve(lambda x: f(x) + f2(x), dom, z, q)
        lin = max(lin, float(np.max(np.abs(a + b - s))))
    rep.check("linearity", "linearity of the solution operator", lin, c["lin_tol"])
    # convex variant on the unit ball, no support condition
    g = D.constant([1.0, 0.0, 0.5, 0.0])
    uc = lambda x: np.array([D.dbar_solve_convex(g, _sphere_rho, p, q) for p in np.asarray(x).reshape(-1, 1, 4)]
                            ).reshape(np.asarray(x).shape[:-2] + (4,))
    rc = 0.0
    for z in _ball_points(rng, 5, 0.5):
        rc = max(rc, float(np.linalg.norm(D.dbar_apply(uc, z, 0, c["h"]) - g(z[None])[0])))
    rep.check("convex-domain slice solution residual", "solution on strictly convex domains", rc, c["tol"])
    return rep


def compat(cfg: dict | None = None) -> Report:
    c = _merge({"points": 10, "seed": 0, "tol": 1e-5, "h": 1e-4}, cfg)
    rng = np.random.default_rng(c["seed"])
    grid = rng.uniform(-0.5, 0.5, size=(c["points"], 2, 4))

    def pot(x):
        x = np.asarray(x, dtype=float)
        t1 = x[..., 0, 0] + 1j * x[..., 0, 1]
        t2 = x[..., 1, 0] + 1j * x[..., 1, 1]
        val = np.abs(t1) ** 2 * np.conj(t2) + np.sin(x[..., 0, 2]) * np.abs(t2) ** 2
        return np.stack([val.real, val.imag, 0 * val.real, 0 * val.real], axis=-1)

    def sol(slot):
        def f(x):
            x = np.asarray(x, dtype=float)
            flat = x.reshape((-1,) + x.shape[-2:])
            return np.array([D.dbar_apply(pot, p, slot, 1e-3) for p in flat]).reshape(x.shape[:-2] + (4,))
        return f

    rep = Report("compat", c)
    good = D.compat_check([sol(0), sol(1)], grid, c["h"], c["tol"])
    rep.check("derivatives of a potential are compatible", "compatibility condition", good.max_residual, c["tol"])
    def conj_t2(x):
        x = np.asarray(x, dtype=float)
        zero = 0 * x[..., 1, 0]
        return np.stack([x[..., 1, 0], -x[..., 1, 1], zero, zero], axis=-1)

    bad = D.compat_check([conj_t2, D.constant(np.zeros(4))], grid, c["h"], c["tol"])
    rep.check("incompatible data detected", "compatibility condition", bad.max_residual, 10 * c["tol"], ">=")
    zero = D.compat_check([D.constant(np.zeros(4))] * 2, grid, c["h"], c["tol"])
    rep.check("zero data compatible", "compatibility condition", zero.max_residual, c["tol"])
    return rep


def hull(cfg: dict | None = None) -> Report:
    c = _merge({"sets": 20, "points_per_set": 8, "grid": 7, "half_width": 2.0, "seed": 0, "tol": 1e-12}, cfg)
    rng = np.random.default_rng(c["seed"])
    g1 = np.linspace(-c["half_width"], c["half_width"], int(c["grid"]))
    grid = np.array(list(itertools.product(g1, repeat=4))).reshape(-1, 1, 4)
    rep = Report("hull", c)
    viol, cert_bad, members, worst_w, worst_sup = 0, 0, [], 0.0, 0.0
    for _ in range(c["sets"]):
        Kset = rng.normal(size=(int(c["points_per_set"]), 1, 4))
        hr = G.hull_estimate(Kset, grid, tol=c["tol"])
        viol += len(hr.hull_violations)
        cert_bad += int(not hr.certificates_ok(c["tol"]))
        members.append(len(hr.members))
        for cert in hr.registry:
            worst_w = max(worst_w, abs(cert["abs_f_w"] - 1.0))
            worst_sup = max(worst_sup, cert["sup_K_abs_f"])
    rep.data["members_per_set"] = members
    rep.check("hull members outside the convex hull", "hull contained in the real convex hull", viol, 0, "==")
    rep.check("max ||f(w)| - 1| over certificates", "separating exponential certificate", worst_w, c["tol"])
    rep.check("max sup_K |f| over certificates", "separating exponential certificate", worst_sup, 1.0, "<")
    ex = G.separating_exponential(np.array([[-E], [E]]), 2 * K)
    rep.data["example_certificate"] = ex.certificate()
    return rep


def convexity(cfg: dict | None = None) -> Report:
    c = _merge({"samples": 10000, "hessian_samples": 20, "seed": 0, "tol": 1e-12, "exact_tol": 1e-10,
                "eps_tol": 1e-6}, cfg)
    rng = np.random.default_rng(c["seed"])
    rep = Report("convexity", c)
    hs = rng.uniform(-1, 1, size=(c["hessian_samples"], 1, 4))
    r1 = G.strict_convexity(_sphere_rho, hs)
    rep.check("eps0 of |z|^2 - 1 equals 2", "strict convexity", abs(r1.eps0 - 2.0), c["eps_tol"])
    r2 = G.strict_convexity(lambda x: np.asarray(x)[..., 0, 0] ** 2 - np.asarray(x)[..., 0, 1] ** 2, hs)
    rep.check("indefinite x1^2 - x2^2 rejected", "strict convexity", r2.eps0, 0.0, "<")
    r3 = G.strict_convexity(lambda x: _norm2(x) + 0.1 * np.asarray(x)[..., 0, 0] ** 4, hs)
    rep.check("eps0 of |z|^2 + 0.1 x1^4 at least 2", "strict convexity", r3.eps0, 2.0 - c["eps_tol"], ">=")
    zeta = rng.normal(size=(c["samples"], 1, 4))
    zeta /= np.linalg.norm(zeta, axis=-1, keepdims=True)
    z = _ball_points(rng, c["samples"], 0.95)
    m = G.leray_margin(_sphere_rho, zeta, z, 2.0)
    exact = _norm2(zeta - z) / 2
    rep.check("min Leray margin", "margin inequality for the gradient map", float(m.min()), -c["tol"], ">=")
    rep.check("margin equals |zeta - z|^2 / 2", "closed-form margin", float(np.max(np.abs(m - exact))), c["exact_tol"])
    rep.tables["convexity"] = (["rho", "eps0", "pass"], [["|z|^2-1", r1.eps0, int(r1.passed)],
                                                         ["x1^2-x2^2", r2.eps0, int(r2.passed)],
                                                         ["|z|^2+0.1x1^4", r3.eps0, int(r3.passed)]])
    return rep


def psh(cfg: dict | None = None) -> Report:
    c = _merge({"lines": 4, "grid": 3, "seed": 0, "tol": 1e-4}, cfg)
    rng = np.random.default_rng(c["seed"])
    v = rng.normal(size=(c["lines"], 1, 4))
    w = rng.normal(size=(c["lines"], 1, 4))
    g1 = np.linspace(-1, 1, int(c["grid"]))
    grid = np.array(list(itertools.product(g1, repeat=4)))
    rep = Report("psh", c)
    r1 = G.plurisubharmonic_check(lambda x: _norm2(x), v, w, grid, tol=c["tol"])
    expect = 8 * _norm2(w)
    lap_err = 0.0
    for vi in v:
        for wi, e in zip(w, expect):
            lap_err = max(lap_err, float(np.max(np.abs(G.line_laplacian(lambda x: _norm2(x), vi, wi, grid) - e))))
    rep.check("|z|^2 line Laplacian equals 8|w|^2", "plurisubharmonicity", lap_err, c["tol"])
    rep.check("|z|^2 strictly plurisubharmonic", "plurisubharmonicity", float(r1.strict), 1.0, "==")
    r2 = G.plurisubharmonic_check(lambda x: np.asarray(x)[..., 0, 0], v, w, grid, tol=c["tol"])
    rep.check("x1 subharmonic but not strict", "plurisubharmonicity",
              float(r2.subharmonic and not r2.strict), 1.0, "==")
    r3 = G.plurisubharmonic_check(lambda x: -_norm2(x), v, w, grid, tol=c["tol"])
    rep.check("-|z|^2 rejected", "plurisubharmonicity", float(not r3.subharmonic), 1.0, "==")
    rep.tables["psh"] = (["rho", "min_laplacian", "max_laplacian"],
                         [["|z|^2", r1.min_laplacian, r1.max_laplacian], ["x1", r2.min_laplacian, r2.max_laplacian],
                          ["-|z|^2", r3.min_laplacian, r3.max_laplacian]])
    return rep


def _lr_map(a, b):
    return lambda x: qmul(qmul(a, np.asarray(x, dtype=float)), b)


def jacobi(cfg: dict | None = None) -> Report:
    c = _merge({"pairs": 100, "seed": 0, "tol": 1e-8, "inverse_tol": 1e-6, "k_max": 30,
                "radius": 0.5}, cfg)
    rng = np.random.default_rng(c["seed"])
    rep = Report("jacobi", c)
    worst = 0.0
    for _ in range(c["pairs"]):
        a, b, p, q = rng.normal(size=(4, 4))
        f = _lr_map(a, b)
        g = lambda x, p=p, q=q: qmul(qmul(p, x), q) + 0.1 * qmul(x, x)
        worst = max(worst, JB.chain_check(f, g, rng.normal(size=(1, 4)) * 0.5))
    rep.check("chain rule residual", "Jacobi matrix of a composition", worst, c["tol"])
    z0 = rng.normal(size=(1, 4))
    r_id = JB.rank_r(JB.jacobi_real(lambda x: np.asarray(x), z0))
    r_pr = JB.rank_r(JB.jacobi_real(lambda x: (np.asarray(x) - qmul(qmul(I, x), I)) / 2, z0))
    r_0 = JB.rank_r(JB.jacobi_real(lambda x: 0 * np.asarray(x), z0))
    rep.check("rank of identity", "real rank", abs(r_id - 4), 0, "==")
    rep.check("rank of (z - izi)/2", "real rank", abs(r_pr - 2), 0, "==")
    rep.check("rank of zero map", "real rank", abs(r_0), 0, "==")
    f = lambda x: np.asarray(x, dtype=float) + 0.05 * qmul(qmul(x, I), x)
    inv = JB.local_inverse(f, np.zeros((1, 4)), radius=c["radius"], k_max=c["k_max"], tol=c["inverse_tol"])
    rep.data["inverse_history"] = list(inv.history)
    rep.check("local inverse certificate", "local inverse by fixed-point series", inv.certificate, c["inverse_tol"])
    try:
        JB.local_inverse(lambda x: (np.asarray(x) - qmul(qmul(I, x), I)) / 2, z0)
        rejected = 0.0
    except JB.RankDeficiencyError:
        rejected = 1.0
    rep.check("rank-deficient map rejected", "regularity criterion", rejected, 1.0, "==")
    return rep


def config_keys(name: str) -> list[str]:
    """Config keys accepted by an experiment (every experiment validates first)."""
    try:
        EXPERIMENTS[name]({"\0": None})
    except ConfigError as exc:
        return exc.allowed
    return []


EXPERIMENTS: dict[str, Callable[[dict | None], Report]] = {
    "verify-forms": verify_forms,
    "kernel-norm": kernel_norm,
    "reproduce": reproduce,
    "mb-identity": mb_identity,
    "leray-identity": leray_identity,
    "line-cauchy": line_cauchy,
    "torus-cg": torus_cg,
    "dbar-solve": dbar_solve_study,
    "compat": compat,
    "hull": hull,
    "convexity": convexity,
    "psh": psh,
    "jacobi": jacobi,
}

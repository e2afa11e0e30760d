"""Acceptance criteria, one test per criterion at the stated tolerances.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""
import time

import pytest

from quatrep.cli import write_report
from quatrep.experiments import EXPERIMENTS, Report


def _run(name, cfg=None):
    t0 = time.perf_counter()
    rep = EXPERIMENTS[name](cfg)
    return rep, time.perf_counter() - t0


def _failures(rep: Report, prefix: str = ""):
    return [f"{c.name}: {c.value:.3g} {c.relation} {c.tol:.3g}" for c in rep.checks
            if c.name.startswith(prefix) and not c.passed]


@pytest.fixture(scope="module")
def reproduce_report():
    return _run("reproduce")[0]


def _verdict(record, number, title, failures):
    record(number, title, not failures, "; ".join(failures))
    assert not failures, "\n".join(failures)


def test_criterion_01_form_identities(record):
    rep, seconds = _run("verify-forms")
    fails = _failures(rep)
    if seconds >= 5:
        fails.append(f"runtime {seconds:.2f}s >= 5s")
    _verdict(record, 1, "form identities to 1e-12 at 100 points, under 5 s", fails)


def test_criterion_02_kernel_normalization(record):
    rep, seconds = _run("kernel-norm")
    fails = _failures(rep)
    if seconds >= 120:
        fails.append(f"runtime {seconds:.1f}s >= 120s")
    _verdict(record, 2, "kernel integrates to e within 1e-3, strictly converging", fails)


def test_criterion_03_reproduction(record, reproduce_report):
    fails = _failures(reproduce_report, "boundary reproduction") + _failures(reproduce_report, "contrast")
    names = [c.name for c in reproduce_report.checks if c.name.startswith("boundary reproduction")]
    if len(names) < 5:
        fails.append(f"only {len(names)} corpus functions")
    _verdict(record, 3, "boundary operator reproduces corpus, contrasts violate", fails)


def test_criterion_04_martinelli_bochner(record):
    rep, _ = _run("mb-identity")
    _verdict(record, 4, "f - B_bd f + B_U d~f within 5e-2", _failures(rep))


def test_criterion_05_leray(record, reproduce_report):
    rep, _ = _run("leray-identity")
    fails = _failures(rep, "Leray kernel") + _failures(rep, "R operator")
    fails += _failures(reproduce_report, "Leray reproduction")
    if not any(c.name.startswith("Leray reproduction") for c in reproduce_report.checks):
        fails.append("no Leray reproduction checks")
    _verdict(record, 5, "Leray kernel collapse, gradient-map reproduction, R = 0", fails)


def test_criterion_06_line_cauchy(record):
    rep, _ = _run("line-cauchy")
    _verdict(record, 6, "line Cauchy formula on loops of winding 1 and 2", _failures(rep))


def test_criterion_07_dbar_solver(record):
    rep, _ = _run("dbar-solve")
    fails = [f for f in _failures(rep) if not f.startswith("convex-domain")]
    _verdict(record, 7, "d-bar residual, far-field holomorphy, linearity", fails)


def test_criterion_08_leray_margin(record):
    rep, _ = _run("convexity")
    fails = _failures(rep, "min Leray margin") + _failures(rep, "margin equals")
    _verdict(record, 8, "margin >= -1e-12 on 1e4 samples, exact margin to 1e-10", fails)


def test_criterion_09_jacobi(record):
    rep, _ = _run("jacobi")
    _verdict(record, 9, "chain rule, rank examples, local inverse, rank rejection", _failures(rep))


def test_criterion_10_hulls(record):
    rep, _ = _run("hull")
    _verdict(record, 10, "hull estimates inside convex hulls, certificates verified", _failures(rep))


DETERMINISM_CONFIGS = {
    "verify-forms": None,
    "hull": None,
    "jacobi": None,
    "line-cauchy": None,
    "convexity": None,
    "reproduce": {"nodes": 8, "points": 3, "leray_nodes": 8},
    "dbar-solve": {"nodes": 16, "grid": 2},
}


def test_criterion_11_determinism(record, tmp_path):
    fails = []
    for name, cfg in DETERMINISM_CONFIGS.items():
        blobs = []
        for run in ("first", "second"):
            paths = write_report(EXPERIMENTS[name](dict(cfg or {})), tmp_path / run)
            blobs.append({p.name: p.read_bytes() for p in paths})
        if blobs[0] != blobs[1]:
            fails.append(f"{name} reports differ")
    _verdict(record, 11, "identical config and seed give byte-identical reports", fails)

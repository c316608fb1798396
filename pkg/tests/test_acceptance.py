"""Acceptance criteria, one test per criterion.

Each test records a one-line verdict; ``conftest.py`` prints the lines at
the end of the run.  ``python tests/test_acceptance.py`` runs the same
checks without pytest.
"""

import time

import pytest

import propcheck
from mises.catalog import RunOptions, load_catalog, run_all
from mises.expr.equality import DEFAULT_SEED, DEFAULT_TOL, DEFAULT_TRIALS
from mises.numeric import suites

from oracles import BURGERS_RESIDUAL, CLOSURE, EXACT_RESIDUAL, MIN_ORDER

VERDICTS: dict[int, str] = {}


def record(n: int, title: str, ok: bool, detail: str) -> None:
    VERDICTS[n] = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title} ({detail})"
    print(VERDICTS[n])


@pytest.fixture(scope="module")
def burgers_reports():
    start = time.perf_counter()
    reports = suites.burgers_correspondence(nx=256, levels=3)
    return {r.check_id: r for r in reports}, time.perf_counter() - start


def test_golden_catalog():
    assert (DEFAULT_TRIALS, DEFAULT_TOL) == (12, 1e-9)
    start = time.perf_counter()
    agg = run_all(load_catalog(), options=RunOptions(seed=DEFAULT_SEED, trials=12, tol=1e-9))
    seconds = time.perf_counter() - start
    controls = [c for e in agg.entries for c in e.checks if c.name.startswith("negative control")]
    failed = [e.id for e in agg.entries if not e.passed]
    ok = agg.total == 16 and agg.ok and seconds <= 10.0 and len(controls) == 16 and all(c.passed for c in controls)
    record(1, "golden catalog", ok,
           f"{agg.passed}/{agg.total} entries, {sum(c.passed for c in controls)}/16 sign-flipped controls rejected, "
           f"{seconds:.2f} s")
    assert not failed, failed
    assert agg.total == 16
    assert len(controls) == 16 and all(c.passed for c in controls)
    assert seconds <= 10.0


def test_zeta_form_property():
    start = time.perf_counter()
    bad = propcheck.zeta_form_failures(50)
    seconds = time.perf_counter() - start
    record(2, "zeta-form of the RF-pair", not bad and seconds <= 30.0, f"{50 - len(bad)}/50 random F, {seconds:.2f} s")
    assert bad == []
    assert seconds <= 30.0


def test_burgers_correspondence(burgers_reports):
    reports, seconds = burgers_reports
    main = reports["burgers-correspondence"]
    grids = main.details["grids"]
    ok = (main.residual_max <= BURGERS_RESIDUAL and main.order is not None and main.order >= MIN_ORDER
          and grids[-1] == 256 and len(grids) == 3 and seconds <= 60.0)
    record(3, "Burgers Backlund correspondence", ok,
           f"max residual {main.residual_max:.2e} at 256^2, orders {main.details['orders_max']} / "
           f"{main.details['orders_l2']}, {seconds:.1f} s")
    assert main.residual_max <= BURGERS_RESIDUAL
    assert len(main.details["orders_max"]) == 2
    assert min(main.details["orders_max"] + main.details["orders_l2"]) >= MIN_ORDER
    assert seconds <= 60.0


def test_exact_eta_solution():
    (rep,) = suites.example3_exact(n=128)
    ok = rep.residual_max <= EXACT_RESIDUAL and rep.details["grid"] == [128, 128]
    record(4, "exact solution eta = sqrt(2tu+1)", ok, f"max residual {rep.residual_max:.2e} on 128^2")
    assert ok


def test_closure(burgers_reports):
    rep = burgers_reports[0]["burgers-closure"]
    record(5, "int du/eta recovers x", rep.residual_max <= CLOSURE, f"deviation {rep.residual_max:.2e}")
    assert rep.residual_max <= CLOSURE


def test_characteristic_property():
    reports = {r.check_id: r for r in suites.characteristic_shift()}
    constant = [reports["shift-burgers-constant"], reports["shift-boundary-layer-constant"]]
    control = reports["shift-s1-wrong-law"]
    ok = all(r.passed for r in constant) and not control.passed and suites.suite_passed(list(reports.values()))
    record(6, "characteristic shift", ok,
           ", ".join(f"{r.check_id} {r.residual_max:.1e}/{r.tolerance:.1e}" for r in constant)
           + f", control residual {control.residual_max:.2f} rejected")
    assert all(r.passed for r in constant)
    assert not control.passed
    assert suites.suite_passed(list(reports.values()))


def test_prandtl_manufactured():
    reports = {r.check_id: r for r in suites.prandtl_manufactured()}
    quad = [reports["prandtl-quadratic-inviscid"], reports["prandtl-quadratic-viscous"]]
    ok = all(r.passed and r.residual_max <= 1e-10 for r in reports.values())
    record(7, "Prandtl manufactured solution", ok,
           f"nu=0 {quad[0].residual_max:.1e}, nu=1 {quad[1].residual_max:.1e}, {len(reports)} fields")
    assert ok


def test_calculus_properties():
    idem = propcheck.idempotence_failures(1000)
    fd_bad, fd_worst = propcheck.derivative_failures(300)
    comm = propcheck.commutation_failures(60)
    mises_bad, mises_worst = propcheck.to_mises_failures(40)
    ok = not (idem or fd_bad or comm or mises_bad) and fd_worst <= 1e-6 and mises_worst <= 1e-8
    record(8, "calculus properties", ok,
           f"idempotence 1000/1000, derivative error {fd_worst:.1e}, commutation {60 - len(comm)}/60, "
           f"to_mises error {mises_worst:.1e}")
    assert idem == [] and fd_bad == [] and comm == [] and mises_bad == []
    assert fd_worst <= 1e-6 and mises_worst <= 1e-8


if __name__ == "__main__":
    import sys

    raise SystemExit(pytest.main([__file__, "-q", *sys.argv[1:]]))

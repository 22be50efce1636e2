"""Acceptance criteria. Each test prints one PASS/FAIL line (visible with -s or in the summary)."""

from __future__ import annotations

import itertools
import math
import time

import numpy as np
import pytest

from balancelaw import examples as ex
from balancelaw import riemann, verify, viscous
from balancelaw.charflow import CharFlow
from balancelaw.core import cubic_plane_surface, estimate_right_lipschitz, flux_from_name, right_lipschitz_trend, source_from_name

B2 = flux_from_name("burgers2d")
NEG = source_from_name("neg_cbrt")
POS = source_from_name("pos_cbrt")
SURF = cubic_plane_surface()
SHOCK_CASES = {"1.1": (1.0, 0.5), "1.2": (0.5, -1.0), "1.3": (1.0, -1.0)}
RAREFACTION_CASE = (-1.0, 1.0)

PROBE_T = np.linspace(0.05, 1.4, 20)
PROBE_X = np.linspace(-1.5, 1.5, 40)
CELL = PROBE_X[1] - PROBE_X[0]


def _report(capsys, number: int, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\ncriterion {number:2d} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def _solution(um, up):
    return riemann.construct(riemann.RiemannProblem(B2, NEG, SURF, um, up))


def _mesh():
    X, Y = np.meshgrid(PROBE_X, PROBE_X, indexing="ij")
    return X, Y, np.stack([X, Y], axis=-1)


def test_criterion_01_flow_golden(capsys):
    start = time.perf_counter()
    flow = CharFlow(NEG)
    t, s = np.meshgrid(np.linspace(0, 3, 61), np.linspace(-2, 2, 81), indexing="ij")
    err = float(np.max(np.abs(flow.u_bar(t, s) - ex.absorbing_ubar(t, s))))
    _, ts, _ = flow.extinction_times(s[0])
    err_t = float(np.max(np.abs(ts - 1.5 * np.abs(s[0]) ** (2 / 3))))
    elapsed = time.perf_counter() - start
    ok = err <= 1e-8 and err_t <= 1e-10 and elapsed < 10
    _report(capsys, 1, ok, f"max |u_bar error| {err:.2e} <= 1e-8, extinction {err_t:.2e} <= 1e-10, {elapsed:.1f} s < 10 s")


def test_criterion_02_shift_golden(capsys):
    flow = CharFlow(NEG)
    t, s = np.meshgrid(np.linspace(0, 3, 61), np.linspace(-2, 2, 81), indexing="ij")
    got = np.asarray(flow.chi(B2, t.ravel(), s.ravel()))
    ref = ex.absorbing_chi(t.ravel(), s.ravel())
    err = float(np.max(np.abs(got - ref)))
    _report(capsys, 2, err <= 1e-7, f"max |chi error| {err:.2e} <= 1e-7")


def _shock_tube(oracle, t, X, Y):
    s = ex.example1_surface(oracle, t, X, Y)
    g = ex.example1_surface_gradient(oracle, t, X, Y)
    dist = np.abs(s) / np.linalg.norm(g[..., 1:], axis=-1)
    return dist <= 2 * CELL, s <= 0


_ORACLE_LABEL = {"left": 0, "fan-": 1, "zero": 11, "fan+": 1, "right": 2}


def _rarefaction_tube(um, up, t, X, Y):
    h = 1e-6
    tube = np.zeros(X.shape, dtype=bool)
    xs = PROBE_X
    for b, bp, bm in zip(ex.fan_boundaries(um, up, t, xs), ex.fan_boundaries(um, up, t, xs + h), ex.fan_boundaries(um, up, t, xs - h)):
        slope = (bp - bm) / (2 * h)
        tube |= np.abs(Y - b[:, None]) / np.sqrt(1 + slope[:, None] ** 2) <= 2 * CELL
    lab = ex.rarefaction_regions(um, up, t, X, Y)
    return tube, np.vectorize(_ORACLE_LABEL.get)(lab)


def _constructed_labels(sol, t, pts):
    p = sol.problem
    fm = riemann.fan_function(sol, t, pts, np.full(pts.shape[:-1], p.u_minus))
    fp = riemann.fan_function(sol, t, pts, np.full(pts.shape[:-1], p.u_plus))
    lab = np.where(fm <= 0, 0, np.where(fp >= 0, 2, 1))
    return lab + 10 * (np.asarray(riemann.evaluate(sol, t, pts)) == 0.0)


def test_criterion_03_constructor_matches_oracle(capsys):
    start = time.perf_counter()
    X, Y, pts = _mesh()
    details, ok = [], True
    for name, (um, up) in [("1.1", SHOCK_CASES["1.1"]), ("1.3", SHOCK_CASES["1.3"]), ("2", RAREFACTION_CASE)]:
        sol, oracle = _solution(um, up), ex.Example1Oracle(um, up)
        worst, agree, n_tube = 0.0, 0, 0
        for t in PROBE_T:
            got = np.asarray(riemann.evaluate(sol, float(t), pts))
            ref = ex.example1_value(oracle, float(t), X, Y)
            if sol.kind == riemann.SHOCK:
                tube, side = _shock_tube(oracle, float(t), X, Y)
                mine = riemann.shock_surface_residual(sol, float(t), pts) <= 0
            else:
                tube, side = _rarefaction_tube(um, up, float(t), X, Y)
                mine = _constructed_labels(sol, float(t), pts)
            worst = max(worst, float(np.max(np.abs(got - ref)[~tube], initial=0.0)))
            agree += int(np.count_nonzero((mine == side)[tube]))
            n_tube += int(np.count_nonzero(tube))
        frac = agree / n_tube if n_tube else 1.0
        ok &= worst <= 1e-6 and frac >= 0.999
        details.append(f"case {name}: max err {worst:.1e}, tube agreement {100 * frac:.2f}% of {n_tube}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    _report(capsys, 3, ok, "; ".join(details) + f"; {elapsed:.1f} s < 60 s")


def test_criterion_04_shock_admissibility(capsys):
    details, ok = [], True
    for name, (um, up) in SHOCK_CASES.items():
        sol = _solution(um, up)
        smp = riemann.sample_shock(sol, n_points=200)
        rep = verify.audit_discontinuity(B2, smp.t, smp.x, smp.normal, smp.u_l, smp.u_r, 101, 1e-6, 1e-10)
        rh = max(c.value for c in rep.checks if c.name == "rankine_hugoniot")
        margin = min(c.value for c in rep.checks if c.name == "entropy_margin")
        ok &= rep.passed and len(smp.t) == 200 and np.all(smp.t < sol.max_extinction)
        details.append(f"case {name}: max|RH| {rh:.1e}, min margin {margin:.1e}")
    _report(capsys, 4, ok, "; ".join(details) + " (tol 1e-6, -1e-10)")


def test_criterion_05_kruzkov(capsys):
    sol = _solution(*SHOCK_CASES["1.3"])
    field_ = verify.GridField.from_function(
        lambda t, p: riemann.evaluate(sol, t, p), np.linspace(0, 1.2, 64), (np.linspace(-1, 1, 128),) * 2
    )
    centers = list(itertools.product([0.3, 0.6, 0.9], [-0.5, 0.0, 0.5], [-0.5, 0.0, 0.5]))
    tol = 5 * field_.spacing
    rep = verify.kruzkov_audit(field_, B2, NEG, np.linspace(-1, 1, 11), centers, (0.2, 0.2, 0.2), tol)
    worst = min(c.value for c in rep.checks)
    _report(capsys, 5, rep.passed, f"min residual {worst:.4f} >= -{tol:.4f} over {len(rep.checks)} (k, center) pairs")


def test_criterion_06_extinction(capsys):
    X, Y, pts = _mesh()
    details, ok = [], True
    for name, (um, up) in list(SHOCK_CASES.items()) + [("2", RAREFACTION_CASE)]:
        sol = _solution(um, up)
        worst = max(float(np.max(np.abs(riemann.evaluate(sol, t, pts)))) for t in (1.5, 1.5 + 1e-9, 1.7, 2.5, 10.0))
        ok &= worst <= 1e-12
        details.append(f"case {name}: {worst:.1e}")
    _report(capsys, 6, ok, "max |u| for t >= 1.5: " + ", ".join(details) + " (tol 1e-12)")


def test_criterion_07_l1_contraction(capsys):
    b1 = flux_from_name("burgers1d")
    dx = 1 / 512
    ts = tuple(round(0.1 * i, 10) for i in range(1, 8))
    cfg = viscous.SchemeConfig(1e-3, (dx,), ((-2.0, 2.0),), 0.7, snapshots=ts)
    flow = CharFlow(NEG)
    u0 = lambda p: np.where(p[..., 0] <= 0, 1.0, 0.5)  # noqa: E731
    v0 = lambda p: np.where(np.abs(p[..., 0]) <= 0.25, 0.0, u0(p))  # noqa: E731
    U = viscous.solve_viscous(cfg, b1, NEG, flow, u0)
    V = viscous.solve_viscous(cfg, b1, NEG, flow, v0)
    N = math.sqrt(2.0)
    d = [verify.l1_cone_distance(U, V, 1.0, 1.0, t, b1, speed=N) for t in ts]
    rises = [b - a for a, b in zip(d, d[1:])]
    ok = max(rises) <= 5 * dx
    _report(capsys, 7, ok, f"distances {np.round(d, 5).tolist()}, largest rise {max(rises):.2e} <= {5 * dx:.2e}")


@pytest.mark.slow
def test_criterion_08_vanishing_viscosity_ordering(capsys):
    sol = _solution(*SHOCK_CASES["1.1"])
    region = ((-0.5, 0.5), (-0.5, 0.5))
    # states stay in [0, 1], so |f'| <= 1 per axis: the region's domain of dependence up to t = 1 lies inside
    domain = ((-1.55, 1.55), (-1.55, 1.55))
    cfgs = [viscous.SchemeConfig(e, (h, h), domain, 1.0) for e, h in [(4e-3, 1 / 64), (2e-3, 1 / 128), (1e-3, 1 / 256)]]
    rows = viscous.convergence_study(cfgs, sol, region, 1.0)
    d = [r.distance for r in rows]
    ok = d[0] > d[1] > d[2]
    _report(capsys, 8, ok, "L1 distances " + " > ".join(f"{v:.5f}" for v in d) + f" ({sum(r.steps_time for r in rows):.0f} s)")


def test_criterion_09_nonuniqueness(capsys):
    details, ok = [], True
    for kind, um in [("Shock", 1.0), ("Rarefaction", -1.0)]:
        rep = ex.nonuniqueness_report(um, kind, n_points=200, t=1.0, box=1.5, rh_tol=1e-6, entropy_tol=1e-10, k_samples=101)
        ok &= rep.all_admissible and rep.all_pairs_separated
        details.append(
            f"{kind}: admissible {sum(a.passed for a in rep.audits)}/3, min slice L1 {min(rep.slice_distances.values()):.3f}, "
            f"min space-time L1 {min(rep.spacetime_distances.values()):.3f}"
        )
    _report(capsys, 9, ok, "; ".join(details) + " (> 0.05)")


def test_criterion_10_right_lipschitz_detection(capsys):
    est = estimate_right_lipschitz(POS, -1.0, 1.0, 10**6)
    trend_pos = right_lipschitz_trend(POS, -1.0, 1.0)
    trend_neg = right_lipschitz_trend(NEG, -1.0, 1.0)
    neg = estimate_right_lipschitz(NEG, -1.0, 1.0, 10**6)
    ok = est > 1e3 and trend_pos.verdict == "unbounded" and neg <= 0 and trend_neg.verdict == "bounded" and trend_neg.final <= 0
    _report(capsys, 10, ok, f"u^(1/3): {est:.3e} > 1e3, trend {trend_pos.verdict}; -u^(1/3): L = {neg:.2e} <= 0, trend {trend_neg.verdict}")

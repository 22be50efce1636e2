from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from balancelaw import examples as ex
from balancelaw.charflow import CharFlow
from balancelaw.core import source_from_name


def _gauss(fn, a, b, pieces, order=10):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, pieces + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        x = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        total += 0.5 * (hi - lo) * float(np.dot(weights, [fn(v) for v in x]))
    return total


# -- absorbing source ---------------------------------------------------------------


def test_case_tags():
    assert ex.Example1Oracle(1.0, 0.5).case == ex.SHOCK_BIG
    assert ex.Example1Oracle(0.5, -1.0).case == ex.SHOCK_SMALL
    assert ex.Example1Oracle(1.0, -1.0).case == ex.SHOCK_SYMMETRIC
    assert ex.Example1Oracle(-1.0, 1.0).case == ex.RAREFACTION
    with pytest.raises(ValueError):
        _ = ex.Example1Oracle(0.0, 1.0).case


def test_closed_forms_agree_with_general_flow():
    flow = CharFlow(source_from_name("neg_cbrt"))
    t, s = np.meshgrid(np.linspace(0, 2, 9), np.linspace(-1.5, 1.5, 13), indexing="ij")
    assert np.max(np.abs(ex.absorbing_ubar(t, s) - flow.u_bar(t, s))) <= 1e-9
    assert np.max(np.abs(ex.absorbing_extinction(s[0]) - flow.extinction_times(s[0])[1])) <= 1e-9


def test_case_big_value():
    o = ex.Example1Oracle(1.0, 0.5)
    assert float(ex.example1_value(o, 1.0, -1.0, 0.0)) == pytest.approx(0.1924500897, abs=1e-10)
    assert o.extinction == pytest.approx(1.5)


def test_zero_after_extinction_and_initial_data():
    o = ex.Example1Oracle(1.0, 0.5)
    x, y = np.meshgrid(np.linspace(-1, 1, 9), np.linspace(-1, 1, 9))
    assert np.all(ex.example1_value(o, 1.6, x, y) == 0.0)
    assert np.array_equal(ex.example1_value(o, 0.0, x, y), np.where(x**3 + y <= 0, 1.0, 0.5))
    r = ex.Example1Oracle(-1.0, 1.0)
    assert np.array_equal(ex.example1_value(r, 0.0, x, y), np.where(x**3 + y <= 0, -1.0, 1.0))


@pytest.mark.parametrize("um,up", [(1.0, 0.5), (0.5, -1.0), (1.0, -1.0)])
def test_surface_gradient_matches_differences(um, up):
    o = ex.Example1Oracle(um, up)
    t, x, y, h = 0.3, 0.4, -0.2, 1e-6
    g = ex.example1_surface_gradient(o, t, x, y)
    st_ = (ex.example1_surface(o, t + h, x, y) - ex.example1_surface(o, t - h, x, y)) / (2 * h)
    sx = (ex.example1_surface(o, t, x + h, y) - ex.example1_surface(o, t, x - h, y)) / (2 * h)
    assert g[0] == pytest.approx(st_, abs=1e-6)
    assert g[1] == pytest.approx(sx, abs=1e-6)
    assert g[2] == 1.0


def test_interaction_integral_stable_under_refinement():
    for um, up, t in [(1.0, 0.5, 0.8), (1.0, 0.5, 1.4), (0.5, -1.0, 0.3)]:
        f = lambda tau: float(ex.absorbing_ubar(tau, um)) ** 2 * float(ex.absorbing_ubar(tau, up)) + float(  # noqa: E731
            ex.absorbing_ubar(tau, um)
        ) * float(ex.absorbing_ubar(tau, up)) ** 2
        ends = sorted({0.0, t, *(v for v in (float(ex.absorbing_extinction(um)), float(ex.absorbing_extinction(up))) if v < t)})
        coarse = sum(_gauss(f, a, b, 64) for a, b in zip(ends[:-1], ends[1:]))
        fine = sum(_gauss(f, a, b, 128) for a, b in zip(ends[:-1], ends[1:]))
        assert abs(coarse - fine) <= 1e-9
        assert ex.interaction_integral(t, um, up) == pytest.approx(fine, abs=1e-9)


def test_fan_boundaries_bound_regions():
    um, up, t = -1.0, 1.0, 0.5
    xs = np.linspace(-0.8, 0.8, 9)
    bounds = ex.fan_boundaries(um, up, t, xs)
    assert np.all(np.diff(np.stack(bounds), axis=0) >= 0)
    names = ["left", "fan-", "zero", "fan+", "right"]
    mids = [bounds[0] - 0.05, 0.5 * (bounds[0] + bounds[1]), 0.5 * (bounds[1] + bounds[2]), 0.5 * (bounds[2] + bounds[3]), bounds[3] + 0.05]
    for name, y in zip(names, mids):
        assert np.all(ex.rarefaction_regions(um, up, t, xs, y) == name)


# -- growing source ------------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(branch=st.sampled_from(ex.BRANCHES), delay=st.floats(0, 0.5), t=st.floats(0.05, 2.0))
def test_branches_solve_the_ode(branch, delay, t):
    b = ex.Example2Branch(branch, delay)
    if abs(t - delay) < 1e-3:
        return
    h = 1e-6
    u = float(b.ubar(t))
    du = (float(b.ubar(t + h)) - float(b.ubar(t - h))) / (2 * h)
    assert du == pytest.approx(np.cbrt(u) if t > delay else 0.0, abs=1e-5)
    dchi = (b.chi(t + h) - b.chi(t - h)) / (2 * h)
    assert np.allclose(dchi, [u, u**3], atol=1e-5)


def test_growing_closed_form_matches_flow():
    flow = CharFlow(source_from_name("pos_cbrt"))
    for s in (-1.2, 0.3, 1.0):
        for t in (0.2, 1.0):
            assert float(ex.growing_ubar(t, s)) == pytest.approx(flow.u_bar(t, s), abs=1e-9)


def test_branch_validation():
    with pytest.raises(ValueError):
        ex.Example2Branch("up")
    with pytest.raises(ValueError):
        ex.Example2Branch(ex.ZERO, -1.0)
    with pytest.raises(ValueError):
        ex.example2_candidates("Shock", -1.0)
    with pytest.raises(ValueError):
        ex.example2_candidates("Rarefaction", -1.0, delay=0.2)


@pytest.mark.parametrize("kind,um", [("Shock", 1.0), ("Rarefaction", -1.0)])
def test_candidates_share_initial_data(kind, um):
    x, y = np.meshgrid(np.linspace(-1, 1, 21), np.linspace(-1, 1, 21))
    vals = [c.value(0.0, x, y) for c in ex.example2_candidates(kind, um)]
    for v in vals[1:]:
        assert np.array_equal(v, vals[0])


def test_candidates_differ_later():
    x, y = np.meshgrid(np.linspace(-1, 1, 41), np.linspace(-1, 1, 41))
    vals = [c.value(1.0, x, y) for c in ex.example2_candidates("Shock", 1.0)]
    assert np.max(np.abs(vals[1] - vals[2])) > 1.0


def test_rarefaction_candidate_regions_are_continuous():
    cand = ex.RarefactionCandidate(-1.0, ex.POS_FAN)
    jump, count = ex._interface_jumps(cand, [0.5, 1.0], np.linspace(-0.8, 0.8, 5))
    assert count > 0 and jump <= 1e-6


@pytest.mark.parametrize("kind,um", [("Shock", 1.0), ("Rarefaction", -1.0)])
def test_nonuniqueness_report(kind, um):
    rep = ex.nonuniqueness_report(um, kind, n_points=60, resolution=121)
    assert rep.all_admissible
    assert rep.separated and rep.passed
    d = rep.as_dict()
    assert d["schema"] == 1 and len(d["audits"]) == 3
    assert rep.to_text().rstrip().endswith("PASS")

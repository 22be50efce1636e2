from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from balancelaw.core import (
    FluxSet,
    InitialSurface,
    SourceTerm,
    check_growth,
    classify_zero,
    cubic_plane_surface,
    decompose_zero_set,
    estimate_right_lipschitz,
    flux_from_name,
    plane_surface,
    polynomial_surface,
    right_lipschitz_trend,
    source_from_name,
    surface_from_name,
)
from balancelaw.errors import EvaluationError


def _brute_right_lipschitz(g, a, b, n):
    u = np.linspace(a, b, n + 1)
    v = g(u)
    du = u[:, None] - u[None, :]
    dv = v[:, None] - v[None, :]
    mask = du > 0
    return float(np.max(dv[mask] / du[mask]))


# -- estimate_right_lipschitz -------------------------------------------------


def test_right_lipschitz_neg_cbrt_nonpositive():
    g = source_from_name("neg_cbrt")
    est = estimate_right_lipschitz(g, 0.5, 1.0, 10_000)
    assert est <= 0.0


def test_right_lipschitz_matches_pairwise_bruteforce():
    g = source_from_name("neg_cbrt")
    for a, b in [(0.5, 1.0), (-1.0, 1.0), (-2.0, -0.1)]:
        assert estimate_right_lipschitz(g, a, b, 400) == pytest.approx(_brute_right_lipschitz(g, a, b, 400), rel=1e-12, abs=1e-12)


def test_right_lipschitz_linear_is_exact():
    g = source_from_name("linear:1")
    assert abs(estimate_right_lipschitz(g, 0.0, 1.0, 1000) - 1.0) <= 1e-12


def test_right_lipschitz_pos_cbrt_grows():
    g = source_from_name("pos_cbrt")
    assert estimate_right_lipschitz(g, -1.0, 1.0, 10**6) > 10.0


def test_right_lipschitz_reports_nonfinite_point():
    g = SourceTerm(lambda u: 1.0 / (u - 0.25), name="pole")
    with pytest.raises(EvaluationError) as err:
        estimate_right_lipschitz(g, 0.0, 1.0, 4)
    assert err.value.where == 0.25


def test_right_lipschitz_rejects_bad_arguments():
    g = source_from_name("neg_cbrt")
    with pytest.raises(ValueError):
        estimate_right_lipschitz(g, 1.0, 0.0, 10)
    with pytest.raises(ValueError):
        estimate_right_lipschitz(g, 0.0, 1.0, 1)


def test_right_lipschitz_trend_verdicts():
    assert right_lipschitz_trend(source_from_name("pos_cbrt"), -1.0, 1.0).verdict == "unbounded"
    trend = right_lipschitz_trend(source_from_name("neg_cbrt"), -1.0, 1.0)
    assert trend.verdict == "bounded" and trend.final <= 0.0


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-3, 3), width=st.floats(0.1, 3), n=st.integers(50, 2000))
def test_right_lipschitz_stable_under_refinement(a, width, n):
    g = source_from_name("logistic")
    b = a + width
    e1 = estimate_right_lipschitz(g, a, b, n)
    e2 = estimate_right_lipschitz(g, a, b, 2 * n)
    # exact constant is max g' = 1 - 2a; secants with |g''| = 2 undershoot by at most the step
    exact, h = 1.0 - 2.0 * a, width / n
    for est, step in ((e1, h), (e2, h / 2)):
        assert exact - step - 1e-9 <= est <= exact + 1e-9
    assert abs(e2 - e1) <= h + 1e-9


# -- decompose_zero_set ---------------------------------------------------------


def test_decompose_neg_cbrt_window():
    g = source_from_name("neg_cbrt", window=(-2.0, 2.0))
    dec = decompose_zero_set(g)
    assert dec.boundary_points == (0.0,)
    assert dec.open_intervals == ((-2.0, 0.0, 1), (0.0, 2.0, -1))
    assert dec.boundary_kinds[0.0] == "neg_infinite"


def test_decompose_zero_source_is_one_plateau():
    g = source_from_name("zero", window=(-5.0, 5.0))
    dec = decompose_zero_set(g)
    assert dec.open_intervals == ()
    assert dec.boundary_points == ()
    assert len(dec.plateau_intervals) == 1
    c, d = dec.plateau_intervals[0]
    assert c <= -5.0 and d >= 5.0


def test_decompose_logistic_sign_chart():
    g = source_from_name("logistic", window=(-1.0, 2.0))
    dec = decompose_zero_set(g)
    assert dec.boundary_points == (0.0, 1.0)
    assert [iv[2] for iv in dec.open_intervals] == [-1, 1, -1]


def test_decompose_scans_without_analytic_zeros():
    g = SourceTerm(lambda u: (u - 0.3) * (u + 0.7) * (u - 1.9), search_window=(-2.0, 2.5))
    dec = decompose_zero_set(g, tol=1e-12)
    assert np.allclose(dec.boundary_points, [-0.7, 0.3, 1.9], atol=1e-10)
    assert [iv[2] for iv in dec.open_intervals] == [-1, 1, -1, 1]


def test_decompose_scan_finds_plateau():
    g = SourceTerm(lambda u: np.where(u < -1, u + 1, np.where(u > 1, u - 1, 0.0)), search_window=(-3.0, 3.0))
    dec = decompose_zero_set(g)
    assert len(dec.plateau_intervals) == 1
    c, d = dec.plateau_intervals[0]
    assert abs(c + 1) < 1e-9 and abs(d - 1) < 1e-9


def test_decompose_warns_on_zero_at_window_edge():
    g = SourceTerm(lambda u: u * (u - 1.0), search_window=(0.0, 2.0))
    assert decompose_zero_set(g).warnings


@settings(max_examples=25, deadline=None)
@given(roots=st.lists(st.floats(-4.5, 4.5), min_size=1, max_size=3, unique=True))
def test_decompose_tiles_window(roots):
    roots = sorted(roots)
    if np.min(np.diff(roots + [10.0])) < 1e-2:
        return
    g = SourceTerm(lambda u: np.prod([u - r for r in roots], axis=0), search_window=(-5.0, 5.0))
    dec = decompose_zero_set(g)
    pieces = sorted([(a, b) for a, b, _ in dec.open_intervals] + [(p, p) for p in dec.boundary_points] + list(dec.plateau_intervals))
    assert pieces[0][0] == -5.0 and pieces[-1][1] == 5.0
    for (a0, b0), (a1, b1) in zip(pieces, pieces[1:]):
        assert a1 - b0 <= 1e-12
    for a, b, s in dec.open_intervals:
        u = np.linspace(a, b, 103)[1:-1]
        assert np.all(np.sign(g(u)) == s)


def test_classify_zero_kinds():
    assert classify_zero(source_from_name("neg_cbrt"), 0.0)[0] == "neg_infinite"
    kind, slope = classify_zero(source_from_name("logistic"), 0.0)
    assert kind == "regular" and slope == pytest.approx(1.0)


# -- check_growth ---------------------------------------------------------------


def test_growth_neg_cbrt_ok_and_vanishing():
    rep = check_growth(source_from_name("neg_cbrt"), (-1e3, 1e3))
    assert rep.ok
    assert abs(rep.limsup_estimate_pos) < 0.05 and abs(rep.limsup_estimate_neg) < 0.05


def test_growth_linear_ok():
    rep = check_growth(source_from_name("linear:1"), (-100.0, 100.0))
    assert rep.ok
    assert rep.limsup_estimate_pos == pytest.approx(1.0) and rep.limsup_estimate_neg == pytest.approx(1.0)


def test_growth_quadratic_fails():
    g = SourceTerm(lambda u: u**2, search_window=(-1e3, 1e3))
    assert not check_growth(g, (-1e3, 1e3)).ok


# -- fluxes and surfaces ----------------------------------------------------------


def test_burgers2d_catalog():
    fl = flux_from_name("burgers2d")
    u = np.array([-1.0, 0.5, 2.0])
    assert np.allclose(fl.flux(u), np.stack([u**2 / 2, u**4 / 4], -1))
    assert np.allclose(fl.speed(u), np.stack([u, u**3], -1))
    assert np.allclose(fl.curvature(u), np.stack([np.ones(3), 3 * u**2], -1))
    assert fl.cone_speed(1.0) == pytest.approx(math.sqrt(2.0), rel=1e-12)


def test_flux_derivatives_second_order():
    for fl in (flux_from_name("burgers2d"), flux_from_name([[0, 1, -2, 0.5], [1, 0, 0, 0, 0, 0.1]])):
        fl.validate()
        u = np.linspace(-2, 2, 1000)
        for h in (1e-3, 1e-4):
            fd1 = (fl.flux(u + h) - fl.flux(u - h)) / (2 * h)
            fd2 = (fl.speed(u + h) - fl.speed(u - h)) / (2 * h)
            # third derivatives are bounded by 12 on [-2, 2] for both fluxes
            assert np.max(np.abs(fd1 - fl.speed(u))) <= 12 * h**2 + 1e-9
            assert np.max(np.abs(fd2 - fl.curvature(u))) <= 12 * h**2 + 1e-9


def test_flux_validate_catches_wrong_derivative():
    fl = FluxSet((lambda u: u**2,), (lambda u: u,), (lambda u: np.ones_like(u),))
    with pytest.raises(ValueError):
        fl.validate()


def test_unknown_catalog_names():
    with pytest.raises(ValueError):
        flux_from_name("nope")
    with pytest.raises(ValueError):
        source_from_name("nope")
    with pytest.raises(ValueError):
        surface_from_name("nope", 2)


def test_cubic_plane_gradient_and_graph():
    s = cubic_plane_surface()
    s.validate()
    q = np.linspace(-1, 1, 11)[:, None]
    pts = np.concatenate([q, s.graph(q)[:, None]], axis=1)
    assert np.allclose(s.value(pts), 0.0)


def test_plane_and_polynomial_surfaces_agree():
    a = plane_surface([2.0, -1.0], 0.5)
    b = polynomial_surface([(2.0, [1, 0]), (-1.0, [0, 1]), (0.5, [0, 0])], 2)
    pts = np.random.default_rng(0).uniform(-2, 2, size=(50, 2))
    assert np.allclose(a.value(pts), b.value(pts))
    assert np.allclose(a.gradient(pts), b.gradient(pts))
    b.validate()


def test_surface_validate_catches_wrong_gradient():
    s = InitialSurface(lambda p: p[..., 0] ** 2, lambda p: np.stack([p[..., 0]], -1), 1)
    with pytest.raises(ValueError):
        s.validate()


@settings(max_examples=40, deadline=None)
@given(coefs=st.lists(st.floats(-2, 2), min_size=2, max_size=5))
def test_polynomial_flux_derivative_invariant(coefs):
    fl = flux_from_name([coefs])
    u = np.linspace(-2, 2, 1000)
    errs = []
    for h in (1e-3, 1e-4):
        fd = (fl.flux(u + h) - fl.flux(u - h))[:, 0] / (2 * h)
        errs.append(np.max(np.abs(fd - fl.speed(u)[:, 0])))
    scale = 1 + np.max(np.abs(coefs)) * 10
    assert errs[1] <= 1e-6 * scale + 0.02 * errs[0]

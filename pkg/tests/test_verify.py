from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from balancelaw import examples, riemann
from balancelaw.charflow import CharFlow
from balancelaw.core import cubic_plane_surface, flux_from_name, source_from_name
from balancelaw.errors import DomainError
from balancelaw.verify import (
    GridField,
    Mollifier,
    VerificationReport,
    audit_discontinuity,
    cone_speed,
    geometric_entropy_margin,
    geometric_entropy_margin_right,
    kruzkov_audit,
    kruzkov_residual,
    l1_box_distance,
    l1_cone_distance,
    pde_residual,
    rh_residual,
    trapezoid_weights,
    weak_form_residual,
)

B1 = flux_from_name("burgers1d")
B2 = flux_from_name("burgers2d")
ZERO = source_from_name("zero")
NEG = source_from_name("neg_cbrt")

# unit normal of the Burgers shock x = t/2, pointing toward the u_l = 1 side
N_ADMISSIBLE = np.array([0.5, -1.0]) / math.hypot(0.5, 1.0)


# -- GridField ----------------------------------------------------------------------


def test_gridfield_rejects_bad_axes_and_values():
    with pytest.raises(ValueError):
        GridField([0.0, 0.0], ([0.0, 1.0],), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        GridField([0.0, 1.0], ([0.0, 1.0],), np.zeros((2, 3)))
    with pytest.raises(ValueError):
        GridField([0.0, 1.0], ([0.0, 1.0],), np.array([[0.0, np.nan], [0.0, 0.0]]))


def test_gridfield_time_lookup():
    f = GridField.from_function(lambda t, p: t + p[..., 0], [0.0, 0.5, 1.0], [np.linspace(0, 1, 5)])
    assert np.allclose(f.at(0.5), 0.5 + np.linspace(0, 1, 5))
    with pytest.raises(DomainError):
        f.at(0.25)


def test_trapezoid_weights_integrate_linear_exactly():
    ax = np.sort(np.random.default_rng(0).uniform(0, 2, 30))
    assert (trapezoid_weights(ax) * (3 * ax + 1)).sum() == pytest.approx(np.trapezoid(3 * ax + 1, ax) if hasattr(np, "trapezoid") else np.trapz(3 * ax + 1, ax))


# -- Mollifier --------------------------------------------------------------------------


@pytest.mark.parametrize("h", [0.05, 0.2, 1.0, 3.0])
def test_mollifier_unit_mass(h):
    m = Mollifier(h)
    ref, _ = quad(lambda s: float(m(s)), -h, h, epsabs=1e-14, epsrel=1e-13, limit=400)
    assert abs(ref - 1.0) <= 1e-8


def test_mollifier_support_and_scaling():
    m = Mollifier(0.3)
    assert np.all(m(np.array([-0.3, 0.3, 0.5, -1.0])) == 0.0)
    s = np.linspace(-0.29, 0.29, 11)
    assert np.allclose(m(s), Mollifier.profile(s / 0.3) / 0.3)
    with pytest.raises(ValueError):
        Mollifier(0.0)


def test_mollifier_derivative_matches_difference():
    m = Mollifier(0.4)
    s = np.linspace(-0.38, 0.38, 41)
    h = 1e-6
    assert np.allclose(m.derivative(s), (m(s + h) - m(s - h)) / (2 * h), atol=1e-5)


# -- Rankine-Hugoniot -------------------------------------------------------------------


def test_rh_equal_states():
    assert rh_residual(B1, 0.0, [0.0], N_ADMISSIBLE, 0.3, 0.3) == 0.0


def test_rh_burgers_speed():
    n = np.array([-0.5, 1.0]) / math.hypot(0.5, 1.0)
    assert abs(rh_residual(B1, 0.0, [0.0], n, 1.0, 0.0)) <= 1e-15


@settings(max_examples=50, deadline=None)
@given(
    ul=st.floats(-2, 2),
    ur=st.floats(-2, 2),
    n=st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 0.1),
)
def test_rh_antisymmetric(ul, ur, n):
    n = np.array(n) / np.linalg.norm(n)
    a = rh_residual(B2, 0.0, [0.0, 0.0], n, ul, ur)
    b = rh_residual(B2, 0.0, [0.0, 0.0], -n, ur, ul)
    assert a == pytest.approx(b, abs=1e-14)


# -- geometric entropy margin -------------------------------------------------------------


def test_entropy_margin_admissible_burgers():
    m = geometric_entropy_margin(B1, 0.0, [0.0], N_ADMISSIBLE, 1.0, 0.0, 101)
    assert m == pytest.approx(0.0, abs=1e-15)
    # interior terms -k(k-1)/2 are positive
    k = np.linspace(0, 1, 101)[1:-1]
    terms = N_ADMISSIBLE[0] * (k - 1) + N_ADMISSIBLE[1] * (k**2 / 2 - 0.5)
    assert np.all(terms > 0)


def test_entropy_margin_reversed_normal():
    assert geometric_entropy_margin(B1, 0.0, [0.0], -N_ADMISSIBLE, 1.0, 0.0, 101) < 0
    assert geometric_entropy_margin_right(B1, 0.0, [0.0], -N_ADMISSIBLE, 1.0, 0.0, 101) < 0


def test_entropy_margin_needs_ordered_states():
    with pytest.raises(DomainError):
        geometric_entropy_margin(B1, 0.0, [0.0], N_ADMISSIBLE, 0.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(ul=st.floats(0.1, 2), gap=st.floats(0.05, 2), k=st.integers(11, 200))
def test_entropy_margin_sampling_stable(ul, gap, k):
    ur = ul - gap
    n = np.array([0.3, -0.8, 0.52])
    n = n / np.linalg.norm(n)
    m1 = geometric_entropy_margin(B2, 0.0, [0, 0], n, ul, ur, k)
    m2 = geometric_entropy_margin(B2, 0.0, [0, 0], n, ul, ur, 2 * k)
    top = max(abs(ul), abs(ur))
    lip = 1.0 + top + top**3
    assert abs(m1 - m2) <= lip * gap / (k - 1) + 1e-12


def test_audit_discontinuity_flags_order():
    rep = audit_discontinuity(B1, [0.5, 0.5], [[0.25], [0.25]], [N_ADMISSIBLE, N_ADMISSIBLE], [1.0, 0.0], [0.0, 1.0])
    names = [(c.name, c.passed) for c in rep.checks]
    assert ("entropy_margin", True) in names
    assert ("trace_order", False) in names
    assert not rep.passed


# -- Kruzkov residual ------------------------------------------------------------------------


def _field_1d(fn, nt=81, nx=161, T=1.0, X=1.0):
    return GridField.from_function(fn, np.linspace(0, T, nt), [np.linspace(-X, X, nx)])


def test_kruzkov_constant_state_zero():
    f = _field_1d(lambda t, p: np.full(p.shape[:-1], 0.0))
    assert abs(kruzkov_residual(f, B1, NEG, 0.0, (0.5, 0.0), (0.2, 0.3))) <= 1e-15


def test_kruzkov_outside_range_is_weak_form():
    flow = CharFlow(NEG)
    f = _field_1d(lambda t, p: np.where(p[..., 0] < 0, flow.u_bar(t, 1.0), flow.u_bar(t, -1.0)))
    c, w = (0.5, 0.0), (0.2, 0.3)
    weak = weak_form_residual(f, B1, NEG, c, w)
    above = kruzkov_residual(f, B1, NEG, 2.0, c, w)
    below = kruzkov_residual(f, B1, NEG, -2.0, c, w)
    assert above == pytest.approx(-below, abs=1e-12)
    assert below == pytest.approx(weak, abs=1e-12)


def test_kruzkov_support_must_fit():
    f = _field_1d(lambda t, p: np.zeros(p.shape[:-1]))
    with pytest.raises(DomainError):
        kruzkov_residual(f, B1, ZERO, 0.0, (0.1, 0.0), (0.2, 0.2))


def test_kruzkov_detects_entropy_violating_shock():
    # u_l = 0 < u_r = 1 moving at speed 1/2 satisfies RH but not the entropy condition
    f = _field_1d(lambda t, p: np.where(p[..., 0] < t / 2, 0.0, 1.0), nt=161, nx=321)
    worst = min(kruzkov_residual(f, B1, ZERO, k, (0.5, 0.25), (0.2, 0.3)) for k in np.linspace(0, 1, 11))
    assert worst < -0.05
    good = _field_1d(lambda t, p: np.where(p[..., 0] < t / 2, 1.0, 0.0), nt=161, nx=321)
    assert min(kruzkov_residual(good, B1, ZERO, k, (0.5, 0.25), (0.2, 0.3)) for k in np.linspace(0, 1, 11)) >= -5 * good.spacing


def test_kruzkov_constructed_shock_passes():
    sol = riemann.construct(riemann.RiemannProblem(B2, NEG, cubic_plane_surface(), 1.0, 0.5))
    f = GridField.from_function(lambda t, p: riemann.evaluate(sol, t, p), np.linspace(0, 1.2, 49), [np.linspace(-1, 1, 97)] * 2)
    rep = kruzkov_audit(f, B2, NEG, np.linspace(0, 1, 11), [(0.6, x, y) for x in (-0.4, 0.4) for y in (-0.4, 0.4)], (0.2, 0.2, 0.2), 5 * f.spacing)
    assert rep.passed


def test_kruzkov_nonunique_solution_one():
    cand = examples.example2_candidates("Shock", 1.0)[0]
    f = GridField.from_function(lambda t, p: cand.value(t, p[..., 0], p[..., 1]), np.linspace(0, 1.2, 49), [np.linspace(-1, 1, 97)] * 2)
    ul, ur = cand.traces(0.6)
    rep = kruzkov_audit(
        f, B2, source_from_name("pos_cbrt"), np.linspace(ur, ul, 11), [(0.6, x, 0.0) for x in (-0.3, 0.0, 0.3)], (0.2, 0.2, 0.2), 5 * f.spacing
    )
    assert rep.passed


# -- smooth residual, cone distance ----------------------------------------------------------


def test_pde_residual_spatially_constant_flow():
    flow = CharFlow(NEG)
    fn = lambda t, p: np.full(p.shape[:-1], flow.u_bar(t, 0.8))  # noqa: E731
    res = pde_residual(fn, B2, NEG, 0.4, np.zeros((3, 2)))
    assert np.max(np.abs(res)) <= 1e-6


def test_cone_speed_burgers2d():
    assert cone_speed(B2, 1.0) == pytest.approx(math.sqrt(2.0), rel=1e-12)


def test_l1_cone_distance_identical_and_disc_area():
    axes = [np.linspace(-2, 2, 801)] * 2
    a = GridField.from_function(lambda t, p: np.zeros(p.shape[:-1]), [0.0, 0.2], axes)
    b = GridField.from_function(lambda t, p: np.ones(p.shape[:-1]), [0.0, 0.2], axes)
    assert l1_cone_distance(a, a, 1.5, 1.0, 0.2, B2) == 0.0
    r = 1.5 - math.sqrt(2.0) * 0.2
    assert l1_cone_distance(a, b, 1.5, 1.0, 0.2, B2) == pytest.approx(math.pi * r * r, rel=1e-2)


def test_l1_cone_distance_errors():
    axes = [np.linspace(-1, 1, 11)]
    a = GridField.from_function(lambda t, p: np.zeros(p.shape[:-1]), [0.0, 1.0], axes)
    b = GridField.from_function(lambda t, p: np.zeros(p.shape[:-1]), [0.0, 1.0], [np.linspace(-1, 1, 13)])
    with pytest.raises(DomainError):
        l1_cone_distance(a, b, 1.0, 1.0, 0.0, B1)
    with pytest.raises(DomainError):
        l1_cone_distance(a, a, 0.5, 1.0, 1.0, B1)
    with pytest.raises(DomainError):
        l1_cone_distance(a, a, 1.0, 1.0, 0.0, B1, speed=0.5)


def test_l1_box_distance():
    xs = np.linspace(0, 1, 101)
    assert l1_box_distance(np.zeros(101), xs, [xs]) == pytest.approx(0.5)


# -- reports ---------------------------------------------------------------------------------


def test_report_serialization():
    rep = VerificationReport()
    rep.add("a", "here", 1e-9, 1e-6, True)
    rep.add("b", "there", 2.0, 1.0, False)
    d = json.loads(rep.to_json())
    assert d["schema"] == 1 and d["passed"] is False and d["n_checks"] == 2
    assert d["by_name"]["b"]["failed"] == 1
    text = rep.to_text()
    assert "PASS  a" in text and "FAIL  b" in text and "1/2" in text

"""Closed-form reference solutions for the two cube-root sources in 2-D.

Both use the flux ``(u^2/2, u^4/4)`` and the surface ``x^3 + y = 0``.
With ``g = -u^(1/3)`` every state reaches zero in finite time and the
Riemann solution is unique. With ``g = u^(1/3)`` the flow from zero is
not unique, and each choice of ``u_bar(t, 0)`` gives a different
admissible solution.

Nothing here calls the general characteristic solver. The formulas are
evaluated directly, with scipy quadrature for the interaction integrals
and plain bisection for implicit states, so they can serve as an
independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

SHOCK_BIG = "ShockBig"
SHOCK_SMALL = "ShockSmall"
SHOCK_SYMMETRIC = "ShockSymmetric"
RAREFACTION = "Rarefaction"

ZERO = "Zero"
NEG_FAN = "NegFan"
POS_FAN = "PosFan"
BRANCHES = (ZERO, NEG_FAN, POS_FAN)


# ---------------------------------------------------------------------------
# absorbing source g = -u^(1/3)
# ---------------------------------------------------------------------------


def absorbing_ubar(t, s):
    """sgn(s) (|s|^(2/3) - 2t/3)^(3/2), frozen at 0 after extinction."""
    s = np.asarray(s, dtype=float)
    b = np.maximum(np.abs(s) ** (2.0 / 3.0) - 2.0 * np.asarray(t) / 3.0, 0.0)
    return np.sign(s) * b**1.5


def absorbing_extinction(s):
    return 1.5 * np.abs(np.asarray(s, dtype=float)) ** (2.0 / 3.0)


def absorbing_chi(t, s):
    """Closed-form characteristic shifts (chi_1, chi_2) along the last axis."""
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    b = np.maximum(a ** (2.0 / 3.0) - 2.0 * np.asarray(t) / 3.0, 0.0)
    c1 = 0.6 * np.sign(s) * (a ** (5.0 / 3.0) - b**2.5)
    c2 = (3.0 / 11.0) * np.sign(s) * (a ** (11.0 / 3.0) - b**5.5)
    return np.stack(np.broadcast_arrays(c1, c2), axis=-1)


@dataclass(frozen=True)
class Example1Oracle:
    """Riemann solution for ``g = -u^(1/3)``."""

    u_minus: float
    u_plus: float

    @property
    def case(self) -> str:
        um, up = self.u_minus, self.u_plus
        if um > up:
            if abs(um) > abs(up):
                return SHOCK_BIG
            if abs(um) < abs(up):
                return SHOCK_SMALL
            return SHOCK_SYMMETRIC
        if um < 0 < up:
            return RAREFACTION
        raise ValueError("the reference covers shocks and rarefactions with u_minus < 0 < u_plus")

    @property
    def extinction(self) -> float:
        return float(1.5 * max(abs(self.u_minus), abs(self.u_plus)) ** (2.0 / 3.0))


@lru_cache(maxsize=4096)
def interaction_integral(t: float, u_minus: float, u_plus: float) -> float:
    """P(t) = int_0^t (a^2 b + a b^2) d tau with a, b the two flows."""
    if t <= 0:
        return 0.0

    def integrand(tau):
        a = float(absorbing_ubar(tau, u_minus))
        b = float(absorbing_ubar(tau, u_plus))
        return a * a * b + a * b * b

    pts = [v for v in (float(absorbing_extinction(u_minus)), float(absorbing_extinction(u_plus))) if 0 < v < t]
    val, _ = quad(integrand, 0.0, t, points=pts or None, epsabs=1e-14, epsrel=1e-13, limit=200)
    return float(val)


def example1_surface(oracle: Example1Oracle, t: float, x, y):
    """Shock surface function; negative on the u_minus side."""
    um, up = oracle.u_minus, oracle.u_plus
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    case = oracle.case
    if case == SHOCK_SYMMETRIC:
        return x**3 + y
    if case == RAREFACTION:
        raise ValueError("rarefactions have no shock surface")
    tm, tp = float(absorbing_extinction(um)), float(absorbing_extinction(up))
    if case == SHOCK_BIG and t > tp:
        # the right state has vanished; its shifts are frozen at tp
        c_m, c_p = absorbing_chi(t, um), absorbing_chi(tp, up)
        P = interaction_integral(tp, um, up)
    elif case == SHOCK_SMALL and t > tm:
        c_m, c_p = absorbing_chi(tm, um), absorbing_chi(t, up)
        P = interaction_integral(tm, um, up)
    else:
        c_m, c_p = absorbing_chi(t, um), absorbing_chi(t, up)
        P = interaction_integral(t, um, up)
    A = 0.5 * (c_m[0] + c_p[0])
    B = 0.25 * (c_m[1] + c_p[1] + P)
    return (x - A) ** 3 + y - B


def example1_surface_gradient(oracle: Example1Oracle, t: float, x, y) -> np.ndarray:
    """(S_t, S_x, S_y) from the time derivatives of the shifts."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    um, up = oracle.u_minus, oracle.u_plus
    a, b = float(absorbing_ubar(t, um)), float(absorbing_ubar(t, up))
    if oracle.case == SHOCK_SYMMETRIC:
        A, dA, dB = 0.0, 0.0, 0.0
    else:
        c = absorbing_chi(t, um) + absorbing_chi(t, up)
        A = 0.5 * c[0]
        dA = 0.5 * (a + b)
        dB = 0.25 * (a**3 + b**3 + a * a * b + a * b * b)
    sx = 3.0 * (x - A) ** 2
    st = -sx * dA - dB
    return np.stack([st, sx, np.ones_like(x)], axis=-1)


def _bisect(fn, lo, hi, iters: int = 200):
    """Vectorized bisection keeping fn(lo) >= 0 > fn(hi)."""
    lo, hi = np.array(lo, dtype=float), np.array(hi, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        up = fn(mid) >= 0
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
        if np.all(np.abs(hi - lo) <= 4e-16 * np.maximum(1.0, np.abs(lo))):
            break
    return 0.5 * (lo + hi)


def _rarefaction_equation(t, x, y, c, sign):
    """Implicit fan equation for states c of the given sign."""
    a = np.abs(c)
    b = np.maximum(a ** (2.0 / 3.0) - 2.0 * t / 3.0, 0.0)
    q1 = 0.6 * (a ** (5.0 / 3.0) - b**2.5)
    q2 = (3.0 / 11.0) * (a ** (11.0 / 3.0) - b**5.5)
    return (x - sign * q1) ** 3 + y - sign * q2


def example1_value(oracle: Example1Oracle, t: float, x, y) -> np.ndarray:
    """Solution value at time t, with the left trace on shock surfaces."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    um, up = oracle.u_minus, oracle.u_plus
    case = oracle.case
    if t >= oracle.extinction:
        return np.zeros(x.shape)
    if t == 0:
        return np.where(x**3 + y <= 0, um, up)
    if case != RAREFACTION:
        s = example1_surface(oracle, t, x, y)
        return np.where(s <= 0, absorbing_ubar(t, um), absorbing_ubar(t, up))
    return _rarefaction_value(um, up, t, x, y)


def _rarefaction_value(um, up, t, x, y):
    tm, tp = float(absorbing_extinction(um)), float(absorbing_extinction(up))
    am, ap = abs(um), abs(up)
    out = np.zeros(x.shape)
    label = rarefaction_regions(um, up, t, x, y)
    bm = max(am ** (2.0 / 3.0) - 2.0 * t / 3.0, 0.0)
    bp = max(ap ** (2.0 / 3.0) - 2.0 * t / 3.0, 0.0)
    out[label == "left"] = -(bm**1.5)
    out[label == "right"] = bp**1.5
    sel = label == "fan-"
    if sel.any():
        xs, ys = x[sel], y[sel]
        c = _bisect(lambda c: _rarefaction_equation(t, xs, ys, c, -1.0), np.full(xs.shape, -am), np.full(xs.shape, -1e-300))
        out[sel] = -np.maximum(np.abs(c) ** (2.0 / 3.0) - 2.0 * t / 3.0, 0.0) ** 1.5
    sel = label == "fan+"
    if sel.any():
        xs, ys = x[sel], y[sel]
        c = _bisect(lambda c: _rarefaction_equation(t, xs, ys, c, 1.0), np.full(xs.shape, 1e-300), np.full(xs.shape, ap))
        out[sel] = np.maximum(np.abs(c) ** (2.0 / 3.0) - 2.0 * t / 3.0, 0.0) ** 1.5
    return out


def rarefaction_regions(um: float, up: float, t: float, x, y) -> np.ndarray:
    """Region labels ``left``, ``fan-``, ``zero``, ``fan+`` and ``right``.

    Fan regions are closed toward the outer states and open toward the
    absorbed band.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    tm, tp = float(absorbing_extinction(um)), float(absorbing_extinction(up))
    am, ap = abs(um), abs(up)
    bm = max(am ** (2.0 / 3.0) - 2.0 * t / 3.0, 0.0)
    bp = max(ap ** (2.0 / 3.0) - 2.0 * t / 3.0, 0.0)
    phi_m = (x + 0.6 * (am ** (5.0 / 3.0) - bm**2.5)) ** 3 + y + (3.0 / 11.0) * (am ** (11.0 / 3.0) - bm**5.5)
    phi_p = (x - 0.6 * (ap ** (5.0 / 3.0) - bp**2.5)) ** 3 + y - (3.0 / 11.0) * (ap ** (11.0 / 3.0) - bp**5.5)
    w = 2.0 * t / 3.0
    band_m = (x + 0.6 * w**2.5) ** 3 + y + (3.0 / 11.0) * w**5.5
    band_p = (x - 0.6 * w**2.5) ** 3 + y - (3.0 / 11.0) * w**5.5
    label = np.full(x.shape, "zero", dtype=object)
    label[(phi_m >= 0) & (band_m < 0) & (0 < t < tm)] = "fan-"
    label[(phi_p <= 0) & (band_p > 0) & (0 < t < tp)] = "fan+"
    label[phi_m < 0] = "left"
    label[phi_p > 0] = "right"
    return label


def fan_boundaries(um: float, up: float, t: float, x):
    """y-coordinates of the four interfaces bounding the rarefaction at abscissa x.

    Returns (left edge, inner left, inner right, right edge), where each is
    the graph of the corresponding region boundary over x.
    """
    x = np.asarray(x, dtype=float)
    am, ap = abs(um), abs(up)
    bm = max(am ** (2.0 / 3.0) - 2.0 * t / 3.0, 0.0)
    bp = max(ap ** (2.0 / 3.0) - 2.0 * t / 3.0, 0.0)
    w = 2.0 * t / 3.0
    outer_m = -(x + 0.6 * (am ** (5.0 / 3.0) - bm**2.5)) ** 3 - (3.0 / 11.0) * (am ** (11.0 / 3.0) - bm**5.5)
    inner_m = -(x + 0.6 * w**2.5) ** 3 - (3.0 / 11.0) * w**5.5
    inner_p = -(x - 0.6 * w**2.5) ** 3 + (3.0 / 11.0) * w**5.5
    outer_p = -(x - 0.6 * (ap ** (5.0 / 3.0) - bp**2.5)) ** 3 + (3.0 / 11.0) * (ap ** (11.0 / 3.0) - bp**5.5)
    return outer_m, inner_m, inner_p, outer_p


# ---------------------------------------------------------------------------
# non-Lipschitz source g = u^(1/3)
# ---------------------------------------------------------------------------


def growing_ubar(t, s):
    """sgn(s) (|s|^(2/3) + 2t/3)^(3/2) for s != 0."""
    s = np.asarray(s, dtype=float)
    return np.sign(s) * (np.abs(s) ** (2.0 / 3.0) + 2.0 * np.asarray(t) / 3.0) ** 1.5


def growing_chi(t, s):
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    w = a ** (2.0 / 3.0) + 2.0 * np.asarray(t) / 3.0
    c1 = 0.6 * np.sign(s) * (w**2.5 - a ** (5.0 / 3.0))
    c2 = (3.0 / 11.0) * np.sign(s) * (w**5.5 - a ** (11.0 / 3.0))
    return np.stack(np.broadcast_arrays(c1, c2), axis=-1)


@dataclass(frozen=True)
class Example2Branch:
    """One choice of the flow from zero for ``g = u^(1/3)``.

    ``branch`` picks 0, -(2t/3)^(3/2) or +(2t/3)^(3/2); ``delay`` holds the
    flow at zero until that time before it departs.
    """

    branch: str
    delay: float = 0.0

    def __post_init__(self):
        if self.branch not in BRANCHES:
            raise ValueError(f"unknown branch {self.branch!r}")
        if self.delay < 0:
            raise ValueError("delay must be non-negative")

    @property
    def sign(self) -> float:
        return {ZERO: 0.0, NEG_FAN: -1.0, POS_FAN: 1.0}[self.branch]

    def ubar(self, t):
        w = 2.0 * np.maximum(np.asarray(t, dtype=float) - self.delay, 0.0) / 3.0
        return self.sign * w**1.5

    def chi(self, t):
        w = 2.0 * np.maximum(np.asarray(t, dtype=float) - self.delay, 0.0) / 3.0
        return np.stack(np.broadcast_arrays(self.sign * 0.6 * w**2.5, self.sign * (3.0 / 11.0) * w**5.5), axis=-1)


class ShockCandidate:
    """Shock between ``u_bar(t, u_minus)`` and a branch of the flow from zero."""

    kind = "Shock"

    def __init__(self, u_minus: float, branch: Example2Branch):
        if not u_minus > 0:
            raise ValueError("shock candidates need u_minus > 0")
        self.u_minus = float(u_minus)
        self.branch = branch
        self.name = {ZERO: "Solution 1", NEG_FAN: "Solution 2", POS_FAN: "Solution 3"}[branch.branch]
        if branch.delay:
            self.name += f" (delay {branch.delay:g})"

    def traces(self, t: float) -> tuple[float, float]:
        return float(growing_ubar(t, self.u_minus)), float(self.branch.ubar(t))

    @lru_cache(maxsize=4096)
    def interaction(self, t: float) -> float:
        """P~(t) = int_0^t (a^2 b + a b^2) d tau for the chosen branch."""
        if t <= 0 or self.branch.sign == 0 or t <= self.branch.delay:
            return 0.0

        def integrand(tau):
            a = float(growing_ubar(tau, self.u_minus))
            b = float(self.branch.ubar(tau))
            return a * a * b + a * b * b

        val, _ = quad(integrand, self.branch.delay, t, epsabs=1e-14, epsrel=1e-13, limit=200)
        return float(val)

    def shifts(self, t: float) -> tuple[float, float]:
        cm = growing_chi(t, self.u_minus)
        c0 = self.branch.chi(t)
        return 0.5 * (cm[0] + c0[0]), 0.25 * (cm[1] + c0[1] + self.interaction(float(t)))

    def surface(self, t: float, x, y):
        A, B = self.shifts(t)
        return (np.asarray(x) - A) ** 3 + np.asarray(y) - B

    def surface_y(self, t: float, x):
        A, B = self.shifts(t)
        return B - (np.asarray(x, dtype=float) - A) ** 3

    def surface_gradient(self, t: float, x, y) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        A, _ = self.shifts(t)
        a, b = self.traces(t)
        dA = 0.5 * (a + b)
        dB = 0.25 * (a**3 + b**3 + a * a * b + a * b * b)
        sx = 3.0 * (x - A) ** 2
        return np.stack([-sx * dA - dB, sx, np.ones_like(x)], axis=-1)

    def value(self, t: float, x, y) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        if t == 0:
            return np.where(x**3 + y <= 0, self.u_minus, 0.0)
        a, b = self.traces(t)
        return np.where(self.surface(t, x, y) <= 0, a, b)

    def region(self, t: float, x, y) -> np.ndarray:
        return np.where(self.surface(t, x, y) <= 0, 0, 1)


class RarefactionCandidate:
    """Continuous fan between ``u_bar(t, u_minus) < 0`` and a branch from zero."""

    kind = "Rarefaction"

    def __init__(self, u_minus: float, branch: str):
        if not u_minus < 0:
            raise ValueError("rarefaction candidates need u_minus < 0")
        if branch not in BRANCHES:
            raise ValueError(f"unknown branch {branch!r}")
        self.u_minus = float(u_minus)
        self.branch = branch
        self.name = {ZERO: "Solution 1", NEG_FAN: "Solution 2", POS_FAN: "Solution 3"}[branch]

    def _pieces(self, t, x, y):
        a = abs(self.u_minus)
        w = a ** (2.0 / 3.0) + 2.0 * t / 3.0
        left = (x + 0.6 * (w**2.5 - a ** (5.0 / 3.0))) ** 3 + y + (3.0 / 11.0) * (w**5.5 - a ** (11.0 / 3.0))
        v = 2.0 * t / 3.0
        band_m = (x + 0.6 * v**2.5) ** 3 + y + (3.0 / 11.0) * v**5.5
        band_p = (x - 0.6 * v**2.5) ** 3 + y - (3.0 / 11.0) * v**5.5
        return left, band_m, band_p, x**3 + y

    def region(self, t: float, x, y) -> np.ndarray:
        """0 left state, 1 fan, 2 delayed negative family, 3 zero,
        4 delayed positive family, 5 negative branch state, 6 positive branch state."""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        left, band_m, band_p, m0 = self._pieces(t, x, y)
        lab = np.full(x.shape, 3, dtype=int)
        if self.branch == ZERO:
            lab[(band_m >= 0) & (m0 <= 0)] = 2
        elif self.branch == NEG_FAN:
            lab[band_m > 0] = 5
        else:
            lab[(band_m >= 0) & (m0 <= 0)] = 2
            lab[(band_p <= 0) & (m0 > 0)] = 4
            lab[band_p > 0] = 6
        lab[(left >= 0) & (band_m <= 0)] = 1
        lab[left < 0] = 0
        if t == 0:
            lab = np.where(m0 <= 0, 0, 3)
        return lab

    def value(self, t: float, x, y) -> np.ndarray:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        if t == 0:
            return np.where(x**3 + y <= 0, self.u_minus, 0.0)
        lab = self.region(t, x, y)
        out = np.zeros(x.shape)
        for lab_id in np.unique(lab):
            sel = lab == lab_id
            out[sel] = self.region_value(t, x[sel], y[sel], int(lab_id))
        return out

    def region_value(self, t: float, x, y, lab_id: int) -> np.ndarray:
        """Formula of one region, evaluated wherever its implicit equation is solvable.

        Evaluating the two neighbouring formulas at an interface point gives
        the one-sided limits exactly.
        """
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        a = abs(self.u_minus)
        v = (2.0 * t / 3.0) ** 1.5
        if lab_id == 0:
            return np.full(x.shape, -((a ** (2.0 / 3.0) + 2.0 * t / 3.0) ** 1.5))
        if lab_id == 1:
            c = self.fan_state(t, x, y)
            return -((np.abs(c) ** (2.0 / 3.0) + 2.0 * t / 3.0) ** 1.5)
        if lab_id in (2, 4):
            sgn = -1.0 if lab_id == 2 else 1.0
            return sgn * (2.0 * self.departure_age(t, x, y, sgn) / 3.0) ** 1.5
        if lab_id == 3:
            return np.zeros(x.shape)
        if lab_id == 5:
            return np.full(x.shape, -v)
        if lab_id == 6:
            return np.full(x.shape, v)
        raise ValueError(f"unknown region {lab_id}")

    def fan_state(self, t: float, x, y) -> np.ndarray:
        """Root c in [u_minus, 0) of the fan equation."""
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)

        def phi(c):
            a = np.abs(c)
            w = a ** (2.0 / 3.0) + 2.0 * t / 3.0
            return (x + 0.6 * (w**2.5 - a ** (5.0 / 3.0))) ** 3 + y + (3.0 / 11.0) * (w**5.5 - a ** (11.0 / 3.0))

        # phi(u_minus) >= 0 > phi(0-) inside the fan
        return _bisect(phi, np.full(x.shape, self.u_minus), np.full(x.shape, -1e-300))

    def departure_age(self, t: float, x, y, sgn: float) -> np.ndarray:
        """tau = t - t0 solving the delayed-departure surface equation."""
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)

        def h(tau):
            v = 2.0 * tau / 3.0
            return sgn * ((x - sgn * 0.6 * v**2.5) ** 3 + y - sgn * (3.0 / 11.0) * v**5.5)

        # h(0) = sgn (x^3 + y) >= 0 >= h(t) on the family's region
        return _bisect(h, np.zeros(x.shape), np.full(x.shape, float(t)))


def example2_candidates(kind: str, u_minus: float, branch_set=BRANCHES, delay: float = 0.0) -> list:
    """Evaluators for each requested branch."""
    if kind == "Shock":
        if not u_minus > 0:
            raise ValueError("shock candidates need u_minus > 0")
        return [ShockCandidate(u_minus, Example2Branch(b, delay)) for b in branch_set]
    if kind == "Rarefaction":
        if not u_minus < 0:
            raise ValueError("rarefaction candidates need u_minus < 0")
        if delay:
            raise ValueError("delayed branches are only provided for shocks")
        return [RarefactionCandidate(u_minus, b) for b in branch_set]
    raise ValueError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# non-uniqueness report
# ---------------------------------------------------------------------------


def burgers2d_fluxes():
    """The flux pair ``(u^2/2, u^4/4)`` used by every example."""
    from .core import flux_from_name

    return flux_from_name("burgers2d")


def growing_source():
    from .core import source_from_name

    return source_from_name("pos_cbrt")


@dataclass
class CandidateAudit:
    name: str
    n_points: int
    max_rh: float
    min_margin: float
    max_jump: float
    max_pde_residual: float
    passed: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class NonuniquenessReport:
    kind: str
    u_minus: float
    t: float
    audits: list
    slice_distances: dict
    spacetime_distances: dict
    min_distance: float

    @property
    def all_admissible(self) -> bool:
        return all(a.passed for a in self.audits)

    @property
    def separated(self) -> bool:
        return max(self.slice_distances.values()) > self.min_distance

    @property
    def all_pairs_separated(self) -> bool:
        return min(self.slice_distances.values()) > self.min_distance and min(self.spacetime_distances.values()) > self.min_distance

    @property
    def passed(self) -> bool:
        return self.all_admissible and self.separated

    def as_dict(self) -> dict:
        return {
            "schema": 1,
            "kind": self.kind,
            "u_minus": self.u_minus,
            "t": self.t,
            "audits": [a.as_dict() for a in self.audits],
            "slice_distances": self.slice_distances,
            "spacetime_distances": self.spacetime_distances,
            "min_distance": self.min_distance,
            "all_admissible": self.all_admissible,
            "all_pairs_separated": self.all_pairs_separated,
            "passed": self.passed,
        }

    def to_text(self) -> str:
        lines = [f"{self.kind} candidates for u_minus = {self.u_minus:g}"]
        for a in self.audits:
            lines.append(
                f"  {'PASS' if a.passed else 'FAIL'} {a.name:<12} points={a.n_points} max|RH|={a.max_rh:.2e} "
                f"min margin={a.min_margin:.2e} max jump={a.max_jump:.2e} max PDE residual={a.max_pde_residual:.2e}"
            )
        for key, val in self.slice_distances.items():
            lines.append(f"  L1 {key}: t={self.t:g} slice {val:.4f}, space-time {self.spacetime_distances[key]:.4f}")
        lines.append(f"  {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _smooth_residual(cand, t_values, rng, n, box, h=1e-5, guard=1e-3):
    """Max centred-difference PDE residual at random points away from region interfaces."""
    from .verify import pde_residual

    fl, g = burgers2d_fluxes(), growing_source()
    worst = 0.0
    for t in t_values:
        pts = rng.uniform(-box, box, size=(n, 2))
        lab = cand.region(t, pts[:, 0], pts[:, 1])
        keep = np.ones(n, dtype=bool)
        for dt_, dx_, dy_ in ((guard, 0, 0), (-guard, 0, 0), (0, guard, 0), (0, -guard, 0), (0, 0, guard), (0, 0, -guard)):
            keep &= cand.region(t + dt_, pts[:, 0] + dx_, pts[:, 1] + dy_) == lab
        pts = pts[keep]
        if pts.size == 0:
            continue
        r = pde_residual(lambda tt, p: cand.value(tt, p[:, 0], p[:, 1]), fl, g, t, pts, h)
        worst = max(worst, float(np.abs(r).max()))
    return worst


def _shock_audit(cand: ShockCandidate, t_max, n_points, rng, rh_tol, entropy_tol, k_samples):
    from .verify import audit_discontinuity

    fl = burgers2d_fluxes()
    ts = np.sort(rng.uniform(0.02 * t_max, t_max, size=n_points))
    xs = rng.uniform(-1.0, 1.0, size=n_points)
    pts = np.empty((n_points, 2))
    normals = np.empty((n_points, 3))
    ul = np.empty(n_points)
    ur = np.empty(n_points)
    for i, (t, x) in enumerate(zip(ts, xs)):
        y = float(cand.surface_y(t, x))
        pts[i] = (x, y)
        grad = cand.surface_gradient(t, x, y)
        normals[i] = -grad / np.linalg.norm(grad)
        ul[i], ur[i] = cand.traces(t)
    rep = audit_discontinuity(fl, ts, pts, normals, ul, ur, k_samples, rh_tol, entropy_tol, label=cand.name)
    rh = max(c.value for c in rep.checks if c.name == "rankine_hugoniot")
    margins = [c.value for c in rep.checks if c.name == "entropy_margin"]
    return rep.passed, rh, min(margins) if margins else -math.inf


def _interface_jumps(cand: RarefactionCandidate, t_values, xs, y_range=(-4.0, 4.0), n_scan=4001):
    """Largest gap between neighbouring region formulas at interfaces on vertical lines.

    Interfaces are located by bisection on the region label. A scan cell may
    hide thin regions, so after each interface the walk continues from the
    far side until the cell's upper label is reached.
    """
    ys = np.linspace(*y_range, n_scan)

    def label(t, x, y):
        return int(cand.region(t, np.array([x]), np.array([y]))[0])

    worst, count = 0.0, 0
    for t in t_values:
        for x in xs:
            lab = cand.region(t, np.full(ys.shape, x), ys)
            for j in np.flatnonzero(lab[1:] != lab[:-1]):
                lo, top = ys[j], ys[j + 1]
                for _ in range(8):
                    la = label(t, x, lo)
                    if la == lab[j + 1]:
                        break
                    hi = top
                    # bisect to float resolution; some interface formulas are only Holder continuous
                    for _ in range(2100):
                        mid = 0.5 * (lo + hi)
                        if mid in (lo, hi):
                            break
                        if label(t, x, mid) == la:
                            lo = mid
                        else:
                            hi = mid
                    lb = label(t, x, hi)
                    p = np.array([0.5 * (lo + hi)])
                    va = cand.region_value(t, np.array([x]), p, la)[0]
                    vb = cand.region_value(t, np.array([x]), p, lb)[0]
                    worst = max(worst, abs(float(va - vb)))
                    count += 1
                    lo = hi
    return worst, count


def nonuniqueness_report(
    u_minus: float,
    kind: str,
    n_points: int = 200,
    t: float = 1.0,
    box: float = 1.5,
    resolution: int = 301,
    rh_tol: float = 1e-6,
    entropy_tol: float = 1e-10,
    jump_tol: float = 1e-6,
    pde_tol: float = 1e-4,
    k_samples: int = 101,
    min_distance: float = 0.05,
    seed: int = 0,
) -> NonuniquenessReport:
    """Audit the three branch solutions and measure how far apart they are.

    Shocks get the jump condition and entropy margin on sampled surface
    points. The rarefaction candidates are continuous, so they are checked
    for jumps across every region interface (a jump below ``jump_tol``
    bounds the jump-condition residual and makes the entropy test vacuous)
    and for the PDE residual inside each region.
    """
    rng = np.random.default_rng(seed)
    cands = example2_candidates(kind, u_minus)
    fl = burgers2d_fluxes()
    top = float((abs(u_minus) ** (2.0 / 3.0) + 2.0 * t / 3.0) ** 1.5)
    speed = float(np.sqrt(1.0 + (fl.max_speed(-top, top) ** 2).sum()))
    audits = []
    for cand in cands:
        if kind == "Shock":
            ok, rh, margin = _shock_audit(cand, t, n_points, rng, rh_tol, entropy_tol, k_samples)
            jump = abs(cand.traces(t)[0] - cand.traces(t)[1])
        else:
            n_t = max(1, int(round(math.sqrt(n_points / 4))))
            jump, count = _interface_jumps(cand, np.linspace(0.1, t, n_t), np.linspace(-1.0, 1.0, max(1, n_points // n_t)))
            rh = jump * speed
            margin = 0.0
            ok = jump <= jump_tol and rh <= rh_tol
        pde = _smooth_residual(cand, np.linspace(0.2, t, 5), rng, 200, box)
        ok = ok and pde <= pde_tol
        npts = n_points if kind == "Shock" else count
        audits.append(CandidateAudit(cand.name, npts, rh, margin, jump, pde, ok))
    xs = np.linspace(-box, box, resolution)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    from .verify import l1_box_distance, trapezoid_weights

    ts = np.linspace(0.0, t, 21)
    fields = {c.name: [c.value(tt, X, Y) for tt in ts] for c in cands}
    slice_d, st_d = {}, {}
    tw = trapezoid_weights(ts)
    for i in range(len(cands)):
        for j in range(i + 1, len(cands)):
            a, b = cands[i].name, cands[j].name
            per_t = [l1_box_distance(fa, fb, (xs, xs)) for fa, fb in zip(fields[a], fields[b])]
            key = f"{a} vs {b}"
            slice_d[key] = per_t[-1]
            st_d[key] = float((np.asarray(per_t) * tw).sum())
    return NonuniquenessReport(kind, float(u_minus), float(t), audits, slice_d, st_d, min_distance)

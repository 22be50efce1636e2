"""Numerical audits of candidate solutions.

The checks work on two kinds of input: sampled fields on a rectilinear
space-time grid (weak form, Kruzkov inequality, L1 distances) and pointwise
data on a discontinuity (jump condition and entropy margin).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .core import FluxSet, SourceTerm
from .errors import DomainError

CONSTRUCTED = "Constructed"
VISCOUS = "Viscous"
ORACLE = "Oracle"


# ---------------------------------------------------------------------------
# grid fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridField:
    """Values ``u[t, x_1, ..., x_n]`` on a rectilinear grid."""

    t_axis: np.ndarray
    space_axes: tuple
    values: np.ndarray
    provenance: str = CONSTRUCTED

    def __post_init__(self):
        t = np.asarray(self.t_axis, dtype=float)
        axes = tuple(np.asarray(a, dtype=float) for a in self.space_axes)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "t_axis", t)
        object.__setattr__(self, "space_axes", axes)
        object.__setattr__(self, "values", vals)
        for name, ax in [("t", t)] + [(f"x{i + 1}", a) for i, a in enumerate(axes)]:
            if ax.ndim != 1 or ax.size < 1:
                raise ValueError(f"axis {name} must be a non-empty 1-D array")
            if ax.size > 1 and not np.all(np.diff(ax) > 0):
                raise ValueError(f"axis {name} must be strictly increasing")
        expected = (t.size,) + tuple(a.size for a in axes)
        if vals.shape != expected:
            raise ValueError(f"values have shape {vals.shape}, expected {expected}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")

    @property
    def n(self) -> int:
        return len(self.space_axes)

    @property
    def spacing(self) -> float:
        """Largest grid step over all axes."""
        steps = [np.diff(a).max() for a in (self.t_axis,) + self.space_axes if a.size > 1]
        return float(max(steps)) if steps else 0.0

    def time_index(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.t_axis - t)))
        if abs(self.t_axis[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise DomainError(f"time {t} is not on the grid")
        return i

    def at(self, t: float) -> np.ndarray:
        return self.values[self.time_index(t)]

    def mesh(self) -> np.ndarray:
        """Spatial points with shape ``(*sizes, n)``."""
        return np.stack(np.meshgrid(*self.space_axes, indexing="ij"), axis=-1)

    def same_axes(self, other: "GridField") -> bool:
        if self.n != other.n or self.t_axis.shape != other.t_axis.shape:
            return False
        pairs = [(self.t_axis, other.t_axis)] + list(zip(self.space_axes, other.space_axes))
        return all(a.shape == b.shape and np.allclose(a, b, rtol=0, atol=1e-12) for a, b in pairs)

    @classmethod
    def from_function(cls, fn: Callable, t_axis, space_axes, provenance: str = CONSTRUCTED) -> "GridField":
        """Sample ``fn(t, points)`` at every grid time."""
        t_axis = np.asarray(t_axis, dtype=float)
        pts = np.stack(np.meshgrid(*[np.asarray(a, dtype=float) for a in space_axes], indexing="ij"), axis=-1)
        vals = np.stack([np.asarray(fn(float(t), pts), dtype=float) for t in t_axis])
        return cls(t_axis, tuple(space_axes), vals, provenance)


def trapezoid_weights(axis: np.ndarray) -> np.ndarray:
    w = np.zeros(axis.size)
    if axis.size > 1:
        d = np.diff(axis)
        w[:-1] += 0.5 * d
        w[1:] += 0.5 * d
    return w


# ---------------------------------------------------------------------------
# mollifier and test functions
# ---------------------------------------------------------------------------


def _bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def _bump_prime(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape)
    inside = np.abs(s) < 1
    q = 1.0 - s[inside] ** 2
    out[inside] = np.exp(-1.0 / q) * (-2.0 * s[inside] / q**2)
    return out


_BUMP_MASS = quad(lambda s: math.exp(-1.0 / (1.0 - s * s)), -1.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)[0]


@dataclass(frozen=True)
class Mollifier:
    """Smooth bump ``delta_h(s) = delta(s / h) / h`` of unit mass, supported in |s| < h."""

    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("mollifier width must be positive")

    @staticmethod
    def profile(s):
        return _bump(s) / _BUMP_MASS

    def __call__(self, s):
        return _bump(np.asarray(s, dtype=float) / self.h) / (_BUMP_MASS * self.h)

    def derivative(self, s):
        return _bump_prime(np.asarray(s, dtype=float) / self.h) / (_BUMP_MASS * self.h * self.h)

    def mass(self) -> float:
        return float(quad(lambda s: float(self(s)), -self.h, self.h, epsabs=1e-14, epsrel=1e-12, limit=200)[0])


@dataclass(frozen=True)
class TestFunction:
    """Product bump ``phi(t, x) = prod delta_{w_j}(z_j - c_j)`` over time and space."""

    center: tuple
    widths: tuple

    def factors(self, axes: Sequence[np.ndarray]):
        vals, ders = [], []
        for ax, c, w in zip(axes, self.center, self.widths):
            m = Mollifier(w)
            vals.append(m(ax - c))
            ders.append(m.derivative(ax - c))
        return vals, ders


def _support_slices(axes, center, widths):
    sl = []
    for ax, c, w in zip(axes, center, widths):
        if c - w <= ax[0] or c + w >= ax[-1]:
            raise DomainError(f"test support [{c - w}, {c + w}] leaves the grid [{ax[0]}, {ax[-1]}]")
        i0 = max(int(np.searchsorted(ax, c - w)) - 1, 0)
        i1 = min(int(np.searchsorted(ax, c + w)) + 1, ax.size)
        sl.append(slice(i0, i1))
    return sl


def _outer(vectors):
    out = vectors[0]
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return out


def _entropy_integral(field_: GridField, fluxes: FluxSet, source: SourceTerm, k: float | None, center, widths) -> float:
    """Shared quadrature for the Kruzkov (k given) and weak-form (k None) residuals."""
    axes = (field_.t_axis,) + field_.space_axes
    if len(center) != len(axes) or len(widths) != len(axes):
        raise ValueError("center and widths need one entry per grid axis")
    sl = _support_slices(axes, center, widths)
    sub_axes = [ax[s] for ax, s in zip(axes, sl)]
    u = field_.values[tuple(sl)]
    vals, ders = TestFunction(tuple(center), tuple(widths)).factors(sub_axes)
    wts = _outer([trapezoid_weights(ax) for ax in sub_axes])
    # the trapezoid weights of the full axis agree with the sliced ones inside the support
    phi = _outer(vals)
    fu = fluxes.flux(u)
    gu = source(u)
    if k is None:
        eta, q, src = u, fu, gu
    else:
        sg = np.sign(u - k)
        eta = np.abs(u - k)
        q = sg[..., None] * (fu - fluxes.flux(np.array(k)))
        src = sg * gu
    total = eta * _outer([ders[0]] + vals[1:])
    for i in range(field_.n):
        grad_i = _outer(vals[: i + 1] + [ders[i + 1]] + vals[i + 2 :])
        total = total + q[..., i] * grad_i
    total = total + src * phi
    return float((total * wts).sum())


def kruzkov_residual(field_: GridField, fluxes: FluxSet, source: SourceTerm, k: float, test_center, test_widths) -> float:
    """Entropy integral for one constant k and one product bump; should be >= -tol."""
    return _entropy_integral(field_, fluxes, source, float(k), test_center, test_widths)


def weak_form_residual(field_: GridField, fluxes: FluxSet, source: SourceTerm, test_center, test_widths) -> float:
    """``int u phi_t + f(u) . grad phi + g(u) phi``; zero for weak solutions."""
    return _entropy_integral(field_, fluxes, source, None, test_center, test_widths)


# ---------------------------------------------------------------------------
# discontinuity checks
# ---------------------------------------------------------------------------


def rh_residual(fluxes: FluxSet, t, x, normal, u_l, u_r):
    """``n . ([u], [f_1], ..., [f_n])`` with ``[u] = u_l - u_r``.

    ``t`` and ``x`` are accepted for interface symmetry; fluxes here do not
    depend on them. Works on batches with normals along the last axis.
    """
    normal = np.asarray(normal, dtype=float)
    u_l, u_r = np.asarray(u_l, dtype=float), np.asarray(u_r, dtype=float)
    jump = np.concatenate([(u_l - u_r)[..., None], fluxes.flux(u_l) - fluxes.flux(u_r)], axis=-1)
    out = (normal * jump).sum(-1)
    return out if np.ndim(out) else float(out)


def _margin(fluxes, normal, anchor, u_l, u_r, k_samples):
    normal = np.asarray(normal, dtype=float)
    u_l, u_r = np.asarray(u_l, dtype=float), np.asarray(u_r, dtype=float)
    if np.any(u_l <= u_r):
        raise DomainError("entropy margin needs u_l > u_r")
    s = np.linspace(0.0, 1.0, int(k_samples))
    k = u_r[..., None] + (u_l - u_r)[..., None] * s
    a = np.asarray(anchor, dtype=float)[..., None]
    vec_t = k - a
    vec_x = fluxes.flux(k) - fluxes.flux(a)
    val = normal[..., None, 0] * vec_t + (normal[..., None, 1:] * vec_x).sum(-1)
    out = val.min(-1)
    return out if np.ndim(out) else float(out)


def geometric_entropy_margin(fluxes: FluxSet, t, x, normal, u_l, u_r, k_samples: int = 101):
    """Minimum over k in [u_r, u_l] of ``n . (k - u_l, f(k) - f(u_l))``.

    ``normal`` points from the u_r side to the u_l side. A non-negative
    value means the discontinuity is entropy admissible.
    """
    return _margin(fluxes, normal, u_l, u_l, u_r, k_samples)


def geometric_entropy_margin_right(fluxes: FluxSet, t, x, normal, u_l, u_r, k_samples: int = 101):
    """Same test anchored at u_r; equal to the left form when the jump condition holds."""
    return _margin(fluxes, normal, u_r, u_l, u_r, k_samples)


# ---------------------------------------------------------------------------
# smooth regions and L1 distances
# ---------------------------------------------------------------------------


def pde_residual(fn: Callable, fluxes: FluxSet, source: SourceTerm, t: float, points, h: float = 1e-5) -> np.ndarray:
    """Centered-difference residual of ``u_t + sum f_i(u)_{x_i} - g(u)`` at points.

    ``fn(t, points)`` returns values for points of shape ``(m, n)``.
    """
    pts = np.asarray(points, dtype=float)
    u = np.asarray(fn(t, pts), dtype=float)
    res = (np.asarray(fn(t + h, pts)) - np.asarray(fn(t - h, pts))) / (2 * h)
    for i in range(pts.shape[-1]):
        e = np.zeros(pts.shape[-1])
        e[i] = h
        fp = fluxes.flux(np.asarray(fn(t, pts + e)))[..., i]
        fm = fluxes.flux(np.asarray(fn(t, pts - e)))[..., i]
        res = res + (fp - fm) / (2 * h)
    return res - source(u)


def cone_speed(fluxes: FluxSet, M_bound: float) -> float:
    """``N = max_{|u| <= M} |f'(u)|`` with the Euclidean norm over components."""
    return fluxes.cone_speed(M_bound)


def l1_cone_distance(
    field_u: GridField, field_v: GridField, R: float, M_bound: float, t: float, fluxes: FluxSet, speed: float | None = None
) -> float:
    """Trapezoid integral of |u - v| at time t over the ball of radius R - N t.

    N defaults to the flux speed bound over |u| <= M_bound; a larger
    ``speed`` may be passed, which only shrinks the cone.
    """
    if not field_u.same_axes(field_v):
        raise DomainError("fields must share axes")
    N = cone_speed(fluxes, M_bound)
    if speed is not None:
        if speed < N:
            raise DomainError(f"speed {speed} is below the flux bound {N}")
        N = float(speed)
    if N > 0 and t > R / N + 1e-12:
        raise DomainError(f"t = {t} exceeds the cone lifetime R / N = {R / N}")
    radius = R - N * t
    diff = np.abs(field_u.at(t) - field_v.at(t))
    pts = field_u.mesh()
    inside = np.linalg.norm(pts, axis=-1) <= radius
    w = _outer([trapezoid_weights(a) for a in field_u.space_axes])
    return float((diff * inside * w).sum())


def l1_box_distance(a: np.ndarray, b: np.ndarray, axes: Sequence[np.ndarray]) -> float:
    """Trapezoid integral of |a - b| over the box spanned by the axes."""
    w = _outer([trapezoid_weights(np.asarray(ax, dtype=float)) for ax in axes])
    return float((np.abs(np.asarray(a) - np.asarray(b)) * w).sum())


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class Check:
    name: str
    location: str
    value: float
    tolerance: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "location": self.location,
            "value": self.value,
            "tolerance": self.tolerance,
            "passed": bool(self.passed),
        }


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)

    def add(self, name: str, location: str, value: float, tolerance: float, passed: bool) -> Check:
        c = Check(name, location, float(value), float(tolerance), bool(passed))
        self.checks.append(c)
        return c

    def extend(self, other: "VerificationReport") -> None:
        self.checks.extend(other.checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> dict:
        names: dict = {}
        for c in self.checks:
            entry = names.setdefault(c.name, {"count": 0, "failed": 0, "worst": None})
            entry["count"] += 1
            entry["failed"] += 0 if c.passed else 1
        return {"passed": self.passed, "n_checks": len(self.checks), "by_name": names}

    def to_text(self) -> str:
        lines = []
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            lines.append(f"{flag}  {c.name:<22} {c.location:<40} value={c.value:.6e} tol={c.tolerance:.3e}")
        lines.append(f"{'ALL PASS' if self.passed else 'FAILED'}: {len(self.checks) - len(self.failures())}/{len(self.checks)} checks")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({"schema": 1, **self.summary(), "checks": [c.as_dict() for c in self.checks]}, indent=2)


def audit_discontinuity(
    fluxes: FluxSet,
    t,
    x,
    normal,
    u_l,
    u_r,
    k_samples: int = 101,
    rh_tol: float = 1e-6,
    entropy_tol: float = 1e-10,
    label: str = "shock",
) -> VerificationReport:
    """Jump condition and entropy margin at each sampled discontinuity point."""
    rep = VerificationReport()
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = np.asarray(x, dtype=float).reshape(t.size, -1)
    normal = np.asarray(normal, dtype=float).reshape(t.size, -1)
    u_l = np.broadcast_to(np.asarray(u_l, dtype=float), t.shape)
    u_r = np.broadcast_to(np.asarray(u_r, dtype=float), t.shape)
    rh = np.atleast_1d(rh_residual(fluxes, t, x, normal, u_l, u_r))
    for i in range(t.size):
        loc = f"{label} t={t[i]:.4g} x=({', '.join(f'{v:.4g}' for v in x[i])})"
        rep.add("rankine_hugoniot", loc, abs(rh[i]), rh_tol, abs(rh[i]) <= rh_tol)
        if u_l[i] > u_r[i]:
            m = geometric_entropy_margin(fluxes, t[i], x[i], normal[i], u_l[i], u_r[i], k_samples)
            m2 = geometric_entropy_margin_right(fluxes, t[i], x[i], normal[i], u_l[i], u_r[i], k_samples)
            rep.add("entropy_margin", loc, m, entropy_tol, m >= -entropy_tol)
            rep.add("entropy_margin_right", loc, m2, entropy_tol + rh_tol, m2 >= -(entropy_tol + abs(rh[i])))
        else:
            rep.add("trace_order", loc, u_l[i] - u_r[i], 0.0, False)
    return rep


def kruzkov_audit(
    field_: GridField,
    fluxes: FluxSet,
    source: SourceTerm,
    ks: Sequence[float],
    centers: Sequence[Sequence[float]],
    widths: Sequence[float],
    tol: float,
) -> VerificationReport:
    rep = VerificationReport()
    for c in centers:
        for k in ks:
            r = kruzkov_residual(field_, fluxes, source, k, c, widths)
            loc = f"k={k:.4g} center=({', '.join(f'{v:.4g}' for v in c)})"
            rep.add("kruzkov", loc, r, tol, r >= -tol)
    return rep

"""Shock and rarefaction solutions for Riemann data on a curved surface.

The data are ``u_minus`` on ``{M < 0}`` and ``u_plus`` on ``{M > 0}``.
Characteristics carry ``u_bar(t, s)`` along ``x + chi(t, s)``. A shock
(``u_minus > u_plus``) moves the surface by the shift ``[chi](t)``. A
rarefaction fills the region between the two shifted surfaces with states
``u_bar(t, c)``, where c solves ``M(x - chi(t, c)) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .charflow import CharFlow
from .core import FluxSet, InitialSurface, SourceTerm
from .errors import BlowUpError, ConditionHError, DomainError, NotInFanError

SHOCK = "Shock"
RAREFACTION = "Rarefaction"
CONSTANT = "Constant"

STRICTLY_POSITIVE = "StrictlyPositive"
ISOLATED_ZEROS = "NonNegativeWithIsolatedZeros"
FAILS = "Fails"


@dataclass(frozen=True)
class RiemannProblem:
    fluxes: FluxSet
    source: SourceTerm
    surface: InitialSurface
    u_minus: float
    u_plus: float

    def __post_init__(self):
        if self.fluxes.n != self.surface.n:
            raise ValueError("flux and surface dimensions differ")


@dataclass(frozen=True)
class ConditionHReport:
    """Sampled values of H(x, u) = sum_i M_{x_i}(x) f_i''(u) on {M = 0}."""

    min_H: float
    max_H: float
    argmin: tuple
    interval: tuple
    verdict: str
    refined_min: float = math.nan
    zero_points: tuple = ()
    n_surface_points: int = 0
    notes: tuple = ()

    def as_dict(self) -> dict:
        return {
            "min_H": self.min_H,
            "max_H": self.max_H,
            "argmin": {"x": list(self.argmin[0]), "u": self.argmin[1]},
            "interval": list(self.interval),
            "verdict": self.verdict,
            "refined_min": self.refined_min,
            "zero_points": [list(z) for z in self.zero_points],
            "n_surface_points": self.n_surface_points,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class WaveSolution:
    kind: str
    flow: CharFlow
    problem: RiemannProblem
    state_bounds: tuple
    max_extinction: float
    condition_h: ConditionHReport | None = None
    negated: bool = False
    original: RiemannProblem | None = None
    notes: tuple = field(default_factory=tuple)

    # conveniences --------------------------------------------------------
    def evaluate(self, t: float, x) -> np.ndarray:
        return evaluate(self, t, x)

    def residual(self, t: float, x) -> np.ndarray:
        return shock_surface_residual(self, t, x)


# ---------------------------------------------------------------------------
# bounds and Condition (H)
# ---------------------------------------------------------------------------


def state_bounds(flow: CharFlow, u_minus: float, u_plus: float, t_horizon: float = 10.0) -> tuple[float, float]:
    """Interval containing every state reached by the flows from u_minus, u_plus.

    Flows are monotone in t, so each state moves between its start and its
    absorption target. Flows that head to infinity are bounded by their
    value at ``t_horizon``.
    """
    if t_horizon <= 0:
        raise ValueError("t_horizon must be positive")
    lo, hi = math.inf, -math.inf
    for s in (u_minus, u_plus):
        rec = flow.extinction_time(s)
        if math.isfinite(rec.target):
            end = rec.target
        else:
            if rec.escape_time <= t_horizon:
                raise BlowUpError(f"flow from {s!r} escapes to infinity at t={rec.escape_time!r}", time=rec.escape_time)
            end = flow.u_bar(t_horizon, s)
        lo = min(lo, s, end)
        hi = max(hi, s, end)
    return float(lo), float(hi)


def sample_surface(surface: InitialSurface, n_points: int = 201, box: float = 1.5, seed: int = 0) -> tuple[np.ndarray, np.ndarray | None]:
    """Points on {M = 0}; also returns the graph parameters when available."""
    n = surface.n
    if surface.graph is not None:
        if n == 1:
            q = np.zeros((1, 0))
        else:
            per_axis = max(2, int(round(n_points ** (1.0 / (n - 1)))))
            axes = [np.linspace(-box, box, per_axis)] * (n - 1)
            q = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n - 1)
        last = np.asarray(surface.graph(q), dtype=float).reshape(-1)
        pts = np.concatenate([q, last[:, None]], axis=1)
        return pts, q
    rng = np.random.default_rng(seed)
    x = rng.uniform(-box, box, size=(4 * n_points, n))
    for _ in range(60):
        m = surface.value(x)
        gr = surface.gradient(x)
        nrm = (gr**2).sum(-1)
        with np.errstate(all="ignore"):
            x = x - (m / nrm)[:, None] * gr
    m = surface.value(x)
    good = np.isfinite(m) & (np.abs(m) < 1e-12) & np.all(np.abs(x) <= 4 * box, axis=1)
    x = x[good][:n_points]
    if x.shape[0] == 0:
        raise DomainError("no points found on the initial surface")
    return x, None


def _H(surface: InitialSurface, fluxes: FluxSet, pts: np.ndarray, u: np.ndarray) -> np.ndarray:
    grad = surface.gradient(pts)  # (P, n)
    curv = fluxes.curvature(u)  # (U, n)
    return grad @ curv.T


def check_condition_H(
    problem: RiemannProblem, bounds: tuple[float, float], surface_samples: int = 201, u_samples: int = 101, box: float = 1.5
) -> ConditionHReport:
    """Sample H on surface points times states in [a, b] and classify its sign.

    A negative minimum on a grid that also has positive values gives
    ``Fails``. Zeros are searched by refining the minimum over states for
    every surface point and, for graph surfaces, over the graph parameters
    too. Zeros count as isolated when H is positive on a small ring
    around each of them.
    """
    surf, fl = problem.surface, problem.fluxes
    a, b = bounds
    pts, params = sample_surface(surf, surface_samples, box)
    if pts.shape[0] == 0:
        raise DomainError("surface sampler found no points")
    u = np.linspace(a, b, u_samples) if b > a else np.array([a])
    H = _H(surf, fl, pts, u)
    i, j = np.unravel_index(np.argmin(H), H.shape)
    min_H, max_H = float(H.min()), float(H.max())
    scale = 1.0 + float(np.abs(H).max())
    ztol = 1e-9 * scale
    argmin = (tuple(float(v) for v in pts[i]), float(u[j]))
    notes = []
    if min_H < -ztol:
        verdict = FAILS
        notes.append("H negative everywhere" if max_H < -ztol else "H changes sign")
        return ConditionHReport(min_H, max_H, argmin, (a, b), verdict, min_H, (), pts.shape[0], tuple(notes))

    def h_at(z):
        p = z[:-1]
        x = np.concatenate([p, np.atleast_1d(surf.graph(p[None, :]))]) if params is not None else pts[i]
        return float(_H(surf, fl, x[None, :], np.array([z[-1]]))[0, 0])

    # refine the minimum over (graph parameters, u)
    zeros = []
    refined = min_H
    if b > a:
        candidates = np.argsort(H.min(axis=1))[:5]
        for ci in candidates:
            cj = int(np.argmin(H[ci]))
            if params is not None:
                z0 = np.concatenate([params[ci], [u[cj]]])
                lo_b = [(-box, box)] * params.shape[1] + [(a, b)]
                res = minimize(h_at, z0, method="L-BFGS-B", bounds=lo_b, options={"ftol": 1e-15, "gtol": 1e-12})
                val, z = float(res.fun), res.x
                x = np.concatenate([z[:-1], np.atleast_1d(surf.graph(z[None, :-1]))])
            else:
                res = minimize(lambda w: float(_H(surf, fl, pts[ci][None, :], np.array([w[0]]))[0, 0]), [u[cj]], method="L-BFGS-B", bounds=[(a, b)])
                val, z = float(res.fun), res.x
                x = pts[ci]
            refined = min(refined, val)
            if val <= ztol:
                zeros.append((tuple(float(v) for v in x), float(z[-1]), z))
    if refined < -ztol:
        return ConditionHReport(min_H, max_H, argmin, (a, b), FAILS, refined, (), pts.shape[0], ("H negative after refinement",))
    if not zeros:
        return ConditionHReport(min_H, max_H, argmin, (a, b), STRICTLY_POSITIVE, refined, (), pts.shape[0])

    # isolation test on a ring around every zero
    uniq = []
    for x, uz, z in zeros:
        if not any(np.allclose(x + (uz,), y + (uy,), atol=1e-5) for y, uy, _ in uniq):
            uniq.append((x, uz, z))
    du = (b - a) / max(u_samples - 1, 1)
    dq = 2 * box / max(int(round(surface_samples ** (1.0 / max(surf.n - 1, 1)))) - 1, 1)
    isolated = True
    for x, uz, z in uniq:
        ring = []
        for ang in np.linspace(0, 2 * np.pi, 16, endpoint=False):
            if params is not None and params.shape[1] > 0:
                for axis in range(params.shape[1]):
                    w = z.copy()
                    w[axis] += 0.5 * dq * math.cos(ang)
                    w[-1] += 0.5 * du * math.sin(ang)
                    ring.append(h_at(w))
            else:
                ring.append(float(_H(surf, fl, np.array(x)[None, :], np.array([uz + 0.5 * du * math.sin(ang) + 1e-300]))[0, 0]))
        if min(ring) <= ztol:
            isolated = False
    zp = tuple(x + (uz,) for x, uz, _ in uniq)
    if isolated:
        return ConditionHReport(min_H, max_H, argmin, (a, b), ISOLATED_ZEROS, refined, zp, pts.shape[0])
    return ConditionHReport(min_H, max_H, argmin, (a, b), FAILS, refined, zp, pts.shape[0], ("zeros of H are not isolated",))


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def classify_wave(problem: RiemannProblem) -> str:
    if problem.u_minus > problem.u_plus:
        return SHOCK
    if problem.u_minus < problem.u_plus:
        return RAREFACTION
    return CONSTANT


def _negated(problem: RiemannProblem) -> RiemannProblem:
    s = problem.surface
    graph = s.graph
    surf = InitialSurface(
        M=lambda x, M=s.M: -np.asarray(M(x)),
        grad_M=lambda x, G=s.grad_M: -np.asarray(G(x)),
        n=s.n,
        graph=graph,
        name=f"-({s.name})",
    )
    return replace(problem, surface=surf, u_minus=problem.u_plus, u_plus=problem.u_minus)


def _max_extinction(flow: CharFlow, kind: str, um: float, up: float) -> float:
    if kind == RAREFACTION:
        samples = np.concatenate([[um, up], np.linspace(um, up, 257)])
    else:
        samples = np.array([um, up])
    targets, tstar, _ = flow.extinction_times(samples)
    if not np.all(np.isfinite(tstar)) or not np.all(targets == targets[0]):
        return math.inf
    return float(tstar.max())


def construct(
    problem: RiemannProblem,
    flow: CharFlow | None = None,
    t_horizon: float = 10.0,
    check_h: bool = True,
    surface_samples: int = 201,
    u_samples: int = 101,
) -> WaveSolution:
    """Build the wave solution for a Riemann problem.

    When H is negative on the whole sampled set, the surface is negated and
    the states swapped, which describes the same initial data.
    """
    flow = flow if flow is not None else CharFlow(problem.source)
    kind = classify_wave(problem)
    bounds = state_bounds(flow, problem.u_minus, problem.u_plus, t_horizon)
    report = None
    negated = False
    original = None
    if check_h and kind != CONSTANT:
        report = check_condition_H(problem, bounds, surface_samples, u_samples)
        if report.verdict == FAILS:
            if report.max_H < 0 and "H negative everywhere" in report.notes:
                original = problem
                problem = _negated(problem)
                negated = True
                kind = classify_wave(problem)
                report = check_condition_H(problem, bounds, surface_samples, u_samples)
                if report.verdict == FAILS:
                    raise ConditionHError("condition H fails after negating the surface")
            else:
                raise ConditionHError(f"condition H fails: min H = {report.min_H:.3e}, max H = {report.max_H:.3e}")
    max_ext = _max_extinction(flow, kind, problem.u_minus, problem.u_plus)
    return WaveSolution(kind, flow, problem, bounds, max_ext, report, negated, original)


def max_extinction(sol: WaveSolution) -> float:
    return sol.max_extinction


def _absorbed_state(sol: WaveSolution, t: float) -> float | None:
    """Common frozen state once every characteristic has been absorbed."""
    if not t >= sol.max_extinction:
        return None
    p = sol.problem
    tg = [sol.flow.extinction_time(s).target for s in (p.u_minus, p.u_plus)]
    if tg[0] != tg[1]:
        return None
    return float(tg[0])


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _points(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != n:
        raise ValueError(f"points must have trailing dimension {n}")
    return x


def shift(sol: WaveSolution, t: float) -> np.ndarray:
    p = sol.problem
    return sol.flow.bracket_chi(p.fluxes, t, p.u_minus, p.u_plus)


def shock_surface_residual(sol: WaveSolution, t: float, x) -> np.ndarray:
    """``M(x - [chi](t))``; negative on the u_minus side."""
    p = sol.problem
    x = _points(x, p.fluxes.n)
    if t == 0:
        out = p.surface.value(x)
    else:
        out = p.surface.value(x - shift(sol, t))
    return out if np.ndim(out) else float(out)


def shock_normal(sol: WaveSolution, t: float, x) -> np.ndarray:
    """Unit space-time normal of the shock, pointing to the u_minus side.

    The time derivative of the residual is ``-grad M . [f]/[u](t)``.
    """
    p = sol.problem
    x = _points(x, p.fluxes.n)
    x0 = x - shift(sol, t)
    grad = p.surface.gradient(x0)
    a = sol.flow.u_bar(t, p.u_minus)
    b = sol.flow.u_bar(t, p.u_plus)
    speed = sol.flow.divided_flux(p.fluxes, np.array(a), np.array(b))
    st = -(grad * speed).sum(-1)
    full = np.concatenate([st[..., None], grad], axis=-1)
    return -full / np.linalg.norm(full, axis=-1, keepdims=True)


def fan_function(sol: WaveSolution, t: float, x: np.ndarray, c: np.ndarray) -> np.ndarray:
    """``F(t, x, c) = M(x - chi(t, c))`` for matching arrays of points and states."""
    p = sol.problem
    ch = sol.flow.chi(p.fluxes, np.full(np.shape(c), float(t)), c)
    return p.surface.value(x - ch)


def evaluate(sol: WaveSolution, t: float, x) -> np.ndarray:
    """Solution value at time t for points x (trailing axis = space)."""
    p = sol.problem
    x = _points(x, p.fluxes.n)
    shape = x.shape[:-1]
    flow = sol.flow
    if t < 0:
        raise DomainError("time must be non-negative")
    if sol.kind == CONSTANT:
        out = np.full(shape, flow.u_bar(t, p.u_minus))
        return out if out.ndim else float(out)
    frozen = _absorbed_state(sol, t)
    if frozen is not None:
        out = np.full(shape, frozen)
        return out if out.ndim else float(out)
    um_t = flow.u_bar(t, p.u_minus)
    up_t = flow.u_bar(t, p.u_plus)
    if t == 0:
        m = p.surface.value(x)
        out = np.where(m <= 0, p.u_minus, p.u_plus)
        return out if out.ndim else float(out)
    if sol.kind == SHOCK:
        r = p.surface.value(x - shift(sol, t))
        out = np.where(r <= 0, um_t, up_t)
        return out if out.ndim else float(out)
    xf = x.reshape(-1, p.fluxes.n)
    chi_m = flow.chi(p.fluxes, t, p.u_minus)
    chi_p = flow.chi(p.fluxes, t, p.u_plus)
    fm = p.surface.value(xf - chi_m)
    fp = p.surface.value(xf - chi_p)
    out = np.empty(xf.shape[0])
    left = fm <= 0
    right = ~left & (fp >= 0)
    fan = ~left & ~right
    out[left] = um_t
    out[right] = up_t
    if fan.any():
        c = _fan_root(sol, t, xf[fan], fm[fan], fp[fan])
        out[fan] = flow.u_bar(t, c)
    out = out.reshape(shape)
    return out if out.ndim else float(out)


def _fan_root(sol: WaveSolution, t: float, x: np.ndarray, fm: np.ndarray, fp: np.ndarray) -> np.ndarray:
    """Illinois iteration for F(t, x, c) = 0 with F(u_minus) > 0 > F(u_plus)."""
    p = sol.problem
    tol = sol.flow.root_tol
    lo = np.full(x.shape[0], p.u_minus, dtype=float)
    hi = np.full(x.shape[0], p.u_plus, dtype=float)
    flo, fhi = fm.astype(float).copy(), fp.astype(float).copy()
    c = lo.copy()
    side = np.zeros(x.shape[0], dtype=int)
    active = np.ones(x.shape[0], dtype=bool)
    ftol = tol * (1.0 + np.abs(fm) + np.abs(fp))
    for _ in range(200):
        ia = np.flatnonzero(active)
        if ia.size == 0:
            break
        with np.errstate(all="ignore"):
            cand = (lo[ia] * fhi[ia] - hi[ia] * flo[ia]) / (fhi[ia] - flo[ia])
        bad = ~np.isfinite(cand) | (cand <= lo[ia]) | (cand >= hi[ia])
        cand = np.where(bad, 0.5 * (lo[ia] + hi[ia]), cand)
        fc = fan_function(sol, t, x[ia], cand)
        c[ia] = cand
        done = (np.abs(fc) <= ftol[ia]) | (hi[ia] - lo[ia] <= 4 * np.finfo(float).eps * (1 + np.abs(cand)))
        pos = fc > 0
        # move the bracket; halve the stale endpoint's value on repeats
        new_lo = np.where(pos, cand, lo[ia])
        new_hi = np.where(pos, hi[ia], cand)
        new_flo = np.where(pos, fc, flo[ia])
        new_fhi = np.where(pos, fhi[ia], fc)
        rep_lo = pos & (side[ia] == 1)
        rep_hi = ~pos & (side[ia] == -1)
        new_fhi = np.where(rep_lo, 0.5 * new_fhi, new_fhi)
        new_flo = np.where(rep_hi, 0.5 * new_flo, new_flo)
        side[ia] = np.where(pos, 1, -1)
        lo[ia], hi[ia], flo[ia], fhi[ia] = new_lo, new_hi, new_flo, new_fhi
        active[ia[done]] = False
        # bracket collapse
        narrow = (hi - lo) <= 1e-15 * (1 + np.abs(lo))
        active &= ~narrow
    return c


def rarefaction_root(sol: WaveSolution, t: float, x) -> np.ndarray:
    """State c in [u_minus, u_plus] with ``M(x - chi(t, c)) = 0``."""
    p = sol.problem
    if sol.kind != RAREFACTION:
        raise DomainError("rarefaction_root needs a rarefaction wave")
    x = _points(x, p.fluxes.n)
    shape = x.shape[:-1]
    xf = x.reshape(-1, p.fluxes.n)
    fm = p.surface.value(xf - sol.flow.chi(p.fluxes, t, p.u_minus))
    fp = p.surface.value(xf - sol.flow.chi(p.fluxes, t, p.u_plus))
    tol = sol.flow.root_tol * (1 + np.abs(fm) + np.abs(fp))
    if np.any(fm < -tol) or np.any(fp > tol):
        raise NotInFanError("point lies outside the rarefaction fan")
    out = np.empty(xf.shape[0])
    at_lo = np.abs(fm) <= tol
    at_hi = ~at_lo & (np.abs(fp) <= tol)
    out[at_lo] = p.u_minus
    out[at_hi] = p.u_plus
    mid = ~at_lo & ~at_hi
    if mid.any():
        out[mid] = _fan_root(sol, t, xf[mid], fm[mid], fp[mid])
    out = out.reshape(shape)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ShockSamples:
    t: np.ndarray
    x: np.ndarray
    normal: np.ndarray
    u_l: np.ndarray
    u_r: np.ndarray


def sample_shock(sol: WaveSolution, n_points: int = 200, t_max: float | None = None, box: float = 1.0, seed: int = 0) -> ShockSamples:
    """Random points on the moving shock with traces and unit normals.

    Times are drawn from (0, t_max), where t_max defaults to the time the two
    traces merge. The left trace is the u_minus side.
    """
    if sol.kind != SHOCK:
        raise DomainError("sample_shock needs a shock wave")
    p = sol.problem
    if t_max is None:
        t_max = sol.max_extinction if math.isfinite(sol.max_extinction) else 1.0
    rng = np.random.default_rng(seed)
    base, _ = sample_surface(p.surface, n_points=max(4 * n_points, 64), box=box, seed=seed)
    pick = rng.integers(0, base.shape[0], size=n_points)
    ts = np.sort(rng.uniform(0.0, t_max, size=n_points))
    ts = np.clip(ts, 1e-6 * t_max, t_max * (1 - 1e-6))
    xs = np.empty((n_points, p.fluxes.n))
    normals = np.empty((n_points, p.fluxes.n + 1))
    for i, t in enumerate(ts):
        xs[i] = base[pick[i]] + shift(sol, float(t))
        normals[i] = shock_normal(sol, float(t), xs[i])
    u_l = sol.flow.u_bar(ts, np.full(n_points, p.u_minus))
    u_r = sol.flow.u_bar(ts, np.full(n_points, p.u_plus))
    return ShockSamples(ts, xs, normals, np.asarray(u_l), np.asarray(u_r))


def _extinction_state(flow: CharFlow, t: float, lo: float, hi: float) -> float:
    """State between lo and hi whose extinction time equals t (monotone bisection)."""
    t_lo = float(flow.extinction_times(np.array([lo]))[1][0])
    t_hi = float(flow.extinction_times(np.array([hi]))[1][0])
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        tm = float(flow.extinction_times(np.array([mid]))[1][0])
        if (tm - t) * (t_lo - t) > 0:
            lo, t_lo = mid, tm
        else:
            hi, t_hi = mid, tm
        if hi - lo <= 1e-15 * max(1.0, abs(lo)):
            break
    return 0.5 * (lo + hi)


def fan_boundaries(sol: WaveSolution, t: float, q) -> dict:
    """Interfaces of a rarefaction at time t over graph parameters q.

    ``outer_minus`` and ``outer_plus`` bound the fan. When the states inside
    the fan are absorbed by a zero of g, ``inner_minus`` and ``inner_plus``
    bound the absorbed band; they are the shifted surfaces of the states
    whose extinction time is t. Needs a surface given as a graph.
    """
    p = sol.problem
    if sol.kind != RAREFACTION:
        raise DomainError("fan_boundaries needs a rarefaction wave")
    if p.surface.graph is None:
        raise DomainError("fan_boundaries needs a graph surface")
    q = np.asarray(q, dtype=float).reshape(-1, p.fluxes.n - 1)

    def shifted(c):
        ch = np.asarray(sol.flow.chi(p.fluxes, t, c), dtype=float)
        return np.asarray(p.surface.graph(q - ch[:-1]), dtype=float).reshape(-1) + ch[-1]

    out = {"outer_minus": shifted(p.u_minus), "outer_plus": shifted(p.u_plus)}
    flow = sol.flow
    targets, tstar, _ = flow.extinction_times(np.array([p.u_minus, p.u_plus]))
    for a, b in flow.decomposition.features():
        z = a if a == b else None
        if z is None or not p.u_minus < z < p.u_plus:
            continue
        if targets[0] == z and t < tstar[0]:
            out["inner_minus"] = shifted(_extinction_state(flow, t, p.u_minus, z))
        if targets[1] == z and t < tstar[1]:
            out["inner_plus"] = shifted(_extinction_state(flow, t, z, p.u_plus))
    return out

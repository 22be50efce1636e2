"""Vanishing-viscosity reference solver.

Solves ``u_t + sum f_i(u)_{x_i} = g(u) + eps * Laplace(u)`` on a uniform
node grid with a local Lax-Friedrichs flux, explicit centred diffusion and
Strang splitting of the source. The default source substep applies the
exact flow ``u -> u_bar(dt/2, u)``, tabulated once per step size and
interpolated linearly with extra knots clustered at the zeros of g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .charflow import CharFlow
from .core import FluxSet, SourceTerm, estimate_right_lipschitz
from .errors import BlowUpError, ConfigError
from .verify import VISCOUS, GridField, trapezoid_weights

EXACT = "ExactSource"
EULER = "ExplicitEulerSource"


@dataclass(frozen=True)
class SchemeConfig:
    """Grid, viscosity and stepping options for one viscous run.

    ``domain`` holds one ``(lo, hi)`` pair per axis and ``dx`` one spacing per
    axis. ``dt`` may be fixed; otherwise it is the largest stable step.
    """

    epsilon: float
    dx: tuple
    domain: tuple
    t_end: float
    cfl: float = 0.4
    splitting: str = EXACT
    boundary: str = "outflow"
    snapshots: tuple = ()
    dt: float | None = None
    table_size: int = 4097

    def __post_init__(self):
        if self.epsilon < 0:
            raise ConfigError("epsilon must be non-negative")
        if not 0 < self.cfl < 1:
            raise ConfigError("cfl must lie in (0, 1)")
        if len(self.dx) != len(self.domain) or not self.dx:
            raise ConfigError("dx and domain need one entry per axis")
        if any(d <= 0 for d in self.dx):
            raise ConfigError("grid spacings must be positive")
        if any(hi <= lo for lo, hi in self.domain):
            raise ConfigError("domain intervals must have lo < hi")
        if self.t_end <= 0:
            raise ConfigError("t_end must be positive")
        if self.splitting not in (EXACT, EULER):
            raise ConfigError(f"unknown splitting {self.splitting!r}")
        if self.boundary not in ("outflow", "periodic"):
            raise ConfigError(f"unknown boundary {self.boundary!r}")

    @property
    def n(self) -> int:
        return len(self.dx)

    def axes(self) -> tuple:
        out = []
        for (lo, hi), d in zip(self.domain, self.dx):
            m = int(round((hi - lo) / d))
            out.append(lo + d * np.arange(m + 1))
        return tuple(out)

    def times(self) -> np.ndarray:
        ts = sorted({0.0, float(self.t_end), *(float(s) for s in self.snapshots if 0 <= s <= self.t_end)})
        return np.array(ts)

    def stable_dt(self, max_speed: float) -> float:
        """Largest dt with dt * (n a / dx + 2 n eps / dx^2) <= cfl."""
        h = min(self.dx)
        rate = self.n * max_speed / h + 2 * self.n * self.epsilon / h**2
        return math.inf if rate == 0 else self.cfl / rate


def apriori_bound(m0: float, c0: float, c2: float, T: float, c1: float = 0.0) -> float:
    """``(M0 + c0 T) exp(1 + |c1 + c2| T)``."""
    return (m0 + c0 * T) * math.exp(1.0 + abs(c1 + c2) * T)


def reachable_range(flow: CharFlow, lo: float, hi: float, t_end: float) -> tuple[float, float]:
    """States reachable from [lo, hi] by the source flow up to t_end."""
    ends = np.asarray(flow.u_bar(np.array([t_end, t_end]), np.array([lo, hi])), dtype=float)
    return float(min(lo, ends[0])), float(max(hi, ends[1]))


class _UniformTable:
    def __init__(self, lo: float, hi: float, values: np.ndarray):
        self.lo, self.hi = lo, hi
        self.h = (hi - lo) / (values.size - 1)
        self.values = values

    def __call__(self, u: np.ndarray) -> np.ndarray:
        s = (np.clip(u, self.lo, self.hi) - self.lo) / self.h
        i = np.minimum(s.astype(np.intp), self.values.size - 2)
        w = s - i
        return (1.0 - w) * self.values[i] + w * self.values[i + 1]


class SourceMap:
    """Tabulated exact source step ``u -> u_bar(tau, u)`` on [lo, hi].

    A uniform table covers the whole range. Each zero of g inside the range
    gets nested finer tables, since the flow map bends sharply there.
    """

    def __init__(self, flow: CharFlow, tau: float, lo: float, hi: float, size: int = 4097, levels: int = 3):
        self.tau = tau
        if hi <= lo:
            hi = lo + 1e-12
        self.tables = [self._table(flow, lo, hi, size)]
        zeros = []
        for a, b in flow.decomposition.features():
            zeros.extend(z for z in {a, b} if math.isfinite(z) and lo <= z <= hi)
        self.patches = []
        width = 8 * (hi - lo) / (size - 1)
        for z in sorted(set(zeros)):
            w = width
            for _ in range(levels):
                a, b = max(lo, z - w), min(hi, z + w)
                self.patches.append((a, b, self._table(flow, a, b, 1025)))
                w *= 8.0 / 1024.0

    def _table(self, flow, a, b, size):
        knots = np.linspace(a, b, size)
        vals = np.asarray(flow.u_bar(np.full(size, self.tau), knots), dtype=float)
        return _UniformTable(a, b, vals)

    def __call__(self, u: np.ndarray) -> np.ndarray:
        out = self.tables[0](u)
        for a, b, tab in self.patches:
            m = (u >= a) & (u <= b)
            if m.any():
                out[m] = tab(u[m])
        return out


def _convect_diffuse(u: np.ndarray, fluxes: FluxSet, cfg: SchemeConfig, dt: float) -> np.ndarray:
    """One explicit step of local Lax-Friedrichs convection plus centred diffusion."""
    up = np.pad(u, 1, mode="edge" if cfg.boundary == "outflow" else "wrap")
    core = (slice(1, -1),) * u.ndim
    out = u.copy()
    for i in range(cfg.n):
        f = fluxes.component(i)(up)
        a = np.abs(fluxes.component(i, 1)(up))
        # interfaces along axis i, restricted to interior rows on the other axes
        left = list(core)
        right = list(core)
        left[i], right[i] = slice(0, -1), slice(1, None)
        left, right = tuple(left), tuple(right)
        jump = up[right] - up[left]
        flux = 0.5 * (f[left] + f[right]) - 0.5 * np.maximum(a[left], a[right]) * jump
        lo = [slice(None)] * u.ndim
        hi = [slice(None)] * u.ndim
        lo[i], hi[i] = slice(0, -1), slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        h = cfg.dx[i]
        out -= dt / h * (flux[hi] - flux[lo])
        if cfg.epsilon:
            out += dt * cfg.epsilon / h**2 * (jump[hi] - jump[lo])
    return out


def solve_viscous(
    config: SchemeConfig,
    fluxes: FluxSet,
    source: SourceTerm,
    flow: CharFlow,
    initial: GridField | Callable,
) -> GridField:
    """Run the scheme and return snapshots at ``config.times()``.

    ``initial`` is either a one-slice field on the config grid or a function
    of points with trailing axis n.
    """
    if fluxes.n != config.n:
        raise ConfigError("flux dimension does not match the grid")
    axes = config.axes()
    if isinstance(initial, GridField):
        if initial.n != config.n or any(a.shape != b.shape or not np.allclose(a, b) for a, b in zip(initial.space_axes, axes)):
            raise ConfigError("initial field axes do not match the config grid")
        u = np.array(initial.values[0], dtype=float)
    else:
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        u = np.asarray(initial(pts), dtype=float)
    if not np.all(np.isfinite(u)):
        raise ConfigError("initial data must be finite")
    lo, hi = reachable_range(flow, float(u.min()), float(u.max()), config.t_end)
    speed = float(fluxes.max_speed(lo, hi).max())
    dt_max = config.stable_dt(speed)
    if config.dt is not None:
        if config.dt > dt_max * (1 + 1e-12):
            raise ConfigError(f"dt = {config.dt} violates the CFL bound {dt_max:.3e}")
        dt_max = config.dt
    times = config.times()
    snaps = [u.copy()]
    maps: dict = {}

    def source_step(v, tau):
        if config.splitting == EULER:
            return v + tau * source(v)
        key = round(tau, 15)
        if key not in maps:
            maps[key] = SourceMap(flow, tau, lo, hi, config.table_size)
        return maps[key](v)

    # With the exact flow, the trailing half step of one Strang step and the
    # leading half step of the next compose into a single step.
    merge = config.splitting == EXACT
    owed = 0.0
    t = 0.0
    step = 0
    for target in times[1:]:
        while t < target - 1e-14 * max(1.0, target):
            dt = min(dt_max, target - t)
            if target - (t + dt) < 1e-9 * dt:
                dt = target - t
            if merge:
                u = source_step(u, owed + 0.5 * dt)
                owed = 0.5 * dt
            else:
                u = source_step(u, 0.5 * dt)
            u = _convect_diffuse(u, fluxes, config, dt)
            if not merge:
                u = source_step(u, 0.5 * dt)
            step += 1
            t = t + dt
            if not np.all(np.isfinite(u)):
                raise BlowUpError("viscous solution became non-finite", time=t, step=step)
        if owed:
            u = source_step(u, owed)
            owed = 0.0
        t = float(target)
        snaps.append(u.copy())
    return GridField(times, axes, np.stack(snaps), VISCOUS)


def riemann_initial(surface, u_minus: float, u_plus: float) -> Callable:
    """Initial data ``u_minus`` where M <= 0 and ``u_plus`` elsewhere."""

    def fn(points):
        return np.where(surface.value(points) <= 0, u_minus, u_plus)

    return fn


def region_distance(field_: GridField, t: float, reference: Callable, region: Sequence[tuple]) -> float:
    """Trapezoid L1 distance to ``reference(t, points)`` over the grid nodes in a box."""
    vals = field_.at(t)
    sel = []
    for ax, (lo, hi) in zip(field_.space_axes, region):
        m = (ax >= lo - 1e-12) & (ax <= hi + 1e-12)
        sel.append(np.flatnonzero(m))
    sub_axes = [ax[s] for ax, s in zip(field_.space_axes, sel)]
    sub = vals[np.ix_(*sel)]
    pts = np.stack(np.meshgrid(*sub_axes, indexing="ij"), axis=-1)
    ref = np.asarray(reference(t, pts), dtype=float)
    w = trapezoid_weights(sub_axes[0])
    for ax in sub_axes[1:]:
        w = np.multiply.outer(w, trapezoid_weights(ax))
    return float((np.abs(sub - ref) * w).sum())


@dataclass
class ConvergenceRow:
    epsilon: float
    dx: float
    distance: float
    steps_time: float = 0.0

    def as_dict(self) -> dict:
        return {"epsilon": self.epsilon, "dx": self.dx, "distance": self.distance}


def convergence_study(
    configs: Sequence[SchemeConfig],
    reference,
    region: Sequence[tuple],
    t: float,
    fluxes: FluxSet | None = None,
    source: SourceTerm | None = None,
    flow: CharFlow | None = None,
    initial: Callable | None = None,
) -> list:
    """L1 distance to the reference at time t for each config.

    ``reference`` is a WaveSolution or a function ``(t, points) -> values``.
    Problem data default to the reference's own problem. Rows are sorted by
    descending (epsilon, dx), the order of a refinement ladder.
    """
    import time

    if hasattr(reference, "problem"):
        from . import riemann

        prob = reference.problem
        fluxes = fluxes or prob.fluxes
        source = source or prob.source
        flow = flow or reference.flow
        initial = initial or riemann_initial(prob.surface, prob.u_minus, prob.u_plus)
        ref_fn = lambda tt, pts: riemann.evaluate(reference, tt, pts)  # noqa: E731
    else:
        ref_fn = reference
    if fluxes is None or source is None or initial is None:
        raise ConfigError("fluxes, source and initial data are required for a plain reference function")
    flow = flow or CharFlow(source)
    rows = []
    for cfg in configs:
        if abs(cfg.t_end - t) > 1e-12 and t not in cfg.snapshots:
            cfg = SchemeConfig(**{**cfg.__dict__, "snapshots": tuple(cfg.snapshots) + (t,)})
        start = time.perf_counter()
        out = solve_viscous(cfg, fluxes, source, flow, initial)
        rows.append(ConvergenceRow(cfg.epsilon, max(cfg.dx), region_distance(out, t, ref_fn, region), time.perf_counter() - start))
    rows.sort(key=lambda r: (-r.epsilon, -r.dx))
    return rows


def lipschitz_rate(source: SourceTerm, lo: float, hi: float, n_samples: int = 4096) -> float:
    """Right-Lipschitz constant on [lo, hi], used in the contraction bound."""
    return estimate_right_lipschitz(source, lo, hi, n_samples)

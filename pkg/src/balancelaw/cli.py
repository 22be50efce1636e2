"""Command line interface: ``balancelaw {solve,verify,compare,nonunique,selftest}``.

Exit codes: 0 success, 2 bad scenario or configuration (including a failed
convexity condition), 3 verification failure, 4 numerical blow-up.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import examples, riemann
from .errors import BalanceLawError, BlowUpError, ConditionHError, ConfigError, DomainError, FormatError, ScenarioError
from .riemann import RAREFACTION, SHOCK, WaveSolution
from .scenario import Scenario, load_scenario
from .verify import CONSTRUCTED, GridField, VerificationReport, audit_discontinuity, kruzkov_audit, pde_residual
from .viscous import EXACT, SchemeConfig, convergence_study, reachable_range

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_BLOWUP = 4


# ---------------------------------------------------------------------------
# solution files
# ---------------------------------------------------------------------------


def write_solution_csv(path, field_: GridField) -> None:
    """Rows ``t,x1,..,xn,u`` in row-major order (time slowest)."""
    grids = np.meshgrid(field_.t_axis, *field_.space_axes, indexing="ij")
    cols = [g.ravel() for g in grids] + [field_.values.ravel()]
    header = ",".join(["t"] + [f"x{i + 1}" for i in range(field_.n)] + ["u"])
    np.savetxt(path, np.column_stack(cols), fmt="%.17g", delimiter=",", header=header, comments="")


def read_solution_csv(path, n: int | None = None, provenance: str = CONSTRUCTED) -> GridField:
    """Inverse of ``write_solution_csv``; the values round-trip bit for bit."""
    path = Path(path)
    try:
        with path.open() as fh:
            header = fh.readline().strip()
            names = header.split(",")
            if len(names) < 3 or names[0] != "t" or names[-1] != "u":
                raise FormatError(f"header must read t,x1,..,xn,u; got {header!r}", 1)
            dim = len(names) - 2
            if names[1:-1] != [f"x{i + 1}" for i in range(dim)]:
                raise FormatError(f"header must read t,x1,..,xn,u; got {header!r}", 1)
            if n is not None and dim != n:
                raise FormatError(f"file has {dim} space columns, scenario dimension is {n}", 1)
            rows = []
            for lineno, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                parts = line.split(",")
                if len(parts) != dim + 2:
                    raise FormatError(f"expected {dim + 2} columns, found {len(parts)}", lineno)
                try:
                    rows.append([float(p) for p in parts])
                except ValueError:
                    raise FormatError(f"non-numeric entry in {line.strip()!r}", lineno) from None
    except OSError as exc:
        raise FormatError(f"cannot read {str(path)!r}: {exc.strerror}") from None
    if not rows:
        raise FormatError("no data rows", 2)
    data = np.array(rows)
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(data), axis=1))[0])
        raise FormatError("non-finite entry", bad + 2)
    axes = [np.unique(data[:, j]) for j in range(dim + 1)]
    shape = tuple(a.size for a in axes)
    if int(np.prod(shape)) != data.shape[0]:
        raise FormatError(f"{data.shape[0]} rows do not fill a {'x'.join(map(str, shape))} grid")
    expect = np.meshgrid(*axes, indexing="ij")
    for j, g in enumerate(expect):
        bad = np.flatnonzero(g.ravel() != data[:, j])
        if bad.size:
            raise FormatError("rows are not in row-major grid order", int(bad[0]) + 2)
    return GridField(axes[0], tuple(axes[1:]), data[:, -1].reshape(shape), provenance)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _json_float(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _build(sc: Scenario, tol: float | None) -> WaveSolution:
    source = sc.source()
    flow = sc.flow(source, tol)
    try:
        problem = sc.problem()
    except ValueError as exc:
        raise sc.error(str(exc), "surface") from None
    return riemann.construct(problem, flow)


def _sample(sol: WaveSolution, t_axis, space_axes, threads: int) -> GridField:
    pts = np.stack(np.meshgrid(*space_axes, indexing="ij"), axis=-1)

    def one(t):
        return np.asarray(riemann.evaluate(sol, float(t), pts), dtype=float)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            slices = list(pool.map(one, t_axis))
    else:
        slices = [one(t) for t in t_axis]
    return GridField(t_axis, space_axes, np.stack(slices), CONSTRUCTED)


def _nearest(axis: np.ndarray, v: np.ndarray) -> np.ndarray:
    i = np.clip(np.searchsorted(axis, v), 1, axis.size - 1)
    return np.where(np.abs(axis[i - 1] - v) <= np.abs(axis[i] - v), i - 1, i)


def _field_value(field_: GridField, ti: int, x: np.ndarray) -> np.ndarray:
    idx = tuple(_nearest(ax, x[..., j]) for j, ax in enumerate(field_.space_axes))
    return field_.values[(ti,) + idx]


def _labels(sol: WaveSolution, t: float, pts: np.ndarray) -> np.ndarray:
    """Piece labels of the constructed solution; smooth inside each label."""
    p = sol.problem
    if sol.kind == SHOCK:
        return (riemann.shock_surface_residual(sol, t, pts) > 0).astype(int)
    fm = riemann.fan_function(sol, t, pts, np.full(pts.shape[:-1], p.u_minus))
    fp = riemann.fan_function(sol, t, pts, np.full(pts.shape[:-1], p.u_plus))
    lab = np.where(fm <= 0, 0, np.where(fp >= 0, 2, 1))
    vals = np.asarray(riemann.evaluate(sol, t, pts))
    zeros = [a for a, b in sol.flow.decomposition.features() if a == b]
    absorbed = np.zeros(vals.shape, dtype=bool)
    for z in zeros:
        absorbed |= vals == z
    return lab + 10 * absorbed


def _smooth_points(sol: WaveSolution, t: float, pts: np.ndarray, guard: float) -> np.ndarray:
    base = _labels(sol, t, pts)
    keep = np.ones(base.shape, dtype=bool)
    for dt in (-guard, guard):
        keep &= _labels(sol, t + dt, pts) == base
    for j in range(pts.shape[-1]):
        for s in (-guard, guard):
            q = pts.copy()
            q[..., j] += s
            keep &= _labels(sol, t, q) == base
    return pts[keep]


def _shock_checks(sol: WaveSolution, field_: GridField, sc: Scenario, rh_tol, entropy_tol, k_samples) -> VerificationReport:
    """Jump and entropy checks with traces read from the file."""
    p = sol.problem
    n_target = sc.integer("verify", "shock_points", default=200, minimum=1)
    h = max(np.diff(a).max() for a in field_.space_axes)
    delta = 4.0 * h
    lo = np.array([a[0] for a in field_.space_axes]) + 2 * delta
    hi = np.array([a[-1] for a in field_.space_axes]) - 2 * delta
    t_end = min(float(field_.t_axis[-1]), sol.max_extinction)
    times = [i for i, t in enumerate(field_.t_axis) if 0 < t < t_end * (1 - 1e-6)]
    rep = VerificationReport()
    if not times:
        return rep
    per = max(1, -(-n_target // len(times)))
    box = float(np.max(np.abs(np.concatenate([lo, hi]))))
    base, _ = riemann.sample_surface(p.surface, n_points=max(8 * per, 64), box=box + 1.0, seed=0)
    ts, xs, ns, uls, urs = [], [], [], [], []
    for ti in times:
        t = float(field_.t_axis[ti])
        pts = base + riemann.shift(sol, t)
        pts = pts[np.all((pts >= lo) & (pts <= hi), axis=1)][:per]
        if not len(pts):
            continue
        normal = riemann.shock_normal(sol, t, pts)
        nx = normal[:, 1:] / np.linalg.norm(normal[:, 1:], axis=1, keepdims=True)
        ul = _field_value(field_, ti, pts + delta * nx)
        ur = _field_value(field_, ti, pts - delta * nx)
        flip = ul < ur
        normal = np.where(flip[:, None], -normal, normal)
        ul, ur = np.where(flip, ur, ul), np.where(flip, ul, ur)
        ts.append(np.full(len(pts), t))
        xs.append(pts)
        ns.append(normal)
        uls.append(ul)
        urs.append(ur)
    if not ts:
        return rep
    t_all = np.concatenate(ts)[:n_target]
    return audit_discontinuity(
        p.fluxes,
        t_all,
        np.concatenate(xs)[: t_all.size],
        np.concatenate(ns)[: t_all.size],
        np.concatenate(uls)[: t_all.size],
        np.concatenate(urs)[: t_all.size],
        k_samples,
        rh_tol,
        entropy_tol,
    )


def _kruzkov_checks(sol: WaveSolution, field_: GridField, sc: Scenario) -> VerificationReport:
    p = sol.problem
    width = sc.number("verify", "kruzkov", "width", default=0.2, positive=True)
    factor = sc.number("verify", "kruzkov", "tol_factor", default=5.0, positive=True)
    axes = (field_.t_axis,) + field_.space_axes
    widths = [width] * len(axes)
    centers = sc.get("verify", "kruzkov", "centers")
    if centers is None:
        per_axis = []
        for ax in axes:
            mid, half = 0.5 * (ax[0] + ax[-1]), 0.25 * (ax[-1] - ax[0])
            a, b = max(mid - half, ax[0] + 1.05 * width), min(mid + half, ax[-1] - 1.05 * width)
            if a > b:
                raise sc.error("grid is too small for the Kruzkov test width", "grid")
            per_axis.append(np.linspace(a, b, 3) if b > a else np.array([a]))
        centers = [tuple(c) for c in np.stack(np.meshgrid(*per_axis, indexing="ij"), -1).reshape(-1, len(axes))]
    else:
        try:
            centers = [tuple(float(v) for v in c) for c in centers]
        except (TypeError, ValueError):
            raise sc.error("verify.kruzkov.centers must be a list of points", "verify", "kruzkov", "centers") from None
        if any(len(c) != len(axes) for c in centers):
            raise sc.error(f"Kruzkov centers need {len(axes)} coordinates", "verify", "kruzkov", "centers")
    ks = sc.get("verify", "kruzkov", "k")
    if ks is None:
        ks = np.linspace(field_.values.min(), field_.values.max(), 11)
    elif isinstance(ks, int) and not isinstance(ks, bool):
        ks = np.linspace(field_.values.min(), field_.values.max(), ks)
    else:
        ks = [float(k) for k in ks]
    tol = factor * field_.spacing
    try:
        return kruzkov_audit(field_, p.fluxes, p.source, ks, centers, widths, tol)
    except DomainError as exc:
        raise sc.error(f"Kruzkov test support leaves the grid: {exc}", "verify", "kruzkov") from None


def _pde_checks(sol: WaveSolution, field_: GridField, sc: Scenario, tol: float) -> VerificationReport:
    p = sol.problem
    n_pts = sc.integer("verify", "pde_points", default=200, minimum=0)
    rep = VerificationReport()
    if n_pts == 0:
        return rep
    rng = np.random.default_rng(1)
    t_end = min(float(field_.t_axis[-1]), 0.95 * sol.max_extinction)
    t_lo = max(float(field_.t_axis[0]), 0.05 * t_end)
    if not t_end > t_lo:
        return rep
    ts = np.linspace(t_lo, t_end, 5)
    per = max(1, n_pts // ts.size)
    lo = np.array([a[0] for a in field_.space_axes])
    hi = np.array([a[-1] for a in field_.space_axes])
    fn = lambda tt, pts: riemann.evaluate(sol, tt, pts)  # noqa: E731
    for t in ts:
        pts = rng.uniform(lo, hi, size=(4 * per, p.fluxes.n))
        pts = _smooth_points(sol, float(t), pts, 1e-3)[:per]
        if not len(pts):
            continue
        res = np.abs(pde_residual(fn, p.fluxes, p.source, float(t), pts))
        for x, r in zip(pts, res):
            loc = f"smooth t={t:.4g} x=({', '.join(f'{v:.4g}' for v in x)})"
            rep.add("pde_residual", loc, r, tol, r <= tol)
    return rep


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_solve(args) -> int:
    sc = load_scenario(args.scenario)
    grid = sc.grid()
    sol = _build(sc, args.tol)
    field_ = _sample(sol, grid.t, grid.space, args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_solution_csv(out / "solution.csv", field_)
    summary = {
        "schema": 1,
        "name": sc.get("name", default=Path(sc.path).stem),
        "kind": sol.kind,
        "extinction": _json_float(sol.max_extinction),
        "condition_h": sol.condition_h.as_dict() if sol.condition_h is not None else None,
        "state_bounds": [float(v) for v in sol.state_bounds],
        "negated": sol.negated,
        "grid": {"t": [float(grid.t[0]), float(grid.t[-1]), int(grid.t.size)]}
        | {f"x{i + 1}": [float(a[0]), float(a[-1]), int(a.size)] for i, a in enumerate(grid.space)},
    }
    if sol.kind == RAREFACTION and sol.problem.surface.graph is not None and grid.n == 2:
        q = grid.space[0]
        fb = riemann.fan_boundaries(sol, 1.0, q[:, None])
        summary["fan_boundaries"] = {"t": 1.0, "x1": q.tolist(), **{k: v.tolist() for k, v in fb.items()}}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"{sol.kind}: wrote {field_.values.size} values to {out / 'solution.csv'}")
    return EXIT_OK


def cmd_verify(args) -> int:
    sc = load_scenario(args.scenario)
    sol = _build(sc, args.tol)
    path = Path(args.input) if args.input else Path(args.out) / "solution.csv"
    field_ = read_solution_csv(path, sc.dimension)
    rh_tol = sc.number("verify", "rh_tol", default=1e-6, positive=True)
    entropy_tol = sc.number("verify", "entropy_tol", default=1e-10, positive=True)
    pde_tol = sc.number("verify", "pde_tol", default=1e-4, positive=True)
    k_samples = sc.integer("verify", "k_samples", default=101, minimum=2)
    rep = VerificationReport()
    if sol.kind == SHOCK:
        rep.extend(_shock_checks(sol, field_, sc, rh_tol, entropy_tol, k_samples))
    rep.extend(_kruzkov_checks(sol, field_, sc))
    rep.extend(_pde_checks(sol, field_, sc, pde_tol))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "verification.json").write_text(rep.to_json() + "\n")
    (out / "verification.txt").write_text(rep.to_text())
    s = rep.summary()
    print(f"{'PASS' if rep.passed else 'FAIL'}: {s['n_checks'] - len(rep.failures())}/{s['n_checks']} checks")
    for c in rep.failures()[:10]:
        print(f"  {c.name} {c.location} value={c.value:.3e} tol={c.tolerance:.3e}")
    return EXIT_OK if rep.passed else EXIT_VERIFY


def _pairs(sc: Scenario, key: str, n: int) -> list:
    val = sc.get("compare", key, required=True)
    try:
        out = [(float(a), float(b)) for a, b in val]
    except (TypeError, ValueError):
        raise sc.error(f"compare.{key} must be a list of pairs", "compare", key) from None
    if key != "ladder" and len(out) != n:
        raise sc.error(f"compare.{key} needs {n} intervals", "compare", key)
    return out


def cmd_compare(args) -> int:
    sc = load_scenario(args.scenario)
    sol = _build(sc, args.tol)
    p = sol.problem
    n = p.fluxes.n
    t = sc.number("compare", "t", required=True, positive=True)
    region = _pairs(sc, "region", n)
    ladder = _pairs(sc, "ladder", n)
    if not ladder:
        raise sc.error("compare.ladder is empty", "compare", "ladder")
    cfl = sc.number("compare", "cfl", default=0.4, positive=True)
    lo, hi = reachable_range(sol.flow, min(p.u_minus, p.u_plus), max(p.u_minus, p.u_plus), t)
    speeds = p.fluxes.max_speed(lo, hi)
    configs = []
    for eps, dx in ladder:
        if sc.get("compare", "domain") is not None:
            domain = _pairs(sc, "domain", n)
        else:
            domain = [(a - s * t - 8 * dx, b + s * t + 8 * dx) for (a, b), s in zip(region, speeds)]
        try:
            configs.append(SchemeConfig(eps, (dx,) * n, tuple(domain), t, cfl=cfl, splitting=EXACT))
        except ConfigError as exc:
            raise sc.error(str(exc), "compare") from None
    start = time.perf_counter()
    rows = convergence_study(configs, sol, region, t)
    dist = [r.distance for r in rows]
    monotone = all(b < a for a, b in zip(dist, dist[1:]))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["epsilon,dx,distance"] + [f"{r.epsilon:.17g},{r.dx:.17g},{r.distance:.17g}" for r in rows]
    (out / "convergence.csv").write_text("\n".join(lines) + "\n")
    payload = {"schema": 1, "t": t, "region": region, "rows": [r.as_dict() for r in rows], "monotone": monotone}
    (out / "convergence.json").write_text(json.dumps(payload, indent=2) + "\n")
    for r in rows:
        print(f"eps={r.epsilon:<10.4g} dx={r.dx:<10.4g} L1={r.distance:.6e}")
    print(f"{'PASS' if monotone else 'FAIL'}: distances {'decrease' if monotone else 'do not decrease'} ({time.perf_counter() - start:.1f} s)")
    return EXIT_OK if monotone else EXIT_VERIFY


def cmd_nonunique(args) -> int:
    kind, um = args.kind, args.u_minus
    opts = {}
    if args.scenario:
        sc = load_scenario(args.scenario)
        kind = sc.get("nonunique", "kind", default=kind)
        um = sc.number("nonunique", "u_minus", default=um)
        for key in ("t", "box"):
            v = sc.number("nonunique", key)
            if v is not None:
                opts[key] = v
        v = sc.integer("nonunique", "n_points", minimum=1)
        if v is not None:
            opts["n_points"] = v
    if kind not in (SHOCK, RAREFACTION):
        raise ConfigError(f"kind must be {SHOCK} or {RAREFACTION}, got {kind!r}")
    if um is None:
        um = 1.0 if kind == SHOCK else -1.0
    if (kind == SHOCK) != (um > 0):
        raise ConfigError("shock candidates need u_minus > 0, rarefaction candidates u_minus < 0")
    rep = examples.nonuniqueness_report(float(um), kind, **opts)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "nonunique.json").write_text(json.dumps({"schema": 1, **rep.as_dict()}, indent=2) + "\n")
    (out / "nonunique.txt").write_text(rep.to_text())
    print(rep.to_text(), end="")
    return EXIT_OK if rep.passed else EXIT_VERIFY


def _selftest_checks(threads: int) -> list:
    """(name, error, tolerance) triples against closed forms."""
    from .charflow import CharFlow
    from .core import cubic_plane_surface, source_from_name

    out = []
    absorb = CharFlow(source_from_name("neg_cbrt"))
    grow = CharFlow(source_from_name("pos_cbrt"))
    fl = examples.burgers2d_fluxes()
    t = np.array([0.1, 0.5, 1.0, 1.4])
    s = np.array([1.0, -0.7, 2.0, 1.0])
    out.append(("flow_absorbing", float(np.max(np.abs(absorb.u_bar(t, s) - examples.absorbing_ubar(t, s)))), 1e-10))
    out.append(("flow_growing", float(np.max(np.abs(grow.u_bar(t, s) - examples.growing_ubar(t, s)))), 1e-10))
    out.append(("extinction_time", abs(absorb.extinction_time(1.0).t_star - 1.5), 1e-10))
    chi_err = max(float(np.max(np.abs(absorb.chi(fl, tt, 1.0) - examples.absorbing_chi(tt, 1.0)))) for tt in (0.3, 1.0))
    out.append(("shift_absorbing", chi_err, 1e-9))
    xs = np.linspace(-1.0, 1.0, 21)
    pts = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1)
    for um, up in ((1.0, -1.0), (-1.0, 1.0)):
        prob = riemann.RiemannProblem(fl, absorb.source, cubic_plane_surface(), um, up)
        sol = riemann.construct(prob, absorb)
        oracle = examples.Example1Oracle(um, up)
        ts = [0.25, 0.75, 1.25]

        def err(tt, sol=sol, oracle=oracle):
            return float(np.max(np.abs(riemann.evaluate(sol, tt, pts) - examples.example1_value(oracle, tt, pts[..., 0], pts[..., 1]))))

        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            worst = max(pool.map(err, ts))
        out.append((f"riemann_{sol.kind.lower()}", worst, 1e-8))
    return out


def cmd_selftest(args) -> int:
    ok = True
    for name, err, tol in _selftest_checks(args.threads):
        good = err <= tol
        ok &= good
        print(f"{'PASS' if good else 'FAIL'}  {name:<20} error={err:.3e} tol={tol:.1e}")
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="balancelaw", description="Riemann solutions of scalar balance laws")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--tol", type=float, default=None, help="override the root and quadrature tolerances")
    common.add_argument("--threads", type=int, default=1, help="worker threads for sampling")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="sample the constructed solution on the scenario grid")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", parents=[common], help="audit a sampled solution file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--input", default=None, help="solution CSV (default: OUT/solution.csv)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", parents=[common], help="viscous convergence ladder")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("nonunique", parents=[common], help="audit the three branch solutions for g = u^(1/3)")
    p.add_argument("--scenario", default=None)
    p.add_argument("--kind", default=SHOCK, choices=[SHOCK, RAREFACTION])
    p.add_argument("--u-minus", type=float, default=None)
    p.set_defaults(func=cmd_nonunique)

    p = sub.add_parser("selftest", parents=[common], help="quick checks against closed forms")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.tol is not None and not (math.isfinite(args.tol) and args.tol > 0):
        print("error: --tol must be a positive number", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ScenarioError, FormatError, ConfigError, ConditionHError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except BalanceLawError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

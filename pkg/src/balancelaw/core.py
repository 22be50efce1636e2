"""Fluxes, sources, initial surfaces and analysis of the source's zero set.

The balance law is ``u_t + sum_i f_i(u)_{x_i} = g(u)`` with Riemann data
``u_minus`` where ``M(x) < 0`` and ``u_plus`` where ``M(x) > 0``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import EvaluationError

ArrayFn = Callable[[np.ndarray], np.ndarray]

# boundary point kinds
REGULAR = "regular"
NEG_INFINITE = "neg_infinite"
AMBIGUOUS = "ambiguous"


def _vectorized(fn: Callable) -> ArrayFn:
    """Wrap ``fn`` so it accepts arrays even if it was written for scalars."""

    def wrapped(u):
        arr = np.asarray(u, dtype=float)
        try:
            out = np.asarray(fn(arr), dtype=float)
            if out.shape == arr.shape:
                return out
            if out.ndim == 0:
                return np.full(arr.shape, float(out))
        except (TypeError, ValueError):
            pass
        return np.vectorize(lambda v: float(fn(float(v))), otypes=[float])(arr)

    return wrapped


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SourceTerm:
    """Scalar source g(u).

    ``g_prime`` may return ``-inf`` where the derivative is minus infinite
    and ``nan`` or ``+inf`` where it does not exist. ``analytic_zeros`` holds
    isolated zeros as floats and zero plateaus as ``(c, d)`` pairs.
    """

    g: Callable
    g_prime: Callable | None = None
    analytic_zeros: tuple | None = None
    search_window: tuple[float, float] = (-100.0, 100.0)
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "_g", _vectorized(self.g))
        if self.g_prime is not None:
            object.__setattr__(self, "_gp", _vectorized(self.g_prime))
        lo, hi = self.search_window
        if not lo < hi:
            raise ValueError("search_window must satisfy lo < hi")

    def __call__(self, u):
        with np.errstate(all="ignore"):
            out = self._g(u)
        return out if np.ndim(u) else float(out)

    def derivative(self, u):
        """g'(u) if a derivative was supplied, otherwise ``None``."""
        if self.g_prime is None:
            return None
        with np.errstate(all="ignore"):
            out = self._gp(u)
        return out if np.ndim(u) else float(out)


@dataclass(frozen=True)
class FluxSet:
    """Flux components f_i with first and second derivatives."""

    f: tuple
    f1: tuple
    f2: tuple
    name: str = "custom"

    def __post_init__(self):
        if not (len(self.f) == len(self.f1) == len(self.f2)) or len(self.f) == 0:
            raise ValueError("f, f1 and f2 must have the same positive length")
        for attr in ("f", "f1", "f2"):
            object.__setattr__(self, "_" + attr, tuple(_vectorized(fn) for fn in getattr(self, attr)))

    @property
    def n(self) -> int:
        return len(self.f)

    def flux(self, u) -> np.ndarray:
        """Stack of f_i(u) along a trailing axis of length n."""
        u = np.asarray(u, dtype=float)
        return np.stack([fn(u) for fn in self._f], axis=-1)

    def speed(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.stack([fn(u) for fn in self._f1], axis=-1)

    def curvature(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.stack([fn(u) for fn in self._f2], axis=-1)

    def component(self, i: int, order: int = 0) -> ArrayFn:
        return (self._f, self._f1, self._f2)[order][i]

    def max_speed(self, lo: float, hi: float, n: int = 2001) -> np.ndarray:
        """Per-axis max |f_i'(u)| over ``lo <= u <= hi``."""
        u = np.linspace(lo, hi, n)
        return np.abs(self.speed(u)).max(axis=0)

    def cone_speed(self, bound: float, n: int = 4001) -> float:
        """max over |u| <= bound of the Euclidean norm of f'(u)."""
        u = np.linspace(-bound, bound, n)
        return float(np.sqrt((self.speed(u) ** 2).sum(axis=-1)).max())

    def validate(self, lo: float = -2.0, hi: float = 2.0, n: int = 1000) -> dict:
        """Check derivatives against centred differences.

        Returns the error ratio for h = 1e-3 versus 1e-4 per component and
        derivative order. Raises ``ValueError`` if a supplied derivative is
        off by more than the O(h^2) truncation allows.
        """
        u = np.linspace(lo, hi, n)
        report = {}
        for i in range(self.n):
            for order, (F, dF) in enumerate(((self._f[i], self._f1[i]), (self._f1[i], self._f2[i])), 1):
                errs = []
                for h in (1e-3, 1e-4):
                    fd = (F(u + h) - F(u - h)) / (2 * h)
                    errs.append(float(np.max(np.abs(fd - dF(u)))))
                scale = 1.0 + float(np.max(np.abs(dF(u))))
                if errs[1] > 1e-5 * scale and errs[1] > 0.2 * errs[0]:
                    raise ValueError(f"derivative of order {order} for flux component {i} does not match finite differences")
                report[(i, order)] = errs[0] / errs[1] if errs[1] > 0 else math.inf
        return report


@dataclass(frozen=True)
class InitialSurface:
    """Level set {M = 0} separating the two Riemann states.

    ``graph`` optionally solves ``M = 0`` for the last coordinate given the
    others, which lets samplers draw surface points without projection.
    """

    M: Callable
    grad_M: Callable
    n: int
    graph: Callable | None = None
    name: str = "custom"

    def value(self, x) -> np.ndarray:
        """M at points with coordinates along the last axis."""
        x = np.asarray(x, dtype=float)
        return np.asarray(self.M(x), dtype=float)

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.asarray(self.grad_M(x), dtype=float)

    def validate(self, points: np.ndarray | None = None, h: float = 1e-5) -> float:
        """Max deviation between ``grad_M`` and centred differences of M."""
        if points is None:
            rng = np.random.default_rng(7)
            points = rng.uniform(-1.5, 1.5, size=(200, self.n))
        grad = self.gradient(points)
        worst = 0.0
        for i in range(self.n):
            e = np.zeros(self.n)
            e[i] = h
            fd = (self.value(points + e) - self.value(points - e)) / (2 * h)
            scale = 1.0 + np.abs(grad[..., i])
            worst = max(worst, float(np.max(np.abs(fd - grad[..., i]) / scale)))
        if worst > 1e-5:
            raise ValueError("grad_M does not match finite differences of M")
        return worst


@dataclass(frozen=True)
class ZeroSetDecomposition:
    """Partition of the search window by the zeros of g.

    ``open_intervals`` holds ``(a, b, sign)`` triples, ``plateau_intervals``
    ``(c, d)`` pairs with g identically zero, ``boundary_points`` the
    isolated zeros. ``boundary_kinds`` maps each finite interval endpoint to
    one of ``regular``, ``neg_infinite`` or ``ambiguous``.
    """

    open_intervals: tuple
    plateau_intervals: tuple
    boundary_points: tuple
    resolution: float
    window: tuple[float, float]
    warnings: tuple = ()
    boundary_kinds: dict = field(default_factory=dict)

    def features(self) -> list[tuple[float, float]]:
        """Zero features as closed ``(lo, hi)`` ranges sorted by position."""
        feats = [(p, p) for p in self.boundary_points] + [tuple(c) for c in self.plateau_intervals]
        return sorted(feats)

    def as_dict(self) -> dict:
        return {
            "open_intervals": [list(iv) for iv in self.open_intervals],
            "plateau_intervals": [list(p) for p in self.plateau_intervals],
            "boundary_points": list(self.boundary_points),
            "boundary_kinds": {repr(k): v for k, v in self.boundary_kinds.items()},
            "resolution": self.resolution,
            "window": list(self.window),
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# right-Lipschitz and growth checks
# ---------------------------------------------------------------------------


def _checked_values(g: SourceTerm, u: np.ndarray) -> np.ndarray:
    v = np.asarray(g(u), dtype=float)
    bad = ~np.isfinite(v)
    if bad.any():
        where = float(u[np.argmax(bad)])
        raise EvaluationError(f"source {g.name} is not finite at u={where!r}", where)
    return v


def estimate_right_lipschitz(g: SourceTerm, a: float, b: float, n_samples: int) -> float:
    """Sampled right-Lipschitz constant of g on [a, b].

    Every pair quotient ``(g(u) - g(v)) / (u - v)`` on a uniform grid is a
    weighted mean of the adjacent-pair quotients between v and u, so the
    maximum of adjacent quotients is the supremum over all sampled pairs.
    """
    if not a < b:
        raise ValueError("need a < b")
    if n_samples < 2:
        raise ValueError("need n_samples >= 2")
    u = np.linspace(a, b, int(n_samples) + 1)
    v = _checked_values(g, u)
    return float(np.max(np.diff(v) / np.diff(u)))


@dataclass(frozen=True)
class LipschitzTrend:
    samples: tuple
    estimates: tuple
    verdict: str  # "bounded" or "unbounded"

    @property
    def final(self) -> float:
        return self.estimates[-1]


def right_lipschitz_trend(
    g: SourceTerm, a: float, b: float, ladder: Sequence[int] = (10**3, 10**4, 10**5, 10**6), growth: float = 1.5
) -> LipschitzTrend:
    """Estimate on a refinement ladder and classify the trend.

    The verdict is ``unbounded`` when every refinement step multiplies a
    positive estimate by more than ``growth``.
    """
    est = tuple(estimate_right_lipschitz(g, a, b, n) for n in ladder)
    rising = all(e1 > 0 and e2 > growth * e1 for e1, e2 in zip(est[:-1], est[1:]))
    return LipschitzTrend(tuple(ladder), est, "unbounded" if rising else "bounded")


@dataclass(frozen=True)
class GrowthReport:
    limsup_estimate_pos: float
    limsup_estimate_neg: float
    ok: bool
    ratios_pos: tuple = ()
    ratios_neg: tuple = ()


def check_growth(g: SourceTerm, window: tuple[float, float] | None = None, n: int = 48) -> GrowthReport:
    """Sample g(eta)/eta at geometrically spaced |eta| toward both window edges.

    A side passes when the ratio is finite and its positive part does not
    grow toward the edge; a ratio that tends to zero from below is fine.
    The estimates are the largest ratios over the outermost decade.
    """
    lo, hi = window if window is not None else g.search_window
    out = {}
    ok = True
    for side, edge in (("pos", hi), ("neg", lo)):
        if edge * (1 if side == "pos" else -1) <= 1.0:
            out[side] = (math.nan, ())
            continue
        r = np.geomspace(1.0, abs(edge), n)
        eta = r if side == "pos" else -r
        with np.errstate(all="ignore"):
            rho = np.asarray(g(eta), dtype=float) / eta
        if not np.all(np.isfinite(rho)):
            ok = False
            out[side] = (math.inf, tuple(rho))
            continue
        outer = rho[r >= abs(edge) / 10.0]
        pos = np.maximum(rho, 0.0)
        tol = 1e-9 * (1.0 + pos.max())
        if np.any(np.diff(pos) > tol):
            ok = False
        out[side] = (float(outer.max()), tuple(rho))
    return GrowthReport(out["pos"][0], out["neg"][0], ok, out["pos"][1], out["neg"][1])


# ---------------------------------------------------------------------------
# zero set decomposition
# ---------------------------------------------------------------------------


def classify_zero(g: SourceTerm, z: float, side_zero: str | None = None) -> tuple[str, float]:
    """Classify a zero of g by the derivative there.

    Returns ``(kind, slope)``. With a supplied derivative the value decides
    directly; otherwise one-sided difference quotients on a shrinking ladder
    are compared. ``side_zero`` ("left" or "right") marks a plateau side,
    where the quotient is zero by construction.
    """
    d = g.derivative(z)
    if d is not None:
        if d == -math.inf:
            return NEG_INFINITE, -math.inf
        if math.isfinite(d):
            return REGULAR, float(d)
        return AMBIGUOUS, float(d)
    hs = 10.0 ** -np.arange(3, 10)
    g0 = g(z)
    with np.errstate(all="ignore"):
        ql = np.array([(g0 - g(z - h)) / h for h in hs])
        qr = np.array([(g(z + h) - g0) / h for h in hs])
    if side_zero == "left":
        ql = np.zeros_like(ql)
    elif side_zero == "right":
        qr = np.zeros_like(qr)
    if not (np.all(np.isfinite(ql)) and np.all(np.isfinite(qr))):
        return AMBIGUOUS, math.nan
    scale = 1.0 + abs(ql[-1]) + abs(qr[-1])
    settled = abs(ql[-1] - ql[-2]) < 1e-3 * scale and abs(qr[-1] - qr[-2]) < 1e-3 * scale
    if settled and abs(ql[-1] - qr[-1]) < 1e-3 * scale:
        return REGULAR, float(0.5 * (ql[-1] + qr[-1]))
    growing = np.all(np.diff(ql) < 0) and np.all(np.diff(qr) < 0)
    if growing and ql[-1] < -10 * abs(ql[0]) - 1 and qr[-1] < -10 * abs(qr[0]) - 1:
        return NEG_INFINITE, -math.inf
    return AMBIGUOUS, math.nan


def _bisect_sign(fn: Callable[[float], float], a: float, b: float, tol: float) -> float:
    fa = fn(a)
    while b - a > tol:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = fn(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _bisect_pred(pred: Callable[[float], bool], good: float, bad: float, tol: float) -> float:
    """Boundary between a point where ``pred`` holds and one where it fails."""
    while abs(bad - good) > tol:
        m = 0.5 * (good + bad)
        if m in (good, bad):
            break
        if pred(m):
            good = m
        else:
            bad = m
    return good


def _golden_min(fn: Callable[[float], float], a: float, b: float, tol: float) -> float:
    phi = (math.sqrt(5) - 1) / 2
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def _scan_features(g: SourceTerm, lo: float, hi: float, tol: float, levels: Sequence[int]) -> list[tuple[float, float]]:
    gs = lambda u: float(g(u))
    feats: list[tuple[float, float]] = []
    prev_count = None
    stable = 0
    for k in levels:
        u = np.linspace(lo, hi, 2**k + 1)
        v = _checked_values(g, u)
        small = np.abs(v) <= tol
        found: list[tuple[float, float]] = []
        # runs of near-zero samples
        idx = np.flatnonzero(small)
        if idx.size:
            breaks = np.flatnonzero(np.diff(idx) > 1)
            starts = np.r_[idx[0], idx[breaks + 1]]
            ends = np.r_[idx[breaks], idx[-1]]
            for i0, i1 in zip(starts, ends):
                pred = lambda w: abs(gs(w)) <= tol
                left = u[i0] if i0 == 0 else _bisect_pred(pred, u[i0], u[i0 - 1], tol)
                right = u[i1] if i1 == len(u) - 1 else _bisect_pred(pred, u[i1], u[i1 + 1], tol)
                found.append((float(left), float(right)))
        # strict sign changes between neighbouring non-small samples
        sgn = np.sign(v)
        sgn[small] = 0
        change = np.flatnonzero(sgn[:-1] * sgn[1:] < 0)
        for i in change:
            z = _bisect_sign(gs, float(u[i]), float(u[i + 1]), tol)
            found.append((z, z))
        # touching zeros hidden between samples: local minima of |g|
        av = np.abs(v)
        interior = np.flatnonzero((av[1:-1] < av[:-2]) & (av[1:-1] <= av[2:]) & ~small[1:-1]) + 1
        thresh = 1e-3 * max(1.0, float(av.max()))
        for i in interior:
            if av[i] > thresh or sgn[i - 1] != sgn[i + 1]:
                continue
            z = _golden_min(lambda w: abs(gs(w)), float(u[i - 1]), float(u[i + 1]), tol)
            if abs(gs(z)) <= tol:
                found.append((z, z))
        feats = _merge_features(found, tol)
        if prev_count == len(feats) and k >= 14:
            stable += 1
            if stable >= 2:
                break
        else:
            stable = 0
        prev_count = len(feats)
    return feats


def _merge_features(found: list, tol: float) -> list[tuple[float, float]]:
    found = sorted(found)
    merged: list[list[float]] = []
    for a, b in found:
        if merged and a <= merged[-1][1] + 2 * tol:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    out = []
    for a, b in merged:
        if b - a <= 2 * tol:
            m = 0.5 * (a + b)
            out.append((m, m))
        else:
            out.append((a, b))
    return out


def _analytic_features(zeros, lo: float, hi: float) -> list[tuple[float, float]]:
    feats = []
    for z in zeros:
        if isinstance(z, (tuple, list)):
            c, d = float(z[0]), float(z[1])
            if d < lo or c > hi:
                continue
            feats.append((max(c, lo), min(d, hi)))
        else:
            z = float(z)
            if lo <= z <= hi:
                feats.append((z, z))
    return sorted(feats)


def decompose_zero_set(
    g: SourceTerm, tol: float = 1e-12, levels: Sequence[int] = tuple(range(10, 21))
) -> ZeroSetDecomposition:
    """Split the search window into sign intervals, plateaus and isolated zeros."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = map(float, g.search_window)
    if g.analytic_zeros is not None:
        feats = _analytic_features(g.analytic_zeros, lo, hi)
    else:
        feats = _scan_features(g, lo, hi, tol, levels)

    warnings = []
    for edge in (lo, hi):
        if abs(g(edge)) <= tol:
            warnings.append(f"|g| <= tol at window endpoint {edge!r}; an interval may be truncated")

    points = tuple(a for a, b in feats if a == b)
    plateaus = tuple((a, b) for a, b in feats if a < b)
    intervals = []
    cuts = [lo] + [x for ab in feats for x in ab] + [hi]
    for a, b in zip(cuts[0::2], cuts[1::2]):
        if b <= a:
            continue
        mid = 0.5 * (a + b)
        s = np.sign(g(mid))
        if s == 0:
            continue
        intervals.append((a, b, int(s)))

    kinds = {}
    for p in points:
        kinds[p] = classify_zero(g, p)[0]
    for c, d in plateaus:
        if c > lo:
            kinds[c] = classify_zero(g, c, side_zero="right")[0]
        if d < hi:
            kinds[d] = classify_zero(g, d, side_zero="left")[0]
    return ZeroSetDecomposition(tuple(intervals), plateaus, points, tol, (lo, hi), tuple(warnings), kinds)


# ---------------------------------------------------------------------------
# catalogs
# ---------------------------------------------------------------------------


def _neg_cbrt_prime(u):
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        return -1.0 / (3.0 * np.abs(u) ** (2.0 / 3.0))


def _pos_cbrt_prime(u):
    return -_neg_cbrt_prime(u)


def source_from_name(spec: str, window: tuple[float, float] = (-100.0, 100.0)) -> SourceTerm:
    """Build a catalog source.

    Recognized names: ``neg_cbrt`` (-u^(1/3)), ``pos_cbrt`` (u^(1/3)),
    ``linear:lam`` (lam*u), ``logistic`` (u(1-u)), ``zero``.
    """
    spec = spec.strip()
    if spec == "neg_cbrt":
        return SourceTerm(lambda u: -np.cbrt(u), _neg_cbrt_prime, (0.0,), window, "neg_cbrt")
    if spec == "pos_cbrt":
        return SourceTerm(np.cbrt, _pos_cbrt_prime, (0.0,), window, "pos_cbrt")
    if spec == "logistic":
        return SourceTerm(lambda u: u * (1.0 - u), lambda u: 1.0 - 2.0 * u, (0.0, 1.0), window, "logistic")
    if spec == "zero":
        return SourceTerm(lambda u: np.zeros_like(u), lambda u: np.zeros_like(u), ((-math.inf, math.inf),), window, "zero")
    m = re.fullmatch(r"linear:\s*([-+0-9.eE]+)", spec)
    if m:
        lam = float(m.group(1))
        zeros = (0.0,) if lam != 0 else ((-math.inf, math.inf),)
        return SourceTerm(lambda u: lam * u, lambda u: np.full(np.shape(u), lam), zeros, window, f"linear:{lam:g}")
    raise ValueError(f"unknown source {spec!r}")


def _sparse_poly(coeffs: np.ndarray) -> ArrayFn:
    """Evaluate sum c_k u^k touching only the nonzero terms."""
    terms = [(k, float(c)) for k, c in enumerate(coeffs) if c != 0]

    def p(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape)
        power, k_now = np.ones(u.shape), 0
        for k, c in terms:
            while k_now < k:
                power = power * u
                k_now += 1
            out = out + c * power
        return out

    return p


def _poly(coeffs: Sequence[float]) -> tuple[ArrayFn, ArrayFn, ArrayFn]:
    p = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
    d1, d2 = p.deriv(1), p.deriv(2)
    return tuple(_sparse_poly(q.coef) for q in (p, d1, d2))


def polynomial_flux(coeff_lists: Sequence[Sequence[float]], name: str = "polynomial") -> FluxSet:
    """Flux with f_i given by ascending coefficient lists."""
    parts = [_poly(c) for c in coeff_lists]
    return FluxSet(tuple(p[0] for p in parts), tuple(p[1] for p in parts), tuple(p[2] for p in parts), name)


def flux_from_name(spec) -> FluxSet:
    """Catalog fluxes: ``burgers2d``, ``burgers1d``, ``neg_burgers1d`` or coefficient lists."""
    if isinstance(spec, str):
        table = {
            "burgers2d": [[0, 0, 0.5], [0, 0, 0, 0, 0.25]],
            "burgers1d": [[0, 0, 0.5]],
            "neg_burgers1d": [[0, 0, -0.5]],
        }
        if spec not in table:
            raise ValueError(f"unknown flux {spec!r}")
        return polynomial_flux(table[spec], spec)
    return polynomial_flux(spec)


def cubic_plane_surface() -> InitialSurface:
    """M(x, y) = x^3 + y, whose zero set is the graph y = -x^3."""
    return InitialSurface(
        M=lambda p: p[..., 0] ** 3 + p[..., 1],
        grad_M=lambda p: np.stack([3.0 * p[..., 0] ** 2, np.ones_like(p[..., 1])], axis=-1),
        n=2,
        graph=lambda q: -q[..., 0] ** 3,
        name="cubic_plane",
    )


def plane_surface(a: Sequence[float], c: float = 0.0) -> InitialSurface:
    """M(x) = a.x + c."""
    a = np.asarray(a, dtype=float)
    n = a.size
    graph = None
    if a[-1] != 0:
        graph = lambda q: -(q @ a[:-1] + c) / a[-1] if n > 1 else np.full(q.shape[:-1], -c / a[-1])
    return InitialSurface(
        M=lambda p: p @ a + c,
        grad_M=lambda p: np.broadcast_to(a, np.shape(p)).copy(),
        n=n,
        graph=graph,
        name=f"plane:{','.join(f'{v:g}' for v in a)},{c:g}",
    )


def polynomial_surface(terms: Sequence[tuple[float, Sequence[int]]], n: int) -> InitialSurface:
    """M(x) = sum_k coef_k prod_i x_i^{p_ki} from ``(coef, powers)`` terms."""
    coefs = np.array([float(c) for c, _ in terms])
    pw = np.array([list(p) for _, p in terms], dtype=int).reshape(len(terms), n)

    def M(x):
        x = np.asarray(x, dtype=float)
        return sum(c * np.prod(x ** p, axis=-1) for c, p in zip(coefs, pw))

    def grad(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for c, p in zip(coefs, pw):
            for i in range(n):
                if p[i] == 0:
                    continue
                q = p.copy()
                q[i] -= 1
                out[..., i] += c * p[i] * np.prod(x ** q, axis=-1)
        return out

    return InitialSurface(M, grad, n, None, "polynomial")


def surface_from_name(spec: str, n: int) -> InitialSurface:
    """Catalog surfaces: ``cubic_plane`` and ``plane:a1,...,an,c``."""
    spec = spec.strip()
    if spec == "cubic_plane":
        if n != 2:
            raise ValueError("cubic_plane needs dimension 2")
        return cubic_plane_surface()
    if spec.startswith("plane:"):
        vals = [float(v) for v in spec[len("plane:"):].split(",")]
        if len(vals) != n + 1:
            raise ValueError(f"plane needs {n} coefficients and an offset")
        return plane_surface(vals[:-1], vals[-1])
    raise ValueError(f"unknown surface {spec!r}")

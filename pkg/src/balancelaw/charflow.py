"""Global characteristic flow of du/dt = g(u) and characteristic shifts.

On each open interval where g keeps its sign the flow is the inverse of
``G(u) = int_s^u d eta / g(eta)``. Integrals are computed along a graded
path variable ``x``. Contracting toward a finite endpoint ``e`` uses
``eta = e + (p - e) exp(-x)``. Leaving a finite endpoint ``f`` uses
``eta = f + (s - f) exp(x)``. Under both substitutions the time density
``(eta - anchor) / g(eta)`` stays bounded near power-type zeros and decays
geometrically when the absorption time is finite, so fixed unit segments
with a Gauss-Legendre rule resolve endpoint singularities. The same nodes
carry the characteristic shifts ``int f_i'(u_bar) dt``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .core import AMBIGUOUS, NEG_INFINITE, FluxSet, SourceTerm, ZeroSetDecomposition, classify_zero, decompose_zero_set
from .errors import BlowUpError, DomainError, NotDifferentiableError
from .quadrature import GL_NODES, GL_WEIGHTS, gauss_kronrod

_EPS = np.finfo(float).eps
_CHUNK = 16
_MAX_SEGMENTS = 4000
_HUGE = 1e150


@dataclass(frozen=True)
class AbsorptionRecord:
    """Where and when the flow from ``s`` stops.

    ``target`` is the endpoint in the direction of the flow (possibly
    infinite). ``t_star`` is finite only for absorption into a zero.
    ``escape_time`` is finite when the flow reaches infinity in finite time.
    """

    s: float
    target: float
    t_star: float
    escape_time: float = math.inf


@dataclass(frozen=True)
class _Interval:
    lo: float
    hi: float
    sign: int


class CharFlow:
    """Characteristic flow for a source term.

    Parameters
    ----------
    source : SourceTerm
    decomposition : ZeroSetDecomposition, optional
        Computed from ``source`` when omitted.
    quadrature_tol, root_tol : float
        Tolerances for time integrals and for the inversion ``G = t``.
    """

    def __init__(
        self,
        source: SourceTerm,
        decomposition: ZeroSetDecomposition | None = None,
        quadrature_tol: float = 1e-12,
        root_tol: float = 1e-12,
    ):
        self.source = source
        self.decomposition = decomposition if decomposition is not None else decompose_zero_set(source)
        self.quadrature_tol = float(quadrature_tol)
        self.root_tol = float(root_tol)
        self.merge_tol = 10.0 * self.root_tol
        self._build_intervals()
        self._lock = threading.Lock()
        self._absorption: dict[float, AbsorptionRecord] = {}
        self._bracket: dict[tuple, np.ndarray] = {}
        self._kinds: dict[float, tuple[str, float]] = {}

    # ------------------------------------------------------------------
    # geometry of the zero set
    # ------------------------------------------------------------------

    def _build_intervals(self):
        g = self.source
        lo_w, hi_w = self.decomposition.window
        tol = self.decomposition.resolution
        feats = [list(f) for f in self.decomposition.features()]
        if feats:
            if feats[0][0] <= lo_w and feats[0][1] > feats[0][0] and abs(g(lo_w - 1.0)) <= tol:
                feats[0][0] = -math.inf
            if feats[-1][1] >= hi_w and feats[-1][1] > feats[-1][0] and abs(g(hi_w + 1.0)) <= tol:
                feats[-1][1] = math.inf
        self._feat_lo = np.array([f[0] for f in feats], dtype=float)
        self._feat_hi = np.array([f[1] for f in feats], dtype=float)
        cuts = [-math.inf] + [v for f in feats for v in f] + [math.inf]
        intervals = []
        for a, b in zip(cuts[0::2], cuts[1::2]):
            if not a < b:
                intervals.append(None)
                continue
            if math.isfinite(a) and math.isfinite(b):
                probes = [a + (b - a) * q for q in (0.5, 0.25, 0.75)]
            elif math.isfinite(a):
                probes = [a + 1.0, a + 0.5, a + 2.0]
            elif math.isfinite(b):
                probes = [b - 1.0, b - 0.5, b - 2.0]
            else:
                probes = [0.0, 1.0, -1.0]
            sign = 0
            for q in probes:
                sign = int(np.sign(g(q)))
                if sign:
                    break
            intervals.append(_Interval(a, b, sign) if sign else None)
        self._intervals = intervals

    def _locate(self, s: np.ndarray) -> np.ndarray:
        """Interval index per point, or -1 where g(s) vanishes."""
        s = np.asarray(s, dtype=float)
        if self._feat_lo.size == 0:
            idx = np.zeros(s.shape, dtype=int)
        else:
            j = np.searchsorted(self._feat_lo, s, side="right") - 1
            in_feat = (j >= 0) & (s <= self._feat_hi[np.clip(j, 0, None)])
            idx = np.where(in_feat, -1, j + 1)
        signs = np.array([iv.sign if iv else 0 for iv in self._intervals])
        ok = idx >= 0
        gs = np.sign(self.source(s)) if s.ndim else np.sign(np.array(self.source(s)))
        good = ok & (signs[np.where(ok, idx, 0)] == gs) & (gs != 0)
        return np.where(good, idx, -1)

    def interval_of(self, s: float) -> tuple[float, float, int] | None:
        """``(lo, hi, sign)`` of the open interval holding ``s``, or None at a zero."""
        i = int(self._locate(np.array(s)))
        if i < 0:
            return None
        iv = self._intervals[i]
        return (iv.lo, iv.hi, iv.sign)

    def zero_kind(self, z: float) -> tuple[str, float]:
        """Derivative classification of g at a zero, cached."""
        with self._lock:
            hit = self._kinds.get(z)
        if hit is not None:
            return hit
        kinds = self.decomposition.boundary_kinds
        if z in kinds and kinds[z] != "regular":
            res = (kinds[z], -math.inf if kinds[z] == NEG_INFINITE else math.nan)
        else:
            res = classify_zero(self.source, z)
        with self._lock:
            self._kinds[z] = res
        return res

    # ------------------------------------------------------------------
    # graded path quadrature
    # ------------------------------------------------------------------

    def _segments(self, sign, c, d, p, x_end, k0, K, weights, orient=1):
        """Integrals of the density over unit segments ``[k0 + j, k0 + j + 1]``.

        Returns an array ``(1 + len(weights), N, K)`` clipped at ``x_end``.
        """
        j = np.arange(K, dtype=float)
        start = k0 + j[None, :]
        length = np.clip(x_end[:, None] - start, 0.0, 1.0)
        x = start[..., None] + length[..., None] * (0.5 * (GL_NODES + 1.0))
        w = length[..., None] * (0.5 * GL_WEIGHTS)
        eta, dens = self._density(sign, c, d, p, x, orient)
        out = np.empty((1 + len(weights),) + length.shape)
        out[0] = (dens * w).sum(-1)
        for i, fw in enumerate(weights, 1):
            out[i] = (fw(eta) * dens * w).sum(-1)
        return out

    def _density(self, sign, c, d, p, x, orient=1):
        shape = (-1,) + (1,) * (x.ndim - 1)
        c_, d_, p_ = c.reshape(shape), d.reshape(shape), p.reshape(shape)
        with np.errstate(all="ignore"):
            off = (p_ - c_) * np.exp(d_ * x)
            eta = c_ + off
            gv = np.asarray(self.source(eta), dtype=float)
            dens = orient * d_ * off / gv
        valid = (np.sign(gv) == sign) & np.isfinite(dens)
        return eta, np.where(valid, dens, 0.0)

    def _partial(self, sign, c, d, p, x0, theta, weights):
        """Integrals from x0 to x0 + theta (all arrays of length N)."""
        x = x0[:, None] + theta[:, None] * (0.5 * (GL_NODES + 1.0))
        w = theta[:, None] * (0.5 * GL_WEIGHTS)
        eta, dens = self._density(sign, c, d, p, x)
        out = np.empty((1 + len(weights), x0.size))
        out[0] = (dens * w).sum(-1)
        for i, fw in enumerate(weights, 1):
            out[i] = (fw(eta) * dens * w).sum(-1)
        return out

    def _point_density(self, sign, c, d, p, x):
        eta, dens = self._density(sign, c, d, p, x[:, None])
        return dens[:, 0]

    def _run_leg(self, sign, c, d, p, x_end, tau, weights, contracting_end, orient=1):
        """Walk one leg until the accumulated time reaches ``tau``.

        Returns ``(reached, X, acc, total, divergent, escaped)`` where ``acc``
        holds the accumulated integrals (time first) and ``total`` the leg's
        full time for points that did not reach ``tau``.
        """
        N = p.size
        W = len(weights)
        acc = np.zeros((1 + W, N))
        reached = np.zeros(N, dtype=bool)
        X = np.full(N, np.nan)
        total = np.zeros(N)
        divergent = np.zeros(N, dtype=bool)
        escaped = np.zeros(N, dtype=bool)
        tail = np.zeros((1 + W, N))
        active = x_end > 0
        last = np.zeros((2, N))
        k = 0
        while active.any():
            ia = np.flatnonzero(active)
            seg = self._segments(sign, c[ia], d[ia], p[ia], x_end[ia], k, _CHUNK, weights, orient)
            cum = acc[0, ia][:, None] + np.cumsum(seg[0], axis=1)
            hit = cum >= tau[ia][:, None]
            has = hit.any(axis=1)
            if has.any():
                ih = ia[has]
                jh = np.argmax(hit[has], axis=1)
                rows = np.flatnonzero(has)
                before = acc[:, ih] + np.cumsum(seg[:, rows, :], axis=2)[:, np.arange(rows.size), jh] - seg[:, rows, jh]
                x0 = k + jh.astype(float)
                seg_len = np.clip(x_end[ih] - x0, 0.0, 1.0)
                theta = self._invert_segment(sign, c[ih], d[ih], p[ih], x0, seg_len, tau[ih] - before[0], seg[0, rows, jh])
                part = self._partial(sign, c[ih], d[ih], p[ih], x0, theta, weights)
                acc[:, ih] = before + part
                acc[0, ih] = tau[ih]
                X[ih] = x0 + theta
                reached[ih] = True
                active[ih] = False
            miss = ~has
            if miss.any():
                im = ia[miss]
                rows = np.flatnonzero(miss)
                acc[:, im] += seg[:, rows, :].sum(axis=2)
                last[0, im] = seg[0, rows, -2]
                last[1, im] = seg[0, rows, -1]
                kend = k + _CHUNK
                fin = np.isfinite(x_end[im])
                done = fin & (x_end[im] <= kend)
                if (~fin).any():
                    inf_rows = np.flatnonzero(~fin)
                    ii = im[inf_rows]
                    if contracting_end:
                        off_end = np.abs(p[ii] - c[ii]) * np.exp(-float(kend))
                        saturated = off_end <= 2 * _EPS * np.abs(c[ii]) + 1e-300
                    else:
                        saturated = np.abs(c[ii] + (p[ii] - c[ii]) * np.exp(min(float(kend), 700.0))) > _HUGE
                    small = last[1, ii] <= 1e-17 * np.maximum(acc[0, ii], 1e-300)
                    big = acc[0, ii] > 1.0 / self.quadrature_tol
                    stop = saturated | small | big | (kend >= _MAX_SEGMENTS)
                    for r, (stp, i) in enumerate(zip(stop, ii)):
                        if not stp:
                            continue
                        a, b = last[0, i], last[1, i]
                        ratio = b / a if a > 0 else (0.0 if b == 0 else math.inf)
                        if big[r] or not ratio < 1.0 - 1e-3:
                            divergent[i] = True
                        else:
                            t_tail = b * ratio / (1.0 - ratio)
                            tail[:, i] = t_tail
                    done[inf_rows] = stop
                if done.any():
                    idone = im[done]
                    total[idone] = acc[0, idone]
                    active[idone] = False
            k += _CHUNK
        total = np.where(divergent, math.inf, total + tail[0])
        if not contracting_end:
            escaped = ~reached & ~divergent & ~np.isfinite(x_end)
        return reached, X, acc, total, divergent, escaped

    def _invert_segment(self, sign, c, d, p, x0, seg_len, target, seg_val):
        """Safeguarded Newton for theta with int_{x0}^{x0+theta} dens = target."""
        lo = np.zeros_like(x0)
        hi = seg_len.copy()
        with np.errstate(all="ignore"):
            theta = np.where(seg_val > 0, seg_len * target / seg_val, 0.5 * seg_len)
        theta = np.clip(theta, lo, hi)
        tol = self.root_tol * np.maximum(1.0, np.abs(target)) * 1e-2
        for _ in range(60):
            val = self._partial(sign, c, d, p, x0, theta, [])[0] - target
            lo = np.where(val <= 0, theta, lo)
            hi = np.where(val >= 0, theta, hi)
            conv = (np.abs(val) <= tol) | (hi - lo <= 4 * _EPS * np.maximum(1.0, x0 + hi))
            if conv.all():
                break
            dens = self._point_density(sign, c, d, p, x0 + theta)
            with np.errstate(all="ignore"):
                step = theta - val / dens
            bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
            theta = np.where(conv, theta, np.where(bad, 0.5 * (lo + hi), step))
        return theta

    def _legs(self, iv: _Interval, dirn: int, s: np.ndarray):
        """Leg parameters ``(c1, d1, x1, c2, p2, has2)`` for paths from ``s``."""
        E = iv.hi if dirn > 0 else iv.lo
        F = iv.lo if dirn > 0 else iv.hi
        N = s.size
        if math.isfinite(E) and math.isfinite(F):
            m = 0.5 * (iv.lo + iv.hi)
            far_side = (s - m) * dirn < 0
            with np.errstate(all="ignore"):
                x1 = np.where(far_side, np.log((m - F) / (s - F)), 0.0)
            x1 = np.maximum(x1, 0.0)
            c1 = np.full(N, F)
            p2 = np.where(x1 > 0, m, s)
            return c1, x1, np.full(N, E), p2, np.ones(N, dtype=bool)
        if math.isfinite(E):
            return np.full(N, 0.0), np.zeros(N), np.full(N, E), s.copy(), np.ones(N, dtype=bool)
        if math.isfinite(F):
            return np.full(N, F), np.full(N, math.inf), np.full(N, 0.0), s.copy(), np.zeros(N, dtype=bool)
        anchor = s - dirn * np.maximum(1.0, np.abs(s))
        return anchor, np.full(N, math.inf), np.zeros(N), s.copy(), np.zeros(N, dtype=bool)

    def _trace(self, iv: _Interval, s: np.ndarray, t: np.ndarray, weights, weight_end):
        """Flow along one interval: values, integrals, absorption data."""
        sign = iv.sign
        N = s.size
        c1, x1, c2, p2, has2 = self._legs(iv, sign, s)
        d1 = np.ones(N)
        W = len(weights)
        r1, X1, acc1, T1, div1, esc1 = self._run_leg(sign, c1, d1, s, x1, t, weights, contracting_end=False)
        u = np.full(N, np.nan)
        acc = acc1.copy()
        tstar = np.full(N, math.inf)
        escape = np.full(N, math.inf)
        target = np.full(N, iv.hi if sign > 0 else iv.lo)
        u[r1] = c1[r1] + (s[r1] - c1[r1]) * np.exp(X1[r1])
        # expanding leg toward infinity that never reached t: blow-up
        esc = esc1 & ~has2
        escape[esc] = T1[esc]
        bad = ~r1 & ~has2 & np.isfinite(t)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            when = float(T1[i]) if math.isfinite(T1[i]) else float(acc1[0, i])
            raise BlowUpError(f"flow from s={s[i]!r} leaves every bounded set by t={when!r}", time=when)
        go = ~r1 & has2
        if go.any():
            ig = np.flatnonzero(go)
            tau2 = t[ig] - acc1[0, ig]
            d2 = -np.ones(ig.size)
            x_inf = np.full(ig.size, math.inf)
            r2, X2, acc2, T2, div2, _ = self._run_leg(sign, c2[ig], d2, p2[ig], x_inf, tau2, weights, contracting_end=True)
            acc[:, ig] += acc2
            reached2 = ig[r2]
            u[reached2] = c2[reached2] + (p2[reached2] - c2[reached2]) * np.exp(-X2[r2])
            nr = ~r2
            if nr.any():
                inr = ig[nr]
                e = c2[inr]
                tstar[inr] = acc1[0, inr] + T2[nr]
                u[inr] = e
                wend = np.array([fw(e) for fw in weight_end]).reshape(W, -1) if W else np.zeros((0, inr.size))
                # remaining tail (finite totals) and frozen stretch after absorption
                extra_t = np.where(np.isfinite(tstar[inr]), tstar[inr] - acc[0, inr], 0.0)
                hold = np.where(np.isfinite(tstar[inr]), t[inr] - tstar[inr], t[inr] - acc[0, inr])
                hold = np.where(np.isfinite(hold), np.maximum(hold, 0.0), 0.0)
                acc[1:, inr] += wend * (extra_t + hold)
                acc[0, inr] = np.where(np.isfinite(t[inr]), t[inr], acc[0, inr] + extra_t)
        return u, acc, tstar, target, escape

    # ------------------------------------------------------------------
    # public operations
    # ------------------------------------------------------------------

    def _evaluate(self, t, s, fluxes: FluxSet | None):
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        shape = t.shape
        tf, sf = t.ravel(), s.ravel()
        if np.any(tf < 0):
            raise DomainError("time must be non-negative")
        W = fluxes.n if fluxes is not None else 0
        weights = [fluxes.component(i, 1) for i in range(W)]
        u = sf.copy()
        acc = np.zeros((1 + W, sf.size))
        idx = self._locate(sf)
        still = idx < 0
        if W and still.any():
            sp = fluxes.speed(sf[still])
            acc[1:, still] = (sp * tf[still, None]).T
        for i in np.unique(idx[~still]):
            sel = np.flatnonzero(idx == i)
            moving = sel[tf[sel] > 0]
            if moving.size == 0:
                continue
            uu, aa, _, _, _ = self._trace(self._intervals[i], sf[moving], tf[moving], weights, weights)
            u[moving] = uu
            acc[:, moving] = aa
        return u.reshape(shape), acc[1:].reshape((W,) + shape)

    def u_bar(self, t, s):
        """Flow value u_bar(t, s); broadcasts over array arguments."""
        u, _ = self._evaluate(t, s, None)
        return u if u.ndim else float(u)

    def chi(self, fluxes: FluxSet, t, s) -> np.ndarray:
        """Characteristic shifts ``int_0^t f_i'(u_bar(tau, s)) d tau``, last axis i."""
        _, acc = self._evaluate(t, s, fluxes)
        return np.moveaxis(acc, 0, -1)

    def extinction_times(self, s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized ``(target, t_star, escape_time)`` for an array of starts."""
        sf = np.atleast_1d(np.asarray(s, dtype=float)).ravel()
        target = sf.copy()
        tstar = np.zeros(sf.size)
        escape = np.full(sf.size, math.inf)
        idx = self._locate(sf)
        for i in np.unique(idx[idx >= 0]):
            sel = np.flatnonzero(idx == i)
            iv = self._intervals[i]
            inf_t = np.full(sel.size, math.inf)
            _, _, ts, tg, esc = self._trace(iv, sf[sel], inf_t, [], [])
            tstar[sel] = ts
            target[sel] = tg
            escape[sel] = esc
        return target, tstar, escape

    def extinction_time(self, s: float) -> AbsorptionRecord:
        s = float(s)
        with self._lock:
            hit = self._absorption.get(s)
        if hit is not None:
            return hit
        tg, ts, esc = self.extinction_times(np.array([s]))
        rec = AbsorptionRecord(s, float(tg[0]), float(ts[0]), float(esc[0]))
        with self._lock:
            self._absorption[s] = rec
        return rec

    def g_transform(self, s: float, u: float) -> float:
        """``int_s^u d eta / g(eta)`` for s and u in the closure of one sign interval."""
        s, u = float(s), float(u)
        if s == u:
            return 0.0
        iv_s = self.interval_of(s)
        iv_u = self.interval_of(u)
        if iv_s is None and iv_u is None:
            raise DomainError("s and u are both zeros of g")
        if iv_s is None:
            return -self.g_transform(u, s)
        lo, hi, sign = iv_s
        if not lo <= u <= hi or (iv_u is not None and iv_u != iv_s):
            raise DomainError(f"s={s!r} and u={u!r} lie in different intervals")
        dirn = 1 if u > s else -1
        iv = _Interval(lo, hi, sign)
        c1, x1, c2, p2, has2 = self._legs(iv, dirn, np.array([s]))
        # x positions of u on the legs
        if x1[0] > 0 and (not has2[0] or (u - p2[0]) * dirn <= 0):
            with np.errstate(divide="ignore"):
                xu1 = math.log((u - c1[0]) / (s - c1[0]))
            xu2 = 0.0
        else:
            xu1 = x1[0]
            xu2 = math.inf if u == c2[0] else math.log((p2[0] - c2[0]) / (u - c2[0]))
        total = 0.0
        if xu1 > 0:
            total += self._leg_integral(sign, c1, np.ones(1), np.array([s]), np.array([xu1]), dirn, contracting=False)
        if has2[0] and xu2 > 0:
            total += self._leg_integral(sign, c2, -np.ones(1), p2, np.array([xu2]), dirn, contracting=True)
        return total

    def _leg_integral(self, sign, c, d, p, x_end, dirn, contracting) -> float:
        # integrate the positive density, then restore the path orientation
        orient = sign * dirn
        tau = np.full(1, math.inf)
        _, _, _, total, _, _ = self._run_leg(sign, c, d, p, x_end, tau, [], contracting, orient)
        return float(total[0]) * orient

    def u_bar_s(self, t, s):
        """Derivative of the flow in s."""
        t_arr, s_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        out = np.empty(t_arr.shape)
        flat_t, flat_s, flat_o = t_arr.ravel(), s_arr.ravel(), out.reshape(-1)
        idx = self._locate(flat_s)
        mov = idx >= 0
        if mov.any():
            ub = self.u_bar(flat_t[mov], flat_s[mov])
            flat_o[mov] = np.asarray(self.source(ub)) / np.asarray(self.source(flat_s[mov]))
        for i in np.flatnonzero(~mov):
            z, tt = float(flat_s[i]), float(flat_t[i])
            if self._in_plateau_interior(z):
                flat_o[i] = 1.0
                continue
            kind, slope = self.zero_kind(z)
            if kind == NEG_INFINITE:
                flat_o[i] = 0.0 if tt > 0 else 1.0
            elif kind == AMBIGUOUS:
                raise NotDifferentiableError(f"the flow is not differentiable in s at the zero s={z!r}")
            else:
                flat_o[i] = math.exp(slope * tt)
        return out if out.ndim else float(out)

    def _in_plateau_interior(self, z: float) -> bool:
        return bool(np.any((self._feat_lo < z) & (z < self._feat_hi)))

    def bracket_chi(self, fluxes: FluxSet, t: float, u_minus: float, u_plus: float) -> np.ndarray:
        """Shock shift ``int_0^t [f_i]/[u](tau) d tau`` along the two flows."""
        t = float(t)
        if u_minus == u_plus:
            return np.asarray(self.chi(fluxes, t, u_minus), dtype=float)
        key = (id(fluxes), t, float(u_minus), float(u_plus))
        with self._lock:
            hit = self._bracket.get(key)
        if hit is not None:
            return hit.copy()
        val = self._bracket_chi(fluxes, t, float(u_minus), float(u_plus))
        with self._lock:
            self._bracket[key] = val
        return val.copy()

    def divided_flux(self, fluxes: FluxSet, a, b) -> np.ndarray:
        """``[f_i]/[u]`` between states a and b with the merged branch f_i'(b)."""
        a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        diff = a - b
        merged = np.abs(diff) < self.merge_tol
        close = np.abs(diff) <= 1e-6 * (1.0 + np.abs(a) + np.abs(b))
        with np.errstate(all="ignore"):
            dd = (fluxes.flux(a) - fluxes.flux(b)) / diff[..., None]
        mid = fluxes.speed(0.5 * (a + b))
        dd = np.where(close[..., None], mid, dd)
        return np.where(merged[..., None], fluxes.speed(b), dd)

    def _bracket_chi(self, fluxes, t, um, up):
        n = fluxes.n
        if t == 0:
            return np.zeros(n)
        rm, rp = self.extinction_time(um), self.extinction_time(up)
        merge = math.inf
        if rm.target == rp.target and math.isfinite(rm.t_star) and math.isfinite(rp.t_star):
            merge = max(rm.t_star, rp.t_star)
        t_end = min(t, merge)
        breaks = [v for v in (rm.t_star, rp.t_star) if 0 < v < t_end]

        def integrand(tau):
            a = self.u_bar(tau, um)
            b = self.u_bar(tau, up)
            return self.divided_flux(fluxes, a, b).T

        val = np.zeros(n)
        if t_end > 0:
            val, _ = gauss_kronrod(integrand, 0.0, t_end, tol=self.quadrature_tol, breakpoints=np.array(breaks))
        if t > t_end:
            val = val + (t - t_end) * fluxes.speed(np.array(rp.target))
        return val


# module level aliases mirroring the operation names


def g_transform(flow: CharFlow, s: float, u: float) -> float:
    return flow.g_transform(s, u)


def u_bar(flow: CharFlow, t, s):
    return flow.u_bar(t, s)


def extinction_time(flow: CharFlow, s: float) -> AbsorptionRecord:
    return flow.extinction_time(s)


def u_bar_s(flow: CharFlow, t, s):
    return flow.u_bar_s(t, s)


def chi(flow: CharFlow, fluxes: FluxSet, t, s) -> np.ndarray:
    return flow.chi(fluxes, t, s)


def bracket_chi(flow: CharFlow, fluxes: FluxSet, t: float, u_minus: float, u_plus: float) -> np.ndarray:
    return flow.bracket_chi(fluxes, t, u_minus, u_plus)

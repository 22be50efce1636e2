"""Scenario files: YAML documents describing a Riemann problem and run options.

Example::

    dimension: 2
    flux: burgers2d
    source: neg_cbrt
    surface: cubic_plane
    u_minus: 1.0
    u_plus: -1.0
    grid:
      t: [0.0, 2.0, 21]
      x1: [-1.5, 1.5, 41]
      x2: [-1.5, 1.5, 41]

Errors carry the line number of the offending key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .charflow import CharFlow
from .core import FluxSet, InitialSurface, SourceTerm, flux_from_name, polynomial_surface, source_from_name, surface_from_name
from .errors import ScenarioError
from .riemann import RiemannProblem

_TOP_KEYS = {
    "name",
    "dimension",
    "flux",
    "source",
    "surface",
    "u_minus",
    "u_plus",
    "tolerances",
    "grid",
    "verify",
    "compare",
    "nonunique",
}


def _line_map(node, prefix=()) -> dict:
    """Map key paths to 1-based line numbers."""
    out = {prefix: node.start_mark.line + 1}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = prefix + (k.value,)
            out[key] = k.start_mark.line + 1
            for sub, line in _line_map(v, key).items():
                if sub != key:
                    out[sub] = line
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            out.update(_line_map(v, prefix + (i,)))
    return out


@dataclass
class GridSpec:
    t: np.ndarray
    space: tuple

    @property
    def n(self) -> int:
        return len(self.space)


@dataclass
class Scenario:
    """Parsed scenario with helpers to build the problem objects."""

    data: dict
    lines: dict = field(default_factory=dict)
    path: str = "<string>"

    # -- access -----------------------------------------------------------

    def line(self, *path) -> int | None:
        while path and path not in self.lines:
            path = path[:-1]
        return self.lines.get(path)

    def error(self, message: str, *path) -> ScenarioError:
        return ScenarioError(message, self.line(*path))

    def get(self, *path, default=None, required: bool = False):
        cur = self.data
        for p in path:
            if isinstance(cur, dict) and p in cur:
                cur = cur[p]
            elif isinstance(cur, list) and isinstance(p, int) and 0 <= p < len(cur):
                cur = cur[p]
            else:
                if required:
                    raise self.error(f"missing required key {'.'.join(map(str, path))!r}", *path[:-1])
                return default
        return cur

    def number(self, *path, default=None, required: bool = False, positive: bool = False) -> float | None:
        val = self.get(*path, default=default, required=required)
        if val is None:
            return None
        if isinstance(val, bool) or not isinstance(val, (int, float, str)):
            raise self.error(f"{'.'.join(map(str, path))} must be a number", *path)
        try:
            out = float(val)
        except ValueError:
            raise self.error(f"{'.'.join(map(str, path))} must be a number, got {val!r}", *path) from None
        if not math.isfinite(out):
            raise self.error(f"{'.'.join(map(str, path))} must be finite", *path)
        if positive and out <= 0:
            raise self.error(f"{'.'.join(map(str, path))} must be positive", *path)
        return out

    def integer(self, *path, default=None, minimum: int | None = None) -> int | None:
        val = self.get(*path, default=default)
        if val is None:
            return None
        if isinstance(val, bool) or not isinstance(val, int):
            raise self.error(f"{'.'.join(map(str, path))} must be an integer", *path)
        if minimum is not None and val < minimum:
            raise self.error(f"{'.'.join(map(str, path))} must be at least {minimum}", *path)
        return val

    # -- problem ----------------------------------------------------------

    @property
    def dimension(self) -> int:
        return self.integer("dimension", default=None, minimum=1) or self._required_dimension()

    def _required_dimension(self) -> int:
        raise self.error("missing required key 'dimension'")

    def fluxes(self) -> FluxSet:
        spec = self.get("flux", required=True)
        try:
            fl = flux_from_name(spec)
        except (ValueError, TypeError) as exc:
            raise self.error(f"bad flux: {exc}", "flux") from None
        if fl.n != self.dimension:
            raise self.error(f"flux has {fl.n} components but dimension is {self.dimension}", "flux")
        return fl

    def source(self) -> SourceTerm:
        spec = self.get("source", required=True)
        if not isinstance(spec, str):
            raise self.error("source must be a catalog name", "source")
        try:
            return source_from_name(spec)
        except ValueError as exc:
            raise self.error(str(exc), "source") from None

    def surface(self) -> InitialSurface:
        spec = self.get("surface", required=True)
        n = self.dimension
        try:
            if isinstance(spec, str):
                return surface_from_name(spec, n)
            if isinstance(spec, dict) and "polynomial" in spec:
                terms = [(float(c), [int(p) for p in pw]) for c, pw in spec["polynomial"]]
                return polynomial_surface(terms, n)
        except (ValueError, TypeError) as exc:
            raise self.error(f"bad surface: {exc}", "surface") from None
        raise self.error("surface must be a catalog name or a 'polynomial' term list", "surface")

    def flow(self, source: SourceTerm | None = None, tol: float | None = None) -> CharFlow:
        """Characteristic flow; ``tol`` overrides both scenario tolerances."""
        source = source or self.source()
        return CharFlow(
            source,
            quadrature_tol=tol or self.number("tolerances", "quadrature", default=1e-12, positive=True),
            root_tol=tol or self.number("tolerances", "root", default=1e-12, positive=True),
        )

    def problem(self) -> RiemannProblem:
        return RiemannProblem(
            self.fluxes(),
            self.source(),
            self.surface(),
            self.number("u_minus", required=True),
            self.number("u_plus", required=True),
        )

    def grid(self) -> GridSpec:
        g = self.get("grid", required=True)
        if not isinstance(g, dict):
            raise self.error("grid must be a mapping", "grid")
        axes = []
        names = ["t"] + [f"x{i + 1}" for i in range(self.dimension)]
        for name in names:
            spec = g.get(name)
            if spec is None:
                raise self.error(f"grid is missing axis {name!r}", "grid")
            if not (isinstance(spec, list) and len(spec) == 3):
                raise self.error(f"grid.{name} must be [start, stop, count]", "grid", name)
            lo, hi = self.number("grid", name, 0), self.number("grid", name, 1)
            cnt = spec[2]
            if isinstance(cnt, bool) or not isinstance(cnt, int) or cnt < 2:
                raise self.error(f"grid.{name} needs at least 2 points", "grid", name)
            if not hi > lo:
                raise self.error(f"grid.{name} must have start < stop", "grid", name)
            if name == "t" and lo < 0:
                raise self.error("grid.t must start at a non-negative time", "grid", name)
            axes.append(np.linspace(lo, hi, cnt))
        extra = set(g) - set(names)
        if extra:
            raise self.error(f"unknown grid axes {sorted(extra)}", "grid")
        return GridSpec(axes[0], tuple(axes[1:]))


def parse_scenario(text: str, path: str = "<string>") -> Scenario:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ScenarioError(f"invalid YAML: {getattr(exc, 'problem', exc)}", line) from None
    if node is None or not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping", 1)
    lines = _line_map(node)
    sc = Scenario(data, lines, path)
    unknown = set(data) - _TOP_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise sc.error(f"unknown key {key!r}", key)
    return sc


def load_scenario(path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {str(p)!r}: {exc.strerror}") from None
    return parse_scenario(text, str(p))

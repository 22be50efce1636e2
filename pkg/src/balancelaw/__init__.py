"""Non-selfsimilar Riemann solutions of scalar balance laws."""

from __future__ import annotations

from .charflow import AbsorptionRecord, CharFlow
from .core import FluxSet, InitialSurface, SourceTerm, ZeroSetDecomposition
from .riemann import RiemannProblem, WaveSolution, construct

__all__ = [
    "AbsorptionRecord",
    "CharFlow",
    "FluxSet",
    "InitialSurface",
    "RiemannProblem",
    "SourceTerm",
    "WaveSolution",
    "ZeroSetDecomposition",
    "construct",
]

__version__ = "0.1.0"

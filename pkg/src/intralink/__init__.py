"""Exact piecewise-linear analysis of ReLU networks with intra-layer links."""

from .bounds import (ArchShape, BoundReport, piece_upper_bound, region_upper_bound,
                     shape_of, zaslavsky_sum)
from .constructions import ConstructionResult, audit, construct
from .network import LayerSpec, NetworkSpec, forward_symbolic, parse, serialize, validate
from .pwl import Pwl, analyze, compose, equals, is_sawtooth, linear_combination, relu

__version__ = "0.1.0"

__all__ = [
    "ArchShape", "BoundReport", "ConstructionResult", "LayerSpec", "NetworkSpec", "Pwl",
    "analyze", "audit", "compose", "construct", "equals", "forward_symbolic", "is_sawtooth",
    "linear_combination", "parse", "piece_upper_bound", "region_upper_bound", "relu",
    "serialize", "shape_of", "validate", "zaslavsky_sum",
]

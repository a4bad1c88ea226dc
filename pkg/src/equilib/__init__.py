"""Equilibrium measures for V(z) = (|z|^{2n} - t z^d - conj(t z^d)) / T.

The support is described by an explicit exterior conformal map whose two
parameters come from ``params.solve``; ``field`` certifies the result and
``oracle`` cross-checks it with a discrete Coulomb gas.
"""

from .conformal import BoundaryCurve, ConformalMap, reduced_map, rotated_map, sample_boundary
from .errors import EquilibError
from .field import FieldContext, verify
from .params import MapParams, ProblemSpec, Regime, solve

__all__ = [
    "BoundaryCurve",
    "ConformalMap",
    "EquilibError",
    "FieldContext",
    "MapParams",
    "ProblemSpec",
    "Regime",
    "reduced_map",
    "rotated_map",
    "sample_boundary",
    "solve",
    "verify",
]
__version__ = "0.1.0"

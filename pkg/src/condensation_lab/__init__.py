"""Exact computations and certificates for a homogeneous three-map similarity family on the line.

The maps are x ↦ λx, x ↦ λx + t and x ↦ λx + 1 with 1/4 < λ < 1/3.  The
package enumerates orbit gaps, estimates dimension, certifies the planar
projection and transversality inequalities, and builds nested parameter
intervals whose points show super-exponentially small gaps without an
exact overlap, to a finite certified depth.
"""

from .errors import (
    BudgetExceeded,
    CertificationFailed,
    ConstructionFailed,
    InvalidParameter,
    LabError,
)
from .numerics import IntPoly, RatFunc, RatInterval
from .symbolic_ifs import ParamPair

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "CertificationFailed",
    "ConstructionFailed",
    "InvalidParameter",
    "IntPoly",
    "LabError",
    "ParamPair",
    "RatFunc",
    "RatInterval",
]

"""Rational cones, their fractions, decorated cones and conical zeta values."""
from .cones import Cone, Subdivision
from .decorated import DecoratedClosedCone, DecoratedSum
from .errors import (ConezetaError, DomainError, PoleError, PreconditionError, RankError,
                     SchemaError, ShapeError)
from .fractions import FracSum
from .relations import ConePair, Relation
from .zeta import DecoratedOpenCone, ZetaResult

__version__ = "0.1.0"

__all__ = [
    "Cone", "Subdivision", "DecoratedClosedCone", "DecoratedSum", "DecoratedOpenCone",
    "FracSum", "ConePair", "Relation", "ZetaResult", "ConezetaError", "DomainError",
    "PoleError", "PreconditionError", "RankError", "SchemaError", "ShapeError",
]

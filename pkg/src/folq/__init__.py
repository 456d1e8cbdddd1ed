"""Exact symbolic kernel for polynomial singular foliations.

Everything is computed over Q[x1..xn] with exact rational coefficients:
free resolutions by iterated syzygies, graded bracket structures on them,
and pointwise invariants (isotropy brackets, a Chevalley-Eilenberg 3-class,
regular-leaf rank).
"""

from .poly import BaseRing, Poly
from .errors import (
    RingMismatch,
    NotInModule,
    NotInvolutive,
    LengthExceeded,
    LiftFailure,
    RootNotZero,
    PivotFailure,
    DegreeMismatch,
    NotMinimalAt,
    NotRegularSequence,
    CocycleCheckFailed,
)

__all__ = [
    "BaseRing",
    "Poly",
    "RingMismatch",
    "NotInModule",
    "NotInvolutive",
    "LengthExceeded",
    "LiftFailure",
    "RootNotZero",
    "PivotFailure",
    "DegreeMismatch",
    "NotMinimalAt",
    "NotRegularSequence",
    "CocycleCheckFailed",
]

"""Shared exception and verdict types."""

from __future__ import annotations


class RingMismatch(TypeError):
    """Operands belong to different rings."""


class NotInModule:
    """Verdict: an element is not in the submodule; carries the nonzero
    normal form as witness.  Returned, never raised."""

    __slots__ = ("witness",)

    def __init__(self, witness):
        self.witness = witness

    def __repr__(self):
        return f"NotInModule(witness={self.witness!r})"


class NotInvolutive:
    """Verdict: a generator pair whose Lie bracket does not lift."""

    __slots__ = ("i", "j", "witness")

    def __init__(self, i, j, witness):
        self.i = i
        self.j = j
        self.witness = witness

    def __repr__(self):
        return f"NotInvolutive(i={self.i}, j={self.j})"


class LengthExceeded(RuntimeError):
    """Resolution builder hit max_length with nonzero syzygies left."""


class LiftFailure(RuntimeError):
    """A module lift that theory guarantees did not succeed; signals a
    non-exact input or an internal inconsistency."""


class RootNotZero(RuntimeError):
    """An obstruction field has a nonvanishing image under the anchor
    projection, so no lift exists."""

    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class PivotFailure(RuntimeError):
    """No usable unit entry while a differential is nonzero at the point."""


class DegreeMismatch(ValueError):
    """A bracket value violates the degree rule."""


class NotMinimalAt(ValueError):
    """A resolution is not minimal at the requested point."""

    def __init__(self, point, level):
        super().__init__(f"differential at level {level} does not vanish at {point}")
        self.point = point
        self.level = level


class NotRegularSequence(ValueError):
    """The partial derivatives of the given polynomial admit a syzygy
    that is not of the standard alternating shape."""

    def __init__(self, phi, witness):
        super().__init__("partial derivatives do not form a regular sequence")
        self.phi = phi
        self.witness = witness


class CocycleCheckFailed(RuntimeError):
    """The extracted 3-cochain is not closed; internal inconsistency."""


class ParseError(ValueError):
    """Input specification could not be parsed; carries line/column."""

    def __init__(self, line, col, msg):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col

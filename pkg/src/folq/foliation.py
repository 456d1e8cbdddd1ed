"""Singular foliations presented by polynomial vector fields.

A presentation is a finite list of vector fields over a BaseRing; closure
under the Lie bracket is certified exactly by lifting every pairwise bracket
through the generators.
"""

from __future__ import annotations

from .errors import NotInModule, NotInvolutive
from .groebner import DEFAULT_ORDER, Lifter
from .linalg import rank as q_rank
from .poly import BaseRing, Poly


class PolyVectorField:
    """Vector field sum_i coefficients[i] d/dx_i."""

    __slots__ = ("ring", "coefficients")

    def __init__(self, ring: BaseRing, coefficients):
        coeffs = tuple(coefficients)
        if len(coeffs) != ring.nvars:
            raise ValueError("coefficient count must equal the number of variables")
        self.ring = ring
        self.coefficients = coeffs

    def is_zero(self):
        return all(p.is_zero() for p in self.coefficients)

    def apply_to(self, f: Poly) -> Poly:
        out = self.ring.zero()
        for i, c in enumerate(self.coefficients):
            if not c.is_zero():
                out = out + c * f.diff(i)
        return out

    def bracket(self, other: "PolyVectorField") -> "PolyVectorField":
        ring = self.ring
        out = []
        for i in range(ring.nvars):
            acc = ring.zero()
            for j in range(ring.nvars):
                xj, yj = self.coefficients[j], other.coefficients[j]
                if not xj.is_zero():
                    acc = acc + xj * other.coefficients[i].diff(j)
                if not yj.is_zero():
                    acc = acc - yj * self.coefficients[i].diff(j)
            out.append(acc)
        return PolyVectorField(ring, out)

    def __eq__(self, other):
        return (
            isinstance(other, PolyVectorField)
            and self.ring == other.ring
            and self.coefficients == other.coefficients
        )

    def __str__(self):
        parts = [
            f"({c})*d/d{v}"
            for v, c in zip(self.ring.variables, self.coefficients)
            if not c.is_zero()
        ]
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"PolyVectorField({self})"


class StructureFunctions:
    """c[i, j] for i < j: coefficients of [X_i, X_j] over the generators,
    skew in (i, j) by the storage convention c[j, i] = -c[i, j]."""

    __slots__ = ("size", "table")

    def __init__(self, size, table):
        self.size = size
        self.table = dict(table)  # (i, j) i<j -> list[Poly]

    def get(self, i, j):
        if i == j:
            return None
        if i < j:
            return self.table.get((i, j))
        row = self.table.get((j, i))
        return [(-p) for p in row] if row is not None else None

    def pairs(self):
        return sorted(self.table)


class FoliationPresentation:
    __slots__ = ("ring", "generators", "structure")

    def __init__(self, ring: BaseRing, generators, structure=None):
        gens = list(generators)
        if not gens:
            raise ValueError("a presentation needs at least one generator")
        for g in gens:
            if g.ring != ring:
                raise ValueError("generator over a different ring")
        self.ring = ring
        self.generators = gens
        self.structure = structure

    @property
    def size(self):
        return len(self.generators)

    def columns(self):
        """Generators as module elements of the rank-n free module."""
        return [g.coefficients for g in self.generators]

    def anchor_matrix(self):
        """n x r matrix whose columns are the generator coefficients."""
        n = self.ring.nvars
        return [[g.coefficients[i] for g in self.generators] for i in range(n)]

    def combination(self, coeffs):
        n = self.ring.nvars
        out = [self.ring.zero() for _ in range(n)]
        for c, g in zip(coeffs, self.generators):
            if c.is_zero():
                continue
            for i in range(n):
                out[i] = out[i] + c * g.coefficients[i]
        return PolyVectorField(self.ring, out)


def fol_involutivity(fol: FoliationPresentation, order=DEFAULT_ORDER):
    """Certify closure under the Lie bracket.

    Returns StructureFunctions on success (first lift, then skew by the
    storage convention) or NotInvolutive(i, j, witness)."""
    lifter = Lifter(fol.columns(), order)
    table = {}
    for i in range(fol.size):
        for j in range(i + 1, fol.size):
            b = fol.generators[i].bracket(fol.generators[j])
            lift = lifter.lift(b.coefficients)
            if isinstance(lift, NotInModule):
                return NotInvolutive(i, j, lift.witness)
            table[(i, j)] = lift
    c = StructureFunctions(fol.size, table)
    fol.structure = c
    return c


def fol_jacobi_defect(fol: FoliationPresentation, c: StructureFunctions):
    """The relation symbols J[i,j,k] (i<j<k) with
    sum_l J[i,j,k][l] X_l = 0, from the cyclic sum of c-products minus
    derivative terms.  Each relation is re-verified exactly."""
    ring = fol.ring
    out = {}
    for i in range(fol.size):
        for j in range(i + 1, fol.size):
            for k in range(j + 1, fol.size):
                row = [ring.zero() for _ in range(fol.size)]
                for a, b, cc in ((i, j, k), (j, k, i), (k, i, j)):
                    cab = c.get(a, b)
                    for l in range(fol.size):
                        acc = ring.zero()
                        for m in range(fol.size):
                            cmk = c.get(m, cc)
                            if cmk is not None and not cab[m].is_zero():
                                acc = acc + cab[m] * cmk[l]
                        acc = acc - fol.generators[cc].apply_to(cab[l])
                        row[l] = row[l] + acc
                # exact check that the row annihilates the generators
                if not fol.combination(row).is_zero():
                    raise AssertionError("Jacobi defect is not a relation")
                out[(i, j, k)] = row
    return out


def fol_rank_at(fol: FoliationPresentation, point):
    """Dimension of the span of the generators evaluated at the point."""
    rows = [[p.eval(point) for p in g.coefficients] for g in fol.generators]
    return q_rank(rows)

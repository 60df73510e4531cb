"""Barycentric subdivision: split every wall into two half-weight walls.

In finite positive-weight models every wall is an atom, so the subdivision
splits them all.  Child halfspaces are named ``<parent>-`` and ``<parent>+``
with the order rule: child j < child j' iff the parents are strictly
ordered, or j, j' are the minus and plus copies of one parent.  The
involution swaps copies across the wall: ``(a-)* = (a*)+``.

Original points embed by taking both copies of each member halfspace; the
embedding is isometric.  New points are the cube midpoints; ``cube_at``
recovers the canonical cube around a new point.

A variant splitting only a sub-family of walls (needed when some walls
carry no mass) has no finite counterpart here and is out of scope; likewise
the continuum limit of the tower is represented only by its finite stages.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .config import Budgets, DEFAULT_BUDGETS
from .errors import NotANewPoint, NotAnAutomorphism, WallBudgetExceeded
from .pocset import Point, WeightedPocset, is_ultrafilter
from .structure import Automorphism

MINUS = "-"
PLUS = "+"


@dataclass
class Subdivision:
    parent: WeightedPocset
    child: WeightedPocset
    # child halfspace index -> parent halfspace index
    projection: tuple

    def project_id(self, child_h: str) -> str:
        return self.parent.ids[self.projection[self.child.idx(child_h)]]

    def child_id(self, parent_h: str, sign: str) -> str:
        return parent_h + sign

    def embed(self, p: Point) -> Point:
        mask = 0
        m = p.mask
        while m:
            low = m & -m
            i = low.bit_length() - 1
            m ^= low
            h = self.parent.ids[i]
            mask |= 1 << self.child.idx(h + MINUS)
            mask |= 1 << self.child.idx(h + PLUS)
        return Point(self.child, mask)

    def preimage(self, q: Point) -> Optional[Point]:
        """The original point embedding to q, or None when q is new."""
        mask = 0
        for i, _ in self.parent.walls:
            h = self.parent.ids[i]
            hs = self.parent.ids[self.parent.star[i]]
            if (h + MINUS) in q and (h + PLUS) in q:
                mask |= 1 << i
            elif (hs + MINUS) in q and (hs + PLUS) in q:
                mask |= 1 << self.parent.star[i]
            else:
                return None
        return Point(self.parent, mask)

    def is_new(self, q: Point) -> bool:
        return self.preimage(q) is None


def subdivide(P: WeightedPocset) -> Subdivision:
    walls = []
    order = []
    wall_ids = []
    for i in range(P.n):
        h = P.ids[i]
        hs = P.ids[P.star[i]]
        # child walls: {h-, (h*)+} and {h+, (h*)-}; emit each wall once
        if i < P.star[i]:
            walls.append((h + MINUS, hs + PLUS, P.weight[i] / 2))
            walls.append((h + PLUS, hs + MINUS, P.weight[i] / 2))
            wall_ids.append(h + MINUS)
            wall_ids.append(h + PLUS)
        order.append((h + MINUS, h + PLUS))
        for j in range(P.n):
            if i != j and P.leq_idx(i, j):
                for si in (MINUS, PLUS):
                    for sj in (MINUS, PLUS):
                        order.append((h + si, P.ids[j] + sj))
    child = WeightedPocset(walls, order, wall_ids=wall_ids)
    projection = tuple(P.idx(cid[:-1]) for cid in child.ids)
    return Subdivision(P, child, projection)


def lift(S: Subdivision, g: Automorphism) -> Automorphism:
    """Canonical sign-preserving extension; never has wall inversions."""
    P, C = S.parent, S.child
    if g.pocset is not P or not g.is_valid():
        raise NotAnAutomorphism("lift() requires an automorphism of the parent")
    perm = [0] * C.n
    for ci in range(C.n):
        cid = C.ids[ci]
        sign = cid[-1]
        image = P.ids[g.apply_idx(S.projection[ci])]
        perm[ci] = C.idx(image + sign)
    lifted = Automorphism(C, perm, name=f"{g.name}'")
    if not lifted.is_valid():
        raise NotAnAutomorphism("internal: lift produced a non-automorphism")
    return lifted


class CanonicalCube:
    """The cube around a new point: vertex maps into parent and child."""

    __slots__ = ("sub", "k", "wall_sides", "center")

    def __init__(self, sub: Subdivision, wall_sides: tuple, center: Point):
        self.sub = sub
        self.k = len(wall_sides)
        self.wall_sides = wall_sides  # one parent halfspace per zero wall
        self.center = center

    def vertex(self, signs: tuple) -> Point:
        """ι_x: a {−1,1}-vector to an original point."""
        p = self.sub.preimage(self.midpoint(signs))
        if p is None:
            raise NotANewPoint("vertex() needs all coordinates in {-1, 1}")
        return p

    def midpoint(self, signs: tuple) -> Point:
        """ι̂_x: a {−1,0,1}-vector to a point of the subdivision.

        Midpoint state on a wall is {h+, (h*)+}; +1 flips it to the deep
        side {h-, h+}, -1 to {(h*)-, (h*)+}.
        """
        S = self.sub
        C = S.child
        mask = self.center.mask
        for h, s in zip(self.wall_sides, signs):
            hs = S.parent.ids[S.parent.star[S.parent.idx(h)]]
            for cid in (h + MINUS, h + PLUS, hs + MINUS, hs + PLUS):
                mask &= ~(1 << C.idx(cid))
            if s == 0:
                keep = (h + PLUS, hs + PLUS)
            elif s == 1:
                keep = (h + MINUS, h + PLUS)
            else:
                keep = (hs + MINUS, hs + PLUS)
            for cid in keep:
                mask |= 1 << C.idx(cid)
        if not is_ultrafilter(C, mask):
            raise NotANewPoint("internal: cube coordinate produced a non-point")
        return Point(C, mask)


def cube_at(S: Subdivision, x: Point) -> CanonicalCube:
    """The canonical cube centred at a new point of the subdivision."""
    if x.pocset is not S.child or not S.is_new(x):
        raise NotANewPoint("cube_at() requires a point not in the image of the parent")
    sides = []
    for i, _ in S.parent.walls:
        h = S.parent.ids[i]
        hs = S.parent.ids[S.parent.star[i]]
        if (h + PLUS) in x and (hs + PLUS) in x:
            sides.append(h)
    return CanonicalCube(S, tuple(sides), x)


def atom_mass(P: WeightedPocset) -> Fraction:
    """a(X): the largest wall weight (every wall is an atom here)."""
    if not P.walls:
        return Fraction(0)
    return max(P.weight[i] for i, _ in P.walls)


def tower(P: WeightedPocset, n: int, budgets: Budgets = DEFAULT_BUDGETS) -> list[Subdivision]:
    """Iterated subdivisions X_0 ... X_n with composable embeddings."""
    if n < 0:
        raise WallBudgetExceeded("tower depth must be nonnegative")
    if P.wall_count * (2 ** n) > max(budgets.point_walls * 64, 4096):
        raise WallBudgetExceeded(
            f"{P.wall_count} walls at depth {n} exceed the tower budget")
    stages = []
    current = P
    for _ in range(n):
        S = subdivide(current)
        stages.append(S)
        current = S.child
    return stages


def embed_through(stages: list[Subdivision], p: Point) -> Point:
    for S in stages:
        p = S.embed(p)
    return p

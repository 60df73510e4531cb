"""Rank, transversality, product decomposition and automorphisms.

The rank of a pocset is the maximal size of a pairwise-transverse family of
walls (a clique in the wall transversality graph).  A pocset splits as a
product exactly along the connected components of the complementary
(non-transversality) graph; factors are materialized as standalone pocsets
so downstream code never needs the parent.

For finite models every isometry of the point space is induced by a
halfspace permutation (halfspaces and points determine each other), so
enumerating pocset automorphisms enumerates all isometries; this is relied
on implicitly, not enforced.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .config import Budgets, DEFAULT_BUDGETS
from .errors import InvalidInput, NotAnAutomorphism, WallBudgetExceeded
from .pocset import Point, WeightedPocset, points


def transverse(P: WeightedPocset, h: str, k: str) -> bool:
    """True when all four sectors of the two walls are nonempty.

    Order-theoretically: every element of {h, h*} is incomparable with every
    element of {k, k*}.  Validation asserts this matches sector
    nonemptiness whenever points are enumerable.
    """
    i, j = P.idx(h), P.idx(k)
    if i == j or P.star[i] == j:
        return False
    return P.incomparable_idx(i, j) and P.incomparable_idx(i, P.star[j])


def _wall_reps(P: WeightedPocset) -> list[int]:
    return [i for i, _ in P.walls]


def _transversality_adjacency(P: WeightedPocset) -> list[int]:
    reps = _wall_reps(P)
    n = len(reps)
    adj = [0] * n
    for a in range(n):
        for b in range(a + 1, n):
            i, k = reps[a], reps[b]
            if P.incomparable_idx(i, k) and P.incomparable_idx(i, P.star[k]):
                adj[a] |= 1 << b
                adj[b] |= 1 << a
    return adj


def rank(P: WeightedPocset, budgets: Budgets = DEFAULT_BUDGETS) -> int:
    """Maximum clique size in the wall transversality graph; 0 iff a point."""
    if P._rank is not None:
        return P._rank
    adj = _transversality_adjacency(P)
    active = [a for a in range(len(adj)) if adj[a]]
    if not active:
        P._rank = 1 if P.walls else 0
        return P._rank
    if len(active) > budgets.clique_walls:
        raise WallBudgetExceeded(
            f"{len(active)} mutually transverse-capable walls exceed clique cap")
    order = sorted(active, key=lambda a: -bin(adj[a]).count("1"))
    best = 1

    def bb(cand: int, size: int):
        nonlocal best
        if size + bin(cand).count("1") <= best:
            return
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            if size + 1 + bin(cand & adj[v]).count("1") <= best:
                continue
            best = max(best, size + 1)
            bb(cand & adj[v], size + 1)

    start = 0
    for a in order:
        start |= 1 << a
    bb(start, 0)
    P._rank = best
    return best


def max_clique_lex(P: WeightedPocset, budgets: Budgets = DEFAULT_BUDGETS) -> tuple[str, ...]:
    """The lexicographically least maximum transverse family (by wall id)."""
    r = rank(P, budgets)
    adj = _transversality_adjacency(P)
    reps = _wall_reps(P)
    order = sorted(range(len(reps)), key=lambda a: P.wall_ids[a])

    def can_extend(chosen: list[int], cand: set[int], need: int) -> bool:
        if need == 0:
            return True
        for v in sorted(cand):
            nc = {u for u in cand if adj[v] >> u & 1 and u != v}
            if len(nc) >= need - 1 and can_extend(chosen + [v], nc, need - 1):
                return True
        return False

    chosen: list[int] = []
    cand = set(order)
    while len(chosen) < r:
        for v in sorted(cand, key=lambda a: P.wall_ids[a]):
            nc = {u for u in cand if adj[v] >> u & 1}
            if can_extend(chosen + [v], nc, r - len(chosen) - 1):
                chosen.append(v)
                cand = nc
                break
        else:
            raise InvalidInput("internal: clique reconstruction failed")
    return tuple(sorted(P.wall_ids[a] for a in chosen))


@dataclass
class Decomposition:
    """Irreducible factors plus the assignment of parent halfspaces."""

    factors: tuple[WeightedPocset, ...]
    assignment: dict  # parent halfspace id -> (factor index, factor halfspace id)

    def factor_of(self, h: str) -> int:
        return self.assignment[h][0]

    def to_json(self):
        return {
            "factors": [
                {"halfspaces": sorted(f.ids)} for f in self.factors
            ],
            "assignment": {h: [fi, fh] for h, (fi, fh) in sorted(self.assignment.items())},
        }


def decompose(P: WeightedPocset) -> Decomposition:
    """Split along connected components of the non-transversality graph."""
    if not P.walls:
        raise InvalidInput("decompose() needs at least one wall")
    reps = _wall_reps(P)
    nw = len(reps)
    adj_t = _transversality_adjacency(P)
    comp = [-1] * nw
    n_comp = 0
    for a in range(nw):
        if comp[a] != -1:
            continue
        stack = [a]
        comp[a] = n_comp
        while stack:
            u = stack.pop()
            for v in range(nw):
                if comp[v] == -1 and u != v and not (adj_t[u] >> v & 1):
                    comp[v] = n_comp
                    stack.append(v)
        n_comp += 1
    # deterministic factor order: by least wall id in the component
    keyed = sorted(range(n_comp), key=lambda c: min(
        P.wall_ids[a] for a in range(nw) if comp[a] == c))
    renumber = {c: i for i, c in enumerate(keyed)}
    factors = []
    assignment = {}
    for fi in range(n_comp):
        c = keyed[fi]
        wall_rows = [a for a in range(nw) if comp[a] == c]
        ids_in = set()
        for a in wall_rows:
            i, j = P.walls[a]
            ids_in.update((P.ids[i], P.ids[j]))
        walls = [
            (P.ids[P.walls[a][0]], P.ids[P.walls[a][1]], P.weight[P.walls[a][0]])
            for a in wall_rows
        ]
        order = [
            (a, b)
            for a in ids_in
            for b in ids_in
            if a != b and P.leq(a, b)
        ]
        wall_id_list = [P.wall_ids[a] for a in wall_rows]
        F = WeightedPocset(walls, order, wall_ids=wall_id_list)
        for h in ids_in:
            assignment[h] = (fi, h)
        factors.append(F)
    return Decomposition(tuple(factors), assignment)


def pocset_product(parts: Sequence[WeightedPocset],
                   prefixes: Optional[Sequence[str]] = None) -> WeightedPocset:
    """Disjoint union of halfspaces with all cross-pairs transverse."""
    if prefixes is None:
        prefixes = [f"f{i}." for i in range(len(parts))]
    walls = []
    order = []
    wall_ids = []
    for pref, Q in zip(prefixes, parts):
        for i, j in Q.walls:
            walls.append((pref + Q.ids[i], pref + Q.ids[j], Q.weight[i]))
        for wi, _ in zip(Q.wall_ids, Q.walls):
            wall_ids.append(pref + wi)
        for a in range(Q.n):
            for b in _iter_up(Q, a):
                if a != b:
                    order.append((pref + Q.ids[a], pref + Q.ids[b]))
    return WeightedPocset(walls, order, wall_ids=wall_ids)


def _iter_up(Q: WeightedPocset, a: int):
    m = Q.up[a]
    while m:
        low = m & -m
        yield low.bit_length() - 1
        m ^= low


class Automorphism:
    """A permutation of halfspaces commuting with star and preserving the
    order and the weights."""

    __slots__ = ("pocset", "perm", "name")

    def __init__(self, pocset: WeightedPocset, perm: Sequence[int], name: str = ""):
        self.pocset = pocset
        self.perm = tuple(perm)
        self.name = name

    @classmethod
    def from_mapping(cls, P: WeightedPocset, mapping: dict, name: str = "",
                     check: bool = True) -> "Automorphism":
        perm = [None] * P.n
        for a, b in mapping.items():
            perm[P.idx(a)] = P.idx(b)
        for i in range(P.n):
            if perm[i] is None:
                # fill star-images when only one side of each wall was given
                si = P.star[i]
                if perm[si] is not None:
                    perm[i] = P.star[perm[si]]
        if any(v is None for v in perm):
            raise NotAnAutomorphism("mapping does not cover all halfspaces")
        g = cls(P, perm, name)
        if check and not g.is_valid():
            raise NotAnAutomorphism(f"{name or mapping} fails structure preservation")
        return g

    @classmethod
    def identity(cls, P: WeightedPocset) -> "Automorphism":
        return cls(P, range(P.n), "id")

    def is_valid(self) -> bool:
        P = self.pocset
        perm = self.perm
        if sorted(perm) != list(range(P.n)):
            return False
        for i in range(P.n):
            if perm[P.star[i]] != P.star[perm[i]]:
                return False
            if P.weight[i] != P.weight[perm[i]]:
                return False
        for i in range(P.n):
            im = 0
            m = P.up[i]
            while m:
                low = m & -m
                im |= 1 << perm[low.bit_length() - 1]
                m ^= low
            if im != P.up[perm[i]]:
                return False
        return True

    def apply_idx(self, i: int) -> int:
        return self.perm[i]

    def apply(self, h: str) -> str:
        return self.pocset.ids[self.perm[self.pocset.idx(h)]]

    def apply_point(self, p: Point) -> Point:
        mask = 0
        m = p.mask
        while m:
            low = m & -m
            mask |= 1 << self.perm[low.bit_length() - 1]
            m ^= low
        return Point(self.pocset, mask)

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self ∘ other: apply ``other`` first."""
        return Automorphism(
            self.pocset,
            tuple(self.perm[other.perm[i]] for i in range(len(self.perm))),
            name=f"{self.name}*{other.name}",
        )

    def inverse(self) -> "Automorphism":
        inv = [0] * len(self.perm)
        for i, v in enumerate(self.perm):
            inv[v] = i
        return Automorphism(self.pocset, inv, name=f"{self.name}^-1")

    def is_identity(self) -> bool:
        return all(v == i for i, v in enumerate(self.perm))

    def as_dict(self) -> dict:
        return {self.pocset.ids[i]: self.pocset.ids[v] for i, v in enumerate(self.perm)}

    def __eq__(self, other):
        return (
            isinstance(other, Automorphism)
            and other.pocset is self.pocset
            and other.perm == self.perm
        )

    def __hash__(self):
        return hash((id(self.pocset), self.perm))

    def __repr__(self):
        return f"Automorphism({self.name or self.perm})"


def automorphisms(P: WeightedPocset, budgets: Budgets = DEFAULT_BUDGETS) -> tuple[Automorphism, ...]:
    """All structure-preserving halfspace permutations, in lexicographic
    order of their permutation tuples.  Forms a group."""
    if P.wall_count > budgets.aut_walls:
        raise WallBudgetExceeded(
            f"{P.wall_count} walls exceed automorphism cap {budgets.aut_walls}")
    reps = _wall_reps(P)
    nw = len(reps)
    found: list[Automorphism] = []
    perm = [None] * P.n

    def extend_ok(i: int, gi: int) -> bool:
        for j in range(P.n):
            gj = perm[j]
            if gj is None:
                continue
            if P.leq_idx(i, j) != P.leq_idx(gi, gj):
                return False
            if P.leq_idx(j, i) != P.leq_idx(gj, gi):
                return False
        return True

    def assign(i: int, gi: int) -> list[int]:
        si, sgi = P.star[i], P.star[gi]
        perm[i] = gi
        perm[si] = sgi
        return [i, si]

    def rec(w: int, used_walls: int):
        if w == nw:
            found.append(Automorphism(P, list(perm)))
            return
        i = reps[w]
        for wb in range(nw):
            if used_walls >> wb & 1:
                continue
            k = reps[wb]
            if P.weight[i] != P.weight[k]:
                continue
            for gi in (k, P.star[k]):
                if not extend_ok(i, gi) or not extend_ok(P.star[i], P.star[gi]):
                    continue
                touched = assign(i, gi)
                rec(w + 1, used_walls | 1 << wb)
                for t in touched:
                    perm[t] = None

    rec(0, 0)
    out = sorted(found, key=lambda g: g.perm)
    for pos, g in enumerate(out):
        g.name = "id" if g.is_identity() else f"g{pos}"
    return tuple(out)


def factor_permutation(P: WeightedPocset, D: Decomposition, g: Automorphism) -> tuple[int, ...]:
    """The permutation of factor indices induced by an automorphism."""
    if not g.is_valid():
        raise NotAnAutomorphism("factor_permutation() given an invalid map")
    out = []
    for fi, F in enumerate(D.factors):
        images = {D.assignment[g.apply(h)][0] for h in F.ids}
        if len(images) != 1:
            raise NotAnAutomorphism(
                f"image of factor {fi} meets several factors: {sorted(images)}")
        out.append(images.pop())
    perm = tuple(out)
    if sorted(perm) != list(range(len(D.factors))):
        raise NotAnAutomorphism("induced factor map is not a permutation")
    return perm


def product_points_bijection(P1: WeightedPocset, P2: WeightedPocset,
                             budgets: Budgets = DEFAULT_BUDGETS):
    """Pairs each point of the product with its pair of factor points;
    used by tests to confirm that distances add."""
    prod = pocset_product([P1, P2], prefixes=["x.", "y."])
    pairs = []
    for p in points(prod, budgets):
        m1 = 0
        m2 = 0
        for i in _iter_bits_local(p.mask):
            h = prod.ids[i]
            if h.startswith("x."):
                m1 |= 1 << P1.idx(h[2:])
            else:
                m2 |= 1 << P2.idx(h[2:])
        pairs.append((p, Point(P1, m1), Point(P2, m2)))
    return prod, pairs


def _iter_bits_local(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low

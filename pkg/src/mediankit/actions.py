"""Group actions as words in total or window-restricted automorphisms.

Total actions act on a whole finite pocset.  Window actions act on a finite
fragment of a conceptually infinite pocset through partial, injective,
structure-preserving halfspace maps; evaluation outside the visible domain
is detected and never silent.  A window can certify positives (a verified
flip, skewer or free-group certificate) but can never certify absence, so
definitive negatives are only reported for total actions.

Search results are re-verified by direct set computation before being
reported; the search bookkeeping is never trusted.  Words are enumerated
shortest-first, ties broken lexicographically, so every search is
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .config import Budgets, DEFAULT_BUDGETS
from .errors import (
    DisplacementTooSmall,
    InclusionFailed,
    InvalidInput,
    NotAnAutomorphism,
    NotFacing,
    NotTransverse,
    OutOfWindow,
    WallBudgetExceeded,
)
from .pocset import (
    Point,
    WeightedPocset,
    distance,
    halfspace_point_masks,
    median,
    points,
)
from .structure import Automorphism, decompose, rank, transverse as _transverse

Word = tuple  # tuple[tuple[str, int], ...]


def parse_word(text: str, names: Sequence[str]) -> Word:
    """Parse ``"a a b^-1"`` or comma-separated tokens; when every generator
    name is a single character, a compact run like ``"aab"`` also parses."""
    text = text.strip()
    if not text:
        return ()
    tokens = [t for chunk in text.split(",") for t in chunk.split()] or [text]
    if len(tokens) == 1 and tokens[0] not in names and "^" not in tokens[0] \
            and all(len(n) == 1 for n in names):
        tokens = list(tokens[0])
    out = []
    for tok in tokens:
        name, _, exp = tok.partition("^")
        e = 1
        if exp:
            try:
                e = int(exp)
            except ValueError:
                raise InvalidInput(f"bad exponent in word token {tok!r}")
        if name not in names:
            raise InvalidInput(f"unknown generator {name!r} in word")
        sign = 1 if e > 0 else -1
        out.extend([(name, sign)] * abs(e))
    return tuple(out)


def word_str(word: Word) -> str:
    if not word:
        return "1"
    return " ".join(n if e == 1 else f"{n}^-1" for n, e in word)


def reduce_word(word: Word) -> Word:
    out: list = []
    for tok in word:
        if out and out[-1][0] == tok[0] and out[-1][1] == -tok[1]:
            out.pop()
        else:
            out.append(tok)
    return tuple(out)


def enumerate_words(names: Sequence[str], max_len: int,
                    include_identity: bool = False):
    """Reduced words over the generators and their inverses, by length then
    lexicographic order."""
    alphabet = []
    for n in names:
        alphabet.append((n, 1))
        alphabet.append((n, -1))
    if include_identity:
        yield ()
    frontier = [()]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for tok in alphabet:
                if w and w[-1][0] == tok[0] and w[-1][1] == -tok[1]:
                    continue
                nw = w + (tok,)
                nxt.append(nw)
                yield nw
        frontier = nxt


class PartialAutomorphism:
    """An injective, structure-preserving map between fragments of a window
    pocset, given on halfspaces.  Point images are derived by forced
    up-closure completion and carry window resolution only: a point pinned
    at the window boundary may map to itself even though the underlying
    infinite translation moves it."""

    __slots__ = ("pocset", "name", "hmap")

    def __init__(self, pocset: WeightedPocset, name: str, hmap: dict):
        self.pocset = pocset
        self.name = name
        self.hmap = dict(hmap)  # halfspace index -> halfspace index
        self._check_structure()

    @classmethod
    def from_ids(cls, P: WeightedPocset, name: str, mapping: dict) -> "PartialAutomorphism":
        hmap = {}
        for a, b in mapping.items():
            hmap[P.idx(a)] = P.idx(b)
        # close under star
        for a, b in list(hmap.items()):
            sa, sb = P.star[a], P.star[b]
            if a != sa:
                prev = hmap.get(sa)
                if prev is not None and prev != sb:
                    raise NotAnAutomorphism(f"{name}: star images conflict")
                hmap[sa] = sb
        return cls(P, name, hmap)

    def _check_structure(self):
        P = self.pocset
        m = self.hmap
        if len(set(m.values())) != len(m):
            raise NotAnAutomorphism(f"{self.name}: not injective")
        for a, b in m.items():
            sa = P.star[a]
            if sa in m and m[sa] != P.star[b]:
                raise NotAnAutomorphism(f"{self.name}: does not commute with star")
            if P.weight[a] != P.weight[b]:
                raise NotAnAutomorphism(f"{self.name}: does not preserve weights")
        for a in m:
            for c in m:
                if P.leq_idx(a, c) != P.leq_idx(m[a], m[c]):
                    raise NotAnAutomorphism(f"{self.name}: does not preserve order")

    def apply_idx(self, i: int) -> Optional[int]:
        return self.hmap.get(i)

    def inverse(self) -> "PartialAutomorphism":
        return PartialAutomorphism(
            self.pocset, f"{self.name}^-1", {b: a for a, b in self.hmap.items()})

    def compose(self, other: "PartialAutomorphism") -> "PartialAutomorphism":
        """self ∘ other, with explicit domain shrinkage."""
        hmap = {}
        for a, b in other.hmap.items():
            c = self.hmap.get(b)
            if c is not None:
                hmap[a] = c
        return PartialAutomorphism(self.pocset, f"{self.name}*{other.name}", hmap)


class _IdentityMap:
    """Total identity, usable in either kind of action."""

    def __init__(self, P: WeightedPocset):
        self.pocset = P
        self.name = "1"

    def apply_idx(self, i: int) -> int:
        return i


class TotalAction:
    """A finite pocset together with named total automorphisms."""

    kind = "total"

    def __init__(self, pocset: WeightedPocset, gens: dict,
                 budgets: Budgets = DEFAULT_BUDGETS):
        self.pocset = pocset
        self.gens = dict(gens)  # name -> Automorphism
        self.budgets = budgets

    def gen_names(self) -> tuple:
        return tuple(self.gens)

    def evaluate(self, word: Word) -> Automorphism:
        """The word reads as a product left-to-right: (a, b) is the element
        ab, whose rightmost factor acts first."""
        g = Automorphism.identity(self.pocset)
        for name, sign in word:
            step = self.gens[name]
            if sign < 0:
                step = step.inverse()
            g = g.compose(step)
        return g

    def apply_halfspace(self, word: Word, h: str) -> str:
        return self.pocset.ids[self.evaluate(word).apply_idx(self.pocset.idx(h))]

    def apply_point(self, word: Word, p: Point) -> Point:
        return self.evaluate(word).apply_point(p)

    def points(self):
        return points(self.pocset, self.budgets)

    def group(self) -> list:
        """BFS closure of the generators; raises when the budget is hit."""
        ident = Automorphism.identity(self.pocset)
        seen = {ident.perm: ident}
        frontier = [ident]
        gens = [g for g in self.gens.values()] + [g.inverse() for g in self.gens.values()]
        while frontier:
            nxt = []
            for g in frontier:
                for s in gens:
                    h = s.compose(g)
                    if h.perm not in seen:
                        if len(seen) >= self.budgets.group_order:
                            raise WallBudgetExceeded("generated group exceeds budget")
                        seen[h.perm] = h
                        nxt.append(h)
            frontier = nxt
        return [seen[p] for p in sorted(seen)]


class WindowAction:
    """A window pocset with named partial automorphisms."""

    kind = "window"

    def __init__(self, pocset: WeightedPocset, gens: dict,
                 budgets: Budgets = DEFAULT_BUDGETS):
        self.pocset = pocset
        self.gens = dict(gens)  # name -> PartialAutomorphism
        self.budgets = budgets

    def gen_names(self) -> tuple:
        return tuple(self.gens)

    def evaluate(self, word: Word) -> Union[PartialAutomorphism, _IdentityMap]:
        """Product reading as in TotalAction.evaluate."""
        if not word:
            return _IdentityMap(self.pocset)
        g = None
        for name, sign in word:
            step = self.gens[name]
            if sign < 0:
                step = step.inverse()
            g = step if g is None else g.compose(step)
        return g

    def apply_halfspace(self, word: Word, h: str) -> Optional[str]:
        img = self.evaluate(word).apply_idx(self.pocset.idx(h))
        return None if img is None else self.pocset.ids[img]

    def apply_point(self, word: Word, p: Point) -> Optional[Point]:
        return partial_point_image(self.pocset, self.evaluate(word), p)

    def points(self):
        return points(self.pocset, self.budgets)


Action = Union[TotalAction, WindowAction]


def partial_point_image(P: WeightedPocset, pmap, p: Point) -> Optional[Point]:
    """Image of a point under a partial map: map the visible halfspaces,
    close upward, and accept only a complete consistent orientation."""
    if isinstance(pmap, _IdentityMap):
        return p
    closed = 0
    m = p.mask
    while m:
        low = m & -m
        i = low.bit_length() - 1
        m ^= low
        j = pmap.apply_idx(i)
        if j is not None:
            closed |= P.up[j]
    for i, j in P.walls:
        a, b = closed >> i & 1, closed >> j & 1
        if a and b:
            return None  # inconsistent image
        if not a and not b:
            return None  # wall left undecided: out of window
    return Point(P, closed)


# -- wall inversions -------------------------------------------------------

def wall_inversions(action: Action, word: Word) -> tuple:
    """Walls 𝔴 with g𝔴 flipped onto itself: g𝔥 = 𝔥*.

    For window actions only walls with visible images are decided; the
    count of undecided walls is returned alongside.
    """
    P = action.pocset
    g = action.evaluate(word)
    inverted = []
    undecided = 0
    for pos, (i, j) in enumerate(P.walls):
        img = g.apply_idx(i)
        if img is None:
            undecided += 1
        elif img == P.star[i]:
            inverted.append(P.wall_ids[pos])
    return tuple(inverted), undecided


# -- orbits ----------------------------------------------------------------

@dataclass
class OrbitResult:
    orbit: tuple
    size: int

    def to_json(self):
        return {"size": self.size, "orbit": [sorted(p.ids) for p in self.orbit]}


def min_orbit(action: TotalAction) -> OrbitResult:
    """A minimum-size orbit of points under the generated group."""
    if action.kind != "total":
        raise InvalidInput("min_orbit() requires a total action")
    pts = action.points()
    pos = {p.mask: i for i, p in enumerate(pts)}
    parent = list(range(len(pts)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in action.gens.values():
        for i, p in enumerate(pts):
            q = g.apply_point(p)
            a, b = find(i), find(pos[q.mask])
            if a != b:
                parent[a] = b
    comps = {}
    for i in range(len(pts)):
        comps.setdefault(find(i), []).append(i)
    best = min(comps.values(), key=lambda c: (len(c), pts[c[0]].mask))
    return OrbitResult(tuple(pts[i] for i in best), len(best))


# -- nested halfspace search (unbounded displacement) ----------------------

@dataclass
class NestedResult:
    word: Word
    halfspace: str

    def to_json(self):
        return {"word": word_str(self.word), "halfspace": self.halfspace}


def find_nested(action: Action, x: Point, g_word: Word) -> NestedResult:
    """Extract (g', 𝔥) with g'𝔥 ⊊ 𝔥 from a long displacement.

    Follows the geodesic construction: project the orbit points of the
    letters of ``g_word`` onto intervals toward gx, pull the separating
    halfspace sets back along prefixes, pigeonhole a halfspace into
    rank+1 of them, and find a nested pair among its translates.
    """
    P = action.pocset
    r = rank(P, action.budgets)
    letters_used = sorted({tok for tok in g_word})
    total_gen = Fraction(0)
    for tok in letters_used:
        lx = action.apply_point((tok,), x)
        if lx is None:
            raise OutOfWindow(f"generator {tok[0]} undefined at the basepoint")
        total_gen += distance(P, x, lx)
    gx = action.apply_point(g_word, x)
    if gx is None:
        raise OutOfWindow("word leaves the window at the basepoint")
    if distance(P, x, gx) <= r * total_gen:
        raise DisplacementTooSmall(
            f"d(x, gx) = {distance(P, x, gx)} <= rank * sum of generator "
            f"displacements = {r * total_gen}")

    prefixes = [g_word[:j] for j in range(len(g_word) + 1)]
    xs = []
    for w in prefixes:
        p = action.apply_point(w, x)
        if p is None:
            raise OutOfWindow(f"prefix {word_str(w)} undefined at the basepoint")
        xs.append(p)
    ys = [x]
    for j in range(len(g_word)):
        ys.append(median(P, ys[-1], gx, xs[j + 1]))

    # U_j = g_j^{-1} H(y_j | y_{j+1})
    universe: dict = {}
    for j in range(len(g_word)):
        sep = ys[j + 1].mask & ~ys[j].mask
        inv = action.evaluate(prefixes[j])
        m = sep
        while m:
            low = m & -m
            i = low.bit_length() - 1
            m ^= low
            pre = _preimage_idx(inv, i)
            if pre is None:
                raise OutOfWindow("separating halfspace not visible through prefix")
            universe.setdefault(pre, []).append(j)
    candidates = sorted(
        (i for i, js in universe.items() if len(js) >= r + 1),
        key=lambda i: P.ids[i])
    if not candidates:
        raise InvalidInput("internal: pigeonhole failed despite displacement bound")
    for i in candidates:
        js = universe[i]
        translates = []
        for j in js:
            img = action.evaluate(prefixes[j]).apply_idx(i)
            if img is None:
                continue
            translates.append((j, img))
        for a in range(len(translates)):
            for b in range(len(translates)):
                if a == b:
                    continue
                ja, ia = translates[a]
                jb, ib = translates[b]
                if ia != ib and P.leq_idx(ia, ib):
                    # image under prefix ja sits inside the image under
                    # prefix jb, so g := (g_jb)^{-1} g_ja nests 𝔥 into itself
                    word = _segment_word(g_word, ja, jb)
                    g = action.evaluate(word)
                    img = g.apply_idx(i)
                    if img is not None and img != i and P.leq_idx(img, i):
                        return NestedResult(word, P.ids[i])
    raise InvalidInput("internal: nested pair extraction failed")


def _preimage_idx(g, i: int) -> Optional[int]:
    if isinstance(g, Automorphism):
        for a, b in enumerate(g.perm):
            if b == i:
                return a
        return None
    if isinstance(g, _IdentityMap):
        return i
    for a, b in g.hmap.items():
        if b == i:
            return a
    return None


def _segment_word(g_word: Word, ja: int, jb: int) -> Word:
    """(g_jb)^{-1} g_ja as a reduced word, for prefixes of g_word."""
    if ja >= jb:
        seg = g_word[jb:ja]
        return tuple(seg)
    seg = g_word[ja:jb]
    return tuple((n, -s) for n, s in reversed(seg))


# -- flipping ---------------------------------------------------------------

@dataclass
class FlipResult:
    kind: str  # FLIPPED | INVARIANT_SET | INCONCLUSIVE
    word: Optional[Word] = None
    invariant_set: Optional[tuple] = None
    depth: Optional[int] = None
    skipped: int = 0

    def to_json(self):
        out = {"kind": self.kind, "skippedWords": self.skipped}
        if self.word is not None:
            out["word"] = word_str(self.word)
        if self.invariant_set is not None:
            out["invariantSet"] = [sorted(p.ids) for p in self.invariant_set]
        if self.depth is not None:
            out["depth"] = self.depth
        return out


def _halfspace_disjoint(P: WeightedPocset, i: int, j: int) -> bool:
    """Point sets of two halfspaces are disjoint iff i ⊆ j*."""
    return P.leq_idx(i, P.star[j])


def find_flip(action: Action, h: str, max_len: Optional[int] = None) -> FlipResult:
    """Search for g with g𝔥* disjoint from 𝔥* and g𝔥* ≠ 𝔥.

    Total actions exhaust the generated group, so a negative is definitive
    and comes with the invariant convex set ⋂ g𝔥*.  Window actions search
    words up to ``max_len`` and otherwise return INCONCLUSIVE.

    In continuous models the flippability dichotomy needs a thickness
    hypothesis (real trees carry singleton halfspaces that nothing flips);
    finite positive-weight models have no thin halfspaces, so no such
    counterexample is representable here.
    """
    P = action.pocset
    hs = P.star[P.idx(h)]
    if action.kind == "total":
        group = action.group()
        # words shortest-first until the whole group has been visited
        seen = set()
        for word in enumerate_words(action.gen_names(), 2 * len(group) + 1,
                                    include_identity=True):
            g = action.evaluate(word)
            if g.perm in seen:
                continue
            seen.add(g.perm)
            img = g.apply_idx(hs)
            if _halfspace_disjoint(P, img, hs) and img != P.idx(h):
                masks = halfspace_point_masks(P, action.budgets)
                assert masks[img] & masks[hs] == 0
                return FlipResult("FLIPPED", word=word)
            if len(seen) == len(group):
                break
        pts = action.points()
        masks = halfspace_point_masks(P, action.budgets)
        inter = (1 << len(pts)) - 1
        for g in group:
            inter &= masks[g.apply_idx(hs)]
        members = tuple(pts[i] for i in _bits(inter))
        return FlipResult("INVARIANT_SET", invariant_set=members)
    depth = max_len if max_len is not None else action.budgets.word_length
    skipped = 0
    for word in enumerate_words(action.gen_names(), depth):
        img = action.evaluate(word).apply_idx(hs)
        if img is None:
            skipped += 1
            continue
        if _halfspace_disjoint(P, img, hs) and img != P.idx(h):
            masks = halfspace_point_masks(P, action.budgets)
            assert masks[img] & masks[hs] == 0
            return FlipResult("FLIPPED", word=word, skipped=skipped)
    return FlipResult("INCONCLUSIVE", depth=depth, skipped=skipped)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# -- double skewering --------------------------------------------------------

@dataclass
class SkewerResult:
    kind: str  # SKEWERED | INCONCLUSIVE
    word: Optional[Word] = None
    h: str = ""
    k: str = ""
    image: Optional[str] = None
    depth: Optional[int] = None
    gap: Optional[Fraction] = None

    def to_json(self):
        out = {"kind": self.kind, "h": self.h, "k": self.k}
        if self.word is not None:
            out["word"] = word_str(self.word)
            out["image"] = self.image
            out["gap"] = str(self.gap)
        if self.depth is not None:
            out["depth"] = self.depth
        return out


def double_skewer(action: Action, h: str, k: str,
                  max_len: Optional[int] = None) -> SkewerResult:
    """Find g with g𝔨 ⊊ 𝔥 ⊆ 𝔨 and d(g𝔨, 𝔥*) > 0; shortest word first."""
    P = action.pocset
    if not P.leq(h, k):
        raise InvalidInput(f"double_skewer() needs {h} contained in {k}")
    hi, ki = P.idx(h), P.idx(k)
    depth = max_len if max_len is not None else action.budgets.word_length
    masks = halfspace_point_masks(P, action.budgets)
    for word in enumerate_words(action.gen_names(), depth):
        g = action.evaluate(word)
        img = g.apply_idx(ki)
        if img is None:
            continue
        if img != hi and P.leq_idx(img, hi):
            # both displayed conditions, re-verified on point sets:
            # containment is proper and the distance to 𝔥* is positive
            assert masks[img] & ~masks[hi] == 0 and masks[img] != masks[hi]
            gap = _set_distance(P, masks[img], masks[P.star[hi]], action.budgets)
            if gap > 0:
                return SkewerResult("SKEWERED", word=word, h=h, k=k,
                                    image=P.ids[img], gap=gap)
    return SkewerResult("INCONCLUSIVE", h=h, k=k, depth=depth)


def _set_distance(P: WeightedPocset, amask: int, bmask: int,
                  budgets: Budgets) -> Fraction:
    pts = points(P, budgets)
    best = None
    for i in _bits(amask):
        for j in _bits(bmask):
            d = distance(P, pts[i], pts[j])
            if best is None or d < best:
                best = d
    return best if best is not None else Fraction(0)


# -- separation, facing tuples, sectors --------------------------------------

def strongly_separated(P: WeightedPocset, h: str, k: str) -> bool:
    """Disjoint halfspaces with no wall transverse to both."""
    hi, ki = P.idx(h), P.idx(k)
    if not _halfspace_disjoint(P, hi, ki):
        return False
    for j, _ in P.walls:
        jid = P.ids[j]
        if jid in (h, k) or P.star[j] in (hi, ki):
            continue
        if _transverse(P, jid, h) and _transverse(P, jid, k):
            return False
    return True


@dataclass
class FacingResult:
    kind: str  # FOUND | NOT_FOUND | INCONCLUSIVE
    tuple_ids: tuple = ()
    strong: bool = False
    upgraded: bool = False
    depth: Optional[int] = None

    def to_json(self):
        out = {"kind": self.kind, "strong": self.strong}
        if self.tuple_ids:
            out["tuple"] = list(self.tuple_ids)
        if self.depth is not None:
            out["depth"] = self.depth
        return out


def _pair_ok(P: WeightedPocset, a: int, b: int, strong: bool) -> bool:
    if not _halfspace_disjoint(P, a, b):
        return False
    if strong:
        return strongly_separated(P, P.ids[a], P.ids[b])
    return True


def facing_tuple(P: WeightedPocset, n: int, seed: Optional[str] = None,
                 strong: bool = False,
                 action: Optional[Action] = None,
                 max_len: Optional[int] = None) -> FacingResult:
    """Search for n pairwise-disjoint halfspaces.

    The pure combinatorial search is exhaustive, so NOT_FOUND is a
    definitive negative.  With an action, a failed combinatorial search is
    retried through the skewering upgrade (extend an (m)-tuple by
    translating two members past the last one); a failure there is only
    INCONCLUSIVE.
    """
    if n < 3:
        raise InvalidInput("facing tuples need n >= 3")
    base = [P.idx(seed)] if seed else []
    combinatorial = _facing_backtrack(P, n, base, strong)
    if action is not None and n > 3:
        upgraded = _upgrade_route(P, n, base, strong, action, max_len)
        if upgraded is not None:
            return FacingResult("FOUND", tuple(P.ids[i] for i in upgraded),
                                strong=strong, upgraded=True)
    if combinatorial is not None:
        return FacingResult("FOUND", tuple(P.ids[i] for i in combinatorial),
                            strong=strong)
    # the backtracking search is exhaustive over the pocset, so the negative
    # is definitive unless the pocset is only a window into a larger space
    if action is not None and action.kind == "window":
        return FacingResult("INCONCLUSIVE", strong=strong,
                            depth=max_len or action.budgets.word_length)
    return FacingResult("NOT_FOUND", strong=strong)


def _upgrade_route(P, n, base, strong, action, max_len):
    """Grow a triple one member at a time: g h0* pushed inside the last
    member replaces it with two translated members."""
    current = _facing_backtrack(P, 3, base, strong)
    if current is None:
        return None
    current = list(current)
    while len(current) < n:
        h0 = current[0]
        last = current[-1]
        res = double_skewer(action, P.ids[last], P.ids[P.star[h0]],
                            max_len=max_len)
        upgraded = None
        if res.kind == "SKEWERED":
            g = action.evaluate(res.word)
            news = [g.apply_idx(current[1]), g.apply_idx(current[2])]
            if all(x is not None for x in news):
                cand = current[:-1] + news
                if len(set(cand)) == len(cand) and _all_facing(P, cand, strong):
                    upgraded = cand
        if upgraded is None:
            return None
        current = upgraded
    return current[:n]


def _all_facing(P: WeightedPocset, idxs: Sequence[int], strong: bool) -> bool:
    for a in range(len(idxs)):
        for b in range(a + 1, len(idxs)):
            if idxs[a] == idxs[b] or not _pair_ok(P, idxs[a], idxs[b], strong):
                return False
    return True


def _facing_backtrack(P: WeightedPocset, n: int, base: list,
                      strong: bool) -> Optional[list]:
    order = sorted(range(P.n), key=lambda i: P.ids[i])
    chosen = list(base)
    if not _all_facing(P, chosen, strong):
        return None

    def rec(start: int) -> Optional[list]:
        if len(chosen) == n:
            return list(chosen)
        for pos in range(start, len(order)):
            i = order[pos]
            if i in chosen:
                continue
            if all(_pair_ok(P, i, c, strong) for c in chosen):
                chosen.append(i)
                got = rec(pos + 1)
                if got is not None:
                    return got
                chosen.pop()
        return None

    return rec(0)


@dataclass
class SectorResult:
    kind: str  # HALFSPACE | PRODUCT
    halfspace: Optional[str] = None
    sector: Optional[tuple] = None
    partition: Optional[tuple] = None  # (part1 ids, part2 ids)

    def to_json(self):
        out = {"kind": self.kind}
        if self.halfspace:
            out["halfspace"] = self.halfspace
            out["sector"] = list(self.sector)
        if self.partition:
            out["partition"] = [sorted(self.partition[0]), sorted(self.partition[1])]
        return out


def sector_halfspace(P: WeightedPocset, h: str, k: str) -> SectorResult:
    """A halfspace inside one of the four sectors of a transverse pair, or
    the *-invariant transverse partition that witnesses a product split."""
    if not _transverse(P, h, k):
        raise NotTransverse(f"{h} and {k} are not transverse")
    hi, ki = P.idx(h), P.idx(k)
    four = {hi, P.star[hi], ki, P.star[ki]}
    for s1 in (hi, P.star[hi]):
        for s2 in (ki, P.star[ki]):
            for j in range(P.n):
                if j in four:
                    continue
                if P.leq_idx(j, s1) and P.leq_idx(j, s2):
                    return SectorResult(
                        "HALFSPACE", halfspace=P.ids[j],
                        sector=(P.ids[s1], P.ids[s2]))
    # no sector halfspace: build the transverse partition from the
    # inseparable envelope of the non-transversals of h
    not_trans_h = {j for j in range(P.n)
                   if not _transverse(P, P.ids[j], h)}
    part1 = set()
    for j in range(P.n):
        if any(P.leq_idx(j, b) or P.leq_idx(b, j) for b in not_trans_h):
            part1.add(j)
    part2 = set(range(P.n)) - part1
    if not part2:
        raise InvalidInput("internal: sector partition degenerated")
    ids1 = tuple(sorted(P.ids[j] for j in part1))
    ids2 = tuple(sorted(P.ids[j] for j in part2))
    # decompose() must confirm: both pieces are unions of factors
    D = decompose(P)
    by_factor = {}
    for hid in P.ids:
        by_factor.setdefault(D.assignment[hid][0], set()).add(hid)
    union_check = set()
    for fi, ids in by_factor.items():
        if ids <= set(ids1):
            union_check |= ids
    if union_check != set(ids1):
        raise InvalidInput("internal: partition not confirmed by decompose()")
    return SectorResult("PRODUCT", partition=(ids1, ids2))


# -- ping-pong certificates ---------------------------------------------------

@dataclass
class FreeCertificate:
    a: Word
    b: Word
    h: str
    k: str
    facing_tuple: tuple
    base_inclusions: int
    words_checked: int
    checks_performed: int
    depth: int
    omega: tuple
    stabilizer_trivial: bool
    verified: bool

    def to_json(self):
        return {
            "kind": "FREE_CERTIFICATE",
            "a": word_str(self.a),
            "b": word_str(self.b),
            "h": self.h,
            "k": self.k,
            "facingTuple": list(self.facing_tuple),
            "baseInclusions": self.base_inclusions,
            "wordsChecked": self.words_checked,
            "checksPerformed": self.checks_performed,
            "depth": self.depth,
            "omega": [sorted(p.ids) for p in self.omega],
            "stabilizerTrivial": self.stabilizer_trivial,
            "verified": self.verified,
        }


def pingpong(action: Action, a: Word, b: Word, h: str, k: str,
             max_len: Optional[int] = None) -> FreeCertificate:
    """Verify the ping-pong configuration and brute-force all reduced words.

    Precondition: 𝔥, a𝔥*, 𝔨, b𝔨* form a facing 4-tuple.  The four
    displayed inclusion families (3 inclusions per generator direction) are
    verified once; then for every nontrivial reduced word u up to the depth
    six elementary checks run: the claim inclusion uΩ ⊆ (prescribed side),
    uΩ ∩ Ω = ∅, and the four wall-stabilizer inequalities u𝔥 ∉ {𝔥,𝔥*},
    u𝔨 ∉ {𝔨,𝔨*}.
    """
    P = action.pocset
    depth = max_len if max_len is not None else action.budgets.word_length
    hi, ki = P.idx(h), P.idx(k)
    if hi == ki or hi == P.star[ki]:
        raise NotFacing("h and k must be sides of distinct walls")
    if reduce_word(a) == reduce_word(b) or not reduce_word(a) or not reduce_word(b):
        raise NotFacing("the two generator words must be distinct and nontrivial")
    g_a, g_b = action.evaluate(a), action.evaluate(b)
    a_hs = g_a.apply_idx(P.star[hi])
    b_ks = g_b.apply_idx(P.star[ki])
    if a_hs is None or b_ks is None:
        raise OutOfWindow("a𝔥* or b𝔨* is not visible in the window")
    tup = [hi, a_hs, ki, b_ks]
    if not _all_facing(P, tup, strong=False):
        raise NotFacing(
            "the four halfspaces h, a h*, k, b k* are not pairwise disjoint",
            tuple=[P.ids[i] for i in tup])

    # Ω = h* ∩ a h ∩ k* ∩ b k as a point set
    a_h = g_a.apply_idx(hi)
    b_k = g_b.apply_idx(ki)
    if a_h is None or b_k is None:
        raise OutOfWindow("a𝔥 or b𝔨 is not visible in the window")
    masks = halfspace_point_masks(P, action.budgets)
    pts = points(P, action.budgets)
    omega_mask = (masks[P.star[hi]] & masks[a_h]
                  & masks[P.star[ki]] & masks[b_k])
    if omega_mask == 0:
        raise NotFacing("the central region Ω is empty")
    omega = tuple(pts[i] for i in _bits(omega_mask))

    prescribed = {
        (_first(a), 1): a_hs,    # u = a u'  =>  uΩ ⊆ a𝔥*
        (_first(a), -1): hi,     # u = a⁻¹u' =>  uΩ ⊆ 𝔥
        (_first(b), 1): b_ks,
        (_first(b), -1): ki,
    }
    # the four displayed inclusion families, one ≤-check per member
    base_targets = {
        (a, 1): (a_hs, [a_hs, b_ks, ki]),
        (a, -1): (hi, [hi, b_ks, ki]),
        (b, 1): (b_ks, [a_hs, hi, b_ks]),
        (b, -1): (ki, [a_hs, hi, ki]),
    }
    base_count = 0
    for (gw, sign), (target, sources) in base_targets.items():
        word = gw if sign == 1 else tuple((n, -s) for n, s in reversed(gw))
        g = action.evaluate(word)
        for src in sources:
            img = g.apply_idx(src)
            if img is None:
                raise OutOfWindow(
                    f"inclusion source {P.ids[src]} not visible under "
                    f"{word_str(word)}")
            if not P.leq_idx(img, target):
                raise InclusionFailed(
                    f"{word_str(word)}·{P.ids[src]} is not contained in "
                    f"{P.ids[target]}", halfspace=P.ids[src])
            base_count += 1

    # brute-force word check: letters are the two supplied generators
    letters = {"A": a, "B": b}
    pos = {p.mask: i for i, p in enumerate(pts)}
    words_checked = 0
    checks = base_count
    stab_ok = True
    for u in _reduced_letter_words(depth):
        word = _expand_letters(u, letters)
        gu = action.evaluate(word)
        images = []
        for i in _bits(omega_mask):
            q = _apply_map_point(P, gu, pts[i])
            if q is None:
                raise OutOfWindow(f"word {word_str(word)} leaves the window on Ω")
            images.append(q)
        target = prescribed[(letters[u[0][0]], u[0][1])]
        if any(not (q.mask >> target & 1) for q in images):
            raise InclusionFailed(
                f"{word_str(word)}·Ω escapes {P.ids[target]}",
                halfspace=P.ids[target])
        checks += 1  # claim inclusion
        if any(omega_mask >> pos[q.mask] & 1 for q in images):
            raise InclusionFailed(f"{word_str(word)} fixes part of Ω")
        checks += 1  # uΩ ∩ Ω = ∅
        for wi in (hi, ki):
            for forbidden in (wi, P.star[wi]):
                if not _stabilizer_excluded(action, P, gu, wi, forbidden, pts):
                    stab_ok = False
                checks += 1
        words_checked += 1

    return FreeCertificate(
        a=a, b=b, h=h, k=k,
        facing_tuple=tuple(P.ids[i] for i in tup),
        base_inclusions=base_count,
        words_checked=words_checked,
        checks_performed=checks,
        depth=depth,
        omega=omega,
        stabilizer_trivial=stab_ok,
        verified=stab_ok,
    )


def _first(word: Word):
    return word


def _apply_map_point(P: WeightedPocset, g, p: Point) -> Optional[Point]:
    if isinstance(g, Automorphism):
        return g.apply_point(p)
    return partial_point_image(P, g, p)


def _reduced_letter_words(depth: int):
    """Reduced words over two abstract letters A, B (with inverses)."""
    alphabet = [("A", 1), ("A", -1), ("B", 1), ("B", -1)]
    frontier = [()]
    for _ in range(depth):
        nxt = []
        for w in frontier:
            for tok in alphabet:
                if w and w[-1][0] == tok[0] and w[-1][1] == -tok[1]:
                    continue
                nw = w + (tok,)
                nxt.append(nw)
                yield nw
        frontier = nxt


def _expand_letters(u, letters) -> Word:
    out = []
    for name, sign in u:
        base = letters[name]
        if sign == 1:
            out.extend(base)
        else:
            out.extend((n, -s) for n, s in reversed(base))
    return reduce_word(tuple(out))


def _stabilizer_excluded(action, P, gu, wall_side: int, forbidden: int,
                         pts) -> bool:
    """Certify u·(side) != forbidden.

    Direct image when visible; otherwise refute via a witness point whose
    image lands on the wrong side: u·side = forbidden would force
    u(side ∩ dom) ⊆ forbidden and u(side* ∩ dom) ⊆ forbidden*.
    """
    img = gu.apply_idx(wall_side)
    if img is not None:
        return img != forbidden
    masks = halfspace_point_masks(P, action.budgets)
    side_mask = masks[wall_side]
    for i in range(len(pts)):
        q = _apply_map_point(P, gu, pts[i])
        if q is None:
            continue
        in_side = bool(side_mask >> i & 1)
        img_in_forbidden = bool(q.mask >> forbidden & 1)
        if in_side != img_in_forbidden:
            return True
    return False


# -- classification pipeline --------------------------------------------------

@dataclass
class ClassificationReport:
    kind: str  # ROLLER_ELEMENTARY | FREE_SUBGROUP | INCONCLUSIVE
    stage: int
    witness: Optional[dict] = None
    core_size: Optional[int] = None
    log: tuple = ()

    def to_json(self):
        out = {"kind": self.kind, "stage": self.stage, "log": list(self.log)}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.core_size is not None:
            out["coreSize"] = self.core_size
        return out


def classify(action: Action, max_len: Optional[int] = None) -> ClassificationReport:
    """Elementary-or-free pipeline.

    Stage 1 looks for a global fixed point or a finite orbit of size at most
    2^rank; for total actions on finite pocsets this is an exact decision.
    Stage 2 restricts to a minimal nonempty invariant convex core.  Stage 3
    hunts for a facing triple, upgrades it, and attempts a ping-pong
    certificate.  Window "fixed points" live at window resolution only, so
    for window actions stage 1 records candidates without concluding and
    the pipeline proceeds; only a stage-3 certificate is a verdict.
    """
    log = []
    P = action.pocset
    if action.kind == "total":
        orbit = min_orbit(action)
        r = rank(P, action.budgets)
        log.append(f"stage1: minimum orbit size {orbit.size}, rank {r}")
        if orbit.size == 1:
            return ClassificationReport(
                "ROLLER_ELEMENTARY", stage=1,
                witness={"fixedPoint": sorted(orbit.orbit[0].ids)},
                log=tuple(log))
        assert orbit.size <= 2 ** r, "orbit bound violated"
        return ClassificationReport(
            "ROLLER_ELEMENTARY", stage=1,
            witness={"finiteOrbit": orbit.to_json()}, log=tuple(log))

    # window action: stage 1 candidates only
    fixed_candidates = 0
    for p in action.points():
        if all(
            (lambda q: q is not None and q.mask == p.mask)(
                _apply_map_point(P, action.evaluate(((nm, 1),)), p))
            for nm in action.gen_names()
        ):
            fixed_candidates += 1
    log.append(
        f"stage1: {fixed_candidates} window-resolution fixed candidates "
        "(not conclusive for the underlying action)")
    log.append("stage2: window core restriction skipped (budgeted search)")

    depth = max_len if max_len is not None else action.budgets.word_length
    facing = facing_tuple(P, 3, action=action, max_len=depth)
    if facing.kind != "FOUND":
        log.append("stage3: no facing triple found")
        return ClassificationReport("INCONCLUSIVE", stage=3, log=tuple(log))
    log.append(f"stage3: facing triple {facing.tuple_ids}")
    candidates = []
    plain = _facing_backtrack(P, 4, [], strong=False)
    if plain is not None:
        candidates.append(tuple(P.ids[i] for i in plain))
    four = facing_tuple(P, 4, action=action, max_len=depth)
    if four.kind == "FOUND" and four.tuple_ids not in candidates:
        candidates.append(four.tuple_ids)
    if not candidates:
        log.append("stage3: no facing 4-tuple")
        return ClassificationReport("INCONCLUSIVE", stage=3, log=tuple(log))
    import itertools
    for tup in candidates:
        for h, hp, k, kp in itertools.permutations(tup):
            res_a = double_skewer(action, hp, P.ids[P.star[P.idx(h)]],
                                  max_len=depth)
            if res_a.kind != "SKEWERED":
                continue
            res_b = double_skewer(action, kp, P.ids[P.star[P.idx(k)]],
                                  max_len=depth)
            if res_b.kind != "SKEWERED":
                continue
            try:
                cert = pingpong(action, res_a.word, res_b.word, h, k,
                                max_len=depth)
            except (NotFacing, InclusionFailed, OutOfWindow):
                continue
            log.append(
                f"stage3: ping-pong verified with h={h}, k={k}, "
                f"a={word_str(res_a.word)}, b={word_str(res_b.word)}")
            return ClassificationReport(
                "FREE_SUBGROUP", stage=3, witness=cert.to_json(),
                log=tuple(log))
    log.append("stage3: no ping-pong configuration verified within budget")
    return ClassificationReport("INCONCLUSIVE", stage=3, log=tuple(log))


# -- lineality -----------------------------------------------------------------

@dataclass
class LinealResult:
    pairs: tuple  # pairs of Points (xi, eta) with every wall separating them

    @property
    def found(self) -> bool:
        return bool(self.pairs)

    def to_json(self):
        return {
            "lineal": self.found,
            "pairs": [[sorted(x.ids), sorted(y.ids)] for x, y in self.pairs],
        }


def is_lineal(P: WeightedPocset, budgets: Budgets = DEFAULT_BUDGETS) -> LinealResult:
    """Find all point pairs (ξ, η) such that every wall separates ξ from η;
    such a pair exists iff the whole space lies in the interval I(ξ, η)."""
    pts = points(P, budgets)
    by_mask = {p.mask for p in pts}
    full = (1 << P.n) - 1
    pairs = []
    for p in pts:
        comp = 0
        m = p.mask
        while m:
            low = m & -m
            comp |= 1 << P.star[low.bit_length() - 1]
            m ^= low
        if comp in by_mask and p.mask < comp:
            pairs.append((p, Point(P, comp)))
    return LinealResult(tuple(pairs))


# -- supplied-partition checker -----------------------------------------------

@dataclass
class PartitionReport:
    ok: bool
    failures: tuple = ()

    def to_json(self):
        return {"ok": self.ok, "failures": list(self.failures)}


def check_free_partition(action: Action, a: Word, b: Word,
                         assignment: dict) -> PartitionReport:
    """Check a supplied halfspace partition indexed by group elements.

    ``assignment`` maps each halfspace id to an opaque label (the group
    element owning it).  Verified where visible: star-invariance of each
    piece, and equivariance a·H_g = H_{a·g} in the sense that the two
    supplied generators map pieces into single pieces.
    """
    P = action.pocset
    failures = []
    labels = {}
    for h in P.ids:
        if h not in assignment:
            failures.append(f"halfspace {h} not assigned")
        labels.setdefault(assignment.get(h), []).append(h)
    for h in P.ids:
        if assignment.get(h) != assignment.get(P.ids[P.star[P.idx(h)]]):
            failures.append(f"piece of {h} not star-invariant")
    for word, nm in ((a, "a"), (b, "b")):
        g = action.evaluate(word)
        image_label: dict = {}
        for h in P.ids:
            img = g.apply_idx(P.idx(h))
            if img is None:
                continue
            src, dst = assignment.get(h), assignment.get(P.ids[img])
            if src in image_label and image_label[src] != dst:
                failures.append(
                    f"{nm} maps piece {src!r} into several pieces")
            image_label[src] = dst
    return PartitionReport(ok=not failures, failures=tuple(failures))

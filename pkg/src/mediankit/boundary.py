"""Eventually-periodic chain systems and the UBS calculus at a boundary point.

A chain system is a finite presentation of the halfspaces lying between a
basepoint and a boundary point: finitely many strictly descending chains
with eventually periodic weights, and a relation table that resolves every
cross-chain pair to nested or transverse via finitely many exceptional
entries (head overrides and row rules) plus offset-zone rules for large
indices.

Inseparable subsets meet every chain in an index interval, so UBS-like
sets normalize to per-chain intervals with an optional infinite tail.
Closures, almost-containment, minimal tails, the directed graph on minimal
classes, the poset of classes and transfer characters all reduce to finite
computations over one period block; a stabilization check over two horizons
guards every tail decision, raising HORIZON_EXCEEDED rather than guessing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import (
    ClassNotPreserved,
    ClassPermuted,
    HorizonExceeded,
    InvalidInput,
)
from .pocset import ValidationReport

SUB = "sub"      # first element contained in second
SUP = "sup"      # first element contains second
TRANS = "trans"  # transverse

_INVERSE = {SUB: SUP, SUP: SUB, TRANS: TRANS}


@dataclass(frozen=True)
class Chain:
    id: str
    period: int
    weights: tuple  # periodic block, one Fraction per residue
    head_weights: tuple = ()

    def weight(self, n: int) -> Fraction:
        if n < len(self.head_weights):
            return self.head_weights[n]
        return self.weights[(n - len(self.head_weights)) % self.period]


@dataclass(frozen=True)
class Zone:
    lo: Optional[int]  # None = -inf
    hi: Optional[int]  # None = +inf
    rel: str

    def contains(self, d: int) -> bool:
        return (self.lo is None or d >= self.lo) and (self.hi is None or d <= self.hi)


@dataclass(frozen=True)
class RowRule:
    chain: str
    index: int
    other: str
    rel: str
    lo: int = 0
    hi: Optional[int] = None

    def matches(self, m: int) -> bool:
        return m >= self.lo and (self.hi is None or m <= self.hi)


class ChainSystem:
    """Chains plus the relation resolver; immutable after construction."""

    def __init__(self, chains: Sequence[Chain],
                 zones: Optional[dict] = None,
                 rows: Sequence[RowRule] = (),
                 head: Optional[dict] = None,
                 name: str = ""):
        self.name = name
        self.chains = {c.id: c for c in chains}
        self.chain_order = tuple(c.id for c in chains)
        if len(self.chains) != len(chains):
            raise InvalidInput("duplicate chain ids")
        self.zones = dict(zones or {})   # (from, to) -> tuple[Zone]
        self.rows = tuple(rows)
        self.head = dict(head or {})     # (ci, n, cj, m) -> rel
        self._rel_cache: dict = {}
        bounds = [1]
        for c in chains:
            bounds.append(len(c.head_weights))
        for (ci, n, cj, m) in self.head:
            bounds.append(max(n, m) + 1)
        for r in self.rows:
            bounds.append(r.index + 1)
            bounds.append(r.lo + 1)
            if r.hi is not None:
                bounds.append(r.hi + 1)
        for zs in self.zones.values():
            for z in zs:
                for v in (z.lo, z.hi):
                    if v is not None:
                        bounds.append(abs(v) + 1)
        self.head_extent = max(bounds)
        self.lcm_period = math.lcm(*[c.period for c in chains]) if chains else 1
        self.horizon = self.head_extent + 4 * self.lcm_period + 4

    # -- relation resolution ---------------------------------------------

    def rel(self, ci: str, n: int, cj: str, m: int) -> str:
        """Resolve the relation between chain element (ci, n) and (cj, m)."""
        if ci == cj:
            if n == m:
                return SUP  # reflexive containment both ways; callers avoid
            return SUP if n < m else SUB
        key = (ci, n, cj, m)
        cached = self._rel_cache.get(key)
        if cached is not None:
            return cached
        out = self._resolve(ci, n, cj, m)
        self._rel_cache[key] = out
        return out

    def _resolve(self, ci, n, cj, m):
        direct = self.head.get((ci, n, cj, m))
        if direct is not None:
            return direct
        mirror = self.head.get((cj, m, ci, n))
        if mirror is not None:
            return _INVERSE[mirror]
        for r in self.rows:
            if r.chain == ci and r.index == n and r.other == cj and r.matches(m):
                return r.rel
            if r.chain == cj and r.index == m and r.other == ci and r.matches(n):
                return _INVERSE[r.rel]
        zs = self.zones.get((ci, cj))
        if zs is not None:
            d = m - n
            for z in zs:
                if z.contains(d):
                    return z.rel
        zs = self.zones.get((cj, ci))
        if zs is not None:
            d = n - m
            for z in zs:
                if z.contains(d):
                    return _INVERSE[z.rel]
        return TRANS

    def zone_at_infinity(self, ci: str, cj: str) -> str:
        """rel((ci, n), (cj, m)) for m - n -> +infinity."""
        zs = self.zones.get((ci, cj))
        if zs is not None:
            for z in zs:
                if z.hi is None:
                    return z.rel
        zs = self.zones.get((cj, ci))
        if zs is not None:
            for z in zs:
                if z.lo is None:
                    return _INVERSE[z.rel]
        return TRANS

    def weight(self, ci: str, n: int) -> Fraction:
        return self.chains[ci].weight(n)

    def __repr__(self):
        return f"ChainSystem({self.name or ','.join(self.chain_order)})"


class UBS:
    """Per-chain index intervals; ``hi`` is None for an infinite tail."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: dict):
        norm = {}
        for cid, iv in intervals.items():
            if iv is None:
                continue
            lo, hi = iv
            if hi is not None and hi < lo:
                continue
            norm[cid] = (lo, hi)
        self.intervals = norm

    def contains(self, cid: str, n: int) -> bool:
        iv = self.intervals.get(cid)
        if iv is None:
            return False
        lo, hi = iv
        return n >= lo and (hi is None or n <= hi)

    def has_tail(self) -> bool:
        return any(hi is None for _, hi in self.intervals.values())

    def tail_chains(self) -> tuple:
        return tuple(sorted(c for c, (_, hi) in self.intervals.items() if hi is None))

    def __eq__(self, other):
        return isinstance(other, UBS) and other.intervals == self.intervals

    def __hash__(self):
        return hash(tuple(sorted(self.intervals.items())))

    def __repr__(self):
        parts = []
        for cid in sorted(self.intervals):
            lo, hi = self.intervals[cid]
            parts.append(f"{cid}[{lo}:{'' if hi is None else hi + 1}]")
        return "UBS(" + " ".join(parts) + ")"

    def to_json(self):
        return {
            "intervals": {
                cid: [lo, hi] for cid, (lo, hi) in sorted(self.intervals.items())
            }
        }


def tail(cid: str, start: int) -> UBS:
    return UBS({cid: (start, None)})


def union_seed(parts: Iterable[UBS]) -> dict:
    out: dict = {}
    for u in parts:
        for cid, (lo, hi) in u.intervals.items():
            if cid in out:
                plo, phi = out[cid]
                out[cid] = (min(plo, lo),
                            None if phi is None or hi is None else max(phi, hi))
            else:
                out[cid] = (lo, hi)
    return out


# -- validation -------------------------------------------------------------

def validate_system(S: ChainSystem) -> ValidationReport:
    rep = ValidationReport(ok=True)
    for cid, c in S.chains.items():
        if c.period < 1 or len(c.weights) != c.period:
            rep.fail("BAD_PERIOD", cid)
        for w in tuple(c.weights) + tuple(c.head_weights):
            if w <= 0:
                rep.fail("NONPOSITIVE_WEIGHT", f"{cid}: {w}")
    for (ci, cj), zs in S.zones.items():
        if ci not in S.chains or cj not in S.chains:
            rep.fail("UNKNOWN_CHAIN", f"zone rule ({ci}, {cj})")
            continue
        if not _zones_partition(zs):
            rep.fail("ZONES_NOT_PARTITION", f"({ci}, {cj})")
        if (cj, ci) in S.zones:
            for d in range(-S.horizon, S.horizon + 1):
                a = next(z.rel for z in zs if z.contains(d))
                b = next(z.rel for z in S.zones[(cj, ci)] if z.contains(-d))
                if a != _INVERSE[b]:
                    rep.fail("ZONE_CONFLICT", f"({ci}, {cj}) at offset {d}")
                    break
    for r in S.rows:
        if r.chain not in S.chains or r.other not in S.chains:
            rep.fail("UNKNOWN_CHAIN", f"row rule {r}")
    if not rep.ok:
        return rep

    # truncated relation must be a partial order compatible with the chains
    T = S.horizon
    elems = [(c, n) for c in S.chain_order for n in range(T + 1)]
    pos = {e: i for i, e in enumerate(elems)}
    down = [0] * len(elems)  # down[i] = elements below (contained in) elems[i]
    for i, (ci, n) in enumerate(elems):
        for j, (cj, m) in enumerate(elems):
            if i == j:
                continue
            r = S.rel(ci, n, cj, m)
            if ci == cj:
                continue
            mirrored = S.rel(cj, m, ci, n)
            if mirrored != _INVERSE[r]:
                rep.fail("REL_NOT_ANTISYMMETRIC", f"{(ci, n)} vs {(cj, m)}")
            if r == SUP:
                down[i] |= 1 << j
    for c in S.chain_order:
        for n in range(T + 1):
            for m in range(n + 1, T + 1):
                down[pos[(c, n)]] |= 1 << pos[(c, m)]
    # transitive closure must not add anything
    for i in range(len(elems)):
        acc = down[i]
        m = down[i]
        while m:
            low = m & -m
            acc |= down[low.bit_length() - 1]
            m ^= low
        if acc & ~down[i]:
            extra = (acc & ~down[i])
            j = (extra & -extra).bit_length() - 1
            rep.fail("REL_NOT_TRANSITIVE",
                     f"{elems[i]} should contain {elems[j]}")
    for i in range(len(elems)):
        if down[i] >> i & 1:
            rep.fail("REL_CYCLE", str(elems[i]))
    # periodic consistency across one full period block
    L = S.lcm_period
    base = S.head_extent + L
    for ci in S.chain_order:
        for cj in S.chain_order:
            if ci >= cj:
                continue
            for n in range(base, base + L):
                for m in range(base, base + L):
                    if S.rel(ci, n, cj, m) != S.rel(ci, n + L, cj, m + L):
                        rep.fail("NOT_PERIODIC", f"({ci},{n}) vs ({cj},{m})")
    if rep.ok:
        rep.notes.append(
            f"truncation to depth {T} is a pocset-compatible partial order")
    return rep


def _zones_partition(zs: Sequence[Zone]) -> bool:
    if not zs:
        return False
    if zs[0].lo is not None or zs[-1].hi is not None:
        return False
    for a, b in zip(zs, zs[1:]):
        if a.hi is None or b.lo is None or b.lo != a.hi + 1:
            return False
    return True


def ensure_valid_system(S: ChainSystem) -> None:
    rep = validate_system(S)
    if not rep.ok:
        raise InvalidInput("chain system fails validation", report=rep.to_json())


# -- closures ---------------------------------------------------------------

def closure(S: ChainSystem, seed) -> UBS:
    """Inseparable closure of a union of chain intervals.

    Membership per chain is an index interval (everything between two
    members is a member), so the closure is computed as, per chain, the
    least index below some member and the largest index above one.  Tail
    decisions are confirmed at two horizons.
    """
    if isinstance(seed, UBS):
        seed = dict(seed.intervals)
    seed = {c: iv for c, iv in seed.items() if iv is not None}
    r1 = _closure_at(S, seed, S.horizon)
    r2 = _closure_at(S, seed, S.horizon + S.lcm_period)
    out = {}
    for cid in S.chain_order:
        a1 = r1.get(cid)
        a2 = r2.get(cid)
        if a1 is None and a2 is None:
            continue
        if a1 is None or a2 is None:
            raise HorizonExceeded(f"closure unstable on chain {cid}")
        (lo1, hi1, tail1), (lo2, hi2, tail2) = a1, a2
        if lo1 != lo2 or tail1 != tail2 or (not tail1 and hi1 != hi2):
            raise HorizonExceeded(f"closure unstable on chain {cid}")
        out[cid] = (lo1, None if tail1 else hi1)
    return UBS(out)


def _oriented_zones(S: ChainSystem, c: str, d: str):
    """Zone list in (c, d) orientation, possibly inverted from (d, c)."""
    zs = S.zones.get((c, d))
    if zs is not None:
        return zs
    zs = S.zones.get((d, c))
    if zs is None:
        return (Zone(None, None, TRANS),)
    out = [Zone(None if z.hi is None else -z.hi,
                None if z.lo is None else -z.lo,
                _INVERSE[z.rel]) for z in reversed(zs)]
    return tuple(out)


def _related_member_exists(S: ChainSystem, c: str, n: int, d: str,
                           lo: int, hi: Optional[int], want: str,
                           scan: int) -> bool:
    """Is there m in the member interval of chain d with
    rel((c, n), (d, m)) == want?  Exact, via overrides plus zone windows."""
    top = scan if hi is None else min(hi, scan)
    if top < lo:
        return False
    masked = set()
    for r in S.rows:
        if r.chain == c and r.index == n and r.other == d:
            a, b = max(lo, r.lo), top if r.hi is None else min(top, r.hi)
            if a <= b:
                if r.rel == want:
                    return True
                masked.update(range(a, b + 1))
        elif r.chain == d and r.other == c and r.matches(n):
            if lo <= r.index <= top:
                masked.add(r.index)
                if _INVERSE[r.rel] == want:
                    return True
    for (ci, nn, cj, mm), code in S.head.items():
        if ci == c and nn == n and cj == d and lo <= mm <= top:
            masked.add(mm)
            if code == want:
                return True
        elif ci == d and cj == c and mm == n and lo <= nn <= top:
            masked.add(nn)
            if _INVERSE[code] == want:
                return True
    for z in _oriented_zones(S, c, d):
        if z.rel != want:
            continue
        a = lo if z.lo is None else max(lo, n + z.lo)
        b = top if z.hi is None else min(top, n + z.hi)
        if a > b:
            continue
        if (b - a + 1) > len(masked):
            return True
        if any(m not in masked for m in range(a, b + 1)):
            return True
    return False


def _closure_at(S: ChainSystem, seed: dict, T: int) -> dict:
    scan = T + S.head_extent + S.lcm_period + 1

    def above_exists(c: str, n: int) -> bool:
        own = seed.get(c)
        if own is not None and own[0] <= n:
            return True
        for d, (lo, hi) in seed.items():
            if d != c and _related_member_exists(S, c, n, d, lo, hi, SUB, scan):
                return True
        return False

    def below_exists(c: str, n: int) -> bool:
        own = seed.get(c)
        if own is not None and (own[1] is None or own[1] >= n):
            return True
        for d, (lo, hi) in seed.items():
            if d != c and _related_member_exists(S, c, n, d, lo, hi, SUP, scan):
                return True
        return False

    out = {}
    for c in S.chain_order:
        A = None
        for n in range(T + 1):
            if above_exists(c, n):
                A = n
                break
        if A is None:
            continue
        if not below_exists(c, T):
            B = None
            for n in range(T, A - 1, -1):
                if below_exists(c, n):
                    B = n
                    break
            if B is None:
                continue
            out[c] = (A, B, False)
        else:
            out[c] = (A, T, True)
    return out


def is_ubs(S: ChainSystem, U: UBS) -> bool:
    """Inseparable and contains a diverging chain (an infinite tail)."""
    return U.has_tail() and closure(S, dict(U.intervals)) == U


# -- almost containment -------------------------------------------------------

@dataclass
class AlmostContainment:
    holds: bool
    measure: Optional[Fraction] = None  # nu(U1 \ U2) when it holds

    def to_json(self):
        return {"holds": self.holds,
                "measure": None if self.measure is None else str(self.measure)}


def _interval_minus(a, b):
    """Index intervals a \\ b as a list of (lo, hi|None) pieces."""
    if a is None:
        return []
    alo, ahi = a
    if b is None:
        return [(alo, ahi)]
    blo, bhi = b
    pieces = []
    left_hi = min(blo - 1, ahi) if ahi is not None else blo - 1
    if alo <= left_hi:
        pieces.append((alo, left_hi))
    if bhi is not None:
        rlo = max(alo, bhi + 1)
        if ahi is None or rlo <= ahi:
            pieces.append((rlo, ahi))
    return pieces


def almost_contained(S: ChainSystem, U1: UBS, U2: UBS) -> AlmostContainment:
    """U1 \\ U2 meets every chain finitely; when so, its exact mass."""
    total = Fraction(0)
    for cid in S.chain_order:
        for lo, hi in _interval_minus(U1.intervals.get(cid), U2.intervals.get(cid)):
            if hi is None:
                return AlmostContainment(False)
            for n in range(lo, hi + 1):
                total += S.weight(cid, n)
    return AlmostContainment(True, total)


def equivalent(S: ChainSystem, U1: UBS, U2: UBS) -> bool:
    return almost_contained(S, U1, U2).holds and almost_contained(S, U2, U1).holds


def almost_disjoint(S: ChainSystem, U1: UBS, U2: UBS) -> bool:
    """The intersection is not a UBS (meets every chain finitely)."""
    for cid in S.chain_order:
        a = U1.intervals.get(cid)
        b = U2.intervals.get(cid)
        if a and b and a[1] is None and b[1] is None:
            return False
    return True


# -- Dilworth ---------------------------------------------------------------

def min_chain_cover(elements: Sequence, less) -> int:
    """Minimum number of chains covering a finite poset (König matching)."""
    n = len(elements)
    adj = [[] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j and less(elements[i], elements[j]):
                adj[i].append(j)
    match_r = [-1] * n

    def try_kuhn(v, seen):
        for u in adj[v]:
            if not seen[u]:
                seen[u] = True
                if match_r[u] == -1 or try_kuhn(match_r[u], seen):
                    match_r[u] = v
                    return True
        return False

    matching = 0
    for v in range(n):
        if try_kuhn(v, [False] * n):
            matching += 1
    return n - matching


def max_antichain_brute(elements: Sequence, less) -> int:
    """Exhaustive maximum antichain; for cross-checks on small posets."""
    n = len(elements)
    best = 0
    for mask in range(1 << n):
        idxs = [i for i in range(n) if mask >> i & 1]
        if len(idxs) <= best:
            continue
        ok = all(
            not less(elements[a], elements[b]) and not less(elements[b], elements[a])
            for p, a in enumerate(idxs) for b in idxs[p + 1:]
        )
        if ok:
            best = len(idxs)
    return best


def dilworth_chains(S: ChainSystem, elements: Sequence[tuple]) -> int:
    """Minimum chain cover of a finite set of chain elements (ci, n)."""

    def less(x, y):  # strict containment x ⊊ y
        (ci, n), (cj, m) = x, y
        if ci == cj:
            return n > m
        return S.rel(ci, n, cj, m) == SUB

    return min_chain_cover(list(elements), less)


def truncation_antichain_bound(S: ChainSystem) -> int:
    """Maximum antichain of the standard truncation; the rank proxy."""
    T = S.head_extent + 2 * S.lcm_period
    elems = [(c, n) for c in S.chain_order for n in range(T + 1)]

    def less(x, y):
        (ci, n), (cj, m) = x, y
        if ci == cj:
            return n > m
        return S.rel(ci, n, cj, m) == SUB

    return min_chain_cover(elems, less)


# -- minimal tails and the graph ----------------------------------------------

def minimal_tail(S: ChainSystem, cid: str) -> tuple:
    """Least N whose tail closures are all mutually equivalent from N on."""
    if cid not in S.chains:
        raise InvalidInput(f"unknown chain {cid!r}")
    top = S.head_extent + 2 * S.lcm_period
    cls = [closure(S, tail(cid, M)) for M in range(top + 2)]
    N = None
    for start in range(top + 1):
        if all(equivalent(S, cls[start], cls[M]) for M in range(start, top + 2)):
            N = start
            break
    if N is None:
        raise HorizonExceeded(f"tail closures of {cid} do not stabilize")
    return N, cls[N]


@dataclass
class UBSGraph:
    vertices: tuple  # (label, representative UBS, defining chain)
    edges: tuple     # pairs of vertex positions (i, j): edge i -> j

    def vertex_labels(self) -> tuple:
        return tuple(v[0] for v in self.vertices)

    def to_json(self):
        return {
            "vertices": [
                {"label": lab, "chain": chain, "representative": rep.to_json()}
                for lab, rep, chain in self.vertices
            ],
            "edges": [[self.vertices[i][0], self.vertices[j][0]]
                      for i, j in self.edges],
        }


def ubs_graph(S: ChainSystem) -> UBSGraph:
    """Minimal classes and the asymmetric almost-transversality edges."""
    deep = S.head_extent + 2 * S.lcm_period
    reps = []
    for cid in S.chain_order:
        rep = closure(S, tail(cid, deep))
        for _, existing, _ in reps:
            if equivalent(S, rep, existing):
                break
        else:
            start = minimal_tail(S, cid)[0]
            reps.append((f"{cid}[{start}:]", rep, cid))
    edges = []
    for i, (_, _, ci) in enumerate(reps):
        for j, (_, _, cj) in enumerate(reps):
            if i == j:
                continue
            fwd = S.zone_at_infinity(ci, cj) == TRANS
            bwd = S.zone_at_infinity(cj, ci) == TRANS
            if fwd and not bwd:
                edges.append((i, j))
    graph = UBSGraph(tuple(reps), tuple(edges))
    _assert_graph_laws(S, graph)
    return graph


def _assert_graph_laws(S: ChainSystem, G: UBSGraph):
    n = len(G.vertices)
    adj = [[False] * n for _ in range(n)]
    for i, j in G.edges:
        adj[i][j] = True
    reach = [row[:] for row in adj]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                reach[i][j] = reach[i][j] or (reach[i][k] and reach[k][j])
    for i in range(n):
        if reach[i][i]:
            raise InvalidInput("UBS graph has a directed cycle")
        for j in range(n):
            if reach[i][j] and not adj[i][j]:
                raise InvalidInput("UBS graph reachability without an edge")
    bound = truncation_antichain_bound(S)
    if n > bound:
        raise InvalidInput(
            f"UBS graph has {n} vertices over antichain bound {bound}")


def ubs_poset(S: ChainSystem) -> list:
    """Inseparable vertex sets of the graph with verified representatives."""
    G = ubs_graph(S)
    n = len(G.vertices)
    adj = [[False] * n for _ in range(n)]
    for i, j in G.edges:
        adj[i][j] = True
    out = []
    deep0 = max(
        [minimal_tail(S, chain)[0] for _, _, chain in G.vertices] or [0])
    top = S.head_extent + 2 * S.lcm_period
    for mask in range(1, 1 << n):
        chosen = [i for i in range(n) if mask >> i & 1]
        inseparable = True
        for z in range(n):
            if mask >> z & 1:
                continue
            if any(adj[u][z] for u in chosen) and any(adj[z][w] for w in chosen):
                inseparable = False
                break
        if not inseparable:
            continue
        rep = None
        for N in range(deep0, top + 1):
            cand = closure(S, union_seed(
                [tail(G.vertices[i][2], N) for i in chosen]))
            minimal_of = [
                i for i in range(n)
                if almost_contained(S, G.vertices[i][1], cand).holds
            ]
            if minimal_of == chosen:
                rep = cand
                break
        if rep is None:
            raise HorizonExceeded(
                f"no representative for vertex set {chosen} within horizon")
        out.append((tuple(G.vertices[i][0] for i in chosen), rep))
    return out


def minimal_classes_of(S: ChainSystem, U: UBS) -> tuple:
    """Labels of the graph vertices almost contained in U."""
    G = ubs_graph(S)
    return tuple(lab for lab, rep, _ in G.vertices
                 if almost_contained(S, rep, U).holds)


# -- shift maps and transfer characters ----------------------------------------

@dataclass(frozen=True)
class ShiftMap:
    tau: dict    # chain id -> chain id
    shift: dict  # chain id -> index shift (applied before tau renames)
    min_index: int = 0

    def apply(self, cid: str, n: int) -> Optional[tuple]:
        if n < self.min_index:
            return None
        return self.tau[cid], n + self.shift[cid]

    def compose(self, other: "ShiftMap") -> "ShiftMap":
        """self ∘ other (apply ``other`` first)."""
        tau = {c: self.tau[other.tau[c]] for c in other.tau}
        shift = {c: other.shift[c] + self.shift[other.tau[c]] for c in other.tau}
        min_index = other.min_index
        for c in other.tau:
            need = self.min_index - other.shift[c]
            min_index = max(min_index, need)
        return ShiftMap(tau, shift, min_index)

    def to_json(self):
        return {"tau": dict(sorted(self.tau.items())),
                "shift": dict(sorted(self.shift.items())),
                "minIndex": self.min_index}


def identity_shift(S: ChainSystem) -> ShiftMap:
    return ShiftMap({c: c for c in S.chain_order},
                    {c: 0 for c in S.chain_order}, 0)


def validate_shift(S: ChainSystem, g: ShiftMap) -> None:
    """Structure preservation over one period block beyond the head."""
    if sorted(g.tau) != sorted(S.chain_order) or sorted(g.tau.values()) != sorted(S.chain_order):
        raise InvalidInput("shift map must permute the chains")
    base = max(g.min_index, S.head_extent) + S.lcm_period
    L = S.lcm_period
    for c in S.chain_order:
        for n in range(base, base + 2 * L):
            if S.weight(c, n) != S.weight(g.tau[c], n + g.shift[c]):
                raise InvalidInput(
                    f"shift map does not preserve weights on chain {c}")
    for ci in S.chain_order:
        for cj in S.chain_order:
            if ci == cj:
                continue
            for n in range(base, base + L):
                for m in range(base, base + L):
                    before = S.rel(ci, n, cj, m)
                    after = S.rel(g.tau[ci], n + g.shift[ci],
                                  g.tau[cj], m + g.shift[cj])
                    if before != after:
                        raise InvalidInput(
                            f"shift map does not preserve the relation on "
                            f"({ci}, {cj})")


def _deep_representative(S: ChainSystem, U: UBS, g: ShiftMap) -> UBS:
    """Equivalent tail-only representative everything below which is
    untouched by the definedness boundary of g."""
    if not U.has_tail():
        raise InvalidInput("transfer characters need a UBS with a tail")
    jump = max(abs(s) for s in g.shift.values()) if g.shift else 0
    depth = S.head_extent + S.lcm_period + g.min_index + jump + 2
    out = {}
    for cid, (lo, hi) in U.intervals.items():
        if hi is None:
            out[cid] = (max(lo, depth), None)
    return UBS(out)


def preimage_ubs(S: ChainSystem, U: UBS, g: ShiftMap) -> UBS:
    """g^{-1}U on the region where g is defined."""
    out = {}
    inv_tau = {v: k for k, v in g.tau.items()}
    for cid_target, (lo, hi) in U.intervals.items():
        c = inv_tau[cid_target]
        s = g.shift[c]
        nlo = max(lo - s, g.min_index)
        nhi = None if hi is None else hi - s
        out[c] = (nlo, nhi)
    return UBS(out)


def transfer_character(S: ChainSystem, U: UBS, g: ShiftMap) -> Fraction:
    """nu(g^{-1}Ω \\ Ω) − nu(Ω \\ g^{-1}Ω) on a deep representative.

    Well-defined on the equivalence class of Ω; requires g to preserve it.
    """
    validate_shift(S, g)
    omega = _deep_representative(S, U, g)
    pre = preimage_ubs(S, omega, g)
    both = almost_contained(S, pre, omega), almost_contained(S, omega, pre)
    if not (both[0].holds and both[1].holds):
        raise ClassNotPreserved(
            "the shift map does not preserve the class of the UBS")
    return both[0].measure - both[1].measure


def chi_vector(S: ChainSystem, g: ShiftMap) -> tuple:
    """Per-minimal-class transfer characters, in graph vertex order."""
    validate_shift(S, g)
    G = ubs_graph(S)
    values = []
    for lab, rep, chain in G.vertices:
        pre = preimage_ubs(S, _deep_representative(S, rep, g), g)
        if not equivalent(S, pre, _deep_representative(S, rep, g)):
            raise ClassPermuted(
                f"class {lab} is moved by the shift map; pass to the "
                "class-preserving subgroup first")
        values.append(transfer_character(S, rep, g))
    return tuple(values)


def in_chi_kernel(S: ChainSystem, g: ShiftMap) -> bool:
    return all(v == 0 for v in chi_vector(S, g))


# -- cross-system isomorphisms ---------------------------------------------

@dataclass(frozen=True)
class SystemMap:
    """A chain bijection between two systems with per-chain index shifts."""

    chain_map: dict
    shift: dict

    def compose(self, other: "SystemMap") -> "SystemMap":
        cmap = {c: self.chain_map[other.chain_map[c]] for c in other.chain_map}
        shift = {c: other.shift[c] + self.shift[other.chain_map[c]]
                 for c in other.chain_map}
        return SystemMap(cmap, shift)

    def is_identity(self) -> bool:
        return all(k == v for k, v in self.chain_map.items()) and \
            all(s == 0 for s in self.shift.values())


def verify_system_map(S1: ChainSystem, S2: ChainSystem, m: SystemMap) -> bool:
    """Weights and relations preserved over the common horizon."""
    if sorted(m.chain_map) != sorted(S1.chain_order):
        return False
    if sorted(m.chain_map.values()) != sorted(S2.chain_order):
        return False
    base = max(S1.head_extent, S2.head_extent) + max(s for s in [0] + [abs(v) for v in m.shift.values()])
    top = base + 2 * max(S1.lcm_period, S2.lcm_period)
    for c in S1.chain_order:
        for n in range(top):
            if n + m.shift[c] < 0:
                continue
            if S1.weight(c, n) != S2.weight(m.chain_map[c], n + m.shift[c]):
                return False
    for ci in S1.chain_order:
        for cj in S1.chain_order:
            if ci == cj:
                continue
            for n in range(base, top):
                for mm in range(base, top):
                    if S1.rel(ci, n, cj, mm) != S2.rel(
                            m.chain_map[ci], n + m.shift[ci],
                            m.chain_map[cj], mm + m.shift[cj]):
                        return False
    return True


# -- DOT export ----------------------------------------------------------------

def dot_export(G: UBSGraph) -> str:
    lines = ["digraph ubs {"]
    for lab, _, chain in G.vertices:
        lines.append(f'  "{lab}" [label="{lab}" chain="{chain}"];')
    for i, j in G.edges:
        lines.append(f'  "{G.vertices[i][0]}" -> "{G.vertices[j][0]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"

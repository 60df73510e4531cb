"""Built-in fixtures: pocsets, window actions and chain systems.

Fixtures are constructed once and cached, so points of the same fixture
compare equal across call sites.  Everything here is expressible in the
JSON file formats and dumpable through the CLI, which keeps runs
reproducible from the installed package alone.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .actions import PartialAutomorphism, TotalAction, WindowAction
from .boundary import (
    SUB,
    SUP,
    TRANS,
    Chain,
    ChainSystem,
    RowRule,
    ShiftMap,
    SystemMap,
    Zone,
)
from .config import Budgets
from .errors import InvalidInput
from .pocset import WeightedPocset
from .structure import Automorphism, pocset_product

ONE = Fraction(1)

F2_RADIUS = 4
_F2_LETTERS = ("a", "b", "A", "B")
_F2_INV = {"a": "A", "A": "a", "b": "B", "B": "b"}

WINDOW_BUDGETS = Budgets(point_walls=512, max_points=1 << 16, aut_walls=12)


# -- pocsets ------------------------------------------------------------------

@lru_cache(maxsize=None)
def square() -> WeightedPocset:
    """Two transverse unit walls: the 4-point hypercube."""
    return WeightedPocset([("a", "a*", ONE), ("b", "b*", ONE)])


@lru_cache(maxsize=None)
def path3() -> WeightedPocset:
    """Three nested walls h1 ⊇ h2 ⊇ h3: a 4-point geodesic."""
    return WeightedPocset(
        [("h1", "h1*", ONE), ("h2", "h2*", ONE), ("h3", "h3*", ONE)],
        [("h2", "h1"), ("h3", "h2")],
    )


@lru_cache(maxsize=None)
def tripod() -> WeightedPocset:
    """Three pairwise-disjoint leaf halfspaces around a center."""
    order = [(f"h{i}", f"h{j}*") for i in (1, 2, 3) for j in (1, 2, 3) if i != j]
    return WeightedPocset(
        [("h1", "h1*", ONE), ("h2", "h2*", ONE), ("h3", "h3*", ONE)], order)


@lru_cache(maxsize=None)
def grid() -> WeightedPocset:
    """Product of two 4-point paths: 16 points, rank 2."""
    return pocset_product([path3(), path3()], prefixes=["x.", "y."])


def _f2_vertices(radius: int) -> list:
    out = [""]
    frontier = [""]
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for s in _F2_LETTERS:
                if w and _F2_INV[w[-1]] == s:
                    continue
                nxt.append(w + s)
        out.extend(nxt)
        frontier = nxt
    return out


def _f2_mul(g: str, w: str) -> str:
    """Reduced product of two reduced words."""
    out = list(g)
    for ch in w:
        if out and _F2_INV[out[-1]] == ch:
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def _f2_cone_id(v: str) -> str:
    return "w" + v


@lru_cache(maxsize=None)
def f2ball() -> WeightedPocset:
    """Radius-4 ball of the 4-valent tree (Cayley graph of a rank-2 free
    group); one wall per edge, named by the edge's outer vertex, with the
    ``+`` side the cone away from the origin."""
    verts = _f2_vertices(F2_RADIUS)
    walls = []
    order = []
    cones = [v for v in verts if v]
    for v in cones:
        walls.append((_f2_cone_id(v) + "+", _f2_cone_id(v) + "-", ONE))
    for v in cones:
        for u in cones:
            if u != v and v.startswith(u):
                # cone(v) ⊆ cone(u)
                order.append((_f2_cone_id(v) + "+", _f2_cone_id(u) + "+"))
            elif not v.startswith(u) and not u.startswith(v):
                # disjoint cones
                order.append((_f2_cone_id(v) + "+", _f2_cone_id(u) + "-"))
    return WeightedPocset(walls, order,
                          wall_ids=[_f2_cone_id(v) for v in cones])


# -- named automorphisms --------------------------------------------------------

@lru_cache(maxsize=None)
def named_automorphisms(name: str) -> dict:
    P = pocset(name)
    if name == "SQUARE":
        return {
            "rot": Automorphism.from_mapping(P, {"a": "b", "b": "a*"}, "rot"),
            "swap": Automorphism.from_mapping(P, {"a": "b", "b": "a"}, "swap"),
            "flipa": Automorphism.from_mapping(P, {"a": "a*", "b": "b"}, "flipa"),
            "flipb": Automorphism.from_mapping(P, {"a": "a", "b": "b*"}, "flipb"),
        }
    if name == "PATH3":
        return {
            "flip": Automorphism.from_mapping(
                P, {"h1": "h3*", "h2": "h2*", "h3": "h1*"}, "flip"),
        }
    if name == "TRIPOD":
        return {
            "rot": Automorphism.from_mapping(
                P, {"h1": "h2", "h2": "h3", "h3": "h1"}, "rot"),
            "swap12": Automorphism.from_mapping(
                P, {"h1": "h2", "h2": "h1", "h3": "h3"}, "swap12"),
        }
    if name == "GRID":
        swap = {}
        for h in P.ids:
            if h.startswith("x."):
                swap[h] = "y." + h[2:]
            else:
                swap[h] = "x." + h[2:]
        flipx = {}
        for i in (1, 2, 3):
            flipx[f"x.h{i}"] = f"x.h{4 - i}*"
            flipx[f"y.h{i}"] = f"y.h{i}"
        return {
            "swapxy": Automorphism.from_mapping(P, swap, "swapxy"),
            "flipx": Automorphism.from_mapping(P, flipx, "flipx"),
        }
    return {}


def total_action(name: str, gens: tuple = ()) -> TotalAction:
    P = pocset(name)
    named = named_automorphisms(name)
    if not gens:
        gens = tuple(named)
    chosen = {}
    for g in gens:
        if g == "id":
            chosen[g] = Automorphism.identity(P)
        elif g in named:
            chosen[g] = named[g]
        else:
            raise InvalidInput(f"fixture {name} has no automorphism {g!r}")
    return TotalAction(P, chosen)


# -- window actions -------------------------------------------------------------

@lru_cache(maxsize=None)
def line_window() -> WindowAction:
    """21 nested unit walls on a 22-vertex path, with the one-step shift."""
    walls = []
    order = []
    n = 21
    for i in range(n):
        walls.append((f"w{i:02d}+", f"w{i:02d}-", ONE))
    for i in range(n):
        for j in range(i + 1, n):
            order.append((f"w{j:02d}+", f"w{i:02d}+"))  # deeper up-sides shrink
    P = WeightedPocset(walls, order, wall_ids=[f"w{i:02d}" for i in range(n)])
    smap = {}
    for i in range(n - 1):
        smap[f"w{i:02d}+"] = f"w{i + 1:02d}+"
    s = PartialAutomorphism.from_ids(P, "s", smap)
    return WindowAction(P, {"s": s}, budgets=WINDOW_BUDGETS)


@lru_cache(maxsize=None)
def f2ball_window() -> WindowAction:
    """The tree ball with the two generators acting by left multiplication."""
    P = f2ball()
    gens = {}
    for letter in ("a", "b"):
        hmap = {}
        for v in _f2_vertices(F2_RADIUS):
            if not v:
                continue
            # edge {parent(v), v}; image edge {g parent, g v}
            parent = v[:-1]
            gp = _f2_mul(letter, parent)
            gv = _f2_mul(letter, v)
            if len(gp) > F2_RADIUS or len(gv) > F2_RADIUS:
                continue
            outer, inner = (gv, gp) if len(gv) > len(gp) else (gp, gv)
            # cone(v) maps to the side of the image wall containing gv
            if outer == gv:
                hmap[_f2_cone_id(v) + "+"] = _f2_cone_id(outer) + "+"
                hmap[_f2_cone_id(v) + "-"] = _f2_cone_id(outer) + "-"
            else:
                hmap[_f2_cone_id(v) + "+"] = _f2_cone_id(outer) + "-"
                hmap[_f2_cone_id(v) + "-"] = _f2_cone_id(outer) + "+"
        gens[letter] = PartialAutomorphism.from_ids(P, letter, hmap)
    return WindowAction(P, gens, budgets=WINDOW_BUDGETS)


# -- chain systems ----------------------------------------------------------------

@lru_cache(maxsize=None)
def line_system() -> ChainSystem:
    return ChainSystem([Chain("H", 1, (ONE,))], name="LINE")


@lru_cache(maxsize=None)
def stairflap() -> ChainSystem:
    """Staircase with a one-dimensional flap.

    Chain K is the flap: k_n contains h_m exactly for m > n, is transverse
    to h_m for 1 <= m <= n, and every k_n is contained in h_0.
    """
    zones = {
        ("H", "K"): (
            Zone(None, -1, SUB),   # m <= n - 1: h_n ⊆ k_m
            Zone(0, None, TRANS),  # m >= n: transverse
        ),
    }
    rows = (RowRule("H", 0, "K", SUP, 0, None),)  # h_0 ⊇ every k_m
    return ChainSystem(
        [Chain("H", 1, (ONE,)), Chain("K", 1, (ONE,))],
        zones=zones, rows=rows, name="STAIRFLAP")


CORNERS = ("PP", "PM", "MP", "MM")


@lru_cache(maxsize=None)
def corner_system(corner: str) -> ChainSystem:
    """One corner of the standard cubulation of the plane: two independent
    chains of halfspaces, one per coordinate, all cross-pairs transverse."""
    if corner not in CORNERS:
        raise InvalidInput(f"unknown corner {corner!r}")
    return ChainSystem(
        [Chain("X", 1, (ONE,)), Chain("Y", 1, (ONE,))],
        name=f"CORNER4_{corner}")


def corner_translation(corner: str, axis: str) -> ShiftMap:
    """The unit translation along an axis, as a shift map of the corner
    system: it moves toward a positive corner sign and away from a negative
    one."""
    if axis not in ("x", "y") or corner not in CORNERS:
        raise InvalidInput("axis must be 'x' or 'y' with a valid corner")
    sx = 1 if corner[0] == "P" else -1
    sy = 1 if corner[1] == "P" else -1
    shift = {"X": sx if axis == "x" else 0, "Y": sy if axis == "y" else 0}
    return ShiftMap({"X": "X", "Y": "Y"}, shift, min_index=1)


def corner_rotation(corner: str) -> tuple:
    """Quarter rotation: the target corner plus the system map onto it."""
    nxt = {"PP": "MP", "MP": "MM", "MM": "PM", "PM": "PP"}[corner]
    return nxt, SystemMap({"X": "Y", "Y": "X"}, {"X": 0, "Y": 0})


# -- registry ----------------------------------------------------------------------

POCSET_FIXTURES = ("SQUARE", "PATH3", "TRIPOD", "GRID", "F2BALL")
WINDOW_FIXTURES = ("LINE", "F2BALL")
SYSTEM_FIXTURES = ("LINE", "STAIRFLAP", "CORNER4",
                   "CORNER4_PP", "CORNER4_PM", "CORNER4_MP", "CORNER4_MM")


def pocset(name: str) -> WeightedPocset:
    table = {
        "SQUARE": square, "PATH3": path3, "TRIPOD": tripod,
        "GRID": grid, "F2BALL": f2ball,
    }
    if name not in table:
        raise InvalidInput(f"unknown pocset fixture {name!r}")
    return table[name]()


def window(name: str) -> WindowAction:
    table = {"LINE": line_window, "F2BALL": f2ball_window}
    if name not in table:
        raise InvalidInput(f"unknown window fixture {name!r}")
    return table[name]()


def chain_system(name: str) -> ChainSystem:
    if name == "LINE":
        return line_system()
    if name == "STAIRFLAP":
        return stairflap()
    if name in ("CORNER4", "CORNER4_PP"):
        return corner_system("PP")
    if name.startswith("CORNER4_") and name[8:] in CORNERS:
        return corner_system(name[8:])
    raise InvalidInput(f"unknown chain-system fixture {name!r}")

"""Words, windows, flipping, skewering, facing tuples, ping-pong, classify."""

from fractions import Fraction

import pytest

from mediankit import fixtures as fx
from mediankit.actions import (
    TotalAction,
    check_free_partition,
    classify,
    double_skewer,
    enumerate_words,
    facing_tuple,
    find_flip,
    find_nested,
    is_lineal,
    min_orbit,
    parse_word,
    pingpong,
    reduce_word,
    sector_halfspace,
    strongly_separated,
    wall_inversions,
    word_str,
)
from mediankit.errors import (
    DisplacementTooSmall,
    InvalidInput,
    NotFacing,
    NotTransverse,
)
from mediankit.pocset import WeightedPocset, distance, point_from_ids, points
from mediankit.structure import Automorphism, pocset_product

ONE = Fraction(1)


def vertex_of_line(action, k):
    """The k-th vertex of the LINE window (above walls 0..k-1)."""
    P = action.pocset
    for p in points(P, action.budgets):
        if all((f"w{i:02d}+" in p) == (i < k) for i in range(21)):
            return p
    raise AssertionError("vertex not found")


def f2_vertex(action, word):
    P = action.pocset
    for p in points(P, action.budgets):
        ids = set(p.ids)
        if all((f"w{v}+" in ids) == word.startswith(v)
               for v in [h[1:-1] for h in P.ids if h.endswith("+")]):
            return p
    raise AssertionError("vertex not found")


# -- words -------------------------------------------------------------------

def test_word_parsing_forms():
    names = ("a", "b")
    assert parse_word("a", names) == (("a", 1),)
    assert parse_word("a b^-1", names) == (("a", 1), ("b", -1))
    assert parse_word("ab", names) == (("a", 1), ("b", 1))
    assert parse_word("a^2", names) == (("a", 1), ("a", 1))
    assert parse_word("a^-2", names) == (("a", -1), ("a", -1))
    with pytest.raises(InvalidInput):
        parse_word("c", names)


def test_reduce_word():
    w = (("a", 1), ("a", -1), ("b", 1))
    assert reduce_word(w) == (("b", 1),)


def test_word_enumeration_is_reduced_and_ordered():
    words = list(enumerate_words(("a", "b"), 2))
    assert words[0] == (("a", 1),)
    assert len(words) == 4 + 12
    for w in words:
        assert reduce_word(w) == w


def test_word_evaluation_is_multiplicative(square):
    named = fx.named_automorphisms("SQUARE")
    act = TotalAction(square, {"r": named["rot"], "s": named["swap"]})
    rs = act.evaluate(parse_word("r s", act.gen_names()))
    assert rs.perm == named["rot"].compose(named["swap"]).perm


# -- wall inversions ----------------------------------------------------------

def test_wall_inversions_identity(square):
    act = fx.total_action("SQUARE")
    inv, undecided = wall_inversions(act, ())
    assert inv == () and undecided == 0


def test_point_swap_inverts_its_wall():
    P = WeightedPocset([("a", "a*", ONE)])
    swap = Automorphism.from_mapping(P, {"a": "a*"}, "swap")
    act = TotalAction(P, {"swap": swap})
    inv, _ = wall_inversions(act, (("swap", 1),))
    assert inv == ("a",)


def test_lifted_point_swap_has_no_inversions():
    from mediankit.subdivision import lift, subdivide
    P = WeightedPocset([("a", "a*", ONE)])
    S = subdivide(P)
    swap = Automorphism.from_mapping(P, {"a": "a*"}, "swap")
    act = TotalAction(S.child, {"swap": lift(S, swap)})
    inv, _ = wall_inversions(act, (("swap", 1),))
    assert inv == ()


# -- orbits ----------------------------------------------------------------------

def test_identity_action_has_singleton_orbit(square):
    act = TotalAction(square, {})
    assert min_orbit(act).size == 1


def test_square_dihedral_orbit_is_tight(square):
    act = fx.total_action("SQUARE")
    orb = min_orbit(act)
    assert orb.size == 4


def test_tripod_rotation_fixes_center(tripod):
    act = fx.total_action("TRIPOD", ("rot",))
    orb = min_orbit(act)
    assert orb.size == 1
    assert sorted(orb.orbit[0].ids) == ["h1*", "h2*", "h3*"]


# -- nested halfspace search --------------------------------------------------------

def test_line_nested_search():
    LINE = fx.line_window()
    x = vertex_of_line(LINE, 11)  # center-ish vertex
    res = find_nested(LINE, x, parse_word("s^9", LINE.gen_names()))
    P = LINE.pocset
    g = LINE.evaluate(res.word)
    img = g.apply_idx(P.idx(res.halfspace))
    assert img is not None and img != P.idx(res.halfspace)
    assert P.leq_idx(img, P.idx(res.halfspace))


def test_square_rotation_displacement_too_small(square):
    act = fx.total_action("SQUARE", ("rot",))
    x = point_from_ids(square, ["a", "b"])
    with pytest.raises(DisplacementTooSmall):
        find_nested(act, x, (("rot", 1),))


def test_f2ball_nested_search():
    W = fx.f2ball_window()
    origin = f2_vertex(W, "")
    res = find_nested(W, origin, parse_word("abab", W.gen_names()))
    P = W.pocset
    g = W.evaluate(res.word)
    img = g.apply_idx(P.idx(res.halfspace))
    assert img is not None and P.leq_idx(img, P.idx(res.halfspace))
    assert img != P.idx(res.halfspace)


def test_nested_iteration_increases_displacement():
    """Iterating the nested word strictly increases displacement from a
    basepoint between the nested pair, until the window boundary."""
    for action, word, base, min_steps in (
        (fx.line_window(), "s^9", 11, 5),
        (fx.f2ball_window(), "abab", "", 1),
    ):
        x = vertex_of_line(action, base) if isinstance(base, int) \
            else f2_vertex(action, base)
        res = find_nested(action, x, parse_word(word, action.gen_names()))
        P = action.pocset
        # basepoint inside g'h* ∩ h
        hi = P.idx(res.halfspace)
        g = action.evaluate(res.word)
        img = g.apply_idx(hi)
        pool = [p for p in points(P, action.budgets)
                if p.mask >> hi & 1 and not p.mask >> img & 1]
        y = pool[0]
        dists = [Fraction(0)]
        q = y
        for _ in range(12):
            q2 = action.apply_point(res.word, q)
            if q2 is None or q2 == q:
                break
            q = q2
            dists.append(distance(P, y, q))
        assert all(b > a for a, b in zip(dists, dists[1:]))
        assert len(dists) >= 1 + min_steps


# -- flipping -------------------------------------------------------------------

def test_tripod_rotation_flips_center_side(tripod):
    act = fx.total_action("TRIPOD", ("rot",))
    res = find_flip(act, "h1*")
    assert res.kind == "FLIPPED"
    g = act.evaluate(res.word)
    P = tripod
    img = g.apply_idx(P.idx("h1"))
    assert P.leq_idx(img, P.star[P.idx("h1")])  # disjoint from h1


def test_tripod_rotation_leaf_side_has_invariant_set(tripod):
    act = fx.total_action("TRIPOD", ("rot",))
    res = find_flip(act, "h1")
    assert res.kind == "INVARIANT_SET"
    assert [sorted(p.ids) for p in res.invariant_set] == [["h1*", "h2*", "h3*"]]


def test_identity_group_flip_gives_complement_side(square):
    act = TotalAction(square, {})
    res = find_flip(act, "a")
    assert res.kind == "INVARIANT_SET"
    assert {sorted(p.ids)[0] for p in res.invariant_set} == {"a*"}
    assert len(res.invariant_set) == 2


def test_line_window_flip_is_inconclusive_both_ways():
    """A translation never flips a halfspace of a line (all translates of a
    ray overlap it), and a window cannot certify absence, so both
    orientations come back inconclusive."""
    LINE = fx.line_window()
    up = find_flip(LINE, "w10+", max_len=4)
    down = find_flip(LINE, "w10-", max_len=4)
    assert up.kind == "INCONCLUSIVE" and down.kind == "INCONCLUSIVE"


# -- skewering -------------------------------------------------------------------

def test_line_skewer_both_orientations():
    LINE = fx.line_window()
    res = double_skewer(LINE, "w10+", "w10+", max_len=2)
    assert res.kind == "SKEWERED" and word_str(res.word) == "s"
    res = double_skewer(LINE, "w10-", "w10-", max_len=2)
    assert res.kind == "SKEWERED" and word_str(res.word) == "s^-1"


def test_identity_group_skewer_inconclusive(square):
    act = TotalAction(square, {})
    res = double_skewer(act, "a", "a", max_len=3)
    assert res.kind == "INCONCLUSIVE"


def test_f2ball_skewer_returns_a_squared():
    W = fx.f2ball_window()
    res = double_skewer(W, "waa+", "wa+", max_len=3)
    assert res.kind == "SKEWERED"
    assert res.word == (("a", 1), ("a", 1))
    assert res.gap and res.gap > 0


def test_skewer_requires_nested_pair(square):
    with pytest.raises(InvalidInput):
        double_skewer(TotalAction(square, {}), "a", "b")


# -- separation and facing tuples ----------------------------------------------------

def test_tripod_strong_separation(tripod):
    assert strongly_separated(tripod, "h1", "h2")


def test_square_sides_not_strongly_separated(square):
    assert not strongly_separated(square, "a", "b*")


def test_grid_parallel_walls_not_strongly_separated(grid):
    # disjoint walls of one factor: the other factor's walls are transverse
    # to both
    assert grid.leq("x.h3", "x.h1")
    assert not strongly_separated(grid, "x.h3", "x.h1*")


def test_tripod_facing_triple(tripod):
    res = facing_tuple(tripod, 3)
    assert res.kind == "FOUND"
    assert res.tuple_ids == ("h1", "h2", "h3")


def test_square_has_no_facing_triple(square):
    res = facing_tuple(square, 3)
    assert res.kind == "NOT_FOUND"


def test_not_found_matches_brute_force(rng):
    import itertools
    from mediankit import randomgen as rg
    for _ in range(10):
        P = rg.random_pocset(rng, max_walls=6, max_points=12)
        res = facing_tuple(P, 3)
        brute = any(
            P.leq(a, P.star_of(b)) and P.leq(a, P.star_of(c))
            and P.leq(b, P.star_of(c))
            for a, b, c in itertools.combinations(P.ids, 3))
        assert (res.kind == "FOUND") == brute


def test_f2ball_facing_four_tuple_with_upgrade():
    W = fx.f2ball_window()
    res = facing_tuple(W.pocset, 4, action=W, max_len=3, strong=True)
    assert res.kind == "FOUND"
    P = W.pocset
    for i, a in enumerate(res.tuple_ids):
        for b in res.tuple_ids[i + 1:]:
            assert P.leq(a, P.star_of(b))
            assert strongly_separated(P, a, b)


# -- sectors ---------------------------------------------------------------------

def test_square_sector_gives_product_witness(square):
    res = sector_halfspace(square, "a", "b")
    assert res.kind == "PRODUCT"
    assert sorted(len(p) for p in res.partition) == [2, 2]


def test_two_by_three_grid_product_witness():
    short = WeightedPocset([("v", "v*", ONE)])
    long = fx.path3()
    P = pocset_product([short, long], prefixes=["x.", "y."])
    res = sector_halfspace(P, "x.v", "y.h2")
    assert res.kind == "PRODUCT"


def test_sector_requires_transverse_pair():
    W = fx.f2ball()
    with pytest.raises(NotTransverse):
        sector_halfspace(W, "wa+", "wb+")


def test_sector_halfspace_found_when_a_wall_sits_inside():
    # two transverse walls plus a third wall inside one sector
    P = WeightedPocset(
        [("a", "a*", ONE), ("b", "b*", ONE), ("c", "c*", ONE)],
        [("c", "a"), ("c", "b")])
    res = sector_halfspace(P, "a", "b")
    assert res.kind == "HALFSPACE"
    assert res.halfspace == "c"
    assert res.sector == ("a", "b")


# -- ping-pong -------------------------------------------------------------------

def test_f2ball_certificate():
    W = fx.f2ball_window()
    a = parse_word("a", W.gen_names())
    b = parse_word("b", W.gen_names())
    cert = pingpong(W, a, b, "wA+", "wB+", max_len=3)
    assert cert.verified and cert.stabilizer_trivial
    assert cert.words_checked == 52  # reduced nontrivial words to length 3
    assert cert.base_inclusions == 12


def test_pingpong_rejects_non_facing_data(square):
    act = fx.total_action("SQUARE", ("rot",))
    r = parse_word("rot", act.gen_names())
    with pytest.raises(NotFacing):
        pingpong(act, r, r, "a", "b")


def test_pingpong_rejects_equal_walls():
    W = fx.f2ball_window()
    a = parse_word("a", W.gen_names())
    b = parse_word("b", W.gen_names())
    with pytest.raises(NotFacing):
        pingpong(W, a, b, "wA+", "wA+")


def test_free_partition_checker():
    W = fx.f2ball_window()
    P = W.pocset
    assignment = {}
    for h in P.ids:
        assignment[h] = h[1:-1]  # owner: the outer vertex of the wall
    rep = check_free_partition(W, parse_word("a", ("a", "b")),
                               parse_word("b", ("a", "b")), assignment)
    assert rep.ok, rep.failures[:3]


# -- classification ----------------------------------------------------------------

def test_classify_square_dihedral(square):
    rep = classify(fx.total_action("SQUARE"))
    assert rep.kind == "ROLLER_ELEMENTARY"
    assert rep.stage == 1
    assert rep.witness and "finiteOrbit" in rep.witness
    assert rep.witness["finiteOrbit"]["size"] == 4


def test_classify_identity_on_tripod(tripod):
    rep = classify(TotalAction(tripod, {}))
    assert rep.kind == "ROLLER_ELEMENTARY"
    assert "fixedPoint" in rep.witness


def test_classify_total_actions_never_inconclusive(rng):
    from mediankit import randomgen as rg
    from mediankit.structure import automorphisms
    for _ in range(5):
        P = rg.random_pocset(rng, max_walls=5, max_points=10)
        auts = automorphisms(P)
        act = TotalAction(P, {f"g{i}": g for i, g in enumerate(auts[:3])})
        rep = classify(act)
        assert rep.kind != "INCONCLUSIVE"
        assert rep.stage <= 2


def test_classify_f2ball_finds_free_subgroup():
    W = fx.f2ball_window()
    rep = classify(W, max_len=3)
    assert rep.kind == "FREE_SUBGROUP"
    assert rep.witness["verified"]


def test_classify_line_is_inconclusive():
    rep = classify(fx.line_window(), max_len=3)
    assert rep.kind == "INCONCLUSIVE"
    assert rep.stage == 3


# -- lineality ---------------------------------------------------------------------

def test_path3_is_lineal(path3):
    res = is_lineal(path3)
    assert res.found and len(res.pairs) == 1
    x, y = res.pairs[0]
    assert {tuple(sorted(x.ids)), tuple(sorted(y.ids))} == {
        ("h1", "h2", "h3"), ("h1*", "h2*", "h3*")}


def test_square_has_two_diagonals(square):
    res = is_lineal(square)
    assert res.found and len(res.pairs) == 2


def test_tripod_not_lineal(tripod):
    assert not is_lineal(tripod).found

"""Chain systems: closures, almost containment, the graph, characters."""

from fractions import Fraction

import pytest

from mediankit import boundary as bd
from mediankit import fixtures as fx
from mediankit import randomgen as rg
from mediankit.boundary import (
    Chain,
    ChainSystem,
    RowRule,
    ShiftMap,
    SUB,
    SUP,
    almost_contained,
    almost_disjoint,
    chi_vector,
    closure,
    dilworth_chains,
    dot_export,
    equivalent,
    identity_shift,
    in_chi_kernel,
    is_ubs,
    max_antichain_brute,
    min_chain_cover,
    minimal_tail,
    tail,
    transfer_character,
    truncation_antichain_bound,
    ubs_graph,
    ubs_poset,
    validate_system,
)
from mediankit.errors import ClassNotPreserved, ClassPermuted, InvalidInput

ONE = Fraction(1)


# -- validation -------------------------------------------------------------

def test_fixture_systems_validate():
    for name in ("LINE", "STAIRFLAP", "CORNER4_PP"):
        assert validate_system(fx.chain_system(name)).ok


def test_antisymmetry_violation_is_flagged():
    S = ChainSystem(
        [Chain("H", 1, (ONE,)), Chain("K", 1, (ONE,))],
        head={("H", 5, "K", 0): SUB, ("K", 0, "H", 5): SUB})
    rep = validate_system(S)
    assert not rep.ok


def test_zero_weight_rejected():
    S = ChainSystem([Chain("H", 1, (Fraction(0),))])
    assert any(f["code"] == "NONPOSITIVE_WEIGHT"
               for f in validate_system(S).failures)


def test_random_systems_validate(rng):
    for _ in range(30):
        assert validate_system(rg.random_system(rng)).ok


# -- closures ---------------------------------------------------------------

def test_line_closure_of_tail_is_itself():
    L = fx.line_system()
    assert closure(L, tail("H", 3)) == bd.UBS({"H": (3, None)})


def test_stairflap_closure_of_full_tail_contains_all_k():
    S = fx.stairflap()
    cl = closure(S, tail("H", 0))
    assert cl.intervals["K"] == (0, None)


def test_stairflap_closure_of_index_one_tail_contains_no_k():
    S = fx.stairflap()
    cl = closure(S, tail("H", 1))
    assert "K" not in cl.intervals
    assert cl.intervals["H"] == (1, None)


def test_closure_is_idempotent_on_random_systems(rng):
    for _ in range(15):
        S = rg.random_system(rng, max_chains=4)
        cid = S.chain_order[0]
        cl = closure(S, tail(cid, 2))
        assert closure(S, dict(cl.intervals)) == cl
        assert is_ubs(S, cl)


# -- almost containment ---------------------------------------------------------

def test_almost_containment_is_reflexive():
    S = fx.stairflap()
    U = closure(S, tail("H", 1))
    res = almost_contained(S, U, U)
    assert res.holds and res.measure == 0


def test_line_tails_are_equivalent():
    L = fx.line_system()
    t5, t3 = closure(L, tail("H", 5)), closure(L, tail("H", 3))
    a = almost_contained(L, t5, t3)
    b = almost_contained(L, t3, t5)
    assert a.holds and a.measure == 0
    assert b.holds and b.measure == 2  # indices 3 and 4, unit weights


def test_stairflap_tails_not_mutually_almost_contained():
    S = fx.stairflap()
    big = closure(S, tail("H", 0))
    small = closure(S, tail("H", 1))
    assert almost_contained(S, small, big).holds
    assert not almost_contained(S, big, small).holds  # all k_n escape


def test_almost_disjoint_iff_intersection_bounded():
    S = fx.stairflap()
    h_min = closure(S, tail("H", 1))
    k_min = closure(S, tail("K", 1))
    assert almost_disjoint(S, h_min, k_min)
    big = closure(S, tail("H", 0))
    assert not almost_disjoint(S, big, k_min)
    # both sides computed independently: bounded intersection per chain
    inter = {
        c: iv for c, iv in (
            (c, _intersect(h_min.intervals.get(c), k_min.intervals.get(c)))
            for c in S.chain_order) if iv}
    assert all(hi is not None for _, hi in inter.values())


def _intersect(a, b):
    if a is None or b is None:
        return None
    lo = max(a[0], b[0])
    if a[1] is None:
        hi = b[1]
    elif b[1] is None:
        hi = a[1]
    else:
        hi = min(a[1], b[1])
    if hi is not None and hi < lo:
        return None
    return (lo, hi)


# -- Dilworth ---------------------------------------------------------------------

def test_dilworth_chain_and_antichain_examples():
    S = fx.stairflap()
    assert dilworth_chains(S, [("H", i) for i in range(5)]) == 1
    assert dilworth_chains(S, [("H", 1), ("K", 0), ("K", 1)]) == 2
    # three pairwise transverse elements
    assert dilworth_chains(S, [("H", 1), ("H", 2), ("K", 2)]) == 2


def test_dilworth_matches_brute_force_antichain(rng):
    for _ in range(30):
        size = rng.randint(1, 11)
        less = rg.random_poset(rng, size)
        assert min_chain_cover(list(range(size)), less) == \
            max_antichain_brute(list(range(size)), less)


# -- minimal tails ------------------------------------------------------------------

def test_line_minimal_tail_is_zero():
    assert minimal_tail(fx.line_system(), "H")[0] == 0


def test_stairflap_minimal_tails():
    S = fx.stairflap()
    n_h, rep_h = minimal_tail(S, "H")
    assert n_h == 1
    assert "K" not in rep_h.intervals
    # the K-chain closure is already minimal at index 0: the index-1 tail
    # is equivalent to it
    n_k, rep_k = minimal_tail(S, "K")
    assert n_k == 0
    assert equivalent(S, closure(S, tail("K", 1)), rep_k)


# -- the graph ----------------------------------------------------------------------

def test_line_graph():
    G = ubs_graph(fx.line_system())
    assert len(G.vertices) == 1 and G.edges == ()


def test_stairflap_graph():
    G = ubs_graph(fx.stairflap())
    assert G.vertex_labels() == ("H[1:]", "K[0:]")
    assert G.edges == ((0, 1),)


def test_independent_chains_have_no_edges():
    C = fx.corner_system("PP")
    G = ubs_graph(C)
    assert len(G.vertices) == 2 and G.edges == ()


def test_graph_laws_on_random_systems(rng):
    for _ in range(40):
        S = rg.random_system(rng)
        G = ubs_graph(S)  # internal law assertions must not fire
        assert len(G.vertices) <= truncation_antichain_bound(S)
        edges = set(G.edges)
        for i, j in edges:
            for j2, k in edges:
                if j2 == j and i != k:
                    assert (i, k) in edges


def test_dot_export():
    G = ubs_graph(fx.stairflap())
    dot = dot_export(G)
    assert dot.startswith("digraph")
    assert '"H[1:]" -> "K[0:]"' in dot


# -- the poset ---------------------------------------------------------------------

def test_line_poset_has_single_class():
    assert len(ubs_poset(fx.line_system())) == 1


def test_stairflap_poset_has_three_classes():
    out = ubs_poset(fx.stairflap())
    assert sorted(labs for labs, _ in out) == [
        ("H[1:]",), ("H[1:]", "K[0:]"), ("K[0:]",)]
    for labs, rep in out:
        assert bd.minimal_classes_of(fx.stairflap(), rep) == labs


def test_two_incomparable_vertices_give_three_classes():
    out = ubs_poset(fx.corner_system("PP"))
    assert len(out) == 3


# -- shift maps and characters --------------------------------------------------------

def test_identity_character_is_zero():
    S = fx.stairflap()
    assert chi_vector(S, identity_shift(S)) == (0, 0)
    assert in_chi_kernel(S, identity_shift(S))


def test_line_shift_character():
    L = fx.line_system()
    g = ShiftMap({"H": "H"}, {"H": 1}, 0)
    U = closure(L, tail("H", 0))
    assert transfer_character(L, U, g) == 1
    assert chi_vector(L, g) == (1,)


def test_stairflap_shift_character():
    S = fx.stairflap()
    g = ShiftMap({"H": "H", "K": "K"}, {"H": 1, "K": 1}, 0)
    G = ubs_graph(S)
    assert transfer_character(S, G.vertices[0][1], g) == 1
    assert chi_vector(S, g) == (1, 1)


def test_character_invariant_under_equivalent_representatives():
    S = fx.stairflap()
    g = ShiftMap({"H": "H", "K": "K"}, {"H": 1, "K": 1}, 0)
    for shift in (0, 1, 2, 3):
        U = closure(S, tail("H", 1 + shift))
        assert transfer_character(S, U, g) == 1


def test_character_additive_over_minimal_classes():
    S = fx.stairflap()
    g = ShiftMap({"H": "H", "K": "K"}, {"H": 2, "K": 3}, 0)
    big = closure(S, tail("H", 0))
    parts = [transfer_character(S, rep, g) for _, rep, _ in ubs_graph(S).vertices]
    assert transfer_character(S, big, g) == sum(parts) == 5


def test_character_is_a_homomorphism():
    L = fx.line_system()
    g = ShiftMap({"H": "H"}, {"H": 2}, 0)
    h = ShiftMap({"H": "H"}, {"H": 3}, 0)
    assert chi_vector(L, g.compose(h))[0] == \
        chi_vector(L, g)[0] + chi_vector(L, h)[0]


def test_negative_shift_character():
    C = fx.corner_system("MP")
    tx = fx.corner_translation("MP", "x")
    assert chi_vector(C, tx) == (-1, 0)


def test_class_permuted_is_reported():
    C = fx.corner_system("PP")
    rot = ShiftMap({"X": "Y", "Y": "X"}, {"X": 0, "Y": 0}, 0)
    with pytest.raises(ClassPermuted):
        chi_vector(C, rot)


def test_shift_must_preserve_weights():
    S = ChainSystem([Chain("H", 2, (ONE, Fraction(2)))])
    g = ShiftMap({"H": "H"}, {"H": 1}, 0)
    with pytest.raises(InvalidInput):
        transfer_character(S, closure(S, tail("H", 0)), g)


def test_weighted_character_value():
    S = ChainSystem([Chain("H", 2, (Fraction(1, 2), Fraction(3, 2)))])
    g = ShiftMap({"H": "H"}, {"H": 2}, 0)  # shift by a full period
    U = closure(S, tail("H", 0))
    assert transfer_character(S, U, g) == 2  # one period block of mass 2


def test_corner_rotation_cycle():
    cur = "PP"
    seen = [cur]
    for _ in range(4):
        nxt, m = fx.corner_rotation(cur)
        assert bd.verify_system_map(
            fx.corner_system(cur), fx.corner_system(nxt), m)
        cur = nxt
        seen.append(cur)
    assert seen == ["PP", "MP", "MM", "PM", "PP"]


def test_closure_with_bounded_cross_chain_interval():
    """A head-region configuration where the closure of one chain's tail
    picks up exactly one exceptional element of the other chain."""
    rows = tuple(
        [RowRule("H", m, "K", SUP, 3, None) for m in (0, 1, 2)]  # h_m ⊇ k_{≥3}
        + [RowRule("K", n, "H", SUP, 8, None) for n in (0, 1, 2, 3)]  # k_n ⊇ h_{≥8}
    )
    S = ChainSystem([Chain("H", 1, (ONE,)), Chain("K", 1, (ONE,))], rows=rows)
    assert validate_system(S).ok
    cl = closure(S, tail("H", 0))
    assert cl.intervals["H"] == (0, None)
    assert cl.intervals["K"] == (3, 3)  # k_3 alone sits between h_8 and h_2
    # deeper tails drop the exceptional element: nothing above k_3 remains
    assert "K" not in closure(S, tail("H", 3)).intervals


def test_class_not_preserved_is_reported():
    C = fx.corner_system("PP")
    rot = ShiftMap({"X": "Y", "Y": "X"}, {"X": 0, "Y": 0}, 0)
    x_class = closure(C, tail("X", 0))
    with pytest.raises(ClassNotPreserved):
        transfer_character(C, x_class, rot)

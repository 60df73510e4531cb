"""Rank, transversality, decomposition and automorphism groups."""

from fractions import Fraction

import pytest

from mediankit import fixtures as fx
from mediankit import randomgen as rg
from mediankit.errors import NotAnAutomorphism, WallBudgetExceeded
from mediankit.pocset import Point, WeightedPocset, distance, points, validate
from mediankit.structure import (
    Automorphism,
    automorphisms,
    decompose,
    factor_permutation,
    max_clique_lex,
    pocset_product,
    rank,
    transverse,
)

ONE = Fraction(1)


def test_transversality_examples(square, path3):
    assert transverse(square, "a", "b")
    assert not transverse(path3, "h1", "h2")
    assert not transverse(square, "a", "a")
    assert not transverse(square, "a", "a*")


def test_rank_examples(square, grid):
    single = WeightedPocset([])
    assert rank(single) == 0
    assert rank(square) == 2
    assert rank(grid) == 2


def test_rank_of_tree_is_one():
    assert rank(fx.f2ball()) == 1


def test_max_clique_is_lexicographically_least(grid):
    assert max_clique_lex(grid) == ("x.h1", "y.h1")


def test_decompose_square(square):
    D = decompose(square)
    assert len(D.factors) == 2
    assert all(F.wall_count == 1 for F in D.factors)


def test_decompose_tripod_is_irreducible(tripod):
    assert len(decompose(tripod).factors) == 1


def test_decompose_grid(grid):
    D = decompose(grid)
    assert len(D.factors) == 2
    assert sorted(sorted(F.ids) for F in D.factors) == [
        sorted(["x.h1", "x.h1*", "x.h2", "x.h2*", "x.h3", "x.h3*"]),
        sorted(["y.h1", "y.h1*", "y.h2", "y.h2*", "y.h3", "y.h3*"]),
    ]


def test_factors_are_standalone_pocsets(grid):
    for F in decompose(grid).factors:
        assert validate(F).ok
        assert rank(F) == 1


def test_rank_additivity_on_random_products(rng):
    for _ in range(20):
        A = rg.random_pocset(rng, max_walls=5, max_points=10)
        B = rg.random_pocset(rng, max_walls=5, max_points=10)
        prod = pocset_product([A, B], prefixes=["x.", "y."])
        assert rank(prod) == rank(A) + rank(B)


def test_decompose_recovers_random_irreducible_factors(rng):
    made = 0
    while made < 15:
        A = rg.random_pocset(rng, max_walls=5, max_points=10)
        B = rg.random_pocset(rng, max_walls=5, max_points=10)
        if len(decompose(A).factors) != 1 or len(decompose(B).factors) != 1:
            continue
        made += 1
        prod = pocset_product([A, B], prefixes=["x.", "y."])
        D = decompose(prod)
        got = sorted(frozenset(F.ids) for F in D.factors)
        want = sorted([frozenset("x." + h for h in A.ids),
                       frozenset("y." + h for h in B.ids)])
        assert got == want


def test_product_points_biject_and_distances_add(rng):
    for _ in range(10):
        A = rg.random_pocset(rng, max_walls=4, max_points=8)
        B = rg.random_pocset(rng, max_walls=4, max_points=8)
        prod = pocset_product([A, B], prefixes=["x.", "y."])
        pa, pb = points(A), points(B)
        pp = points(prod)
        assert len(pp) == len(pa) * len(pb)
        # distances add along the split
        def split(p):
            ma = 0
            mb = 0
            for h in p.ids:
                if h.startswith("x."):
                    ma |= 1 << A.idx(h[2:])
                else:
                    mb |= 1 << B.idx(h[2:])
            return Point(A, ma), Point(B, mb)
        for i in range(0, len(pp), max(1, len(pp) // 6)):
            for j in range(0, len(pp), max(1, len(pp) // 6)):
                xa, xb = split(pp[i])
                ya, yb = split(pp[j])
                assert distance(prod, pp[i], pp[j]) == \
                    distance(A, xa, ya) + distance(B, xb, yb)


def test_square_automorphism_group_is_dihedral(square):
    auts = automorphisms(square)
    assert len(auts) == 8
    assert any(g.is_identity() for g in auts)


def test_unequal_weights_kill_the_swap():
    P = WeightedPocset([("a", "a*", Fraction(3, 2)), ("b", "b*", ONE)])
    auts = automorphisms(P)
    assert len(auts) == 4
    for g in auts:
        assert g.apply("a") in ("a", "a*")


def test_tripod_automorphisms(tripod):
    assert len(automorphisms(tripod)) == 6  # leaf permutations


def test_automorphism_budget():
    with pytest.raises(WallBudgetExceeded):
        automorphisms(fx.f2ball())


def test_automorphisms_form_a_group(square):
    auts = automorphisms(square)
    perms = {g.perm for g in auts}
    for g in auts:
        assert g.inverse().perm in perms
        for h in auts:
            assert g.compose(h).perm in perms


def test_factor_permutation_examples(square):
    D = decompose(square)
    ident = Automorphism.identity(square)
    assert factor_permutation(square, D, ident) == (0, 1)
    swap = fx.named_automorphisms("SQUARE")["swap"]
    assert factor_permutation(square, D, swap) == (1, 0)


def test_grid_factor_preserving_reflection(grid):
    D = decompose(grid)
    flipx = fx.named_automorphisms("GRID")["flipx"]
    assert factor_permutation(grid, D, flipx) == (0, 1)
    swap = fx.named_automorphisms("GRID")["swapxy"]
    assert factor_permutation(grid, D, swap) == (1, 0)


def test_factor_permutation_respects_composition(grid):
    D = decompose(grid)
    named = fx.named_automorphisms("GRID")
    g, h = named["swapxy"], named["flipx"]
    pg = factor_permutation(grid, D, g)
    ph = factor_permutation(grid, D, h)
    pgh = factor_permutation(grid, D, g.compose(h))
    assert pgh == tuple(pg[ph[i]] for i in range(len(pg)))


def test_bad_mapping_raises(square):
    with pytest.raises(NotAnAutomorphism):
        Automorphism.from_mapping(square, {"a": "a", "b": "a"})

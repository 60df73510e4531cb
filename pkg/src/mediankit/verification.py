"""Certificate re-verification using core primitives only.

Every verdict the search commands emit names concrete halfspaces, so a
skeptical caller can re-check it against the pocset with point sets and
distances alone, trusting no search bookkeeping.  This module deliberately
imports nothing outside the core.
"""

from __future__ import annotations

from .config import DEFAULT_BUDGETS
from .pocset import (
    WeightedPocset,
    distance,
    halfspace_point_masks,
    points,
)


def _point_sets(P: WeightedPocset, budgets=DEFAULT_BUDGETS):
    return points(P, budgets), halfspace_point_masks(P, budgets)


def verify_flip(P: WeightedPocset, h: str, image_of_star: str,
                budgets=DEFAULT_BUDGETS) -> dict:
    """g flips h when g(h*) is disjoint from h* and differs from h."""
    _, masks = _point_sets(P, budgets)
    hs = P.star[P.idx(h)]
    img = P.idx(image_of_star)
    return {
        "disjointFromComplement": masks[img] & masks[hs] == 0,
        "notEqualToHalfspace": img != P.idx(h),
    }


def verify_skewer(P: WeightedPocset, h: str, k: str, image_of_k: str,
                  budgets=DEFAULT_BUDGETS) -> dict:
    """Both displayed conditions: gk strictly inside h, and positive
    distance from gk to h*."""
    pts, masks = _point_sets(P, budgets)
    hi, ki, gi = P.idx(h), P.idx(k), P.idx(image_of_k)
    proper = masks[gi] & ~masks[hi] == 0 and masks[gi] != masks[hi]
    nested = P.leq_idx(hi, ki)
    gap = None
    star_mask = masks[P.star[hi]]
    for i in _bits(masks[gi]):
        for j in _bits(star_mask):
            d = distance(P, pts[i], pts[j])
            if gap is None or d < gap:
                gap = d
    return {
        "properlyContained": proper,
        "hInsideK": nested,
        "gapToComplement": str(gap),
        "gapPositive": gap is not None and gap > 0,
    }


def verify_facing(P: WeightedPocset, tuple_ids, strong: bool,
                  budgets=DEFAULT_BUDGETS) -> dict:
    """Pairwise disjointness (and, if asked, absence of common
    transversals) from raw point sets."""
    _, masks = _point_sets(P, budgets)
    idxs = [P.idx(h) for h in tuple_ids]
    disjoint = all(
        masks[a] & masks[b] == 0
        for p, a in enumerate(idxs) for b in idxs[p + 1:]
    )
    out = {"pairwiseDisjoint": disjoint}
    if strong:
        clean = True
        for p, a in enumerate(idxs):
            for b in idxs[p + 1:]:
                for j in range(P.n):
                    if j in (a, P.star[a], b, P.star[b]):
                        continue
                    if _sets_transverse(masks, P, j, a) and \
                            _sets_transverse(masks, P, j, b):
                        clean = False
        out["noCommonTransversal"] = clean
    return out


def _sets_transverse(masks, P: WeightedPocset, i: int, j: int) -> bool:
    return all(
        masks[x] & masks[y] != 0
        for x in (i, P.star[i]) for y in (j, P.star[j])
    )


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low

"""Search and enumeration budgets.

All potentially exponential procedures are guarded by explicit caps.  The
defaults suit desk-scale inputs; the ``MEDIANKIT_BUDGET`` environment
variable overrides them for a whole CLI invocation, either as a bare integer
(new wall cap for point enumeration) or as comma-separated ``key:value``
pairs, e.g. ``MEDIANKIT_BUDGET="point_walls:24,word_length:6"``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Budgets:
    point_walls: int = 20      # wall cap for ultrafilter enumeration
    max_points: int = 1 << 20  # hard cap on enumerated ultrafilters
    clique_walls: int = 64     # cap on walls taking part in a transversality
    aut_walls: int = 12        # wall cap for automorphism enumeration
    group_order: int = 20000   # cap on generated group size
    word_length: int = 4       # default word-search depth

    def with_(self, **kw) -> "Budgets":
        return replace(self, **kw)


DEFAULT_BUDGETS = Budgets()


def budgets_from_env(base: Budgets = DEFAULT_BUDGETS) -> Budgets:
    raw = os.environ.get("MEDIANKIT_BUDGET", "").strip()
    if not raw:
        return base
    if raw.isdigit():
        return base.with_(point_walls=int(raw))
    values = {}
    for part in raw.split(","):
        key, _, val = part.partition(":")
        key = key.strip()
        if key in Budgets.__dataclass_fields__ and val.strip().isdigit():
            values[key] = int(val)
    return base.with_(**values)

"""Finite index posets with a rank function derived from a cofinal subset."""

from __future__ import annotations

from functools import lru_cache
from typing import Hashable, Iterable

from .errors import ValidationError

__all__ = ["RankedPoset", "TOP"]


class _Top:
    """The extra element above everything (the index of the whole iteration)."""

    def __repr__(self) -> str:
        return "TOP"

    def __reduce__(self):
        return "TOP"


TOP = _Top()


def _key(x) -> str:
    return str(x)


class RankedPoset:
    """A finite strict order ``<`` on ``elements`` with cofinal subset ``R``.

    Rank on ``R ∪ {TOP}`` is the usual well-founded rank; any other element
    gets the least rank of an element of ``R ∪ {TOP}`` strictly above it.
    The given pairs are transitively closed on construction.
    """

    def __init__(self, elements: Iterable[Hashable], less: Iterable[tuple], cofinal: Iterable | None = None):
        self.elements: tuple = tuple(sorted(set(elements), key=_key))
        elset = set(self.elements)
        if len({_key(x) for x in elset}) != len(elset):
            raise ValidationError("element names must be distinct as strings")
        up: dict = {x: set() for x in self.elements}
        for a, b in less:
            if a not in elset or b not in elset:
                raise ValidationError(f"order pair ({a!r}, {b!r}) mentions an unknown element")
            up[a].add(b)
        # transitive closure (tiny posets, Floyd-Warshall style)
        for k in self.elements:
            for i in self.elements:
                if k in up[i]:
                    up[i] |= up[k]
        for x in self.elements:
            if x in up[x]:
                raise ValidationError(f"order is not irreflexive: {x!r} < {x!r}")
        self._up = {x: frozenset(v) for x, v in up.items()}
        self._down = {x: frozenset(y for y in self.elements if x in self._up[y]) for x in self.elements}
        self.cofinal: frozenset = frozenset(self.elements if cofinal is None else cofinal)
        if not self.cofinal <= elset:
            raise ValidationError("cofinal set must be a subset of the elements")
        for a in self.elements:
            if a not in self.cofinal and not (self._up[a] & self.cofinal):
                raise ValidationError(f"{a!r} has no upper bound in the cofinal set")
        self._rank = self._compute_ranks()

    def _compute_ranks(self) -> dict:
        rank: dict = {}

        def rk(b):
            if b not in rank:
                below = [c for c in self._down[b] if c in self.cofinal]
                rank[b] = max((rk(c) + 1 for c in below), default=0)
            return rank[b]

        for b in sorted(self.cofinal, key=_key):
            rk(b)
        rank[TOP] = max((r + 1 for r in rank.values()), default=0)
        for a in self.elements:
            if a not in self.cofinal:
                rank[a] = min(rank[b] for b in self._up[a] if b in self.cofinal)
        return rank

    # -- basic queries -------------------------------------------------------

    def __contains__(self, x) -> bool:
        return x in self._up

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        pairs = sorted((_key(a), _key(b)) for a in self.elements for b in self._up[a])
        return f"RankedPoset({list(map(_key, self.elements))}, {pairs}, R={sorted(map(_key, self.cofinal))})"

    def lt(self, x, y) -> bool:
        if y is TOP:
            return x is not TOP
        if x is TOP:
            return False
        return y in self._up[x]

    def le(self, x, y) -> bool:
        return x == y or self.lt(x, y)

    def comparable(self, x, y) -> bool:
        return self.le(x, y) or self.le(y, x)

    def rank(self, x) -> int:
        return self._rank[x]

    rank_of = rank

    @property
    def top_rank(self) -> int:
        return self._rank[TOP]

    def ll(self, x, y) -> bool:
        """``x << y``: below in the order and strictly lower in rank."""
        return self.lt(x, y) and self.rank(x) < self.rank(y)

    @lru_cache(maxsize=None)
    def q_below(self, x) -> frozenset:
        """``Q_x = {y : y << x}``."""
        return frozenset(y for y in self.elements if self.ll(y, x))

    def below(self, x) -> frozenset:
        """``{y : y <= x}``."""
        return self._down[x] | {x}

    def above(self, x) -> frozenset:
        return self._up[x]

    def rank_below(self, xi: int) -> frozenset:
        """``Q_{<xi}``."""
        return frozenset(y for y in self.elements if self.rank(y) < xi)

    # -- sets of coordinates -------------------------------------------------

    def ranks(self, D: Iterable) -> list[int]:
        """``bar D`` in increasing order."""
        return sorted({self.rank(x) for x in D})

    def stratum(self, D: Iterable, xi: int) -> frozenset:
        """``D_xi``."""
        return frozenset(x for x in D if self.rank(x) == xi)

    def below_rank(self, D: Iterable, xi: int) -> frozenset:
        """``D_{<xi}``."""
        return frozenset(x for x in D if self.rank(x) < xi)

    def down_in(self, D: Iterable, x) -> frozenset:
        """``D_{<=x}``: same-rank elements of D below or equal to x."""
        r = self.rank(x)
        return frozenset(y for y in D if self.rank(y) == r and self.le(y, x))

    def is_downward_closed_in(self, E: Iterable, D: Iterable) -> bool:
        E = frozenset(E)
        return all(y in E for x in E for y in D if self.le(y, x))

    def is_downward_closed(self, A: Iterable) -> bool:
        return self.is_downward_closed_in(A, self.elements)

    def downward_closure(self, E: Iterable, D: Iterable | None = None) -> frozenset:
        """Least subset of D containing E and closed downward inside D."""
        D = self.elements if D is None else D
        E = frozenset(E)
        return E | frozenset(y for y in D if any(self.le(y, x) for x in E))

    @lru_cache(maxsize=4096)
    def downward_closed_subsets(self, D: frozenset) -> tuple[frozenset, ...]:
        """All nonempty subsets of D that are downward closed in D."""
        items = sorted(D, key=_key)
        if len(items) > 16:
            raise ValidationError("stratum too large to enumerate its down-sets")
        out = []
        for bits in range(1, 1 << len(items)):
            E = frozenset(items[i] for i in range(len(items)) if bits >> i & 1)
            if self.is_downward_closed_in(E, D):
                out.append(E)
        return tuple(out)

    def sort(self, xs: Iterable) -> list:
        return sorted(xs, key=_key)

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "elements": [x for x in self.elements],
            "order": sorted([a, b] for a in self.elements for b in self._up[a]),
            "cofinal": sorted(self.cofinal, key=_key),
        }

    @classmethod
    def from_json(cls, obj: dict) -> RankedPoset:
        return cls(obj["elements"], [tuple(p) for p in obj.get("order", [])], obj.get("cofinal"))

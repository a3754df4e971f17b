"""Localization forcing LOC and its weighted variant LOC*.

Both are single-coordinate versions of the conditions used by the main
iteration: a partial slalom ``s`` promising to capture every function in
``F`` from ``len(s)`` on.  LOC* additionally carries a width budget ``w``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import PreconditionViolated, ValidationError
from .names import GroundFunction
from .slaloms import PartialSlalom

__all__ = [
    "LocCondition",
    "LocStarCondition",
    "loc_leq",
    "loc_prolong",
    "loc_add_function",
    "loc_linked_key",
    "loc_link",
    "loc_star_leq",
    "loc_star_prolong",
    "loc_star_add_function",
    "loc_star_linked_key",
    "loc_star_link",
    "LocStarRun",
    "loc_star_generic_run",
]


def _image(functions: Iterable[GroundFunction], n: int) -> frozenset[int]:
    return frozenset(f(n) for f in functions)


# ---------------------------------------------------------------------------
# LOC
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocCondition:
    s: PartialSlalom
    F: frozenset[GroundFunction] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "F", frozenset(self.F))
        if len(self.F) > len(self.s):
            raise ValidationError(f"|F| = {len(self.F)} exceeds len(s) = {len(self.s)}")


def loc_leq(p: LocCondition, q: LocCondition) -> bool:
    """``p <= q``: p extends q."""
    if not q.s.is_prefix_of(p.s) or not q.F <= p.F:
        return False
    return all(f(n) in p.s[n] for n in range(len(q.s), len(p.s)) for f in q.F)


def loc_prolong(p: LocCondition, n: int) -> LocCondition:
    s = p.s
    if len(s) >= n:
        return p
    s = s.extend(_image(p.F, m) for m in range(len(s), n))
    return LocCondition(s, p.F)


def loc_add_function(p: LocCondition, f: GroundFunction) -> LocCondition:
    s = p.s.extend([_image(p.F, len(p.s))])
    return LocCondition(s, p.F | {f})


def loc_linked_key(p: LocCondition) -> PartialSlalom | None:
    """``s`` on the dense set ``2|F| <= len(s)``, else None."""
    return p.s if 2 * len(p.F) <= len(p.s) else None


def loc_link(p: LocCondition, q: LocCondition) -> LocCondition:
    key = loc_linked_key(p)
    if key is None or key != loc_linked_key(q):
        raise PreconditionViolated("conditions do not share a linked key")
    return LocCondition(p.s, p.F | q.F)


# ---------------------------------------------------------------------------
# LOC*
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocStarCondition:
    s: PartialSlalom
    w: int = 0
    F: frozenset[GroundFunction] = field(default=frozenset())

    def __post_init__(self):
        object.__setattr__(self, "F", frozenset(self.F))
        if not len(self.F) <= self.w <= len(self.s):
            raise ValidationError(
                f"need |F| <= w <= len(s); got {len(self.F)}, {self.w}, {len(self.s)}"
            )


def loc_star_leq(p: LocStarCondition, q: LocStarCondition) -> bool:
    """``p <= q`` in LOC*."""
    lp, lq = len(p.s), len(q.s)
    if not q.s.is_prefix_of(p.s) or q.w > p.w or not q.F <= p.F:
        return False
    for n in range(lq, lp):
        if any(f(n) not in p.s[n] for f in q.F):
            return False
        if len(p.s[n]) > q.w + (n - lq):
            return False
    return p.w <= q.w + (lp - lq)


def loc_star_prolong(p: LocStarCondition, n: int) -> LocStarCondition:
    """An extension of length >= n that appends the F-image at each new stage."""
    if len(p.s) >= n:
        return p
    s = p.s.extend(_image(p.F, m) for m in range(len(p.s), n))
    return LocStarCondition(s, p.w, p.F)


def loc_star_add_function(p: LocStarCondition, f: GroundFunction) -> LocStarCondition:
    s = p.s.extend([_image(p.F, len(p.s))])
    return LocStarCondition(s, p.w + 1, p.F | {f})


def loc_star_linked_key(p: LocStarCondition) -> tuple[PartialSlalom, int] | None:
    """``(s, w)`` on the dense set ``w >= 2|F|``, else None."""
    return (p.s, p.w) if p.w >= 2 * len(p.F) else None


def loc_star_link(p: LocStarCondition, q: LocStarCondition) -> LocStarCondition:
    """Common extension of two conditions with the same linked key."""
    key = loc_star_linked_key(p)
    if key is None or key != loc_star_linked_key(q):
        raise PreconditionViolated("conditions do not share a linked key")
    r = LocStarCondition(p.s, p.w, p.F | q.F)
    assert loc_star_leq(r, p) and loc_star_leq(r, q)
    return r


@dataclass
class LocStarRun:
    chain: list[LocStarCondition]
    thresholds: dict[GroundFunction, int]

    @property
    def phi(self) -> PartialSlalom:
        return self.chain[-1].s

    def captured(self, f: GroundFunction) -> bool:
        t = self.thresholds[f]
        return all(f(n) in self.phi[n] for n in range(t, len(self.phi)))


def loc_star_generic_run(
    schedule: Sequence[tuple[int, GroundFunction]], length: int
) -> LocStarRun:
    """Descend through LOC*, adding each function once the slalom reaches its
    registration stage, until the slalom has ``length`` entries."""
    p = LocStarCondition(PartialSlalom(), 0, frozenset())
    chain = [p]
    thresholds: dict[GroundFunction, int] = {}
    pending = sorted(schedule, key=lambda t: (t[0], t[1].sort_key()))
    while len(p.s) < length or pending:
        if pending and pending[0][0] <= len(p.s):
            _, f = pending.pop(0)
            q = loc_star_add_function(p, f)
            thresholds.setdefault(f, len(q.s))
        else:
            q = loc_star_prolong(p, len(p.s) + 1)
        assert loc_star_leq(q, p)
        chain.append(q)
        p = q
    return LocStarRun(chain, thresholds)

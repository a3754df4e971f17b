"""Partial slaloms and the finite-stage null-set constructions built on them.

A slalom entry ``phi(n)`` is a set of clopen indices at stage ``n``; the
null set it codes is the limsup of ``C^n_i`` for ``i in phi(n)``.  Nothing
infinite is materialized here: every claim is checked on a finite stage
window through :func:`a_stage` and :func:`r_stage_disjointness`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .dyadic_cantor import ClopenEnumeration, ClopenSet, Dyadic, union_all
from .errors import CertificateFailure, PreconditionViolated, ValidationError

__all__ = [
    "PartialSlalom",
    "RankTrace",
    "a_stage",
    "r_phi",
    "r_values",
    "r_stage_disjointness",
    "DisjointnessCertificate",
    "coverage_check",
    "rank_hits",
]


@dataclass(frozen=True)
class PartialSlalom:
    """A finite sequence ``s(0..L-1)`` of index sets with ``|s(n)| <= n``."""

    entries: tuple[frozenset[int], ...] = ()
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        ents = tuple(frozenset(e) for e in self.entries)
        object.__setattr__(self, "entries", ents)
        object.__setattr__(self, "_hash", hash(ents))
        for n, e in enumerate(ents):
            if len(e) > n:
                raise ValidationError(f"slalom width bound violated: |s({n})| = {len(e)} > {n}")
            for i in e:
                if not isinstance(i, int) or i < 0:
                    raise ValidationError(f"slalom entry s({n}) holds a non-index {i!r}")

    @classmethod
    def of(cls, *entries: Iterable[int]) -> PartialSlalom:
        return cls(tuple(frozenset(e) for e in entries))

    @classmethod
    def blank(cls, length: int) -> PartialSlalom:
        return cls((frozenset(),) * length)

    def __hash__(self) -> int:
        return self._hash

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, n: int) -> frozenset[int]:
        return self.entries[n]

    def __iter__(self):
        return iter(self.entries)

    def prefix(self, length: int) -> PartialSlalom:
        return PartialSlalom(self.entries[:length])

    def extend(self, more: Iterable[Iterable[int]]) -> PartialSlalom:
        return PartialSlalom(self.entries + tuple(frozenset(e) for e in more))

    def is_prefix_of(self, other: PartialSlalom) -> bool:
        return len(self) <= len(other) and other.entries[: len(self)] == self.entries

    def to_lists(self) -> list[list[int]]:
        return [sorted(e) for e in self.entries]

    def __repr__(self) -> str:
        inner = ", ".join("{" + ",".join(map(str, sorted(e))) + "}" for e in self.entries)
        return f"<{inner}>"


@dataclass(frozen=True)
class RankTrace:
    """The values ``r(0..M)`` of the avoiding sequence for a slalom prefix."""

    values: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, n: int) -> int:
        return self.values[n]

    def sets(self, enum: ClopenEnumeration, upto: int | None = None) -> list[ClopenSet]:
        """The certificate sets ``C^n_{r(n)}``."""
        stop = len(self.values) if upto is None else min(upto + 1, len(self.values))
        return [enum.clopen(n, self.values[n]) for n in range(stop)]


def a_stage(phi: PartialSlalom, start: int, stop: int, enum: ClopenEnumeration) -> ClopenSet:
    """Union of ``C^n_i`` over ``start < n <= stop`` and ``i in phi(n)``."""
    if stop >= len(phi):
        raise PreconditionViolated(f"stage {stop} is beyond the slalom length {len(phi)}")
    return union_all(enum.clopen(n, i) for n in range(start + 1, stop + 1) for i in sorted(phi[n]))


def _next_r(n: int, prev: int, avoid: frozenset[int], enum: ClopenEnumeration) -> int:
    h = enum.h
    if prev < enum.singleton_count(n - 1) and all(j < (1 << h(n)) for j in avoid):
        # all sets involved are single addresses at depth h(n-1) / h(n)
        start = prev << (h(n) - h(n - 1))
        off = 0
        while start + off in avoid:
            off += 1
        return start + off
    container = enum.clopen(n - 1, prev) - union_all(enum.clopen(n, j) for j in sorted(avoid))
    return enum.min_index_inside(n, container)


@lru_cache(maxsize=1 << 15)
def r_values(phi: PartialSlalom, enum: ClopenEnumeration) -> tuple[int, ...]:
    if len(phi) == 0:
        raise PreconditionViolated("r_phi needs a slalom of length >= 1")
    vals = [0]
    for n in range(1, len(phi)):
        vals.append(_next_r(n, vals[-1], phi[n], enum))
    return tuple(vals)


def r_phi(phi: PartialSlalom, enum: ClopenEnumeration) -> RankTrace:
    """Least-index trace ``r(n)``: ``C^n_{r(n)}`` inside ``C^{n-1}_{r(n-1)}``
    and disjoint from every ``C^n_j`` with ``j in phi(n)``."""
    return RankTrace(r_values(phi, enum))


@dataclass(frozen=True)
class DisjointnessCertificate:
    stage: int
    r_set: ClopenSet
    a_set: ClopenSet


def r_stage_disjointness(phi: PartialSlalom, stage: int, enum: ClopenEnumeration) -> DisjointnessCertificate:
    """Build ``R_M`` and ``A_M`` and machine-check that they are disjoint and
    that ``R_M`` is nonempty of measure exactly ``2**-h(M)``."""
    if stage >= len(phi):
        raise PreconditionViolated(f"stage {stage} is beyond the slalom length {len(phi)}")
    trace = r_phi(phi.prefix(stage + 1), enum)
    r_set = ClopenSet.whole()
    for c in trace.sets(enum):
        r_set = r_set & c
    a_set = a_stage(phi, 0, stage, enum)
    if r_set.is_empty():
        raise CertificateFailure(f"R_{stage} is empty")
    if r_set.measure() != Dyadic.pow2(-enum.h(stage)):
        raise CertificateFailure(f"R_{stage} has measure {r_set.measure()}")
    if not r_set.isdisjoint(a_set):
        raise CertificateFailure(f"R_{stage} meets A_{stage}")
    return DisjointnessCertificate(stage, r_set, a_set)


def coverage_check(
    f: Callable[[int], int],
    phi: PartialSlalom,
    start: int,
    stop: int,
    enum: ClopenEnumeration,
) -> bool:
    """Whether ``f(n) in phi(n)`` for all ``start < n <= stop``.

    When it holds, the induced containment of tail unions is also checked.
    """
    if stop >= len(phi):
        raise PreconditionViolated(f"stage {stop} is beyond the slalom length {len(phi)}")
    if not all(f(n) in phi[n] for n in range(start + 1, stop + 1)):
        return False
    covered = union_all(enum.clopen(n, f(n)) for n in range(start + 1, stop + 1))
    if not covered.issubset(a_stage(phi, start, stop, enum)):
        raise CertificateFailure("pointwise membership did not give tail-union containment")
    return True


def rank_hits(phi: PartialSlalom, psi: PartialSlalom, enum: ClopenEnumeration) -> list[int]:
    """Stages ``n`` where ``r_phi(n) in psi(n)``; each one is a finite witness
    that the null set coded by ``psi`` is not inside the one coded by ``phi``."""
    m = min(len(phi), len(psi))
    if m == 0:
        return []
    r = r_values(phi.prefix(m), enum)
    return [n for n in range(m) if r[n] in psi[n]]


def from_lists(entries: Sequence[Sequence[int]]) -> PartialSlalom:
    return PartialSlalom(tuple(frozenset(e) for e in entries))

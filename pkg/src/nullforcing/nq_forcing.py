"""The forcing N_Q: conditions, the order, and the constructions on it.

A condition is a finite map ``x -> (s_x, w_x, F_x)`` over a ranked poset.
Every construction below is built the way its correctness proof builds it
and, when ``check=True``, its output is run through :meth:`NQForcing.validate`
and :meth:`NQForcing.leq` before being returned.

The forcing statement in the order (``p|x`` forces ``f(n) in s_x(n)``) is
read as *decided membership*: ``p|x`` must decide ``f(n)`` and the decided
value must lie in ``s_x(n)``.  Every construction decides names before
extending slaloms, so this reading loses nothing here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Hashable, Iterable, Iterator, Mapping

from .dyadic_cantor import ClopenEnumeration
from .errors import CertificateFailure, PreconditionViolated, ValidationError
from .names import CheckName, Name, RSlalomName, decide, name_from_json
from .ranked_poset import TOP, RankedPoset
from .slaloms import PartialSlalom

__all__ = [
    "Entry",
    "NQCondition",
    "Violation",
    "NQForcing",
    "WitnessResult",
    "condition_to_json",
    "condition_from_json",
]


@dataclass(frozen=True)
class Entry:
    """One coordinate of a condition: slalom, width budget, promised names."""

    s: PartialSlalom
    w: int = 0
    F: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "F", frozenset(self.F))
        if not isinstance(self.s, PartialSlalom):
            object.__setattr__(self, "s", PartialSlalom(tuple(self.s)))

    def __repr__(self) -> str:
        names = ", ".join(repr(f) for f in sorted(self.F, key=lambda f: f.sort_key()))
        return f"({self.s!r}, {self.w}, {{{names}}})"


class NQCondition(Mapping):
    """Immutable finite map from poset elements to :class:`Entry`."""

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries: Mapping | Iterable = ()):
        self._entries = dict(entries)
        self._hash = None

    def __getitem__(self, x) -> Entry:
        return self._entries[x]

    def __iter__(self) -> Iterator:
        return iter(sorted(self._entries, key=str))

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, x, default=None):
        return self._entries.get(x, default)

    @property
    def D(self) -> frozenset:
        return frozenset(self._entries)

    def restrict(self, A: Iterable) -> NQCondition:
        A = A if isinstance(A, (set, frozenset)) else set(A)
        return NQCondition({x: e for x, e in self._entries.items() if x in A})

    def updated(self, changes: Mapping) -> NQCondition:
        new = dict(self._entries)
        new.update(changes)
        return NQCondition(new)

    def __or__(self, other: NQCondition) -> NQCondition:
        for x in self._entries.keys() & other._entries.keys():
            if self._entries[x] != other._entries[x]:
                raise ValueError(f"conflicting entries for {x!r} in union")
        return NQCondition({**self._entries, **other._entries})

    def __eq__(self, other) -> bool:
        if not isinstance(other, NQCondition):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._entries.items()))
        return self._hash

    def __repr__(self) -> str:
        inner = "; ".join(f"{x}: {self._entries[x]!r}" for x in self)
        return f"NQCondition({inner})"


@dataclass(frozen=True)
class Violation:
    clause: str
    coord: Hashable | None
    message: str

    def __str__(self) -> str:
        where = f" at {self.coord}" if self.coord is not None else ""
        return f"clause {self.clause}{where}: {self.message}"


@dataclass(frozen=True)
class WitnessResult:
    q: NQCondition
    m: int
    k: int


def _union(sets: Iterable[Iterable[int]]) -> frozenset[int]:
    out: set[int] = set()
    for s in sets:
        out |= s
    return frozenset(out)


def _names_sorted(names: Iterable[Name]) -> list[Name]:
    return sorted(set(names), key=lambda f: f.sort_key())


class NQForcing:
    """Operations of N_Q over a fixed ranked poset and clopen enumeration."""

    def __init__(self, poset: RankedPoset, enum: ClopenEnumeration, *, check: bool = True):
        self.P = poset
        self.enum = enum
        self.check = check

    # -- small helpers ---------------------------------------------------------

    def rank(self, x) -> int:
        return self.P.rank(x)

    def ranks(self, p: NQCondition) -> list[int]:
        return self.P.ranks(p.D)

    def stratum(self, p: NQCondition, xi: int) -> frozenset:
        return self.P.stratum(p.D, xi)

    def length(self, p: NQCondition, xi: int) -> int | None:
        """``l^p_xi``, or None when no coordinate of p has rank xi."""
        for x in p.D:
            if self.rank(x) == xi:
                return len(p[x].s)
        return None

    def down(self, D: Iterable, x) -> frozenset:
        return self.P.down_in(D, x)

    def _decide(self, f: Name, cond: NQCondition, n: int) -> int | None:
        return decide(f, cond, n, self.enum)

    def _all(self) -> frozenset:
        return frozenset(self.P.elements)

    # -- restrictions --------------------------------------------------------

    def restrict_below(self, p: NQCondition, b) -> NQCondition:
        """``p|b``: coordinates in ``Q_b``."""
        if b is TOP:
            return p
        return p.restrict(self.P.q_below(b))

    def restrict_to(self, p: NQCondition, A: Iterable) -> NQCondition:
        """``p|A`` for a downward closed A."""
        return p.restrict(A)

    def restrict_rank_lt(self, p: NQCondition, xi: int) -> NQCondition:
        return p.restrict({x for x in p.D if self.rank(x) < xi})

    def restrict_rank_eq(self, p: NQCondition, xi: int) -> NQCondition:
        return p.restrict({x for x in p.D if self.rank(x) == xi})

    def restrict_rank_ge(self, p: NQCondition, xi: int) -> NQCondition:
        return p.restrict({x for x in p.D if self.rank(x) >= xi})

    def restrict(self, p: NQCondition, selector) -> NQCondition:
        """Dispatch on a selector: ``("below", b)``, ``("set", A)``,
        ``("lt", xi)``, ``("eq", xi)`` or ``("ge", xi)``."""
        kind, arg = selector
        return {
            "below": self.restrict_below,
            "set": self.restrict_to,
            "lt": self.restrict_rank_lt,
            "eq": self.restrict_rank_eq,
            "ge": self.restrict_rank_ge,
        }[kind](p, arg)

    # -- validity --------------------------------------------------------------

    def validate(self, p: NQCondition, A: Iterable | None = None, *, exempt_rank: int | None = None) -> list[Violation]:
        """Clause-by-clause validity.  ``exempt_rank`` skips the weight-total
        clause at that rank (the relaxation allowed for preconditions)."""
        out: list[Violation] = []
        A = self._all() if A is None else frozenset(A)
        unknown = [x for x in p.D if x not in self.P]
        for x in unknown:
            out.append(Violation("1", x, "coordinate is not an element of the poset"))
        if unknown:
            return out
        for x in p:
            if x not in A:
                out.append(Violation("1", x, "coordinate outside the ambient set"))
        for x in p:
            e = p[x]
            if e.w < 0:
                out.append(Violation("2", x, "negative width"))
            if len(e.F) > e.w:
                out.append(Violation("2", x, f"|F| = {len(e.F)} > w = {e.w}"))
            qx = self.P.q_below(x)
            for f in _names_sorted(e.F):
                sup = f.support(self.P) if not isinstance(f, RSlalomName) or f.a in self.P else None
                if sup is None or not sup <= qx:
                    out.append(Violation("2", x, f"{f!r} is not a name over Q_{x}"))
            if exempt_rank is not None and self.rank(x) == exempt_rank:
                continue
            total = sum(p[z].w for z in self.down(p.D, x))
            if total > len(e.s):
                out.append(Violation("3", x, f"weight total {total} > len(s) = {len(e.s)}"))
        for xi in self.ranks(p):
            lengths = {len(p[x].s) for x in self.stratum(p, xi)}
            if len(lengths) > 1:
                out.append(Violation("4", None, f"rank {xi} has slaloms of lengths {sorted(lengths)}"))
        return out

    def is_condition(self, p: NQCondition, A: Iterable | None = None) -> bool:
        return not self.validate(p, A)

    # -- the order -------------------------------------------------------------

    def leq_failure(self, p: NQCondition, q: NQCondition) -> str | None:
        """None if ``p <= q``; otherwise a description of the first failing clause."""
        if not q.D <= p.D:
            return f"clause 5: coordinates {sorted(map(str, q.D - p.D))} missing"
        for x in q:
            ep, eq_ = p[x], q[x]
            if not eq_.s.is_prefix_of(ep.s):
                return f"clause 6 at {x}: slalom is not an end-extension"
            if ep.w < eq_.w:
                return f"clause 6 at {x}: width decreased"
            if not eq_.F <= ep.F:
                return f"clause 6 at {x}: names dropped"
            if len(ep.s) > len(eq_.s) and eq_.F:
                px = self.restrict_below(p, x)
                for n in range(len(eq_.s), len(ep.s)):
                    for f in _names_sorted(eq_.F):
                        v = self._decide(f, px, n)
                        if v is None:
                            return f"clause 6 at {x}: {f!r}({n}) undecided by p|{x}"
                        if v not in ep.s[n]:
                            return f"clause 6 at {x}: {f!r}({n}) = {v} not in s({n})"
        for xi in self.ranks(q):
            Dq, Dp = self.stratum(q, xi), self.stratum(p, xi)
            lq, lp = self.length(q, xi), self.length(p, xi)
            new = range(lq, lp)
            for x, y in combinations(self.P.sort(Dq), 2):
                if self.P.lt(y, x):
                    x, y = y, x
                if self.P.lt(x, y):
                    for n in new:
                        if not p[x].s[n] <= p[y].s[n]:
                            return f"clause 7 at rank {xi}: s_{x}({n}) not inside s_{y}({n})"
            lhs = sum(p[x].w for x in Dp)
            rhs = sum(q[x].w for x in Dq) + (lp - lq)
            if lhs > rhs:
                return f"clause 8 at rank {xi}: {lhs} > {rhs}"
            if len(new):
                for E in self.P.downward_closed_subsets(Dq):
                    wE = sum(q[x].w for x in E)
                    for n in new:
                        size = len(_union(p[x].s[n] for x in E))
                        if size > wE + (n - lq):
                            return (
                                f"clause 9 at rank {xi}: |U s({n})| over {sorted(map(str, E))} "
                                f"is {size} > {wE + (n - lq)}"
                            )
        return None

    def leq(self, p: NQCondition, q: NQCondition) -> bool:
        """``p <= q``: p is stronger than q."""
        return self.leq_failure(p, q) is None

    def _certify(self, q: NQCondition, *extends: NQCondition, A: Iterable | None = None, what: str = "") -> NQCondition:
        if not self.check:
            return q
        bad = self.validate(q, A)
        if bad:
            raise CertificateFailure(f"{what}: output is not a condition: {bad[0]}")
        for e in extends:
            msg = self.leq_failure(q, e)
            if msg:
                raise CertificateFailure(f"{what}: output does not extend its input: {msg}")
        return q

    def _require_condition(self, p: NQCondition, A: Iterable | None, what: str) -> None:
        bad = self.validate(p, A)
        if bad:
            raise PreconditionViolated(f"{what}: input is not a condition: {bad[0]}")

    # -- easy complete embedding ---------------------------------------------

    def combine(self, q: NQCondition, p: NQCondition, xi: int) -> NQCondition:
        """``q ∪ p|[xi, oo)`` for q below rank xi extending ``p|xi``."""
        if any(self.rank(x) >= xi for x in q.D):
            raise PreconditionViolated(f"combine: q has coordinates of rank >= {xi}")
        msg = self.leq_failure(q, self.restrict_rank_lt(p, xi))
        if msg:
            raise PreconditionViolated(f"combine: q does not extend p|{xi}: {msg}")
        return self._certify(q | self.restrict_rank_ge(p, xi), p, q, what="combine")

    # -- deciding names ------------------------------------------------------

    def decide_names(self, p: NQCondition, names: Iterable[Name], L: int, B: Iterable | None = None) -> NQCondition:
        """An extension of p deciding ``f(n)`` for every listed name and ``n < L``.

        Coordinates a name depends on are joined and prolonged, in a fixed
        order, until their slaloms have length >= L.
        """
        B = self._all() if B is None else frozenset(B)
        names = _names_sorted(names)
        for f in names:
            if not f.support(self.P) <= B:
                raise PreconditionViolated(f"decide_names: {f!r} has support outside the ambient set")
        q = p
        for f in names:
            if isinstance(f, CheckName):
                continue
            coords = [f.a] if isinstance(f, RSlalomName) else self.P.sort(f.support(self.P))
            for a in coords:
                if a not in q.D:
                    q = self.join(q, a, B)
                if len(q[a].s) < L:
                    q = self.prolong(q, self.rank(a), L, B)
        if self.check:
            for f in names:
                for n in range(L):
                    if self._decide(f, q, n) is None:
                        raise CertificateFailure(f"decide_names: {f!r}({n}) still undecided")
        return q

    # -- complete embedding (amalgamation) -----------------------------------

    def amalgamate(self, p: NQCondition, r: NQCondition, A: Iterable, B: Iterable | None = None) -> NQCondition:
        """A common extension of ``p`` (over B) and ``r`` (over A) when
        ``r <= p|A``, for downward closed ``A ⊆ B``."""
        B = self._all() if B is None else frozenset(B)
        A = frozenset(A)
        if not A <= B:
            raise PreconditionViolated("amalgamate: A is not a subset of B")
        if not self.P.is_downward_closed(A) or not self.P.is_downward_closed(B):
            raise PreconditionViolated("amalgamate: A and B must be downward closed")
        self._require_condition(p, B, "amalgamate")
        self._require_condition(r, A, "amalgamate")
        msg = self.leq_failure(r, p.restrict(A))
        if msg:
            raise PreconditionViolated(f"amalgamate: r does not extend p|A: {msg}")
        q = self._amalgamate(p, r, A, B)
        return self._certify(q, p, r, A=B, what="amalgamate")

    def _amalgamate(self, p: NQCondition, r: NQCondition, A: frozenset, B: frozenset) -> NQCondition:
        if not r.D:
            return p
        g = max(self.ranks(r))
        below = self.P.rank_below(g)
        q_lt = self._amalgamate(self.restrict_rank_lt(p, g), self.restrict_rank_lt(r, g), A & below, B & below)
        Dr, Dp = self.stratum(r, g), self.stratum(p, g)
        data = {x: r[x] for x in Dr}
        data.update({x: p[x] for x in Dp - Dr})
        lr = self.length(r, g)
        lp = self.length(p, g)
        # the max() only matters when p has rank-g coordinates outside A only
        L = sum(e.w for e in data.values()) + max(lr, lp or 0)
        qs = self.decide_names(q_lt, _union(e.F for e in data.values()), L, B & below)
        K = {
            (x, n): frozenset(self._decide(f, qs, n) for f in e.F)
            for x, e in data.items()
            for n in range(len(e.s), L)
        }
        g_in_pA = bool(Dp & A)
        Dall = Dp | Dr
        new = {}
        for x in Dr:
            zs = self.down(Dr, x)
            ext = [_union(K[z, n] for z in zs) for n in range(lr, L)]
            new[x] = Entry(data[x].s.extend(ext), data[x].w, data[x].F)
        for x in Dp - Dr:
            dpx = self.down(Dp, x)
            ext = []
            for n in range(lp, L):
                if n < lr:
                    v = _union(data[z].s[n] for z in dpx & Dr) | _union(K[z, n] for z in dpx - Dr)
                elif g_in_pA:
                    v = _union(K[z, n] for z in self.down(Dall, x))
                else:
                    v = _union(K[z, n] for z in dpx)
                ext.append(v)
            new[x] = Entry(data[x].s.extend(ext), data[x].w, data[x].F)
        return qs | NQCondition(new) | p.restrict({x for x in p.D if self.rank(x) > g})

    # -- preextensions and repair --------------------------------------------

    def preextension_failure(self, p: NQCondition, pp: NQCondition, gamma: int, B: Iterable | None = None) -> str | None:
        """None if ``pp`` is a gamma-preextension of ``p`` in N_B."""
        B = self._all() if B is None else frozenset(B)
        if not any(self.rank(x) == gamma for x in B):
            return f"rank {gamma} does not occur in the ambient set"
        bad = self.validate(pp, B, exempt_rank=gamma)
        if bad:
            return f"not a {gamma}-precondition: {bad[0]}"
        hi_p = {x for x in p.D if self.rank(x) > gamma}
        hi_pp = {x for x in pp.D if self.rank(x) > gamma}
        if not p.D <= pp.D or hi_p != hi_pp:
            return "preextension clause 1: domains do not match"
        msg = self.leq_failure(self.restrict_rank_lt(pp, gamma), self.restrict_rank_lt(p, gamma))
        if msg:
            return f"preextension clause 2: {msg}"
        for x in self.stratum(p, gamma):
            if pp[x].s != p[x].s or pp[x].F != p[x].F or pp[x].w < p[x].w:
                return f"preextension clause 3 at {x}"
        for x in self.stratum(pp, gamma) - p.D:
            if pp[x].F or pp[x].w != 0:
                return f"preextension clause 4 at {x}"
        for x in hi_p:
            if pp[x] != p[x]:
                return f"preextension clause 5 at {x}"
        return None

    def repair(self, p: NQCondition, pp: NQCondition, gamma: int, N: int = 0, B: Iterable | None = None) -> NQCondition:
        """Turn a gamma-preextension ``pp`` of ``p`` into a real extension
        ``q`` of p with ``l^q_gamma >= N``."""
        B = self._all() if B is None else frozenset(B)
        self._require_condition(p, B, "repair")
        msg = self.preextension_failure(p, pp, gamma, B)
        if msg:
            raise PreconditionViolated(f"repair: {msg}")
        Dpp, Dp = self.stratum(pp, gamma), self.stratum(p, gamma)
        if not Dpp:
            raise PreconditionViolated(f"repair: preextension has no coordinate of rank {gamma}")
        l = self.length(pp, gamma)
        L = max(sum(pp[x].w for x in Dpp) + l, N)
        below = self.P.rank_below(gamma)
        qs = self.decide_names(self.restrict_rank_lt(pp, gamma), _union(pp[x].F for x in Dpp), L, B & below)
        K = {
            (x, n): frozenset(self._decide(f, qs, n) for f in p[x].F)
            for x in Dp
            for n in range(l, L)
        }
        new = {}
        for x in Dpp:
            if x in Dp:
                zs = self.down(Dp, x)
                ext = [_union(K[z, n] for z in zs) for n in range(l, L)]
            else:
                ext = [frozenset()] * (L - l)
            new[x] = Entry(pp[x].s.extend(ext), pp[x].w, pp[x].F)
        q = qs | NQCondition(new) | pp.restrict({x for x in pp.D if self.rank(x) > gamma})
        if self.check:
            self._certify(q, p, A=B, what="repair")
            self._check_repair(p, pp, gamma, N, q)
        return q

    def _check_repair(self, p, pp, gamma, N, q) -> None:
        msg = self.leq_failure(self.restrict_rank_lt(q, gamma), self.restrict_rank_lt(pp, gamma))
        if msg:
            raise CertificateFailure(f"repair conclusion 1: {msg}")
        if self.stratum(q, gamma) != self.stratum(pp, gamma):
            raise CertificateFailure("repair conclusion 2: rank-gamma domain changed")
        for x in self.stratum(q, gamma):
            if not pp[x].s.is_prefix_of(q[x].s) or q[x].w != pp[x].w or q[x].F != pp[x].F:
                raise CertificateFailure(f"repair conclusion 2 at {x}")
        hi = {x for x in p.D if self.rank(x) > gamma}
        if {x for x in q.D if self.rank(x) > gamma} != hi or any(q[x] != p[x] for x in hi):
            raise CertificateFailure("repair conclusion 3: higher ranks changed")
        if self.length(q, gamma) < N:
            raise CertificateFailure("repair conclusion 4: slaloms too short")

    def repair_conclusions(self, p, pp, gamma, N, q) -> list[str]:
        """The four repair conclusions that fail for ``q`` (empty when all hold)."""
        out = []
        if self.leq_failure(q, p) or self.leq_failure(self.restrict_rank_lt(q, gamma), self.restrict_rank_lt(pp, gamma)):
            out.append("1")
        dq = self.stratum(q, gamma)
        if dq != self.stratum(pp, gamma) or any(
            not pp[x].s.is_prefix_of(q[x].s) or q[x].w != pp[x].w or q[x].F != pp[x].F for x in dq
        ):
            out.append("2")
        hi = {x for x in p.D if self.rank(x) > gamma}
        if {x for x in q.D if self.rank(x) > gamma} != hi or any(q[x] != p[x] for x in hi):
            out.append("3")
        if (self.length(q, gamma) or 0) < N:
            out.append("4")
        return out

    # -- density operations --------------------------------------------------------

    def prolong(self, p: NQCondition, xi: int, N: int, B: Iterable | None = None) -> NQCondition:
        """An extension with ``l_xi >= N``."""
        lxi = self.length(p, xi)
        if lxi is None:
            raise PreconditionViolated(f"prolong: rank {xi} does not occur in the condition")
        if lxi >= N:
            return p
        return self.repair(p, p, xi, N, B)

    def join(self, p: NQCondition, a, B: Iterable | None = None) -> NQCondition:
        """An extension with ``a`` in its domain."""
        B = self._all() if B is None else frozenset(B)
        if a not in B:
            raise PreconditionViolated(f"join: {a!r} is outside the ambient set")
        if a in p.D:
            return p
        alpha = self.rank(a)
        la = self.length(p, alpha)
        if la is None:
            q = p.updated({a: Entry(PartialSlalom(), 0, frozenset())})
            return self._certify(q, p, A=B, what="join")
        pp = p.updated({a: Entry(PartialSlalom.blank(la), 0, frozenset())})
        return self.repair(p, pp, alpha, 0, B)

    def bump_weight(self, p: NQCondition, a, B: Iterable | None = None) -> NQCondition:
        """An extension with ``w_a >= |F_a| + 1``."""
        if a not in p.D:
            raise PreconditionViolated(f"bump_weight: {a!r} is not a coordinate")
        e = p[a]
        pp = p.updated({a: Entry(e.s, e.w + 1, e.F)})
        return self.repair(p, pp, self.rank(a), 0, B)

    def add_name(self, p: NQCondition, a, f: Name, B: Iterable | None = None) -> NQCondition:
        """An extension with ``f`` in ``F_a``; ``f`` must be a name over ``Q_a``."""
        if not f.support(self.P) <= self.P.q_below(a):
            raise PreconditionViolated(f"add_name: {f!r} is not a name over Q_{a}")
        q = self.join(p, a, B) if a not in p.D else p
        if f in q[a].F:
            return q
        q = self.bump_weight(q, a, B)
        e = q[a]
        out = q.updated({a: Entry(e.s, e.w, e.F | {f})})
        return self._certify(out, p, q, A=B, what="add_name")

    # -- the dense set W -------------------------------------------------------

    def in_W(self, p: NQCondition) -> bool:
        if any(2 * len(p[x].F) > p[x].w for x in p.D):
            return False
        return all(2 * sum(p[x].w for x in self.stratum(p, xi)) <= self.length(p, xi) for xi in self.ranks(p))

    def w_dense(self, p: NQCondition) -> tuple[bool, NQCondition]:
        """``(p in W, q)`` with ``q <= p`` and ``q in W``."""
        self._require_condition(p, None, "w_dense")
        member = self.in_W(p)
        q = p if member else self._w_dense(p)
        if self.check:
            self._certify(q, p, what="w_dense")
            if not self.in_W(q):
                raise CertificateFailure("w_dense: output is not in W")
        return member, q

    def _w_dense(self, p: NQCondition) -> NQCondition:
        if not p.D:
            return p
        g = max(self.ranks(p))
        pp = p.updated(
            {x: Entry(p[x].s, max(p[x].w, 2 * len(p[x].F)), p[x].F) for x in self.stratum(p, g)}
        )
        N = 2 * sum(pp[x].w for x in self.stratum(pp, g))
        q = self.repair(p, pp, g, N)
        qs = self._w_dense(self.restrict_rank_lt(q, g))
        return qs | self.restrict_rank_eq(q, g)

    # -- ccc: Delta-pair amalgamation ----------------------------------------

    def _k_root(self, p: NQCondition, U_sub: Iterable) -> int:
        zs: set = set()
        for x in U_sub:
            zs |= self.down(p.D, x)
        return sum(len(p[z].F) for z in zs)

    def check_delta_pair(self, p: NQCondition, q: NQCondition, u=None, U=None) -> list[tuple[str, str]]:
        """Agreement conditions needed by :meth:`delta_pair_extend`.

        Returns ``(condition, message)`` pairs; condition ``"W"`` means a
        condition is not in the dense set W, ``"1"``..``"5"`` are the root
        agreement conditions.
        """
        out = []
        for name, c in (("p", p), ("q", q)):
            if self.validate(c):
                out.append(("W", f"{name} is not a condition"))
            elif not self.in_W(c):
                out.append(("W", f"{name} is not in W"))
        u_act = set(self.ranks(p)) & set(self.ranks(q))
        if u is not None and set(u) != u_act:
            out.append(("1", f"rank sets do not meet exactly in the root {sorted(u)}"))
        for xi in sorted(u_act):
            if self.length(p, xi) != self.length(q, xi):
                out.append(("2", f"lengths differ at root rank {xi}"))
        U_act = p.D & q.D
        if U is not None and frozenset(U) != U_act:
            out.append(("3", f"domains do not meet exactly in the root {self.P.sort(U)}"))
        for x in self.P.sort(U_act):
            if p[x].s != q[x].s or p[x].w != q[x].w:
                out.append(("4", f"root coordinate {x} differs"))
        roots = self.P.sort(U_act)
        for k in range(1, len(roots) + 1):
            for sub in combinations(roots, k):
                kp, kq = self._k_root(p, sub), self._k_root(q, sub)
                if kp != kq:
                    out.append(("5", f"name counts below {list(map(str, sub))} differ: {kp} != {kq}"))
        return out

    def delta_pair_extend(self, p: NQCondition, q: NQCondition, u=None, U=None) -> NQCondition:
        """A common extension of two W-conditions agreeing on their root."""
        bad = self.check_delta_pair(p, q, u, U)
        if bad:
            cond, msg = bad[0]
            raise PreconditionViolated(f"delta_pair_extend: condition {cond}: {msg}", condition=cond)
        rp, rq = set(self.ranks(p)), set(self.ranks(q))
        root = rp & rq
        r = NQCondition()
        for g in sorted(rp | rq):
            if g not in root:
                src = p if g in rp else q
                r = r | self.restrict_rank_eq(src, g)
            else:
                r = self._delta_step(p, q, r, g)
            if self.check:
                self._certify(r, self.restrict_rank_lt(p, g + 1), self.restrict_rank_lt(q, g + 1), what="delta_pair_extend")
        return self._certify(r, p, q, what="delta_pair_extend")

    def _delta_step(self, p, q, r, g) -> NQCondition:
        Dp, Dq = self.stratum(p, g), self.stratum(q, g)
        lg = self.length(p, g)
        L = sum(p[x].w for x in Dp) + sum(q[x].w for x in Dq) + lg
        below = self.P.rank_below(g)
        names = _union(p[x].F for x in Dp) | _union(q[x].F for x in Dq)
        rs = self.decide_names(r, names, L, below)
        F = {}
        for x in Dp | Dq:
            F[x] = (p[x].F if x in Dp else frozenset()) | (q[x].F if x in Dq else frozenset())
        K = {(x, n): frozenset(self._decide(f, rs, n) for f in F[x]) for x in F for n in range(lg, L)}
        Dall, Ug = Dp | Dq, Dp & Dq
        new = {}
        for x in self.P.sort(Dall):
            if x in Ug:
                zs = self.down(Dall, x)
            else:
                own = self.down(Dp if x in Dp else Dq, x)
                via_root = {
                    z for z in Dall
                    if any(self.P.le(z, z2) and self.P.le(z2, x) for z2 in Ug)
                }
                zs = own | via_root
            ext = [_union(K[z, n] for z in zs) for n in range(lg, L)]
            base = p[x] if x in Dp else q[x]
            new[x] = Entry(base.s.extend(ext), base.w, F[x])
        return rs | NQCondition(new)

    # -- incompatibility witness ---------------------------------------------

    def incompatibility_witness(self, p: NQCondition, a, b, M: int) -> WitnessResult:
        """``q <= p``, ``m > M`` and ``k`` with ``q`` deciding ``r_b(m) = k``
        and ``k in s^q_a(m)``; requires ``a`` not below-or-equal ``b``."""
        P = self.P
        if a not in P or b not in P:
            raise PreconditionViolated("incompatibility_witness: unknown element")
        if P.le(a, b):
            raise PreconditionViolated(f"incompatibility_witness: {a!r} <= {b!r}")
        self._require_condition(p, None, "incompatibility_witness")
        p0 = p
        p = self.join(p, a)
        p = self.join(p, b)
        if p[a].w < len(p[a].F) + 1:
            p = self.bump_weight(p, a)
        alpha, beta = self.rank(a), self.rank(b)
        B = P.below(b)
        B_alpha = P.stratum(B, alpha)
        if B_alpha and not (B_alpha & p.D):
            p = self.join(p, P.sort(B_alpha)[0])
        la = self.length(p, alpha)
        m = max(M, la) + 1

        p_star = self.prolong(p.restrict(B), beta, m + 1, B)
        rb = RSlalomName(b)
        k = self._decide(rb, p_star, m)
        if k is None:
            raise CertificateFailure("incompatibility_witness: r_b(m) undecided after prolong")

        Dps, Dp = self.stratum(p_star, alpha), self.stratum(p, alpha)
        data = {x: p_star[x] for x in Dps}
        data.update({x: p[x] for x in Dp - Dps})
        lps = self.length(p_star, alpha) if Dps else la
        L = sum(e.w for e in data.values()) + lps + m + 1
        below = P.rank_below(alpha)
        q0 = self.amalgamate(self.restrict_rank_lt(p, alpha), self.restrict_rank_lt(p_star, alpha), B & below, below)
        q0 = self.decide_names(q0, _union(e.F for e in data.values()), L, below)
        K = {
            (x, n): frozenset(self._decide(f, q0, n) for f in e.F)
            for x, e in data.items()
            for n in range(len(e.s), L)
        }
        K[a, m] = K[a, m] | {k}
        Dall = Dp | Dps
        new = {}
        for x in Dps:
            zs = self.down(Dps, x)
            ext = [_union(K[z, n] for z in zs) for n in range(lps, L)]
            new[x] = Entry(data[x].s.extend(ext), data[x].w, data[x].F)
        for x in Dp - Dps:
            dpx = self.down(Dp, x)
            ext = []
            for n in range(la, L):
                if n < lps:
                    v = _union(data[z].s[n] for z in dpx & Dps) | _union(K[z, n] for z in dpx - Dps)
                else:
                    v = _union(K[z, n] for z in self.down(Dall, x))
                ext.append(v)
            new[x] = Entry(data[x].s.extend(ext), data[x].w, data[x].F)
        q1 = q0 | NQCondition(new) | p_star.restrict({x for x in p_star.D if self.rank(x) > alpha})
        A1 = B | P.rank_below(alpha + 1)
        self._certify(q1, p_star, p.restrict(A1), what="incompatibility_witness (q1)")
        q = self.amalgamate(p, q1, A1)
        if self.check:
            self._certify(q, p0, what="incompatibility_witness")
            if self._decide(rb, q, m) != k or k not in q[a].s[m]:
                raise CertificateFailure("incompatibility_witness: witness lost in amalgamation")
        return WitnessResult(q, m, k)


# ---------------------------------------------------------------------------
# JSON shape
# ---------------------------------------------------------------------------


def condition_to_json(p: NQCondition) -> dict:
    """Canonical JSON: coordinates sorted, slalom entries as sorted arrays."""
    coords = []
    for x in p:
        e = p[x]
        coords.append(
            {
                "x": x,
                "s": e.s.to_lists(),
                "w": e.w,
                "F": [f.to_json() for f in _names_sorted(e.F)],
            }
        )
    return {"coords": coords}


def condition_from_json(obj: dict, ground=None) -> NQCondition:
    entries = {}
    for c in obj.get("coords", []):
        x = c["x"]
        if x in entries:
            raise ValidationError(f"duplicate coordinate {x!r}")
        s = PartialSlalom(tuple(frozenset(int(i) for i in e) for e in c.get("s", [])))
        F = frozenset(name_from_json(f, ground) for f in c.get("F", []))
        w = c.get("w", 0)
        if not isinstance(w, int) or isinstance(w, bool):
            raise ValidationError(f"width of {x!r} must be an integer")
        entries[x] = Entry(s, w, F)
    return NQCondition(entries)

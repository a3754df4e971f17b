"""Random instances: posets, conditions built by density operations,
preextensions, amalgamation inputs and Delta-pairs.

Everything is driven by an explicit :class:`random.Random` so a seed
reproduces an instance exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .names import CheckName, GroundFunction, Name, RSlalomName
from .nq_forcing import Entry, NQCondition, NQForcing
from .ranked_poset import RankedPoset
from .slaloms import PartialSlalom

__all__ = [
    "random_poset",
    "random_ground",
    "random_name",
    "random_downset",
    "random_ops",
    "random_condition",
    "random_preextension",
    "AmalgamationCase",
    "random_amalgamation_case",
    "DeltaPair",
    "random_delta_pair",
    "negative_delta_pair",
]


def random_poset(rng: random.Random, size: int | None = None, p_edge: float = 0.35) -> RankedPoset:
    """A random order on ``x0..x{k-1}`` (edges only go up in index) with a
    random cofinal subset containing every maximal element."""
    k = size if size is not None else rng.randint(4, 6)
    els = [f"x{i}" for i in range(k)]
    less = [(els[i], els[j]) for i in range(k) for j in range(i + 1, k) if rng.random() < p_edge]
    P0 = RankedPoset(els, less)
    maximal = [x for x in els if not P0.above(x)]
    cof = set(maximal) | {x for x in els if rng.random() < 0.5}
    return RankedPoset(els, less, cof)


def random_ground(rng: random.Random, max_value: int = 6) -> GroundFunction:
    prefix = tuple(rng.randint(0, max_value) for _ in range(rng.randint(0, 4)))
    return GroundFunction(prefix, rng.randint(0, max_value))


def random_name(rng: random.Random, P: RankedPoset, x, allowed=None) -> Name:
    """A name over ``Q_x`` (restricted to ``allowed`` when given)."""
    below = [y for y in P.sort(P.q_below(x)) if allowed is None or y in allowed]
    if below and rng.random() < 0.5:
        return RSlalomName(rng.choice(below))
    return CheckName(random_ground(rng))


def random_downset(rng: random.Random, P: RankedPoset, p: float = 0.5) -> frozenset:
    seeds = [x for x in P if rng.random() < p]
    return P.downward_closure(seeds)


def random_ops(N: NQForcing, p: NQCondition, rng: random.Random, steps: int, B=None, max_len: int = 12) -> list[NQCondition]:
    """Apply ``steps`` random density operations inside B; returns the chain
    ``[p, p1, p2, ...]`` (each one certified to extend the previous)."""
    P = N.P
    B = frozenset(P.elements) if B is None else frozenset(B)
    elems = P.sort(B)
    chain = [p]
    if not elems:
        return chain
    for _ in range(steps):
        x = rng.choice(elems)
        op = rng.random()
        if op < 0.3:
            q = N.join(p, x, B)
        elif op < 0.55:
            q = N.join(p, x, B)
            lx = len(q[x].s)
            if lx < max_len:
                q = N.prolong(q, P.rank(x), rng.randint(lx, max_len), B)
        elif op < 0.85:
            q = N.add_name(p, x, random_name(rng, P, x, B), B)
        else:
            q = N.join(p, x, B)
            q = N.bump_weight(q, x, B)
        if q != p:
            chain.append(q)
            p = q
    return chain


def random_condition(N: NQForcing, rng: random.Random, steps: int = 4, B=None) -> NQCondition:
    return random_ops(N, NQCondition(), rng, steps, B)[-1]


def random_preextension(N: NQForcing, p: NQCondition, rng: random.Random) -> tuple[NQCondition, int]:
    """A gamma-preextension of p for a random rank gamma that occurs in Q."""
    P = N.P
    gamma = rng.choice(P.ranks(P.elements))
    below = P.rank_below(gamma)
    low = random_ops(N, N.restrict_rank_lt(p, gamma), rng, rng.randint(0, 2), below)[-1]
    pp = dict((x, low[x]) for x in low)
    pp.update((x, p[x]) for x in p if P.rank(x) >= gamma)
    lg = N.length(p, gamma)
    for x in N.stratum(p, gamma):
        if rng.random() < 0.5:
            e = p[x]
            pp[x] = Entry(e.s, e.w + rng.randint(1, 2), e.F)
    fresh = [x for x in P.stratum(P.elements, gamma) if x not in p.D]
    if lg is None:
        lg = rng.randint(0, 3)
    for x in fresh:
        if rng.random() < 0.5 or (not N.stratum(p, gamma) and x == fresh[0]):
            pp[x] = Entry(PartialSlalom.blank(lg), 0, frozenset())
    return NQCondition(pp), gamma


@dataclass
class AmalgamationCase:
    P: RankedPoset
    A: frozenset
    B: frozenset
    p: NQCondition
    r: NQCondition


def random_amalgamation_case(N: NQForcing, rng: random.Random) -> AmalgamationCase:
    P = N.P
    B = random_downset(rng, P, 0.7) or frozenset(P.elements)
    A = random_downset(rng, P, 0.5) & B
    A = P.downward_closure(A, B) & B
    p = random_condition(N, rng, rng.randint(1, 5), B)
    r = random_ops(N, p.restrict(A), rng, rng.randint(0, 4), A)[-1]
    return AmalgamationCase(P, A, B, p, r)


@dataclass
class DeltaPair:
    p: NQCondition
    q: NQCondition
    expected: str | None = None  # violated agreement condition for negative pairs
    u: frozenset | None = None
    U: frozenset | None = None


def _grow_fresh(N: NQForcing, base: NQCondition, elems, rng: random.Random, length: int) -> NQCondition:
    """Add coordinates ``elems`` (at ranks absent from base) carrying only
    check names, then make their strata W-dense at a common ``length``."""
    P = N.P
    q = base
    for x in elems:
        q = N.join(q, x)
        for _ in range(rng.randint(0, 2)):
            q = N.add_name(q, x, CheckName(random_ground(rng)))
        while q[x].w < 2 * len(q[x].F):
            q = N.bump_weight(q, x)
    for xi in sorted({P.rank(x) for x in elems}):
        need = 2 * sum(q[y].w for y in N.stratum(q, xi))
        q = N.prolong(q, xi, max(need, length))
    return q


def random_delta_pair(N: NQForcing, rng: random.Random) -> DeltaPair:
    """Two W-conditions sharing a root condition ``c`` and otherwise living at
    ranks that ``c`` does not use."""
    P = N.P
    _, c = N.w_dense(random_condition(N, rng, rng.randint(1, 4)))
    used = set(N.ranks(c))
    free = [x for x in P if P.rank(x) not in used]
    rng.shuffle(free)
    cut = rng.randint(0, len(free))
    ep, eq = free[:cut], free[cut:]
    ep = [x for x in ep if rng.random() < 0.8]
    eq = [x for x in eq if rng.random() < 0.8]
    T = rng.randint(0, 8)
    p = _grow_fresh(N, c, ep, rng, T)
    q = _grow_fresh(N, c, eq, rng, T)
    # shared free ranks must agree in length
    for xi in sorted(set(N.ranks(p)) & set(N.ranks(q)) - used):
        L = max(N.length(p, xi), N.length(q, xi))
        p, q = N.prolong(p, xi, L), N.prolong(q, xi, L)
    return DeltaPair(p, q)


def negative_delta_pair(N: NQForcing, rng: random.Random, kind: str) -> DeltaPair | None:
    """A pair violating exactly agreement condition ``kind`` (``"1"``..``"5"``),
    or None when the drawn instance cannot host that violation."""
    P = N.P
    pair = random_delta_pair(N, rng)
    p, q = pair.p, pair.q
    root = P.sort(p.D & q.D)
    if kind == "1":
        extra = [xi for xi in P.ranks(P.elements) if xi not in set(N.ranks(p)) & set(N.ranks(q))]
        if not extra:
            return None
        u = frozenset(set(N.ranks(p)) & set(N.ranks(q))) | {extra[0]}
        return DeltaPair(p, q, "1", u=u)
    if kind == "3":
        extra = [x for x in P if x not in p.D or x not in q.D]
        if not extra:
            return None
        return DeltaPair(p, q, "3", U=(p.D & q.D) | {extra[0]})
    if kind == "2":
        shared = [xi for xi in set(N.ranks(p)) & set(N.ranks(q)) if not N.stratum(p, xi) & N.stratum(q, xi)]
        if not shared:
            return None
        xi = min(shared)
        target = N.length(q, xi) + rng.randint(1, 3)
        q2 = N.prolong(q, xi, target)
        # prolonging may lengthen lower root ranks as well; only keep clean cases
        if any(q2[x] != q[x] for x in root):
            return None
        return DeltaPair(p, q2, "2")
    if kind == "4":
        cands = [x for x in root if len(p[x].s) >= 2]
        if not cands:
            return None
        x = rng.choice(cands)
        e = q[x]
        n = len(e.s) - 1
        cur = e.s[n]
        new = cur - {min(cur)} if cur else frozenset({n + 1000})
        s = PartialSlalom(e.s.entries[:n] + (new,))
        return DeltaPair(p, q.updated({x: Entry(s, e.w, e.F)}), "4")
    if kind == "5":
        cands = [x for x in root if q[x].F]
        if not cands:
            return None
        x = rng.choice(cands)
        e = q[x]
        drop = sorted(e.F, key=lambda f: f.sort_key())[0]
        return DeltaPair(p, q.updated({x: Entry(e.s, e.w, e.F - {drop})}), "5")
    raise ValueError(f"unknown agreement condition {kind!r}")

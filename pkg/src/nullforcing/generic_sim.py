"""Finite surrogate of a generic filter: a descending chain meeting listed demands.

:func:`run` meets each demand with the matching density operation, then joins
every element (in a seed-shuffled order) and prolongs every rank to the run
depth.  :func:`verify` rechecks the resulting slaloms without going through
the forcing engine's order oracle.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence, Union

from .dyadic_cantor import ClopenEnumeration
from .errors import CertificateFailure, ValidationError
from .names import Name, decide, name_from_json
from .nq_forcing import NQCondition, NQForcing
from .ranked_poset import RankedPoset
from .slaloms import a_stage, r_phi, r_values

__all__ = [
    "Prolong",
    "Join",
    "AddName",
    "Witness",
    "Demand",
    "Obligation",
    "WitnessRecord",
    "Verdict",
    "GenericRun",
    "run",
    "verify",
    "witness_demands",
    "demand_from_json",
    "demand_to_json",
]


@dataclass(frozen=True)
class Prolong:
    x: Hashable
    N: int


@dataclass(frozen=True)
class Join:
    x: Hashable


@dataclass(frozen=True)
class AddName:
    x: Hashable
    name: Name


@dataclass(frozen=True)
class Witness:
    a: Hashable
    b: Hashable
    M: int


Demand = Union[Prolong, Join, AddName, Witness]


@dataclass(frozen=True)
class Obligation:
    """A name promised at ``x`` from stage ``threshold`` on."""

    x: Hashable
    name: Name
    threshold: int


@dataclass(frozen=True)
class WitnessRecord:
    a: Hashable
    b: Hashable
    M: int
    m: int
    k: int
    constructed: bool = True


@dataclass(frozen=True)
class Verdict:
    claim: str
    anchor: str
    passed: bool
    witness: dict

    def to_json(self) -> dict:
        return {"claim": self.claim, "anchor": self.anchor, "pass": self.passed, "witness": self.witness}


_ANCHORS = {
    "localize": "f(n) in phi_x(n) for all n from the threshold on",
    "cannibal": "x < y of equal rank: phi_x(n) subset of phi_y(n) from the threshold on",
    "order_preserving_stage": "x < y of equal rank: tail union of phi_x inside tail union of phi_y",
    "order_preserving_ll": "x << y: names over Q_y are localized by phi_y",
    "incomparability": "a not <= b: r_b(m) in phi_a(m), so H_a is not inside H_b",
}


@dataclass
class GenericRun:
    poset: RankedPoset
    enum: ClopenEnumeration
    agenda: list
    seed: int
    depth: int
    chain: list[NQCondition]
    obligations: list[Obligation] = field(default_factory=list)
    pair_thresholds: dict = field(default_factory=dict)
    witnesses: list[WitnessRecord] = field(default_factory=list)
    verdicts: list[Verdict] = field(default_factory=list)

    @property
    def final(self) -> NQCondition:
        return self.chain[-1]

    @property
    def slaloms(self) -> dict:
        return {x: self.final[x].s for x in self.final}

    @property
    def traces(self) -> dict:
        return {x: r_phi(s, self.enum) for x, s in self.slaloms.items() if len(s)}

    def report(self) -> dict:
        P = self.poset
        summary = {
            "total": len(self.verdicts),
            "passed": sum(v.passed for v in self.verdicts),
            "failed": sum(not v.passed for v in self.verdicts),
        }
        summary["all_pass"] = summary["failed"] == 0
        return {
            "poset": P.to_json(),
            "scale": self.enum.h.to_spec(),
            "seed": self.seed,
            "depth": self.depth,
            "chain_length": len(self.chain),
            # the stage window checked against clopen sets; full lengths alongside
            "slaloms": {str(x): s.prefix(self.depth + 1).to_lists() for x, s in self.slaloms.items()},
            "slalom_lengths": {str(x): len(s) for x, s in self.slaloms.items()},
            "witnesses": [
                {"a": w.a, "b": w.b, "M": w.M, "m": w.m, "k": w.k, "constructed": w.constructed}
                for w in self.witnesses
            ],
            "verdicts": [v.to_json() for v in self.verdicts],
            "summary": summary,
        }


def witness_demands(P: RankedPoset, Ms: Sequence[int]) -> list[Witness]:
    """One Witness demand per ordered pair ``a`` not below-or-equal ``b`` and per M."""
    return [Witness(a, b, M) for a in P for b in P if not P.le(a, b) for M in Ms]


def _check_agenda(P: RankedPoset, agenda: Sequence[Demand]) -> None:
    for d in agenda:
        xs = [d.a, d.b] if isinstance(d, Witness) else [d.x]
        for x in xs:
            if x not in P:
                raise ValidationError(f"demand {d!r} mentions unknown element {x!r}")
        if isinstance(d, Witness) and P.le(d.a, d.b):
            raise ValidationError(f"witness demand needs a not <= b: {d!r}")
        if isinstance(d, AddName) and not d.name.support(P) <= P.q_below(d.x):
            raise ValidationError(f"name {d.name!r} is not over Q_{d.x}")


def run(
    P: RankedPoset,
    enum: ClopenEnumeration,
    agenda: Sequence[Demand],
    seed: int = 0,
    depth: int = 8,
    *,
    check: bool = True,
) -> GenericRun:
    """Meet every demand in order, then finish with joins and prolongs."""
    _check_agenda(P, agenda)
    N = NQForcing(P, enum, check=check)
    res = GenericRun(P, enum, list(agenda), seed, depth, [NQCondition()])

    def step(q: NQCondition) -> NQCondition:
        prev = res.chain[-1]
        if q == prev:
            return q
        msg = N.leq_failure(q, prev)
        if msg:
            raise CertificateFailure(f"chain link {len(res.chain)} does not extend its predecessor: {msg}")
        res.chain.append(q)
        _note_pairs(N, res, q)
        return q

    for d in agenda:
        p = res.chain[-1]
        if isinstance(d, Join):
            step(N.join(p, d.x))
        elif isinstance(d, Prolong):
            p = step(N.join(p, d.x))
            step(N.prolong(p, P.rank(d.x), d.N))
        elif isinstance(d, AddName):
            q = step(N.add_name(p, d.x, d.name))
            if not any(o.x == d.x and o.name == d.name for o in res.obligations):
                res.obligations.append(Obligation(d.x, d.name, len(q[d.x].s)))
        elif isinstance(d, Witness):
            used = {w.m for w in res.witnesses if (w.a, w.b) == (d.a, d.b)}
            hit = _decided_hit(p, d, used, enum)
            if hit is not None:
                res.witnesses.append(WitnessRecord(d.a, d.b, d.M, *hit, constructed=False))
            else:
                w = N.incompatibility_witness(p, d.a, d.b, d.M)
                step(w.q)
                res.witnesses.append(WitnessRecord(d.a, d.b, d.M, w.m, w.k))
        else:
            raise ValidationError(f"unknown demand {d!r}")

    if agenda:
        order = list(P.elements)
        random.Random(seed).shuffle(order)
        for x in order:
            step(N.join(res.chain[-1], x))
        for xi in sorted({P.rank(x) for x in P}):
            step(N.prolong(res.chain[-1], xi, depth + 1))
    return res


def _decided_hit(p: NQCondition, d: Witness, used: set, enum: ClopenEnumeration) -> tuple[int, int] | None:
    """A stage ``m > M`` (not in ``used``) where p already decides ``r_b(m) in s_a(m)``.

    When one exists p already lies in the dense set the demand asks for.
    """
    if d.a not in p or d.b not in p or not len(p[d.b].s):
        return None
    sa, sb = p[d.a].s, p[d.b].s
    r = r_values(sb, enum)
    for m in range(d.M + 1, min(len(sa), len(sb))):
        if m not in used and r[m] in sa[m]:
            return m, r[m]
    return None


def _note_pairs(N: NQForcing, res: GenericRun, q: NQCondition) -> None:
    P = N.P
    for x in q:
        for y in q:
            if (x, y) not in res.pair_thresholds and P.lt(x, y) and P.rank(x) == P.rank(y):
                res.pair_thresholds[x, y] = len(q[x].s)


def verify(res: GenericRun) -> list[Verdict]:
    """Recheck the finite-depth consequences of genericity on the final slaloms."""
    P, enum, final = res.poset, res.enum, res.final
    phi = res.slaloms
    out: list[Verdict] = []

    for ob in res.obligations:
        s = phi[ob.x]
        view = final.restrict(P.q_below(ob.x))
        bad = []
        for n in range(ob.threshold, len(s)):
            v = decide(ob.name, view, n, enum)
            if v is None or v not in s[n]:
                bad.append({"n": n, "value": v})
                break
        out.append(
            Verdict(
                "localize",
                _ANCHORS["localize"],
                not bad,
                {"x": ob.x, "name": ob.name.to_json(), "threshold": ob.threshold, "upto": len(s), "failures": bad},
            )
        )

    for (x, y), t in sorted(res.pair_thresholds.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]))):
        sx, sy = phi[x], phi[y]
        bad = [n for n in range(t, min(len(sx), len(sy))) if not sx[n] <= sy[n]]
        out.append(Verdict("cannibal", _ANCHORS["cannibal"], not bad, {"x": x, "y": y, "threshold": t, "failures": bad[:1]}))
        stop = min(res.depth, len(sx) - 1, len(sy) - 1)
        if stop >= t:
            ok = a_stage(sx, t - 1, stop, enum).issubset(a_stage(sy, t - 1, stop, enum))
        else:
            ok = True
        out.append(
            Verdict(
                "order_preserving_stage",
                _ANCHORS["order_preserving_stage"],
                ok,
                {"x": x, "y": y, "from": t, "to": stop},
            )
        )

    passed_at = {}
    for v in out:
        if v.claim == "localize":
            x = v.witness["x"]
            passed_at.setdefault(x, []).append(v.passed)
    for x in P:
        for y in P:
            if P.ll(x, y):
                checks = passed_at.get(y, [])
                out.append(
                    Verdict(
                        "order_preserving_ll",
                        _ANCHORS["order_preserving_ll"],
                        all(checks),
                        {"x": x, "y": y, "localize_checks": len(checks)},
                    )
                )

    for w in res.witnesses:
        sa, sb = phi[w.a], phi[w.b]
        ok = len(sb) > w.m and len(sa) > w.m
        rb = r_values(sb.prefix(w.m + 1), enum)[w.m] if ok else None
        ok = ok and w.m > w.M and rb == w.k and w.k in sa[w.m]
        out.append(
            Verdict(
                "incomparability",
                _ANCHORS["incomparability"],
                ok,
                {"a": w.a, "b": w.b, "M": w.M, "m": w.m, "k": w.k, "r_b(m)": rb},
            )
        )

    res.verdicts = out
    return out


# -- JSON ---------------------------------------------------------------------


def demand_from_json(obj: Mapping, ground: Mapping | None = None) -> Demand:
    op = obj.get("op")
    try:
        if op == "join":
            return Join(obj["x"])
        if op == "prolong":
            return Prolong(obj["x"], int(obj["N"]))
        if op == "add_name":
            return AddName(obj["x"], name_from_json(obj["name"], ground))
        if op == "witness":
            return Witness(obj["a"], obj["b"], int(obj.get("M", 0)))
    except KeyError as e:
        raise ValidationError(f"demand {dict(obj)!r} is missing field {e}") from None
    raise ValidationError(f"unknown demand op {op!r}")


def demand_to_json(d: Demand) -> dict:
    if isinstance(d, Join):
        return {"op": "join", "x": d.x}
    if isinstance(d, Prolong):
        return {"op": "prolong", "x": d.x, "N": d.N}
    if isinstance(d, AddName):
        return {"op": "add_name", "x": d.x, "name": d.name.to_json()}
    return {"op": "witness", "a": d.a, "b": d.b, "M": d.M}

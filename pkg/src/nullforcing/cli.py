"""Command line entry point.

Exit codes: 0 when every verdict passes, 1 when some verdict fails, 2 on
malformed input (a JSON error record is printed on stdout).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from .dyadic_cantor import ClopenEnumeration, ScaleFunction
from .errors import CertificateFailure, NullForcingError, ValidationError
from .generic_sim import GenericRun, demand_from_json, run, verify, witness_demands
from .names import GroundFunction, RSlalomName, decide
from .nq_forcing import NQCondition, NQForcing, condition_from_json, condition_to_json
from .ranked_poset import RankedPoset
from .slaloms import r_values

__all__ = ["Scenario", "load_scenario", "main"]

MAX_STRATUM = 12
MAX_STAGE_DEPTH = 24  # bits of address depth used by the clopen stage check


class InputError(Exception):
    pass


@dataclass
class Scenario:
    poset: RankedPoset
    scale: ScaleFunction
    depth: int
    index_budget: int
    seed: int
    ground: dict[str, GroundFunction]
    agenda: list
    condition: NQCondition | None
    output: dict

    def enumeration(self) -> ClopenEnumeration:
        return ClopenEnumeration(self.scale, index_budget=self.index_budget)


def _int(obj: dict, key: str, default: int) -> int:
    v = obj.get(key, default)
    if not isinstance(v, int) or isinstance(v, bool):
        raise ValidationError(f"{key!r} must be an integer")
    return v


def parse_scenario(obj: Any) -> Scenario:
    if not isinstance(obj, dict):
        raise ValidationError("scenario must be a JSON object")
    if "poset" not in obj:
        raise ValidationError("scenario needs a 'poset'")
    P = RankedPoset.from_json(obj["poset"])
    for xi in P.ranks(P.elements):
        if len(P.stratum(P.elements, xi)) > MAX_STRATUM:
            raise ValidationError(f"rank {xi} has more than {MAX_STRATUM} elements")
    scale = ScaleFunction.from_spec(obj.get("scale", "min_log"))
    depth = _int(obj, "depth", 8)
    if depth < 0 or depth > scale.n_max or scale(depth) > MAX_STAGE_DEPTH:
        raise ValidationError(f"depth {depth} is too large for this scale (h(depth) must be <= {MAX_STAGE_DEPTH})")
    ground = {}
    for g in obj.get("ground_functions", []):
        ground[g["name"]] = GroundFunction(tuple(g.get("prefix", ())), int(g.get("tail", 0)), label=g["name"])
    agenda = []
    for d in obj.get("agenda", []):
        if d.get("op") == "witness_all":
            agenda.extend(witness_demands(P, d.get("M", [0])))
        else:
            agenda.append(demand_from_json(d, ground))
    cond = condition_from_json(obj["condition"], ground) if "condition" in obj else None
    return Scenario(
        poset=P,
        scale=scale,
        depth=depth,
        index_budget=_int(obj, "index_budget", 1 << 16),
        seed=_int(obj, "seed", 0),
        ground=ground,
        agenda=agenda,
        condition=cond,
        output=obj.get("output", {}),
    )


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(_read_json(path))


def _read_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}") from None


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


# -- subcommands --------------------------------------------------------------


def cmd_check(args) -> tuple[int, Any]:
    sc = load_scenario(args.file)
    if sc.condition is None:
        return 0, {"ok": True, "kind": "scenario", "elements": len(sc.poset), "demands": len(sc.agenda)}
    N = NQForcing(sc.poset, sc.enumeration())
    bad = N.validate(sc.condition)
    if bad:
        return 2, {
            "error": "invalid_condition",
            "violations": [{"clause": v.clause, "coord": v.coord, "message": v.message} for v in bad],
        }
    return 0, {"ok": True, "kind": "condition", "condition": condition_to_json(sc.condition)}


def cmd_enumerate(args) -> tuple[int, Any]:
    h = ScaleFunction.from_spec(args.scale)
    enum = ClopenEnumeration(h)
    rows = []
    for i, c in enumerate(enum.enumerate(args.n, args.count)):
        bits = [format(a, f"0{c.depth}b") if c.depth else "" for a in c.addresses()]
        rows.append({"index": i, "depth": c.depth, "addresses": bits, "measure": str(c.measure())})
    return 0, {"n": args.n, "h(n)": h(args.n), "sets": rows}


def _simulate(sc: Scenario) -> GenericRun:
    res = run(sc.poset, sc.enumeration(), sc.agenda, seed=sc.seed, depth=sc.depth)
    verify(res)
    return res


def cmd_simulate(args) -> tuple[int, Any]:
    sc = _apply_overrides(load_scenario(args.scenario), args)
    rep = _simulate(sc).report()
    out = args.output or sc.output.get("path")
    if out:
        Path(out).write_text(_render(rep, args.format or sc.output.get("format", "json")) + "\n")
    return (0 if rep["summary"]["all_pass"] else 1), rep


def cmd_witness(args) -> tuple[int, Any]:
    sc = _apply_overrides(load_scenario(args.scenario), args)
    a, b = _element(sc.poset, args.a), _element(sc.poset, args.b)
    if sc.poset.le(a, b):
        raise ValidationError(f"{a!r} <= {b!r}: no incompatibility witness exists")
    enum = sc.enumeration()
    N = NQForcing(sc.poset, enum)
    p = sc.condition or NQCondition()
    w = N.incompatibility_witness(p, a, b, args.after)
    sa, sb = w.q[a].s, w.q[b].s
    rb = r_values(sb, enum)[w.m]
    ok = w.m > args.after and rb == w.k and w.k in sa[w.m] and decide(RSlalomName(b), w.q, w.m, enum) == w.k
    rep = {
        "a": a,
        "b": b,
        "M": args.after,
        "m": w.m,
        "k": w.k,
        "recheck": {"r_b(m)": rb, "k_in_s_a(m)": w.k in sa[w.m], "pass": ok},
        "q": condition_to_json(w.q),
    }
    return (0 if ok else 1), rep


def _element(P: RankedPoset, token: str):
    for x in P:
        if str(x) == token:
            return x
    raise ValidationError(f"unknown element {token!r}")


def _apply_overrides(sc: Scenario, args) -> Scenario:
    if getattr(args, "seed", None) is not None:
        sc.seed = args.seed
    if getattr(args, "depth", None) is not None:
        if args.depth < 0 or sc.scale(args.depth) > MAX_STAGE_DEPTH:
            raise ValidationError(f"depth {args.depth} is too large for this scale")
        sc.depth = args.depth
    return sc


# -- rendering ----------------------------------------------------------------


def _render(obj: Any, fmt: str) -> str:
    if fmt == "json":
        return _dump(obj)
    if "verdicts" in obj:
        lines = [f"{'PASS' if v['pass'] else 'FAIL'}  {v['claim']:<24} {_short(v['witness'])}" for v in obj["verdicts"]]
        s = obj["summary"]
        lines.append(f"{s['passed']}/{s['total']} verdicts pass")
        return "\n".join(lines)
    if "sets" in obj:
        return "\n".join(
            f"C^{obj['n']}_{r['index']}: depth {r['depth']}, measure {r['measure']}, {{{', '.join(r['addresses'])}}}"
            for r in obj["sets"]
        )
    if "violations" in obj:
        return "\n".join(f"clause {v['clause']} at {v['coord']}: {v['message']}" for v in obj["violations"])
    return "\n".join(f"{k}: {_short(v) if isinstance(v, dict) else v}" for k, v in obj.items() if k != "q")


def _short(d: dict) -> str:
    return ", ".join(f"{k}={v}" for k, v in d.items() if not isinstance(v, (list, dict)))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nullforcing", description="Finite-scale null-ideal forcing toolkit.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "text"], default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--depth", type=int, default=None)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("check", parents=[common], help="validate a scenario or serialized condition")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("enumerate", parents=[common], help="list the first clopen sets of stage n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--scale", default="min_log")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("simulate", parents=[common], help="run and verify a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("witness", parents=[common], help="build one incompatibility witness")
    p.add_argument("--scenario", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--after", type=int, default=0)
    p.set_defaults(func=cmd_witness)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    fmt = args.format or "json"
    try:
        code, payload = args.func(args)
    except (InputError, NullForcingError, KeyError, TypeError, ValueError) as e:
        kind = "certificate_failure" if isinstance(e, CertificateFailure) else "input_error"
        print(_dump({"error": kind, "type": type(e).__name__, "message": str(e)}))
        return 1 if isinstance(e, CertificateFailure) else 2
    print(_render(payload, fmt))
    return code


if __name__ == "__main__":
    sys.exit(main())

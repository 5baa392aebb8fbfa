"""Command-line surface.

Every subcommand is a thin adapter over the library: parse the model,
validate it, run one query, print a deterministic JSON document (or a
human summary with --pretty).  Exit codes: 0 success, 1 usage error,
2 validation failure, 3 query error, 4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import (CapExceeded, HcfDiagram, ModelError, QueryError, UnknownVariable,
               CounterfactualQuery, blocks, BlockingQuery,
               certify_causal_network, check_marginal_reproduction,
               counterfactual, d_separated, graphical_causes,
               graphical_fixed_set, joint, minimal_blocking_sets,
               oracle_causes, oracle_is_d_map, optimal_policy, parse_document,
               posterior, serialize_model, to_hcf, validate_diagram,
               value_of_information)
from .inference import WORLD_PAIR_CAP

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_QUERY, EXIT_CAP = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def sig12(x: float) -> float:
    return float(f"{x:.12g}")


def _emit(doc, pretty_lines, args) -> int:
    if args.pretty:
        for line in pretty_lines(doc):
            print(line)
    else:
        print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


def _load(path: str):
    with open(path, encoding="utf-8") as f:
        return parse_document(f.read())


def _load_valid(path: str):
    parsed = _load(path)
    d = parsed.diagram if isinstance(parsed, HcfDiagram) else parsed
    violations = validate_diagram(d)
    if violations:
        print(json.dumps({"valid": False, "violations": violations},
                         indent=2, sort_keys=True))
        raise SystemExit(EXIT_INVALID)
    return parsed


def _diagram(parsed):
    return parsed.diagram if isinstance(parsed, HcfDiagram) else parsed


def _hcf(parsed, assume_causal=False):
    if isinstance(parsed, HcfDiagram):
        return parsed
    return to_hcf(parsed, assume_causal=assume_causal)


def _pairs(text: str) -> dict:
    out = {}
    if not text:
        return out
    for part in text.split(","):
        if "=" not in part:
            raise argparse.ArgumentTypeError(
                f"{part!r} is not a name=state pair")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _names(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _factor_doc(f) -> dict:
    return {
        "scope": list(f.scope),
        "states": [list(s) for s in f.states],
        "probabilities": {
            "|".join(key): sig12(float(v))
            for key, v in zip(
                _keys(f.states), f.values.reshape(-1))
        },
    }


def _keys(states):
    import itertools
    return itertools.product(*states)


def build_parser() -> _Parser:
    p = _Parser(prog="decid",
                description="Decision-based causality over influence diagrams")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, **kw):
        c = sub.add_parser(name, **kw)
        c.add_argument("model", help="model file (JSON)")
        c.add_argument("--pretty", action="store_true",
                       help="human-readable summary instead of JSON")
        return c

    cmd("validate", help="check every structural invariant")

    c = cmd("fixed-set", help="graphical fixed set, optionally conditional")
    c.add_argument("--given", type=_names, default=[],
                   help="comma-separated conditioning variables")

    c = cmd("causes", help="minimal cause sets for a variable")
    c.add_argument("--of", required=True, dest="target")
    c.add_argument("--method", choices=["graphical", "oracle"],
                   default="graphical")

    c = cmd("d-sep", help="d-separation verdict")
    c.add_argument("--x", required=True, type=_names)
    c.add_argument("--y", required=True, type=_names)
    c.add_argument("--given", type=_names, default=[])

    c = cmd("minimal", help="minimal blocking sets for a target")
    c.add_argument("--target", required=True)
    c.add_argument("--decisions", type=_names, default=None,
                   help="restrict the decision set (default: all)")
    c.add_argument("--exclude", type=_names, default=[])

    c = cmd("to-hcf", help="transform to Howard Canonical Form")
    c.add_argument("--assume-causal", action="store_true")
    c.add_argument("-o", "--output", help="write the HCF model here")

    c = cmd("check-hcf", help="audit mechanism priors against the original")
    c.add_argument("--original", required=True,
                   help="the pre-transformation model file")

    c = cmd("infer", help="joint or posterior probabilities")
    c.add_argument("--decisions", type=_pairs, default={})
    c.add_argument("--evidence", type=_pairs, default={})
    c.add_argument("--query", type=_names, default=None)

    c = cmd("counterfactual", help="twin-network counterfactual query")
    c.add_argument("--factual-decisions", type=_pairs, default={})
    c.add_argument("--evidence", type=_pairs, default={})
    c.add_argument("--counterfactual-decisions", type=_pairs, default={})
    c.add_argument("--query", required=True, type=_names)
    c.add_argument("--assume-causal", action="store_true")

    cmd("evaluate", help="optimal policy and maximum expected utility")

    c = cmd("voi", help="value of information of observing a node")
    c.add_argument("--node", required=True)
    c.add_argument("--decision", required=True)
    c.add_argument("--no-forgetting", action="store_true")

    cmd("certify-causal", help="certify the diagram as a causal network")

    c = cmd("is-d-map", help="numerical independence vs d-separation scan")
    c.add_argument("--max-cond", type=int, default=2)

    return p


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        return _dispatch(args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_QUERY
    except UnknownVariable as e:
        print(json.dumps({"error": str(e)}, indent=2))
        return EXIT_QUERY
    except ModelError as e:
        print(json.dumps({"error": str(e)}, indent=2))
        return EXIT_INVALID
    except CapExceeded as e:
        print(json.dumps({"error": str(e)}, indent=2))
        return EXIT_CAP
    except (QueryError, ValueError) as e:
        print(json.dumps({"error": str(e)}, indent=2))
        return EXIT_QUERY
    except OSError as e:
        print(f"decid: {e}", file=sys.stderr)
        return EXIT_USAGE


def _world_cap() -> int:
    raw = os.environ.get("CID_CAP_WORLDS")
    return int(raw) if raw else WORLD_PAIR_CAP


def _dispatch(args) -> int:
    if args.command == "validate":
        parsed = _load(args.model)
        violations = validate_diagram(_diagram(parsed))
        doc = {"valid": not violations, "violations": violations}
        code = EXIT_OK if not violations else EXIT_INVALID
        _emit(doc, lambda d: (
            ["model is valid"] if d["valid"]
            else [f"violation: {v}" for v in d["violations"]]), args)
        return code

    parsed = _load_valid(args.model)
    d = _diagram(parsed)

    if args.command == "fixed-set":
        members = sorted(graphical_fixed_set(d, set(args.given)))
        doc = {"given": sorted(args.given), "fixed_set": members,
               "causal": d.causal}
        return _emit(doc, lambda o: [f"fixed set: {', '.join(o['fixed_set']) or '(empty)'}"
                                     + ("" if o["causal"] else
                                        "  [claim only: diagram not annotated causal]")],
                     args)

    if args.command == "causes":
        if args.method == "graphical":
            report = graphical_causes(d, args.target)
        else:
            report = oracle_causes(_hcf(parsed), args.target,
                                   world_pair_cap=_world_cap())
        doc = {"target": report.target, "method": report.method,
               "cause_sets": [sorted(s) for s in report.cause_sets],
               "reason": report.reason}
        return _emit(doc, lambda o: (
            [f"no causes: {o['reason']}"] if o["reason"] else
            [f"cause set: {{{', '.join(s)}}}" for s in o["cause_sets"]]), args)

    if args.command == "d-sep":
        verdict = d_separated(d, set(args.x), set(args.y), set(args.given))
        doc = {"x": sorted(args.x), "y": sorted(args.y),
               "given": sorted(args.given), "d_separated": verdict}
        return _emit(doc, lambda o: [
            f"{o['x']} and {o['y']} given {o['given']}: "
            + ("d-separated" if o["d_separated"] else "connected")], args)

    if args.command == "minimal":
        decisions = set(args.decisions) if args.decisions is not None \
            else set(d.decisions())
        sets = minimal_blocking_sets(d, decisions, args.target,
                                     exclude=set(args.exclude))
        doc = {"target": args.target, "decisions": sorted(decisions),
               "minimal_blocking_sets": [sorted(s) for s in sets]}
        return _emit(doc, lambda o: [f"{{{', '.join(s)}}}"
                                     for s in o["minimal_blocking_sets"]]
                     or ["(none)"], args)

    if args.command == "to-hcf":
        hcf = to_hcf(d, assume_causal=args.assume_causal)
        text = serialize_model(hcf)
        if args.output:
            with open(args.output, "w", encoding="utf-8") as f:
                f.write(text)
            doc = {"written": args.output,
                   "mechanisms": [m.name for m in hcf.mechanisms]}
            return _emit(doc, lambda o: [f"wrote {o['written']} with "
                                         f"{len(o['mechanisms'])} mechanism(s)"],
                         args)
        print(text, end="")
        return EXIT_OK

    if args.command == "check-hcf":
        if not isinstance(parsed, HcfDiagram):
            raise QueryError("model has no mechanisms section; "
                             "run to-hcf first")
        with open(args.original, encoding="utf-8") as f:
            orig = _diagram(parse_document(f.read()))
        violations = check_marginal_reproduction(orig, parsed)
        doc = {"pass": not violations, "violations": violations,
               "priors": {m.name: {
                   "|".join(k): [sig12(p) for p in row]
                   for k, row in sorted(m.prior.rows.items())}
                   for m in parsed.mechanisms}}
        _emit(doc, lambda o: (["all mechanism priors reproduce the original "
                               "tables"] if o["pass"] else
                              [f"violation: {v}" for v in o["violations"]]),
              args)
        return EXIT_OK if not violations else EXIT_QUERY

    if args.command == "infer":
        if args.query:
            f = posterior(d, args.decisions, args.evidence, args.query)
        else:
            if args.evidence:
                raise QueryError("--evidence requires --query")
            f = joint(d, args.decisions)
        doc = _factor_doc(f)
        return _emit(doc, _pretty_factor, args)

    if args.command == "counterfactual":
        hcf = _hcf(parsed, assume_causal=args.assume_causal)
        q = CounterfactualQuery(args.factual_decisions, args.evidence,
                                args.counterfactual_decisions,
                                tuple(args.query))
        doc = _factor_doc(counterfactual(hcf, q))
        return _emit(doc, _pretty_factor, args)

    if args.command == "evaluate":
        policy, eu = optimal_policy(d)
        doc = {"expected_utility": sig12(eu),
               "policy": {dec: {"|".join(k): v for k, v in rules.items()}
                          for dec, rules in policy.rules.items()},
               "information": {dec: list(policy.info_order[dec])
                               for dec in policy.rules}}
        return _emit(doc, lambda o: [f"maximum expected utility: "
                                     f"{o['expected_utility']}"]
                     + [f"  {dec}: {rules}"
                        for dec, rules in o["policy"].items()], args)

    if args.command == "voi":
        v = value_of_information(d, args.node, args.decision,
                                 no_forgetting=args.no_forgetting)
        doc = {"node": args.node, "decision": args.decision,
               "value_of_information": sig12(v)}
        return _emit(doc, lambda o: [f"VOI({o['node']} -> {o['decision']}) = "
                                     f"{o['value_of_information']}"], args)

    if args.command == "certify-causal":
        report = certify_causal_network(d)
        doc = {"certified": report.certified, "reasons": list(report.reasons)}
        return _emit(doc, lambda o: (["certified causal network"]
                                     if o["certified"] else
                                     [f"not certifiable: {r}"
                                      for r in o["reasons"]]), args)

    if args.command == "is-d-map":
        verdict, counterexample = oracle_is_d_map(d, max_cond=args.max_cond)
        doc = {"is_d_map": verdict, "counterexample": counterexample}
        return _emit(doc, lambda o: [
            "D-map" if o["is_d_map"]
            else f"not a D-map: {o['counterexample']}"], args)

    raise AssertionError(f"unhandled command {args.command}")


def _pretty_factor(doc):
    yield "P(" + ", ".join(doc["scope"]) + ")"
    for key, p in doc["probabilities"].items():
        yield f"  {key or '()'}: {p}"


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()

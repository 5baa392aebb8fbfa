"""JSON model interchange format.

Sections: variables, relevance_arcs, information_arcs, cpts,
deterministic, utility, decision_order, annotations, and (for diagrams
carrying extracted mechanisms) mechanisms.  Row keys join parent states
with "|" in parent order; unknown keys anywhere are rejected.
Serialization is canonical, so parse -> serialize -> parse is identity.
"""

from __future__ import annotations

import json

from .errors import ParseError
from .mechanisms import HcfDiagram, MechanismSpec
from .model import (CHANCE, DECISION, DETERMINISTIC, UTILITY,
                    ConditionalTable, Diagram, Node, UtilityTable, Variable,
                    validate_diagram)

_TOP_KEYS = {"variables", "relevance_arcs", "information_arcs", "cpts",
             "deterministic", "utility", "decision_order", "annotations",
             "mechanisms"}
_VAR_KEYS = {"name", "kind", "states", "set_decision_for"}
_TABLE_KEYS = {"parent_order", "rows"}
_UTILITY_KEYS = {"parents", "values"}
_ANNOTATION_KEYS = {"causal", "declared_fixed"}
_MECHANISM_KEYS = {"node", "source", "domain", "fixed_parents", "mappings"}


def parse_document(text: str):
    """Parse a model document into a Diagram, or an HcfDiagram when a
    mechanisms section is present."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON at column {e.colno}: {e.msg}",
                         line=e.lineno) from e
    if not isinstance(doc, dict):
        raise ParseError("top-level document must be an object")
    _reject_unknown(doc, _TOP_KEYS, "document")

    variables = doc.get("variables")
    if not isinstance(variables, list):
        raise ParseError("'variables' must be a list")
    nodes = []
    states_of = {}
    kinds = {}
    for entry in variables:
        _reject_unknown(entry, _VAR_KEYS, "variable entry")
        name = entry.get("name")
        kind = entry.get("kind")
        if not isinstance(name, str) or not name:
            raise ParseError(f"variable entry {entry!r} needs a name")
        if name in states_of:
            raise ParseError(f"duplicate variable {name!r}")
        if kind not in (CHANCE, DETERMINISTIC, DECISION, UTILITY):
            raise ParseError(f"{name}: unknown kind {kind!r}")
        states = tuple(entry.get("states", []))
        if kind != UTILITY and (not states or
                                not all(isinstance(s, str) for s in states)):
            raise ParseError(f"{name}: states must be a list of labels")
        states_of[name] = states
        kinds[name] = kind
        nodes.append((name, kind, states, entry.get("set_decision_for")))

    cpts = doc.get("cpts", {}) or {}
    dets = doc.get("deterministic", {}) or {}
    for section, label in ((cpts, "cpts"), (dets, "deterministic")):
        if not isinstance(section, dict):
            raise ParseError(f"'{label}' must be an object")

    built = []
    for name, kind, states, sdf in nodes:
        if kind in (CHANCE, DETERMINISTIC):
            section = cpts if kind == CHANCE else dets
            if name not in section:
                raise ParseError(f"{name}: missing CPT "
                                 f"({'cpts' if kind == CHANCE else 'deterministic'} section)")
            table = _parse_table(name, section[name], states_of)
            built.append(Node(Variable(name, states), kind, table=table))
        elif kind == DECISION:
            built.append(Node(Variable(name, states), DECISION,
                              set_decision_for=sdf))
        else:
            spec = doc.get("utility")
            if not isinstance(spec, dict):
                raise ParseError(f"{name}: utility node declared but no "
                                 "'utility' section")
            _reject_unknown(spec, _UTILITY_KEYS, "utility section")
            parents = tuple(spec.get("parents", []))
            values = {}
            for key, v in spec.get("values", {}).items():
                if not isinstance(v, (int, float)):
                    raise ParseError(f"{name}: utility value {v!r} at {key!r} "
                                     "is not a number")
                values[_split_key(key, parents, states_of, name)] = float(v)
            built.append(Node(Variable(name, ()), UTILITY,
                              utility=UtilityTable(parents, values)))
    for section, label, kind in ((cpts, "cpts", CHANCE),
                                 (dets, "deterministic", DETERMINISTIC)):
        for name in section:
            if kinds.get(name) != kind:
                raise ParseError(f"'{label}' section names {name!r}, which is "
                                 f"not a {kind} variable")

    relevance = _parse_arcs(doc.get("relevance_arcs", []), "relevance_arcs")
    information = _parse_arcs(doc.get("information_arcs", []),
                              "information_arcs")
    order = doc.get("decision_order")
    if order is not None and not (isinstance(order, list)
                                  and all(isinstance(x, str) for x in order)):
        raise ParseError("'decision_order' must be a list of names")
    ann = doc.get("annotations", {}) or {}
    _reject_unknown(ann, _ANNOTATION_KEYS, "annotations")

    diagram = Diagram(tuple(built), relevance, information,
                      tuple(order) if order is not None else None,
                      causal=bool(ann.get("causal", False)),
                      declared_fixed=frozenset(ann.get("declared_fixed", [])))

    if "mechanisms" not in doc:
        return diagram
    mechanisms, provenance = [], {}
    for entry in doc["mechanisms"]:
        _reject_unknown(entry, _MECHANISM_KEYS, "mechanism entry")
        mech, source = entry.get("node"), entry.get("source")
        if mech not in states_of:
            raise ParseError(f"mechanism names unknown node {mech!r}")
        if source not in states_of:
            raise ParseError(f"mechanism {mech}: unknown source {source!r}")
        mappings = tuple(tuple(m) for m in entry.get("mappings", []))
        spec = MechanismSpec(source, tuple(entry.get("domain", [])),
                             tuple(entry.get("fixed_parents", [])),
                             mappings, diagram.node(mech).table)
        mechanisms.append(spec)
        provenance[mech] = source
    return HcfDiagram(diagram, tuple(mechanisms), provenance)


def parse_model(text: str) -> Diagram:
    parsed = parse_document(text)
    return parsed.diagram if isinstance(parsed, HcfDiagram) else parsed


def _reject_unknown(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ParseError(f"{where} must be an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ParseError(f"unknown key(s) {sorted(unknown)} in {where}")


def _parse_arcs(raw, label):
    if not isinstance(raw, list):
        raise ParseError(f"'{label}' must be a list")
    arcs = []
    for entry in raw:
        if not (isinstance(entry, (list, tuple)) and len(entry) == 2
                and all(isinstance(e, str) for e in entry)):
            raise ParseError(f"'{label}' entry {entry!r} must be a "
                             "[from, to] pair")
        arcs.append((entry[0], entry[1]))
    return tuple(arcs)


def _split_key(key, parents, states_of, owner):
    parts = tuple(key.split("|")) if key else ()
    if len(parts) != len(parents):
        raise ParseError(f"{owner}: row key {key!r} does not match parents "
                         f"{list(parents)}")
    for p, s in zip(parents, parts):
        if p in states_of and s not in states_of[p]:
            raise ParseError(f"{owner}: row key {key!r} uses unknown state "
                             f"{s!r} of {p}")
    return parts


def _parse_table(name, spec, states_of) -> ConditionalTable:
    _reject_unknown(spec, _TABLE_KEYS, f"table for {name}")
    parents = tuple(spec.get("parent_order", []))
    rows = {}
    for key, dist in spec.get("rows", {}).items():
        if not (isinstance(dist, list)
                and all(isinstance(p, (int, float)) for p in dist)):
            raise ParseError(f"{name}: row {key!r} must be a list of numbers")
        if any(p < 0 or p > 1 for p in dist):
            raise ParseError(f"{name}: row {key!r} has entries outside [0, 1]")
        rows[_split_key(key, parents, states_of, name)] = tuple(
            float(p) for p in dist)
    return ConditionalTable(parents, rows)


# ---------------------------------------------------------------------------
# Serialization


def serialize_model(obj) -> str:
    """Canonical JSON for a Diagram or HcfDiagram.  Probabilities keep
    full float precision so round-trips are exact."""
    hcf = obj if isinstance(obj, HcfDiagram) else None
    d = hcf.diagram if hcf else obj
    doc = {
        "variables": [_variable_entry(n) for n in d.nodes],
        "relevance_arcs": [list(a) for a in sorted(d.relevance_arcs)],
        "information_arcs": [list(a) for a in sorted(d.information_arcs)],
        "cpts": {n.name: _table_entry(n.table) for n in d.nodes
                 if n.kind == CHANCE},
        "deterministic": {n.name: _table_entry(n.table) for n in d.nodes
                          if n.kind == DETERMINISTIC},
        "utility": _utility_entry(d),
        "decision_order": list(d.decision_order)
        if d.decision_order is not None else None,
        "annotations": {"causal": d.causal,
                        "declared_fixed": sorted(d.declared_fixed)},
    }
    if hcf is not None:
        doc["mechanisms"] = [
            {"node": m.name, "source": m.target, "domain": list(m.domain),
             "fixed_parents": list(m.fixed_parents),
             "mappings": [list(s) for s in m.states]}
            for m in hcf.mechanisms]
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _variable_entry(n: Node) -> dict:
    entry = {"name": n.name, "kind": n.kind, "states": list(n.states)}
    if n.kind == UTILITY:
        del entry["states"]
    if n.set_decision_for is not None:
        entry["set_decision_for"] = n.set_decision_for
    return entry


def _table_entry(table: ConditionalTable) -> dict:
    return {"parent_order": list(table.parent_order),
            "rows": {"|".join(k): list(v)
                     for k, v in sorted(table.rows.items())}}


def _utility_entry(d: Diagram):
    u = d.utility()
    if u is None:
        return None
    return {"parents": list(u.utility.parent_order),
            "values": {"|".join(k): v
                       for k, v in sorted(u.utility.rows.items())}}

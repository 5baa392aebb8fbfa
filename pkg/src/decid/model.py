"""Influence diagram data model, validation, and state-space utilities.

A diagram is a DAG over chance, deterministic, decision, and utility
nodes.  Relevance arcs point into chance/deterministic/utility nodes and
carry the conditional tables; information arcs point into decisions and
record what is known when the decision is made.  Diagrams are immutable
after construction and safe to share across workers.

Set decisions ("do nothing" / "set x to k") are stored structurally: the
target's conditional table ranges only over its ordinary parents, and
the inference engine composes the intervention at query time.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .errors import UnknownVariable

ROW_SUM_TOL = 1e-9

CHANCE = "chance"
DETERMINISTIC = "deterministic"
DECISION = "decision"
UTILITY = "utility"

KINDS = (CHANCE, DETERMINISTIC, DECISION, UTILITY)

DO_NOTHING = "do_nothing"
SET_PREFIX = "set="

# An assignment binds variable names to state labels.
Assignment = dict


@dataclass(frozen=True)
class Variable:
    """A named variable with an ordered, significant state list."""

    name: str
    states: tuple[str, ...]


@dataclass(frozen=True)
class ConditionalTable:
    """P(child | parents): one distribution row per parent instance.

    Row keys are tuples of parent states aligned with ``parent_order``;
    row values are aligned with the child's state order.
    """

    parent_order: tuple[str, ...]
    rows: Mapping[tuple[str, ...], tuple[float, ...]]


@dataclass(frozen=True)
class UtilityTable:
    """Real-valued utility for each instance of the utility node's parents."""

    parent_order: tuple[str, ...]
    rows: Mapping[tuple[str, ...], float]


@dataclass(frozen=True)
class Node:
    variable: Variable
    kind: str
    table: ConditionalTable | None = None
    utility: UtilityTable | None = None
    set_decision_for: str | None = None

    @property
    def name(self) -> str:
        return self.variable.name

    @property
    def states(self) -> tuple[str, ...]:
        return self.variable.states


def chance_node(name, states, parent_order, rows, deterministic=False) -> Node:
    kind = DETERMINISTIC if deterministic else CHANCE
    table = ConditionalTable(tuple(parent_order), _freeze_rows(rows))
    return Node(Variable(name, tuple(states)), kind, table=table)


def decision_node(name, states, set_decision_for=None) -> Node:
    return Node(Variable(name, tuple(states)), DECISION,
                set_decision_for=set_decision_for)


def set_decision_node(name, target_states, target) -> Node:
    """Decision with alternatives "do nothing" plus one "set=" per target state."""
    states = (DO_NOTHING,) + tuple(SET_PREFIX + s for s in target_states)
    return decision_node(name, states, set_decision_for=target)


def utility_node(name, parent_order, rows) -> Node:
    table = UtilityTable(tuple(parent_order),
                         {tuple(k): float(v) for k, v in rows.items()})
    return Node(Variable(name, ()), UTILITY, utility=table)


def _freeze_rows(rows) -> dict:
    return {tuple(k): tuple(float(v) for v in dist) for k, dist in rows.items()}


@dataclass(frozen=True)
class Diagram:
    nodes: tuple[Node, ...]
    relevance_arcs: tuple[tuple[str, str], ...] = ()
    information_arcs: tuple[tuple[str, str], ...] = ()
    decision_order: tuple[str, ...] | None = None
    causal: bool = False
    declared_fixed: frozenset[str] = frozenset()

    # -- lookups ---------------------------------------------------------

    def node(self, name: str) -> Node:
        for n in self.nodes:
            if n.name == name:
                return n
        raise UnknownVariable(f"unknown variable {name!r}")

    def has(self, name: str) -> bool:
        return any(n.name == name for n in self.nodes)

    def names(self) -> list[str]:
        return [n.name for n in self.nodes]

    def decisions(self) -> list[str]:
        return [n.name for n in self.nodes if n.kind == DECISION]

    def uncertain(self) -> list[str]:
        """Chance and deterministic node names."""
        return [n.name for n in self.nodes if n.kind in (CHANCE, DETERMINISTIC)]

    def utility(self) -> Node | None:
        for n in self.nodes:
            if n.kind == UTILITY:
                return n
        return None

    def all_arcs(self) -> list[tuple[str, str]]:
        return list(self.relevance_arcs) + list(self.information_arcs)

    def parents(self, name: str) -> set[str]:
        return {a for a, b in self.relevance_arcs if b == name}

    def info_parents(self, name: str) -> list[str]:
        # Canonical (sorted) order; information arcs are an unordered set.
        return sorted(a for a, b in self.information_arcs if b == name)

    def children(self, name: str) -> set[str]:
        return {b for a, b in self.all_arcs() if a == name}

    def set_decisions_for(self, target: str) -> list[str]:
        return [n.name for n in self.nodes
                if n.kind == DECISION and n.set_decision_for == target]

    # -- graph structure -------------------------------------------------

    def topological_order(self) -> list[str]:
        known = {n.name for n in self.nodes}
        arcs = [(a, b) for a, b in self.all_arcs() if a in known and b in known]
        order: list[str] = []
        indeg = {n.name: 0 for n in self.nodes}
        for a, b in arcs:
            indeg[b] += 1
        ready = sorted(n for n, k in indeg.items() if k == 0)
        while ready:
            n = ready.pop(0)
            order.append(n)
            for a, b in arcs:
                if a == n:
                    indeg[b] -= 1
                    if indeg[b] == 0:
                        ready.append(b)
            ready.sort()
        return order

    def descendants(self, sources: Iterable[str]) -> set[str]:
        """Strict descendants of ``sources`` following all arcs."""
        out: dict[str, set[str]] = {}
        for a, b in self.all_arcs():
            out.setdefault(a, set()).add(b)
        seen: set[str] = set()
        frontier = list(sources)
        while frontier:
            n = frontier.pop()
            for c in out.get(n, ()):
                if c not in seen:
                    seen.add(c)
                    frontier.append(c)
        return seen

    def fixed_nodes(self) -> frozenset[str]:
        """Graphical fixed set: uncertain non-descendants of all decisions,
        plus any user-declared members."""
        desc = self.descendants(self.decisions())
        fixed = {x for x in self.uncertain() if x not in desc}
        return frozenset(fixed | set(self.declared_fixed))

    def with_arcs(self, relevance=None, information=None) -> "Diagram":
        return replace(
            self,
            relevance_arcs=tuple(relevance) if relevance is not None else self.relevance_arcs,
            information_arcs=tuple(information) if information is not None else self.information_arcs,
        )


def enumerate_instances(variables: Sequence[Variable]) -> list[Assignment]:
    """All joint assignments, lexicographic by variable order then state
    order.  The empty variable list yields one empty assignment."""
    names = [v.name for v in variables]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate variable names in {names}")
    out = []
    for combo in itertools.product(*(v.states for v in variables)):
        out.append(dict(zip(names, combo)))
    return out


def instance_keys(variables: Sequence[Variable]) -> list[tuple[str, ...]]:
    """Row keys (state tuples) in the same canonical order as
    :func:`enumerate_instances`."""
    return list(itertools.product(*(v.states for v in variables)))


def parent_variables(d: Diagram, parent_order: Sequence[str]) -> list[Variable]:
    return [d.node(p).variable for p in parent_order]


# ---------------------------------------------------------------------------
# Validation


def validate_diagram(d: Diagram) -> list[str]:
    """Return every violated structural invariant; empty means valid."""
    report: list[str] = []
    names = [n.name for n in d.nodes]
    dupes = {x for x in names if names.count(x) > 1}
    for x in sorted(dupes):
        report.append(f"duplicate variable {x!r}")
    known = set(names)
    by_name = {n.name: n for n in d.nodes}

    for n in d.nodes:
        if n.kind not in KINDS:
            report.append(f"{n.name}: unknown kind {n.kind!r}")
            continue
        if not n.name:
            report.append("empty variable name")
        if n.kind != UTILITY:
            if len(n.states) < 2:
                report.append(f"{n.name}: needs at least 2 states")
            if len(set(n.states)) != len(n.states):
                report.append(f"{n.name}: duplicate state labels")
            for s in n.states:
                if "|" in s:
                    report.append(f"{n.name}: state {s!r} contains reserved '|'")

    utilities = [n for n in d.nodes if n.kind == UTILITY]
    if len(utilities) > 1:
        report.append("more than one utility node")

    # Arc sanity.
    for a, b in d.relevance_arcs:
        if a not in known or b not in known:
            report.append(f"relevance arc {a}->{b}: unknown endpoint")
        elif by_name[b].kind == DECISION:
            report.append(f"relevance arc {a}->{b}: arcs into decisions must be information arcs")
    for a, b in d.information_arcs:
        if a not in known or b not in known:
            report.append(f"information arc {a}->{b}: unknown endpoint")
        elif by_name[b].kind != DECISION:
            report.append(f"information arc {a}->{b}: target is not a decision")
    if len(d.topological_order()) != len(set(names)):
        report.append("cycle in combined arc graph")

    if report:
        # Table checks below assume a structurally coherent graph.
        return report

    for n in d.nodes:
        rel_parents = d.parents(n.name)
        setdecs = {s for s in rel_parents
                   if by_name[s].kind == DECISION and by_name[s].set_decision_for == n.name}
        if n.kind in (CHANCE, DETERMINISTIC):
            if n.table is None:
                report.append(f"{n.name}: missing conditional table")
                continue
            expected = rel_parents - setdecs
            if set(n.table.parent_order) != expected:
                report.append(
                    f"{n.name}: table parents {sorted(n.table.parent_order)} "
                    f"!= relevance parents {sorted(expected)}")
                continue
            report.extend(_check_table(d, n))
        elif n.kind == DECISION:
            if n.table is not None or n.utility is not None:
                report.append(f"{n.name}: decision nodes carry no tables")
            if n.set_decision_for is not None:
                report.extend(_check_set_decision(d, n))
        elif n.kind == UTILITY:
            if n.utility is None:
                report.append(f"{n.name}: missing utility values")
                continue
            if set(n.utility.parent_order) != rel_parents:
                report.append(
                    f"{n.name}: utility parents {sorted(n.utility.parent_order)} "
                    f"!= relevance parents {sorted(rel_parents)}")
                continue
            keys = set(instance_keys(parent_variables(d, n.utility.parent_order)))
            got = set(n.utility.rows)
            for k in sorted(keys - got):
                report.append(f"{n.name}: missing utility row {k}")
            for k in sorted(got - keys):
                report.append(f"{n.name}: unexpected utility row {k}")
            for k, v in n.utility.rows.items():
                if not math.isfinite(v):
                    report.append(f"{n.name}: non-finite utility at {k}")

    for x in d.uncertain():
        setdecs = d.set_decisions_for(x)
        if len(setdecs) > 1:
            report.append(f"{x}: more than one set decision ({sorted(setdecs)})")

    if d.decision_order is not None:
        if sorted(d.decision_order) != sorted(d.decisions()):
            report.append("decision_order is not a permutation of the decision nodes")
    for x in sorted(d.declared_fixed):
        if x not in known:
            report.append(f"declared_fixed names unknown variable {x!r}")

    return report


def _check_table(d: Diagram, n: Node) -> list[str]:
    report = []
    keys = set(instance_keys(parent_variables(d, n.table.parent_order)))
    got = set(n.table.rows)
    for k in sorted(keys - got):
        report.append(f"{n.name}: missing CPT row {k}")
    for k in sorted(got - keys):
        report.append(f"{n.name}: unexpected CPT row {k}")
    for k in sorted(got & keys):
        dist = n.table.rows[k]
        if len(dist) != len(n.states):
            report.append(f"{n.name}: row {k} has {len(dist)} entries, "
                          f"expected {len(n.states)}")
            continue
        if any(p < 0 or p > 1 for p in dist):
            report.append(f"{n.name}: row {k} has entries outside [0, 1]")
        if abs(sum(dist) - 1.0) > ROW_SUM_TOL:
            report.append(f"{n.name}: row sum {sum(dist)!r} != 1 at row {k}")
        if n.kind == DETERMINISTIC:
            ones = sum(1 for p in dist if abs(p - 1.0) <= ROW_SUM_TOL)
            zeros = sum(1 for p in dist if abs(p) <= ROW_SUM_TOL)
            if ones != 1 or zeros != len(dist) - 1:
                report.append(f"{n.name}: row {k} of deterministic node is not one-hot")
    return report


def _check_set_decision(d: Diagram, n: Node) -> list[str]:
    report = []
    target = n.set_decision_for
    if not d.has(target):
        return [f"{n.name}: set decision targets unknown variable {target!r}"]
    tnode = d.node(target)
    if tnode.kind not in (CHANCE, DETERMINISTIC):
        report.append(f"{n.name}: set decision target {target} is not a chance node")
        return report
    expected = {DO_NOTHING} | {SET_PREFIX + s for s in tnode.states}
    if set(n.states) != expected:
        report.append(f"{n.name}: set decision alternatives {sorted(n.states)} "
                      f"!= {sorted(expected)}")
    if d.children(n.name) != {target}:
        report.append(f"{n.name}: set decision must have {target} as its only child")
    return report

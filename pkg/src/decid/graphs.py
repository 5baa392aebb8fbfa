"""Purely structural queries on influence diagrams.

Blocking, minimal blocking sets, d-separation, arc removability, set
decision recognition, graphical fixed sets and causes, and causal
network certification.  Everything here is a pure function of an
immutable diagram.

Blocking is generalized so that the candidate set C may contain decision
nodes: a directed path counts as blocked when any of its nodes,
including its source decision, lies in C.  This is what makes singleton
decision causes (e.g. a lone decision blocking itself from a target)
expressible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import NodeBudgetExceeded, UnknownVariable
from .model import (CHANCE, DECISION, DETERMINISTIC, DO_NOTHING, SET_PREFIX,
                    UTILITY, Diagram, instance_keys, parent_variables)

MINIMAL_SET_NODE_BUDGET = 20
REMOVABILITY_TOL = 1e-9


@dataclass(frozen=True)
class BlockingQuery:
    candidate_set: frozenset[str]
    decisions: frozenset[str]
    target: str


@dataclass(frozen=True)
class CauseReport:
    target: str
    cause_sets: tuple[frozenset[str], ...]
    method: str
    reason: str | None = None


@dataclass(frozen=True)
class CertificationReport:
    certified: bool
    reasons: tuple[str, ...] = ()


def _check_names(d: Diagram, names) -> None:
    for x in names:
        if not d.has(x):
            raise UnknownVariable(f"unknown variable {x!r}")


def _out_arcs(d: Diagram) -> dict[str, set[str]]:
    out: dict[str, set[str]] = {}
    for a, b in d.all_arcs():
        out.setdefault(a, set()).add(b)
    return out


def blocks(d: Diagram, q: BlockingQuery) -> bool:
    """True iff every directed path (relevance and information arcs)
    from a decision in ``q.decisions`` to the target hits ``q.candidate_set``."""
    C, D, x = set(q.candidate_set), set(q.decisions), q.target
    _check_names(d, C | D | {x})
    if x in C:
        return True
    out = _out_arcs(d)
    seen = set()
    frontier = [s for s in D if s not in C]
    while frontier:
        n = frontier.pop()
        for c in out.get(n, ()):
            if c == x:
                return False
            if c not in C and c not in seen:
                seen.add(c)
                frontier.append(c)
    return True


def _blocks(d: Diagram, C, D, x) -> bool:
    return blocks(d, BlockingQuery(frozenset(C), frozenset(D), x))


def minimal_blocking_sets(d: Diagram, decisions, target, exclude=frozenset(),
                          node_budget: int = MINIMAL_SET_NODE_BUDGET,
                          ) -> list[frozenset[str]]:
    """All inclusion-minimal C from (U ∪ D) \\ ({target} ∪ exclude) that
    block the decisions from the target, smallest first then lexicographic.

    Exhaustive subset search with superset pruning; complete at desk
    scale, capped by ``node_budget`` candidate nodes.
    """
    D = set(decisions)
    _check_names(d, D | {target})
    pool = sorted((set(d.uncertain()) | set(d.decisions()))
                  - {target} - set(exclude))
    if len(pool) > node_budget:
        raise NodeBudgetExceeded(
            f"{len(pool)} candidate nodes exceed budget {node_budget}")
    found: list[frozenset[str]] = []
    for size in range(len(pool) + 1):
        for combo in itertools.combinations(pool, size):
            cand = frozenset(combo)
            if any(m <= cand for m in found):
                continue
            if _blocks(d, cand, D, target):
                found.append(cand)
        if size == 0 and found:
            break  # the empty set blocks vacuously; nothing else is minimal
    found.sort(key=lambda s: (len(s), sorted(s)))
    return found


# ---------------------------------------------------------------------------
# d-separation


def _relevance_parents(d: Diagram) -> dict[str, set[str]]:
    # Information arcs are dropped: decisions act as parentless sources.
    pa: dict[str, set[str]] = {n.name: set() for n in d.nodes}
    for a, b in d.relevance_arcs:
        pa[b].add(a)
    return pa


def d_separated(d: Diagram, X, Y, Z) -> bool:
    """Standard d-separation on the relevance-arc subgraph.

    Uses the active-trail reachability algorithm (Koller & Friedman,
    "Reachable").  Decisions participate as parentless source nodes.
    """
    X, Y, Z = set(X), set(Y), set(Z)
    _check_names(d, X | Y | Z)
    if (X & Y) or (X & Z) or (Y & Z):
        raise ValueError("X, Y, Z must be pairwise disjoint")
    pa = _relevance_parents(d)
    ch: dict[str, set[str]] = {n.name: set() for n in d.nodes}
    for b, parents in pa.items():
        for a in parents:
            ch[a].add(b)

    # Z together with its ancestors: nodes at which colliders are active.
    anc_z = set()
    frontier = list(Z)
    while frontier:
        n = frontier.pop()
        if n in anc_z:
            continue
        anc_z.add(n)
        frontier.extend(pa[n])

    # Direction "up" means the trail arrived from a child, "down" from a
    # parent.
    visited = set()
    frontier = [(x, "up") for x in X]
    while frontier:
        node, direction = frontier.pop()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node not in Z and node in Y:
            return False
        if direction == "up" and node not in Z:
            frontier.extend((p, "up") for p in pa[node])
            frontier.extend((c, "down") for c in ch[node])
        elif direction == "down":
            if node not in Z:
                frontier.extend((c, "down") for c in ch[node])
            if node in anc_z:
                frontier.extend((p, "up") for p in pa[node])
    return True


# ---------------------------------------------------------------------------
# Fixed sets and causes, read from the graph


def graphical_fixed_set(d: Diagram, C=frozenset()) -> frozenset[str]:
    """Uncertain variables blocked from all decisions by C.

    Sound (an F-map consequence) only when the diagram is causal; on
    non-causal diagrams the result is merely the graphical claim.
    """
    D = set(d.decisions())
    C = set(C)
    _check_names(d, C)
    return frozenset(x for x in d.uncertain()
                     if x not in C and _blocks(d, C, D, x))


def graphical_causes(d: Diagram, target: str,
                     node_budget: int = MINIMAL_SET_NODE_BUDGET) -> CauseReport:
    """Minimal blocking sets read as cause sets (sound on causal D-maps)."""
    _check_names(d, [target])
    D = set(d.decisions())
    if target not in d.descendants(D):
        return CauseReport(target, (), "graphical",
                           reason=f"{target} is unaffected by the decisions "
                                  "(member of the fixed set)")
    sets = minimal_blocking_sets(d, D, target, exclude={target},
                                 node_budget=node_budget)
    return CauseReport(target, tuple(sets), "graphical")


# ---------------------------------------------------------------------------
# Minimality


def removable_arcs(d: Diagram) -> list[tuple[str, str]]:
    """Relevance arcs whose removal changes no conditional table.

    Arc a->x is removable iff x's rows are identical (within tolerance)
    across the states of a, holding the other parents fixed.  Arcs from
    set decisions are never removable: the forced alternative always
    matters.  A diagram is minimal iff this list is empty.
    """
    removable = []
    for a, x in d.relevance_arcs:
        xn = d.node(x)
        src = d.node(a)
        if src.kind == DECISION and src.set_decision_for == x:
            continue
        if xn.kind in (CHANCE, DETERMINISTIC):
            order, rows = xn.table.parent_order, xn.table.rows
            get = lambda key: rows[key]
        elif xn.kind == UTILITY:
            order, rows = xn.utility.parent_order, xn.utility.rows
            get = lambda key: (rows[key],)
        else:
            continue
        i = order.index(a)
        rest = [p for p in order if p != a]
        same = True
        for key in instance_keys(parent_variables(d, rest)):
            dists = []
            for s in src.states:
                full = list(key)
                full.insert(i, s)
                dists.append(get(tuple(full)))
            base = dists[0]
            if any(abs(u - v) > REMOVABILITY_TOL
                   for dist in dists[1:] for u, v in zip(base, dist)):
                same = False
                break
        if same:
            removable.append((a, x))
    return removable


def is_set_decision(d: Diagram, s: str, x: str) -> bool:
    """True iff s has alternatives "do nothing" plus "set x to k" for each
    state k of x, and x is s's only child."""
    _check_names(d, [s, x])
    sn = d.node(s)
    if sn.kind != DECISION:
        raise ValueError(f"{s} is not a decision node")
    xn = d.node(x)
    expected = {DO_NOTHING} | {SET_PREFIX + k for k in xn.states}
    return set(sn.states) == expected and d.children(s) == {x}


def certify_causal_network(d: Diagram) -> CertificationReport:
    """Certify that every chance node's parents are its causes.

    The sufficient condition: the diagram is causal, minimal, and every
    nonleaf uncertain variable has a set decision.  A diagram that fails
    here may still be a causal network by user assertion.
    """
    reasons = []
    if not d.causal:
        reasons.append("diagram is not annotated causal")
    for a, x in removable_arcs(d):
        reasons.append(f"removable arc {a}->{x}")
    for x in d.uncertain():
        if not d.children(x):
            continue  # leaf
        setdecs = [s for s in d.set_decisions_for(x) if is_set_decision(d, s, x)]
        if not setdecs:
            reasons.append(f"missing set decision for nonleaf variable {x}")
    return CertificationReport(not reasons, tuple(reasons))

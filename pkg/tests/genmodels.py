"""Seeded random model generators shared by the property suites."""

import itertools
import random

from decid import Diagram, chance_node, decision_node, utility_node


def random_distribution(rng, k):
    raw = [rng.random() + 0.05 for _ in range(k)]
    z = sum(raw)
    return [p / z for p in raw]


def random_diagram(seed, n_chance=4, max_states=3, n_decisions=2,
                   max_parents=2, p_arc=0.6, with_utility=False,
                   causal=True):
    """Random influence diagram: decisions are roots, chance nodes pick
    parents from decisions and earlier chance nodes."""
    rng = random.Random(seed)
    decisions = [f"d{i}" for i in range(n_decisions)]
    nodes = [decision_node(x, ["a0", "a1"]) for x in decisions]
    arcs = []
    earlier = list(decisions)
    chance_names = []
    for i in range(n_chance):
        name = f"x{i}"
        k = rng.randint(2, max_states)
        states = [f"s{j}" for j in range(k)]
        pool = list(earlier)
        rng.shuffle(pool)
        parents = sorted(p for p in pool[:max_parents] if rng.random() < p_arc)
        rows = {}
        parent_states = []
        for p in parents:
            node = next(n for n in nodes if n.name == p)
            parent_states.append(node.states)
        for key in itertools.product(*parent_states):
            rows[key] = random_distribution(rng, k)
        nodes.append(chance_node(name, states, parents, rows))
        arcs.extend((p, name) for p in parents)
        earlier.append(name)
        chance_names.append(name)
    if with_utility:
        k = min(2, len(chance_names))
        parents = sorted(rng.sample(chance_names, k)) if k else []
        parent_states = [next(n for n in nodes if n.name == p).states
                         for p in parents]
        values = {key: round(rng.uniform(0, 100), 3)
                  for key in itertools.product(*parent_states)}
        nodes.append(utility_node("payoff", parents, values))
        arcs.extend((p, "payoff") for p in parents)
    return Diagram(tuple(nodes), tuple(arcs), (),
                   tuple(decisions), causal=causal)


def random_functional_diagram(seed, n_roots=2, n_det=3, n_decisions=1):
    """Roots plus decisions feeding deterministic nodes: every non-root
    is a random function of its parents (already functional form)."""
    rng = random.Random(seed)
    decisions = [f"d{i}" for i in range(n_decisions)]
    nodes = [decision_node(x, ["a0", "a1"]) for x in decisions]
    arcs = []
    roots = []
    for i in range(n_roots):
        name = f"r{i}"
        nodes.append(chance_node(name, ["s0", "s1"], [],
                                 {(): random_distribution(rng, 2)}))
        roots.append(name)
    earlier = decisions + roots
    for i in range(n_det):
        name = f"f{i}"
        pool = list(earlier)
        rng.shuffle(pool)
        parents = sorted(pool[:rng.randint(1, min(2, len(pool)))])
        parent_states = [next(n for n in nodes if n.name == p).states
                         for p in parents]
        rows = {}
        for key in itertools.product(*parent_states):
            j = rng.randrange(2)
            rows[key] = [1.0 if t == j else 0.0 for t in range(2)]
        nodes.append(chance_node(name, ["s0", "s1"], parents, rows,
                                 deterministic=True))
        arcs.extend((p, name) for p in parents)
        earlier.append(name)
    return Diagram(tuple(nodes), tuple(arcs), (), tuple(decisions),
                   causal=True)


def random_dag(seed, n_nodes=8, n_decisions=2, p_arc=0.3):
    """Bare structural DAG (uniform CPTs are irrelevant; used for purely
    graphical property suites)."""
    rng = random.Random(seed)
    decisions = [f"d{i}" for i in range(n_decisions)]
    names = decisions + [f"x{i}" for i in range(n_nodes - n_decisions)]
    nodes = [decision_node(x, ["a0", "a1"]) for x in decisions]
    arcs = []
    for i, name in enumerate(names):
        if name.startswith("d"):
            continue
        parents = [p for p in names[:i] if rng.random() < p_arc]
        rows = {}
        parent_states = [["a0", "a1"] if p.startswith("d") else ["s0", "s1"]
                         for p in parents]
        for key in itertools.product(*parent_states):
            rows[key] = [0.4, 0.6]
        nodes.append(chance_node(name, ["s0", "s1"], parents, rows))
        arcs.extend((p, name) for p in parents)
    return Diagram(tuple(nodes), tuple(arcs), (), tuple(decisions))

"""Independent reference constructions used by the property and acceptance
tests.

Everything here is deliberately written against the raw set-level
definitions of the operations (vertex/edge set expressions) or against
plain counting arguments, never by calling the code paths under test.
"""

from __future__ import annotations

import random

from narmaxtag.models import Mode, Monomial, NarmaxModel, SignalKind, canonicalize
from narmaxtag.trees import NodeLabel, SyntacticTree

# ---------------------------------------------------------------------------
# Independent renumbering and the vertex/edge set expressions
# ---------------------------------------------------------------------------


def preorder_renumber(tree: SyntacticTree, start: int):
    """Pre-order consecutive renumbering, reimplemented for the oracle.

    Returns (vertex set, edge set, root id, label map) of the copy,
    matching the instantiation convention the operations document.
    """
    order = []

    def walk(nid):
        order.append(nid)
        for kid in tree.children[nid]:
            walk(kid)

    walk(tree.root)
    mapping = {nid: start + i for i, nid in enumerate(order)}
    vertices = set(mapping.values())
    edges = {
        (mapping[parent], mapping[kid])
        for parent in order
        for kid in tree.children[parent]
    }
    labels = {mapping[nid]: tree.labels[nid] for nid in order}
    return vertices, edges, mapping[tree.root], labels


def expected_substitution(gamma: SyntacticTree, site: int, inner: SyntacticTree):
    """V''/E'' for substitution, evaluated straight from the set equations."""
    inner_v, inner_e, inner_root, _ = preorder_renumber(inner, max(gamma.labels) + 1)
    host_v = set(gamma.labels)
    host_e = set(gamma.edge_set())
    vertices = (host_v | inner_v) - {site}
    edges = (
        {(a, b) for (a, b) in host_e if b != site}
        | inner_e
        | {(a, inner_root) for (a, b) in host_e if b == site}
    )
    root = gamma.root if site != gamma.root else inner_root
    return vertices, edges, root


def expected_adjunction(gamma: SyntacticTree, at: int, aux: SyntacticTree):
    """V''/E'' for adjunction, evaluated straight from the set equations."""
    foot = next(nid for nid in aux.labels if aux.labels[nid].foot_marker)
    aux_v, aux_e, aux_root, aux_labels = preorder_renumber(aux, max(gamma.labels) + 1)
    inst_foot = next(nid for nid in aux_labels if aux_labels[nid].foot_marker)
    host_v = set(gamma.labels)
    host_e = set(gamma.edge_set())
    vertices = (host_v | aux_v) - {at}
    edges = (
        {(a, b) for (a, b) in host_e if a != at and b != at}
        | aux_e
        | {(a, aux_root) for (a, b) in host_e if b == at}
        | {(inst_foot, b) for (a, b) in host_e if a == at}
    )
    root = gamma.root if at != gamma.root else aux_root
    return vertices, edges, root


# ---------------------------------------------------------------------------
# Random syntactic trees and operation cases
# ---------------------------------------------------------------------------

_NT_NAMES = ("A", "B", "C", "D")
_T_NAMES = ("a", "b", "c")


def random_tree(rng: random.Random, max_depth: int = 3) -> SyntacticTree:
    labels: dict[int, NodeLabel] = {}
    children: dict[int, tuple[int, ...]] = {}
    counter = [0]

    def build(depth: int) -> int:
        counter[0] += 1
        nid = counter[0]
        if depth >= max_depth or (depth > 0 and rng.random() < 0.4):
            roll = rng.random()
            if roll < 0.45:
                labels[nid] = NodeLabel.terminal(rng.choice(_T_NAMES))
            elif roll < 0.55:
                labels[nid] = NodeLabel.epsilon()
            elif roll < 0.8:
                labels[nid] = NodeLabel.nonterminal(rng.choice(_NT_NAMES), site=True)
            else:
                labels[nid] = NodeLabel.nonterminal(rng.choice(_NT_NAMES))
            children[nid] = ()
        else:
            labels[nid] = NodeLabel.nonterminal(rng.choice(_NT_NAMES))
            children[nid] = tuple(
                build(depth + 1) for _ in range(rng.randint(1, 3))
            )
        return nid

    root = build(0)
    return SyntacticTree(root, labels, children)


def substitution_case(rng: random.Random):
    """(host, site id, initial tree) with all preconditions satisfied."""
    while True:
        gamma = random_tree(rng)
        sites = gamma.substitution_sites()
        if sites:
            break
    site = rng.choice(sites)
    name = gamma.labels[site].name
    inner = random_tree(rng, max_depth=2)
    labels = dict(inner.labels)
    labels[inner.root] = NodeLabel.nonterminal(name)
    inner = SyntacticTree(inner.root, labels, inner.children)
    return gamma, site, inner


def adjunction_case(rng: random.Random):
    """(host, internal node id, auxiliary tree) with preconditions satisfied."""
    while True:
        gamma = random_tree(rng)
        internal = [nid for nid in gamma.labels if gamma.children[nid]]
        if internal:
            break
    at = rng.choice(internal)
    name = gamma.labels[at].name
    while True:
        aux = random_tree(rng, max_depth=2)
        if aux.children[aux.root]:
            break
    labels = dict(aux.labels)
    labels[aux.root] = NodeLabel.nonterminal(name)
    leaves = [nid for nid in labels if not aux.children[nid]]
    foot = rng.choice(leaves)
    labels[foot] = NodeLabel.nonterminal(name, foot=True)
    for nid in leaves:
        if nid != foot and labels[nid].foot_marker:
            labels[nid] = NodeLabel.nonterminal(labels[nid].name)
    aux = SyntacticTree(aux.root, labels, aux.children)
    return gamma, at, aux


# ---------------------------------------------------------------------------
# Random models within bounds
# ---------------------------------------------------------------------------


def random_model(
    rng: random.Random,
    max_terms: int = 3,
    max_delay: int = 3,
    max_exponent: int = 2,
    mode: Mode = Mode.EXTENDED,
) -> NarmaxModel:
    """Canonical random model; every term has at least one factor."""
    grid = []
    for signal in SignalKind:
        low = 1 if signal is SignalKind.OUTPUT else 0
        if signal is SignalKind.NOISE and mode is Mode.STRICT:
            low = 1
        grid.extend((signal, delay) for delay in range(low, max_delay + 1))
    terms = []
    for index in range(rng.randint(0, max_terms)):
        keys = rng.sample(grid, rng.randint(1, 2))
        factors = {key: rng.randint(1, max_exponent) for key in keys}
        terms.append(Monomial(index + 1, factors))
    return canonicalize(NarmaxModel(tuple(terms), mode))


# ---------------------------------------------------------------------------
# Adjunction-cost accounting and direct model-space enumeration
# ---------------------------------------------------------------------------


def _delay_cost(signal: SignalKind, delay: int) -> int:
    return delay - 1 if signal is SignalKind.OUTPUT else delay


def adjunctions_required(model: NarmaxModel) -> int:
    """Minimal number of adjunctions needed to derive the model.

    One additive tree per term plus, per factor occurrence beyond the
    leading one, a multiplicative tree; every factor occurrence also
    needs one delay tree per backshift not built into its introducing
    tree.  The leading factor is the lowest-delay input factor if any,
    else noise, else output.
    """
    total = 0
    for term in model.terms:
        keys = sorted(
            term.factors,
            key=lambda key: (
                {SignalKind.INPUT: 0, SignalKind.NOISE: 1, SignalKind.OUTPUT: 2}[
                    key[0]
                ],
                key[1],
            ),
        )
        first = keys[0]
        total += 1 + _delay_cost(*first)
        for signal, delay in keys:
            count = term.factors[(signal, delay)]
            if (signal, delay) == first:
                count -= 1
            total += count * (1 + _delay_cost(signal, delay))
    return total


def all_models_within_cost(budget: int) -> set[tuple]:
    """Every canonical extended-mode model whose minimal derivation fits
    the adjunction budget, enumerated directly in model space.

    Returns canonical structure keys so the result is comparable with a
    parsed-model set.
    """
    singles = []
    for signal in SignalKind:
        low = 1 if signal is SignalKind.OUTPUT else 0
        for delay in range(low, budget + 1):
            cost = 1 + _delay_cost(signal, delay)
            if cost <= budget:
                singles.append(((signal, delay), cost))

    monomials: list[tuple[dict, int]] = []

    def extend(factors: dict, cost: int, start: int) -> None:
        monomials.append((dict(factors), cost))
        for i in range(start, len(singles)):
            key, key_cost = singles[i]
            # additional occurrences of any factor cost a multiplicative
            # tree plus their own delay chain
            extra = 1 + _delay_cost(*key)
            if cost + extra <= budget:
                factors[key] = factors.get(key, 0) + 1
                extend(factors, cost + extra, i)
                factors[key] -= 1
                if not factors[key]:
                    del factors[key]

    for i, (key, cost) in enumerate(singles):
        extend({key: 1}, cost, i)

    result: set[tuple] = set()

    def models(start: int, remaining: int, chosen: list[dict]) -> None:
        model = canonicalize(
            NarmaxModel(
                tuple(Monomial(i + 1, f) for i, f in enumerate(chosen)),
                Mode.EXTENDED,
            )
        )
        result.add(model.structure())
        for i in range(start, len(monomials)):
            factors, cost = monomials[i]
            if cost <= remaining and all(factors != prev for prev in chosen):
                chosen.append(factors)
                models(i + 1, remaining - cost, chosen)
                chosen.pop()

    models(0, budget, [])
    return result

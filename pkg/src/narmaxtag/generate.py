"""Bounded exhaustive enumeration and seeded random sampling of derivations.

Enumeration works for any grammar: every node of an elementary tree
whose label matches some auxiliary root is an optional adjunction slot,
every marked leaf is a mandatory substitution slot, and the stream
lists each derivation with at most the requested number of adjunctions
exactly once, in a fixed order (slots by address, candidates by name,
smaller derivations first within a slot).

Sampling grows a random derivation over the polynomial-model grammar
(or one of its presets) extension by extension, tracking the model
content it implies, so the drawn model respects the structural bounds
by construction and is reproducible from the seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator

from .models import Mode, NarmaxModel, SignalKind
from .narmax import (
    GrammarPreset,
    SumRoles,
    build_narmax_grammar,
    derived_to_model,
    restrict,
)
from .trees import (
    ROOT_ADDRESS,
    DerivationEdge,
    DerivationTree,
    ElementaryTree,
    GornAddress,
    Grammar,
    LabelKind,
    Operation,
    derive,
)


@dataclass(frozen=True)
class GenBounds:
    """Structural limits for generated derivations and models."""

    max_adjunctions: int = 4
    max_terms: int = 3
    max_delay: int = 3
    max_exponent: int = 2
    mode: Mode = Mode.EXTENDED

    def __post_init__(self) -> None:
        for name in ("max_adjunctions", "max_terms", "max_delay", "max_exponent"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class SampleConfig:
    """Bounds plus a seed; equal configs draw identical sequences."""

    bounds: GenBounds = GenBounds()
    seed: int = 0


# ---------------------------------------------------------------------------
# Exhaustive enumeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Slot:
    address: GornAddress
    operation: Operation
    candidates: tuple[ElementaryTree, ...]


def _slots_of(entry: ElementaryTree, grammar: Grammar) -> tuple[_Slot, ...]:
    tree = entry.tree
    slots: list[_Slot] = []
    for nid in tree.pre_order():
        label = tree.label(nid)
        if label.kind is not LabelKind.NONTERMINAL:
            continue
        address = tree.address_of(nid)
        if tree.is_internal(nid):
            candidates = tuple(
                sorted(
                    (
                        aux
                        for aux in grammar.auxiliaries
                        if aux.tree.label(aux.tree.root).name == label.name
                    ),
                    key=lambda entry: entry.name,
                )
            )
            if candidates:
                slots.append(_Slot(address, Operation.ADJUNCTION, candidates))
        elif label.substitution_marker:
            candidates = tuple(
                sorted(
                    (
                        init
                        for init in grammar.initials
                        if init.tree.label(init.tree.root).name == label.name
                    ),
                    key=lambda entry: entry.name,
                )
            )
            slots.append(_Slot(address, Operation.SUBSTITUTION, candidates))
    slots.sort(key=lambda slot: slot.address)
    return tuple(slots)


def _expand(
    entry: ElementaryTree,
    slot_map: dict[str, tuple[_Slot, ...]],
    budget: int,
) -> Iterator[tuple[DerivationTree, int]]:
    """All derivations rooted at ``entry`` with at most ``budget`` adjunctions.

    Yields each derivation with its exact adjunction count so callers
    can combine independent slots against a shared budget.
    """
    slots = slot_map[entry.name]

    def assignments(
        index: int, remaining: int
    ) -> Iterator[tuple[tuple[DerivationEdge, ...], int]]:
        if index == len(slots):
            yield (), 0
            return
        slot = slots[index]
        if slot.operation is Operation.ADJUNCTION:
            yield from assignments(index + 1, remaining)
            if remaining < 1:
                return
            for candidate in slot.candidates:
                for child, used in _expand(candidate, slot_map, remaining - 1):
                    edge = DerivationEdge(slot.operation, slot.address, child)
                    for rest, rest_used in assignments(
                        index + 1, remaining - 1 - used
                    ):
                        yield (edge, *rest), 1 + used + rest_used
        else:
            for candidate in slot.candidates:
                for child, used in _expand(candidate, slot_map, remaining):
                    edge = DerivationEdge(slot.operation, slot.address, child)
                    for rest, rest_used in assignments(index + 1, remaining - used):
                        yield (edge, *rest), used + rest_used

    for edges, used in assignments(0, budget):
        yield DerivationTree(entry.name, edges), used


def enumerate_derivations(
    grammar: Grammar, bounds: GenBounds
) -> Iterator[DerivationTree]:
    """Every complete derivation with at most ``bounds.max_adjunctions``
    adjunctions, exactly once, in a deterministic order.

    Substitution sites are always filled (otherwise the derived tree
    would not be saturated) and do not count against the budget.
    """
    slot_map = {
        entry.name: _slots_of(entry, grammar) for entry in grammar.elementary()
    }
    roots = [
        init
        for init in grammar.initials
        if init.tree.label(init.tree.root).name == grammar.start
    ]
    for entry in sorted(roots, key=lambda e: e.name):
        for derivation, _ in _expand(entry, slot_map, bounds.max_adjunctions):
            yield derivation


def enumerate_models(
    grammar: Grammar, bounds: GenBounds
) -> Iterator[tuple[DerivationTree, NarmaxModel]]:
    """Enumerated derivations over a polynomial-model grammar, parsed."""
    for derivation in enumerate_derivations(grammar, bounds):
        derived = derive(derivation, grammar)
        yield derivation, derived_to_model(derived, mode=bounds.mode)


# ---------------------------------------------------------------------------
# Seeded random sampling
# ---------------------------------------------------------------------------


@dataclass
class _Draft:
    name: str
    edges: list[tuple[Operation, GornAddress, "_Draft"]] = field(default_factory=list)

    def freeze(self) -> DerivationTree:
        frozen = tuple(
            DerivationEdge(op, address, child.freeze())
            for op, address, child in sorted(
                self.edges, key=lambda item: (item[1], item[2].name)
            )
        )
        return DerivationTree(self.name, frozen)


@dataclass
class _FactorDraft:
    signal: SignalKind
    delay: int
    host: _Draft
    slot: GornAddress
    chain_tail: _Draft | None = None


@dataclass
class _TermDraft:
    additive: _Draft
    factors: list[_FactorDraft]
    mult_tail: _Draft | None = None

    def exponent(self, signal: SignalKind, delay: int) -> int:
        return sum(
            1 for f in self.factors if f.signal is signal and f.delay == delay
        )


class _GrowthSampler:
    """Random derivation growth under structural bounds.

    Extensions: start a new term (one additive tree), multiply a factor
    onto an existing term (one multiplicative tree), or deepen a
    factor's delay (one delay tree).  In strict mode a noise factor is
    introduced together with one delay tree, so the current noise
    sample never appears in a product.
    """

    def __init__(self, bounds: GenBounds, preset: GrammarPreset, rng: random.Random):
        self.bounds = bounds
        self.rng = rng
        catalog = build_narmax_grammar()
        self.roles: SumRoles = catalog.roles
        available = {tree.name for tree in restrict(preset).auxiliaries}
        self.additive_signals = [
            sig
            for sig in (SignalKind.INPUT, SignalKind.OUTPUT, SignalKind.NOISE)
            if self.roles.additive[sig] in available
        ]
        self.mult_signals = [
            sig
            for sig in (SignalKind.INPUT, SignalKind.OUTPUT, SignalKind.NOISE)
            if self.roles.multiplicative[sig] in available
        ]
        self.has_delay = self.roles.delay_tree in available
        self.terms: list[_TermDraft] = []

    def _base_delay(self, signal: SignalKind) -> int:
        if signal in self.roles.causal_signals:
            return 1
        if signal is SignalKind.NOISE and self.bounds.mode is Mode.STRICT:
            return 1
        return 0

    def _cost(self, signal: SignalKind) -> int:
        # strict-mode noise factors come with one immediate delay tree
        built_in = signal in self.roles.causal_signals
        return 2 if (not built_in and self._base_delay(signal) == 1) else 1

    def _factor_fits(self, term: _TermDraft | None, signal: SignalKind) -> bool:
        base = self._base_delay(signal)
        if base > self.bounds.max_delay:
            return False
        if base == 1 and signal not in self.roles.causal_signals and not self.has_delay:
            return False
        current = term.exponent(signal, base) if term is not None else 0
        return current + 1 <= self.bounds.max_exponent

    def options(self, budget: int) -> list[tuple]:
        out: list[tuple] = []
        if self.bounds.max_exponent >= 1:
            if len(self.terms) < self.bounds.max_terms:
                for sig in self.additive_signals:
                    if self._cost(sig) <= budget and self._factor_fits(None, sig):
                        out.append(("term", sig.value))
            for index, term in enumerate(self.terms):
                for sig in self.mult_signals:
                    if self._cost(sig) <= budget and self._factor_fits(term, sig):
                        out.append(("factor", index, sig.value))
        if self.has_delay and budget >= 1:
            for t_index, term in enumerate(self.terms):
                for f_index, factor in enumerate(term.factors):
                    deeper = factor.delay + 1
                    if (
                        deeper <= self.bounds.max_delay
                        and term.exponent(factor.signal, deeper) + 1
                        <= self.bounds.max_exponent
                    ):
                        out.append(("delay", t_index, f_index))
        return out

    def _attach_delay(self, factor: _FactorDraft) -> None:
        node = _Draft(self.roles.delay_tree)
        if factor.chain_tail is None:
            factor.host.edges.append((Operation.ADJUNCTION, factor.slot, node))
        else:
            factor.chain_tail.edges.append((Operation.ADJUNCTION, ROOT_ADDRESS, node))
        factor.chain_tail = node
        factor.delay += 1

    def apply(self, option: tuple) -> int:
        roles = self.roles
        if option[0] == "term":
            signal = SignalKind(option[1])
            node = _Draft(roles.additive[signal])
            built_in = 1 if signal in roles.causal_signals else 0
            factor = _FactorDraft(signal, built_in, node, roles.additive_factor_slot)
            term = _TermDraft(node, [factor])
            self.terms.append(term)
            cost = 1
            if self._cost(signal) == 2:
                self._attach_delay(factor)
                cost = 2
            return cost
        if option[0] == "factor":
            _, index, raw = option
            signal = SignalKind(raw)
            term = self.terms[index]
            node = _Draft(roles.multiplicative[signal])
            if term.mult_tail is None:
                term.additive.edges.append((Operation.ADJUNCTION, roles.term_slot, node))
            else:
                term.mult_tail.edges.append((Operation.ADJUNCTION, ROOT_ADDRESS, node))
            term.mult_tail = node
            built_in = 1 if signal in roles.causal_signals else 0
            factor = _FactorDraft(signal, built_in, node, roles.mult_factor_slot)
            term.factors.append(factor)
            cost = 1
            if self._cost(signal) == 2:
                self._attach_delay(factor)
                cost = 2
            return cost
        _, t_index, f_index = option
        self._attach_delay(self.terms[t_index].factors[f_index])
        return 1

    def grow(self) -> DerivationTree:
        target = self.rng.randint(0, self.bounds.max_adjunctions)
        spent = 0
        while spent < target:
            options = self.options(target - spent)
            if not options:
                break
            spent += self.apply(self.rng.choice(options))
        root = _Draft("alpha1")
        chain: _Draft | None = None
        for term in self.terms:
            if chain is not None:
                term.additive.edges.append((Operation.ADJUNCTION, ROOT_ADDRESS, chain))
            chain = term.additive
        if chain is not None:
            root.edges.append((Operation.ADJUNCTION, ROOT_ADDRESS, chain))
        return root.freeze()


def sample_derivation(
    config: SampleConfig, preset: GrammarPreset = GrammarPreset.NARMAX
) -> DerivationTree:
    """One random derivation within bounds; reproducible from the seed."""
    rng = random.Random(config.seed)
    return _GrowthSampler(config.bounds, preset, rng).grow()


def sample_model(
    config: SampleConfig, preset: GrammarPreset = GrammarPreset.NARMAX
) -> NarmaxModel:
    """Parse a sampled derivation's derived tree into a canonical model."""
    derivation = sample_derivation(config, preset)
    grammar = build_narmax_grammar().grammar
    model = derived_to_model(derive(derivation, grammar), mode=config.bounds.mode)
    _check_bounds(model, config.bounds)
    return model


def _check_bounds(model: NarmaxModel, bounds: GenBounds) -> None:
    if model.term_count() > bounds.max_terms:
        raise RuntimeError("sampler exceeded the term bound")
    for term in model.terms:
        for (_, delay), exponent in term.factors.items():
            if delay > bounds.max_delay or exponent > bounds.max_exponent:
                raise RuntimeError("sampler exceeded a delay or exponent bound")

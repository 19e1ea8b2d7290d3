"""The concrete grammar whose tree language is the polynomial model class.

One initial tree yields the bare noise token; seven auxiliary trees
split into three families: *additive* trees (root and foot ``expr0``)
prepend one coefficient-times-factor term to the sum, *multiplicative*
trees (root and foot ``expr1``) append one factor to an existing term,
and the *delay* tree (root and foot ``expr2``) postfixes one backshift
token to a factor.  Output factors embed one built-in backshift, so
feedback is causal by construction.

Both directions of the model/derivation correspondence live here:
:func:`model_to_derivation` builds a derivation tree for any
representable canonical model, and :func:`derived_to_model` parses a
saturated derived tree's yield back into a model.  A parallel catalog
extends the construction to the two-equation nonlinear Box-Jenkins
structure.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Mapping

from .models import (
    Mode,
    Monomial,
    NarmaxModel,
    NbjModel,
    SignalKind,
    canonicalize,
    index_sets,
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
    SyntacticTree,
    TreeKind,
    derive,
    is_saturated,
    yield_of,
)
from .treeio import parse_tree

INPUT_TOKEN = "u"
OUTPUT_TOKEN = "y"
NOISE_TOKEN = "ξ"
PLUS_TOKEN = "+"
COEFF_TOKEN = "c"
TIMES_TOKEN = "×"
DELAY_TOKEN = "q⁻¹"

PROCESS_OUTPUT_TOKEN = "ŷ"
NOISE_FEEDBACK_TOKEN = "v"
EMPTY_SUM_TOKEN = "0"
COMMA_TOKEN = ","


class YieldError(ValueError):
    """Base class for failures of the derived-tree-to-model direction."""


class NotSaturatedError(YieldError):
    """The tree still has nonterminal leaves."""


class YieldNotInLanguageError(YieldError):
    """The token sequence is not a well-formed model expression."""

    def __init__(self, message: str, index: int):
        super().__init__(f"{message} (token {index})")
        self.index = index


class SignalInWrongPartError(YieldError):
    """A signal token appears on the wrong side of a two-part yield."""

    def __init__(self, message: str, index: int):
        super().__init__(f"{message} (token {index})")
        self.index = index


class UnrepresentableModelError(ValueError):
    """The model has no derivation tree over the grammar."""


@dataclass(frozen=True, eq=False)
class SumRoles:
    """Role bookkeeping for one sum-shaped expression grammar.

    ``term_slot`` is the address of the term node inside an additive
    tree (where multiplicative trees adjoin), the two factor slots are
    the addresses of the factor node inside additive and multiplicative
    trees (where delay trees adjoin).  ``causal_tokens`` are the signal
    tokens that carry one built-in backshift.
    """

    additive: Mapping[SignalKind, str]
    multiplicative: Mapping[SignalKind, str]
    delay_tree: str
    term_slot: GornAddress
    additive_factor_slot: GornAddress
    mult_factor_slot: GornAddress
    signal_tokens: Mapping[str, SignalKind]
    causal_signals: frozenset[SignalKind]
    end_token: str


@dataclass(frozen=True, eq=False)
class NarmaxCatalog:
    """The validated grammar together with its role map."""

    grammar: Grammar
    roles: SumRoles

    @property
    def additive(self) -> Mapping[SignalKind, str]:
        return self.roles.additive

    @property
    def multiplicative(self) -> Mapping[SignalKind, str]:
        return self.roles.multiplicative

    @property
    def delay_tree(self) -> str:
        return self.roles.delay_tree


@dataclass(frozen=True, eq=False)
class NbjCatalog:
    """Grammar for the two-equation structure, with per-side role maps."""

    grammar: Grammar
    process_roles: SumRoles
    noise_roles: SumRoles
    process_slot: GornAddress
    noise_slot: GornAddress
    initial_name: str


def _elementary(
    name: str,
    kind: TreeKind,
    source: str,
    nonterminals: frozenset[str],
    terminals: frozenset[str],
) -> ElementaryTree:
    tree = parse_tree(source, nonterminals=nonterminals, terminals=terminals)
    return ElementaryTree(name, kind, tree)


def _find_slot(tree: SyntacticTree, name: str) -> GornAddress:
    hits = [
        nid
        for nid in tree.pre_order()
        if tree.is_internal(nid)
        and tree.label(nid).kind is LabelKind.NONTERMINAL
        and tree.label(nid).name == name
    ]
    if len(hits) != 1:
        raise ValueError(f"expected exactly one internal {name!r} node")
    return tree.address_of(hits[0])


@lru_cache(maxsize=1)
def build_narmax_grammar() -> NarmaxCatalog:
    """Construct the single-output polynomial model grammar."""
    nts = frozenset({"expr0", "expr1", "expr2", "op", "par"})
    ts = frozenset(
        {
            INPUT_TOKEN,
            OUTPUT_TOKEN,
            NOISE_TOKEN,
            PLUS_TOKEN,
            COEFF_TOKEN,
            TIMES_TOKEN,
            DELAY_TOKEN,
        }
    )

    def initial(name: str, source: str) -> ElementaryTree:
        return _elementary(name, TreeKind.INITIAL, source, nts, ts)

    def auxiliary(name: str, source: str) -> ElementaryTree:
        return _elementary(name, TreeKind.AUXILIARY, source, nts, ts)

    alpha1 = initial("alpha1", "expr0(ξ)")
    beta1 = auxiliary("beta1", "expr0(expr1(par(c) op(×) expr2(u)) op(+) expr0★)")
    beta2 = auxiliary("beta2", "expr0(expr1(par(c) op(×) expr2(y q⁻¹)) op(+) expr0★)")
    beta3 = auxiliary("beta3", "expr0(expr1(par(c) op(×) expr2(ξ)) op(+) expr0★)")
    beta4 = auxiliary("beta4", "expr1(expr1★ op(×) expr2(u))")
    beta5 = auxiliary("beta5", "expr1(expr1★ op(×) expr2(y q⁻¹))")
    beta6 = auxiliary("beta6", "expr1(expr1★ op(×) expr2(ξ))")
    beta7 = auxiliary("beta7", "expr2(expr2★ q⁻¹)")

    grammar = Grammar(
        nts,
        ts,
        "expr0",
        (alpha1,),
        (beta1, beta2, beta3, beta4, beta5, beta6, beta7),
    )
    roles = SumRoles(
        additive={
            SignalKind.INPUT: "beta1",
            SignalKind.OUTPUT: "beta2",
            SignalKind.NOISE: "beta3",
        },
        multiplicative={
            SignalKind.INPUT: "beta4",
            SignalKind.OUTPUT: "beta5",
            SignalKind.NOISE: "beta6",
        },
        delay_tree="beta7",
        term_slot=_find_slot(beta1.tree, "expr1"),
        additive_factor_slot=_find_slot(beta1.tree, "expr2"),
        mult_factor_slot=_find_slot(beta4.tree, "expr2"),
        signal_tokens={
            INPUT_TOKEN: SignalKind.INPUT,
            OUTPUT_TOKEN: SignalKind.OUTPUT,
            NOISE_TOKEN: SignalKind.NOISE,
        },
        causal_signals=frozenset({SignalKind.OUTPUT}),
        end_token=NOISE_TOKEN,
    )
    return NarmaxCatalog(grammar, roles)


class GrammarPreset(Enum):
    """Named auxiliary-tree subsets that carve out model subclasses."""

    NARMAX = "narmax"
    ARX = "arx"
    NARX = "narx"
    FIR = "fir"
    VOLTERRA = "volterra"


PRESET_AUXILIARIES: Mapping[GrammarPreset, frozenset[str]] = {
    GrammarPreset.NARMAX: frozenset(
        {"beta1", "beta2", "beta3", "beta4", "beta5", "beta6", "beta7"}
    ),
    GrammarPreset.ARX: frozenset({"beta1", "beta2", "beta7"}),
    GrammarPreset.NARX: frozenset({"beta1", "beta2", "beta4", "beta5", "beta7"}),
    GrammarPreset.FIR: frozenset({"beta1", "beta7"}),
    GrammarPreset.VOLTERRA: frozenset({"beta1", "beta4", "beta7"}),
}


def restrict(preset: GrammarPreset) -> Grammar:
    """Grammar with the preset's auxiliary subset; initials are unchanged."""
    catalog = build_narmax_grammar()
    keep = PRESET_AUXILIARIES[preset]
    full = catalog.grammar
    return Grammar(
        full.nonterminals,
        full.terminals,
        full.start,
        full.initials,
        tuple(aux for aux in full.auxiliaries if aux.name in keep),
    )


# ---------------------------------------------------------------------------
# Model -> derivation
# ---------------------------------------------------------------------------


def _delay_chain(roles: SumRoles, count: int) -> DerivationTree | None:
    """Chain of ``count`` delay-tree nodes, each adjoined at its parent's root."""
    node: DerivationTree | None = None
    for _ in range(count):
        edges = (
            (DerivationEdge(Operation.ADJUNCTION, ROOT_ADDRESS, node),)
            if node is not None
            else ()
        )
        node = DerivationTree(roles.delay_tree, edges)
    return node


def _chain_length(signal: SignalKind, delay: int, roles: SumRoles) -> int:
    return delay - 1 if signal in roles.causal_signals else delay


def _term_fragment(term: Monomial, roles: SumRoles) -> DerivationTree:
    """Derivation fragment for one term, headed by its additive tree.

    The leading factor is the lowest-delay input factor if any, else
    noise, else output; its exponent is consumed once by the additive
    tree itself.  Remaining factor occurrences become a chain of
    multiplicative trees in signal-then-delay order, every factor with
    its own delay chain.
    """
    sets = index_sets(term)
    if sets.input_delays:
        first = (SignalKind.INPUT, sets.input_sequence[0])
    elif sets.noise_delays:
        first = (SignalKind.NOISE, sets.noise_sequence[0])
    elif sets.output_delays:
        first = (SignalKind.OUTPUT, sets.output_sequence[0])
    else:
        raise UnrepresentableModelError(
            "a constant term has no factor to hang the grammar's product on"
        )
    if first[0] not in roles.additive:
        raise UnrepresentableModelError(
            f"no additive tree introduces {first[0].value} factors here"
        )

    remaining: list[tuple[SignalKind, int]] = []
    for signal in (SignalKind.INPUT, SignalKind.NOISE, SignalKind.OUTPUT):
        for delay in sorted(
            d for (sig, d) in term.factors if sig is signal
        ):
            exponent = term.factors[(signal, delay)]
            if (signal, delay) == first:
                exponent -= 1
            remaining.extend([(signal, delay)] * exponent)

    mult_chain: DerivationTree | None = None
    for signal, delay in reversed(remaining):
        if signal not in roles.multiplicative:
            raise UnrepresentableModelError(
                f"no multiplicative tree introduces {signal.value} factors here"
            )
        edges = []
        chain = _delay_chain(roles, _chain_length(signal, delay, roles))
        if chain is not None:
            edges.append(
                DerivationEdge(Operation.ADJUNCTION, roles.mult_factor_slot, chain)
            )
        if mult_chain is not None:
            edges.append(
                DerivationEdge(Operation.ADJUNCTION, ROOT_ADDRESS, mult_chain)
            )
        mult_chain = DerivationTree(
            roles.multiplicative[signal],
            tuple(sorted(edges, key=lambda e: e.address)),
        )

    edges = []
    first_chain = _delay_chain(roles, _chain_length(first[0], first[1], roles))
    if first_chain is not None:
        edges.append(
            DerivationEdge(
                Operation.ADJUNCTION, roles.additive_factor_slot, first_chain
            )
        )
    if mult_chain is not None:
        edges.append(DerivationEdge(Operation.ADJUNCTION, roles.term_slot, mult_chain))
    return DerivationTree(
        roles.additive[first[0]], tuple(sorted(edges, key=lambda e: e.address))
    )


def _sum_chain(
    terms: Iterable[Monomial], roles: SumRoles
) -> DerivationTree | None:
    """Additive chain for a term list; the first term sits deepest.

    Every link adjoins at its parent's root and therefore prepends its
    term, so the saturated yield lists terms in the given order and the
    left-to-right coefficient numbering survives a round trip.
    """
    chain: DerivationTree | None = None
    for term in terms:
        fragment = _term_fragment(term, roles)
        if chain is not None:
            edges = fragment.edges + (
                DerivationEdge(Operation.ADJUNCTION, ROOT_ADDRESS, chain),
            )
            fragment = DerivationTree(
                fragment.tree_name, tuple(sorted(edges, key=lambda e: e.address))
            )
        chain = fragment
    return chain


def model_to_derivation(model: NarmaxModel) -> DerivationTree:
    """Derivation tree whose derived tree parses back to the same model.

    The model is canonicalized first; each term becomes one additive
    tree with delay and multiplicative chains below it.  Constant terms
    are not representable: every term of the tree language carries at
    least one signal factor.
    """
    catalog = build_narmax_grammar()
    ordered = canonicalize(model)
    chain = _sum_chain(ordered.terms, catalog.roles)
    edges = (
        (DerivationEdge(Operation.ADJUNCTION, ROOT_ADDRESS, chain),)
        if chain is not None
        else ()
    )
    return DerivationTree("alpha1", edges)


# ---------------------------------------------------------------------------
# Derived tree -> model
# ---------------------------------------------------------------------------


def _parse_token_sum(
    tokens: tuple[str, ...],
    roles: SumRoles,
    foreign: Mapping[str, str],
    offset: int = 0,
) -> list[dict[tuple[SignalKind, int], int]]:
    """Parse ``(term '+')* end`` over the role's signal tokens.

    ``foreign`` maps signal tokens of the *other* part of a split yield
    to a description, so misplaced signals raise the dedicated error
    rather than a generic syntax failure.  ``offset`` shifts reported
    token indices for split yields.
    """

    def fail(message: str, index: int) -> YieldNotInLanguageError:
        return YieldNotInLanguageError(message, offset + index)

    maps: list[dict[tuple[SignalKind, int], int]] = []
    i = 0
    n = len(tokens)
    while True:
        if i >= n:
            raise fail(f"expected a term or {roles.end_token!r}", i)
        token = tokens[i]
        if token == roles.end_token:
            if i != n - 1:
                raise fail(f"tokens after the closing {roles.end_token!r}", i + 1)
            return maps
        if token in foreign:
            raise SignalInWrongPartError(
                f"{token!r} belongs to the {foreign[token]} part", offset + i
            )
        if token != COEFF_TOKEN:
            raise fail(f"expected {COEFF_TOKEN!r}, found {token!r}", i)
        i += 1
        factors: dict[tuple[SignalKind, int], int] = {}
        while i < n and tokens[i] == TIMES_TOKEN:
            i += 1
            if i >= n:
                raise fail("dangling product operator", i)
            sig_token = tokens[i]
            if sig_token in foreign:
                raise SignalInWrongPartError(
                    f"{sig_token!r} belongs to the {foreign[sig_token]} part",
                    offset + i,
                )
            signal = roles.signal_tokens.get(sig_token)
            if signal is None:
                raise fail(f"expected a signal token, found {sig_token!r}", i)
            i += 1
            delay = 0
            while i < n and tokens[i] == DELAY_TOKEN:
                delay += 1
                i += 1
            if signal in roles.causal_signals and delay == 0:
                raise fail(f"{sig_token!r} factor without a backshift", i - 1)
            key = (signal, delay)
            factors[key] = factors.get(key, 0) + 1
        if not factors:
            raise fail("term without factors", i)
        maps.append(factors)
        if i >= n or tokens[i] != PLUS_TOKEN:
            raise fail("expected '+'", i)
        i += 1


def _terms_from_maps(
    maps: list[dict[tuple[SignalKind, int], int]]
) -> tuple[Monomial, ...]:
    return tuple(Monomial(i + 1, factors) for i, factors in enumerate(maps))


def derived_to_model(tree: SyntacticTree, mode: Mode = Mode.EXTENDED) -> NarmaxModel:
    """Parse a saturated derived tree's yield into a canonical model.

    Coefficient slots are numbered left to right before
    canonicalization renumbers the sorted result.
    """
    if not is_saturated(tree):
        raise NotSaturatedError("the tree still has nonterminal leaves")
    catalog = build_narmax_grammar()
    maps = _parse_token_sum(yield_of(tree), catalog.roles, foreign={})
    return canonicalize(NarmaxModel(_terms_from_maps(maps), mode))


def roundtrip_check(model: NarmaxModel) -> bool:
    """True iff the model survives derivation and re-parsing structurally.

    Coefficient values are attachments, not grammar content, so the
    comparison is on canonical factor structure.
    """
    derivation = model_to_derivation(model)
    derived = derive(derivation, build_narmax_grammar().grammar)
    back = derived_to_model(derived, mode=model.mode)
    return canonicalize(model).structure() == back.structure()


# ---------------------------------------------------------------------------
# Two-equation extension
# ---------------------------------------------------------------------------


@lru_cache(maxsize=1)
def build_nbj_grammar() -> NbjCatalog:
    """Construct the two-equation (process + noise) grammar.

    The initial tree yields ``0 , ξ``: an empty process sum and a bare
    noise equation, comma-separated.  Each side gets its own copy of
    the additive/multiplicative/delay families; the process side ranges
    over inputs and the delayed simulated output, the noise side over
    inputs, the delayed disturbance and noise.
    """
    nts = frozenset(
        {
            "exprbj",
            "expr0f",
            "expr1f",
            "expr2f",
            "expr0g",
            "expr1g",
            "expr2g",
            "op",
            "par",
        }
    )
    ts = frozenset(
        {
            INPUT_TOKEN,
            PROCESS_OUTPUT_TOKEN,
            NOISE_FEEDBACK_TOKEN,
            NOISE_TOKEN,
            EMPTY_SUM_TOKEN,
            PLUS_TOKEN,
            COEFF_TOKEN,
            TIMES_TOKEN,
            DELAY_TOKEN,
            COMMA_TOKEN,
        }
    )

    def initial(name: str, source: str) -> ElementaryTree:
        return _elementary(name, TreeKind.INITIAL, source, nts, ts)

    def auxiliary(name: str, source: str) -> ElementaryTree:
        return _elementary(name, TreeKind.AUXILIARY, source, nts, ts)

    def additive_src(side: str, factor: str) -> str:
        return (
            f"expr0{side}(expr1{side}(par(c) op(×) expr2{side}({factor})) "
            f"op(+) expr0{side}★)"
        )

    def mult_src(side: str, factor: str) -> str:
        return f"expr1{side}(expr1{side}★ op(×) expr2{side}({factor}))"

    alpha1 = initial("alpha1", 'exprbj(expr0f(0) "," expr0g(ξ))')
    trees = [
        auxiliary("betaf1", additive_src("f", "u")),
        auxiliary("betaf2", additive_src("f", "ŷ q⁻¹")),
        auxiliary("betaf4", mult_src("f", "u")),
        auxiliary("betaf5", mult_src("f", "ŷ q⁻¹")),
        auxiliary("betaf7", "expr2f(expr2f★ q⁻¹)"),
        auxiliary("betag1", additive_src("g", "u")),
        auxiliary("betag2", additive_src("g", "v q⁻¹")),
        auxiliary("betag3", additive_src("g", "ξ")),
        auxiliary("betag4", mult_src("g", "u")),
        auxiliary("betag5", mult_src("g", "v q⁻¹")),
        auxiliary("betag6", mult_src("g", "ξ")),
        auxiliary("betag7", "expr2g(expr2g★ q⁻¹)"),
    ]
    grammar = Grammar(nts, ts, "exprbj", (alpha1,), tuple(trees))

    by_name = {tree.name: tree for tree in trees}
    process_roles = SumRoles(
        additive={SignalKind.INPUT: "betaf1", SignalKind.OUTPUT: "betaf2"},
        multiplicative={SignalKind.INPUT: "betaf4", SignalKind.OUTPUT: "betaf5"},
        delay_tree="betaf7",
        term_slot=_find_slot(by_name["betaf1"].tree, "expr1f"),
        additive_factor_slot=_find_slot(by_name["betaf1"].tree, "expr2f"),
        mult_factor_slot=_find_slot(by_name["betaf4"].tree, "expr2f"),
        signal_tokens={
            INPUT_TOKEN: SignalKind.INPUT,
            PROCESS_OUTPUT_TOKEN: SignalKind.OUTPUT,
        },
        causal_signals=frozenset({SignalKind.OUTPUT}),
        end_token=EMPTY_SUM_TOKEN,
    )
    noise_roles = SumRoles(
        additive={
            SignalKind.INPUT: "betag1",
            SignalKind.OUTPUT: "betag2",
            SignalKind.NOISE: "betag3",
        },
        multiplicative={
            SignalKind.INPUT: "betag4",
            SignalKind.OUTPUT: "betag5",
            SignalKind.NOISE: "betag6",
        },
        delay_tree="betag7",
        term_slot=_find_slot(by_name["betag1"].tree, "expr1g"),
        additive_factor_slot=_find_slot(by_name["betag1"].tree, "expr2g"),
        mult_factor_slot=_find_slot(by_name["betag4"].tree, "expr2g"),
        signal_tokens={
            INPUT_TOKEN: SignalKind.INPUT,
            NOISE_FEEDBACK_TOKEN: SignalKind.OUTPUT,
            NOISE_TOKEN: SignalKind.NOISE,
        },
        causal_signals=frozenset({SignalKind.OUTPUT}),
        end_token=NOISE_TOKEN,
    )
    return NbjCatalog(
        grammar=grammar,
        process_roles=process_roles,
        noise_roles=noise_roles,
        process_slot=_find_slot(alpha1.tree, "expr0f"),
        noise_slot=_find_slot(alpha1.tree, "expr0g"),
        initial_name="alpha1",
    )


def nbj_derived_to_model(tree: SyntacticTree, mode: Mode = Mode.EXTENDED) -> NbjModel:
    """Split a saturated yield at its comma and parse both equations."""
    if not is_saturated(tree):
        raise NotSaturatedError("the tree still has nonterminal leaves")
    catalog = build_nbj_grammar()
    tokens = yield_of(tree)
    splits = [i for i, token in enumerate(tokens) if token == COMMA_TOKEN]
    if len(splits) != 1:
        raise YieldNotInLanguageError(
            f"expected exactly one {COMMA_TOKEN!r}, found {len(splits)}", 0
        )
    cut = splits[0]
    process_tokens, noise_tokens = tokens[:cut], tokens[cut + 1 :]
    process_maps = _parse_token_sum(
        process_tokens,
        catalog.process_roles,
        foreign={
            NOISE_TOKEN: "noise-equation",
            NOISE_FEEDBACK_TOKEN: "noise-equation",
        },
    )
    noise_maps = _parse_token_sum(
        noise_tokens,
        catalog.noise_roles,
        foreign={PROCESS_OUTPUT_TOKEN: "process-equation"},
        offset=cut + 1,
    )
    process = canonicalize(
        NarmaxModel(_terms_from_maps(process_maps), Mode.EXTENDED)
    ).terms
    noise = canonicalize(NarmaxModel(_terms_from_maps(noise_maps), mode)).terms
    return NbjModel(process, noise, mode)


def nbj_model_to_derivation(model: NbjModel) -> DerivationTree:
    """Derivation over the two-equation grammar, one sum chain per side."""
    catalog = build_nbj_grammar()
    process = canonicalize(NarmaxModel(model.process_terms, Mode.EXTENDED)).terms
    noise = canonicalize(NarmaxModel(model.noise_terms, model.mode)).terms
    edges = []
    chain = _sum_chain(process, catalog.process_roles)
    if chain is not None:
        edges.append(DerivationEdge(Operation.ADJUNCTION, catalog.process_slot, chain))
    chain = _sum_chain(noise, catalog.noise_roles)
    if chain is not None:
        edges.append(DerivationEdge(Operation.ADJUNCTION, catalog.noise_slot, chain))
    return DerivationTree(
        catalog.initial_name, tuple(sorted(edges, key=lambda e: e.address))
    )


def nbj_roundtrip_check(model: NbjModel) -> bool:
    derivation = nbj_model_to_derivation(model)
    derived = derive(derivation, build_nbj_grammar().grammar)
    back = nbj_derived_to_model(derived, mode=model.mode)
    def structure(terms: tuple[Monomial, ...]) -> tuple:
        return canonicalize(NarmaxModel(terms, Mode.EXTENDED)).structure()

    return structure(model.process_terms) == structure(back.process_terms) and (
        structure(model.noise_terms) == structure(back.noise_terms)
    )

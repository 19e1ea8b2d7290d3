import random
from itertools import permutations

import pytest

from narmaxtag import (
    DanglingReferenceError,
    DerivationEdge,
    DerivationTree,
    ElementaryTree,
    Grammar,
    InapplicableOperationError,
    InvalidAddressError,
    LabelKind,
    NodeLabel,
    Operation,
    SyntacticTree,
    TreeKind,
    UndefinedAdjunctionError,
    UndefinedSubstitutionError,
    adjoin,
    derive,
    is_saturated,
    node_at,
    substitute,
    validate_grammar,
    yield_of,
)
from narmaxtag.treeio import parse_tree

from oracles import (
    adjunction_case,
    expected_adjunction,
    expected_substitution,
    substitution_case,
)


def find(grammar, name):
    entry = grammar.find(name)
    assert entry is not None
    return entry


class TestNodeLabel:
    def test_markers_require_nonterminal(self):
        with pytest.raises(ValueError):
            NodeLabel(LabelKind.TERMINAL, "a", substitution_marker=True)
        with pytest.raises(ValueError):
            NodeLabel(LabelKind.EPSILON, "ε", foot_marker=True)

    def test_markers_exclusive(self):
        with pytest.raises(ValueError):
            NodeLabel(LabelKind.NONTERMINAL, "A", True, True)


class TestSyntacticTree:
    def test_rejects_unreachable_nodes(self):
        labels = {1: NodeLabel.nonterminal("A"), 2: NodeLabel.terminal("a"),
                  3: NodeLabel.terminal("b")}
        with pytest.raises(ValueError):
            SyntacticTree(1, labels, {1: (2,)})

    def test_rejects_multiple_parents(self):
        labels = {1: NodeLabel.nonterminal("A"), 2: NodeLabel.nonterminal("B"),
                  3: NodeLabel.terminal("a")}
        with pytest.raises(ValueError):
            SyntacticTree(1, labels, {1: (2, 3), 2: (3,)})


class TestNodeAt:
    def test_empty_address_is_root(self):
        tree = parse_tree("A(a b)")
        assert node_at(tree, ()) == tree.root

    def test_first_child_of_sentence_tree(self, sentence_grammar, plain_derivation):
        tree = derive(plain_derivation, sentence_grammar)
        nid = node_at(tree, (1,))
        assert tree.label(nid).name == "sub"

    def test_chain_walk(self):
        tree = parse_tree("A(B(c))")
        nid = node_at(tree, (1, 1))
        assert tree.label(nid).name == "c"
        assert tree.is_leaf(nid)

    def test_invalid_address(self):
        tree = parse_tree("A(a)")
        with pytest.raises(InvalidAddressError):
            node_at(tree, (2,))


class TestSubstitute:
    def test_subject_tree_fills_site(self, sentence_grammar):
        alpha1 = find(sentence_grammar, "alpha1")
        alpha2 = find(sentence_grammar, "alpha2")
        host = alpha1.tree.renumbered(1)
        result = substitute(host, node_at(host, (1,)), alpha2)
        tokens = yield_of(result)
        assert ("a", "man") == tokens[:2]

    def test_non_leaf_target_rejected(self, sentence_grammar):
        alpha1 = find(sentence_grammar, "alpha1")
        host = alpha1.tree.renumbered(1)
        with pytest.raises(UndefinedSubstitutionError):
            substitute(host, host.root, find(sentence_grammar, "alpha2"))

    def test_label_mismatch_rejected(self, sentence_grammar):
        alpha1 = find(sentence_grammar, "alpha1")
        alpha3 = find(sentence_grammar, "alpha3")
        host = alpha1.tree.renumbered(1)
        with pytest.raises(UndefinedSubstitutionError):
            substitute(host, node_at(host, (1,)), alpha3)

    def test_auxiliary_tree_rejected(self, sentence_grammar):
        alpha1 = find(sentence_grammar, "alpha1")
        beta1 = find(sentence_grammar, "beta1")
        host = alpha1.tree.renumbered(1)
        with pytest.raises(UndefinedSubstitutionError):
            substitute(host, node_at(host, (1,)), beta1)

    def test_set_counts_on_random_cases(self):
        rng = random.Random(1203)
        for _ in range(100):
            gamma, site, inner = substitution_case(rng)
            result = substitute(gamma, site, inner)
            assert len(result.node_ids()) == len(gamma.node_ids()) + len(
                inner.node_ids()
            ) - 1
            assert len(result.edge_set()) == len(gamma.edge_set()) + len(
                inner.edge_set()
            )

    def test_matches_set_expressions(self):
        rng = random.Random(77)
        for _ in range(100):
            gamma, site, inner = substitution_case(rng)
            vertices, edges, root = expected_substitution(gamma, site, inner)
            result = substitute(gamma, site, inner)
            assert set(result.node_ids()) == vertices
            assert set(result.edge_set()) == edges
            assert result.root == root


class TestAdjoin:
    def _saw_mary_tree(self, sentence_grammar, plain_derivation):
        return derive(plain_derivation, sentence_grammar)

    def test_adverb_prepended(self, sentence_grammar, plain_derivation):
        tree = self._saw_mary_tree(sentence_grammar, plain_derivation)
        beta1 = find(sentence_grammar, "beta1")
        result = adjoin(tree, tree.root, beta1)
        assert yield_of(result) == ("yesterday", "a", "man", "saw", "mary")

    def test_label_mismatch_rejected(self, sentence_grammar, plain_derivation):
        tree = self._saw_mary_tree(sentence_grammar, plain_derivation)
        beta1 = find(sentence_grammar, "beta1")
        with pytest.raises(UndefinedAdjunctionError):
            adjoin(tree, node_at(tree, (1,)), beta1)

    def test_leaf_target_rejected(self, sentence_grammar, plain_derivation):
        tree = self._saw_mary_tree(sentence_grammar, plain_derivation)
        beta1 = find(sentence_grammar, "beta1")
        with pytest.raises(UndefinedAdjunctionError):
            adjoin(tree, node_at(tree, (1, 1, 1)), beta1)

    def test_foot_marker_cleared(self, sentence_grammar, plain_derivation):
        tree = self._saw_mary_tree(sentence_grammar, plain_derivation)
        result = adjoin(tree, tree.root, find(sentence_grammar, "beta1"))
        assert result.foot_node() is None

    def test_subtree_rehung_intact(self):
        rng = random.Random(4321)
        for _ in range(100):
            gamma, at, aux = adjunction_case(rng)
            before = gamma.structural_key(at)
            result = adjoin(gamma, at, aux)
            vertices, edges, root = expected_adjunction(gamma, at, aux)
            assert set(result.node_ids()) == vertices
            assert set(result.edge_set()) == edges
            assert result.root == root
            # the excised node's former children hang below the foot, in order
            feet = [n for n in result.node_ids()
                    if result.child_ids(n) == gamma.child_ids(at)
                    and n not in gamma.node_ids()]
            assert feet


class TestPurity:
    def test_substitute_leaves_inputs_alone(self, sentence_grammar):
        alpha1 = find(sentence_grammar, "alpha1")
        alpha2 = find(sentence_grammar, "alpha2")
        host = alpha1.tree.renumbered(1)
        key_host = host.structural_key()
        key_inner = alpha2.tree.structural_key()
        first = substitute(host, node_at(host, (1,)), alpha2)
        second = substitute(host, node_at(host, (1,)), alpha2)
        assert host.structural_key() == key_host
        assert alpha2.tree.structural_key() == key_inner
        assert first.structurally_equal(second)

    def test_adjoin_leaves_inputs_alone(self, sentence_grammar, plain_derivation):
        tree = derive(plain_derivation, sentence_grammar)
        beta1 = find(sentence_grammar, "beta1")
        key = tree.structural_key()
        first = adjoin(tree, tree.root, beta1)
        second = adjoin(tree, tree.root, beta1)
        assert tree.structural_key() == key
        assert first.structurally_equal(second)


class TestYield:
    def test_sentence_tree(self, sentence_grammar, plain_derivation):
        tree = derive(plain_derivation, sentence_grammar)
        assert yield_of(tree) == ("a", "man", "saw", "mary")

    def test_single_leaf(self):
        tree = parse_tree("ξ")
        assert yield_of(tree) == ("ξ",)

    def test_epsilon_elided(self):
        tree = parse_tree("A(a ε b)")
        assert yield_of(tree) == ("a", "b")

    def test_substitution_homomorphism(self):
        rng = random.Random(90125)
        for _ in range(60):
            gamma, site, inner = substitution_case(rng)
            position = [n for n in gamma.leaves()].index(site)
            spliced = yield_of(substitute(gamma, site, inner))
            tokens = []
            for i, nid in enumerate(gamma.leaves()):
                label = gamma.label(nid)
                if i == position:
                    tokens.extend(yield_of(inner))
                elif label.kind is not LabelKind.EPSILON:
                    tokens.append(label.name)
            assert spliced == tuple(tokens)

    def test_adjunction_keeps_subtree_yield_contiguous(self):
        rng = random.Random(5150)
        for _ in range(60):
            gamma, at, aux = adjunction_case(rng)
            sub_yield = [
                gamma.label(n).name
                for n in gamma.pre_order(at)
                if gamma.is_leaf(n) and gamma.label(n).kind is not LabelKind.EPSILON
            ]
            result = yield_of(adjoin(gamma, at, aux))
            if sub_yield:
                text = "\x00".join(result)
                assert "\x00".join(sub_yield) in text


class TestSaturation:
    def test_derived_sentence_tree(self, sentence_grammar, plain_derivation):
        assert is_saturated(derive(plain_derivation, sentence_grammar))

    def test_tree_with_open_sites(self, sentence_grammar):
        assert not is_saturated(find(sentence_grammar, "alpha1").tree)

    def test_epsilon_only_tree(self):
        assert is_saturated(parse_tree("A(ε)"))

    def test_site_accounting(self):
        rng = random.Random(2001)
        for _ in range(60):
            gamma, site, inner = substitution_case(rng)
            result = substitute(gamma, site, inner)
            delta = len(result.substitution_sites()) - len(gamma.substitution_sites())
            assert delta == len(inner.substitution_sites()) - 1
        for _ in range(60):
            gamma, at, aux = adjunction_case(rng)
            result = adjoin(gamma, at, aux)
            delta = len(result.substitution_sites()) - len(gamma.substitution_sites())
            assert delta == len(aux.substitution_sites())


class TestDerive:
    def test_plain_sentence(self, sentence_grammar, plain_derivation):
        assert yield_of(derive(plain_derivation, sentence_grammar)) == (
            "a",
            "man",
            "saw",
            "mary",
        )

    def test_adverb_sentence(self, sentence_grammar, adverb_derivation):
        assert yield_of(derive(adverb_derivation, sentence_grammar)) == (
            "yesterday",
            "a",
            "man",
            "saw",
            "mary",
        )

    def test_single_node_is_the_tree_itself(self, sentence_grammar):
        alpha1 = find(sentence_grammar, "alpha1")
        derived = derive(DerivationTree("alpha1"), sentence_grammar)
        assert derived.structurally_equal(alpha1.tree)

    def test_unknown_name(self, sentence_grammar):
        with pytest.raises(DanglingReferenceError):
            derive(DerivationTree("alpha9"), sentence_grammar)

    def test_mismatched_address(self, sentence_grammar):
        bad = DerivationTree(
            "alpha1",
            (
                DerivationEdge(
                    Operation.SUBSTITUTION, (2,), DerivationTree("alpha2")
                ),
            ),
        )
        with pytest.raises(InapplicableOperationError):
            derive(bad, sentence_grammar)

    def test_root_must_start_the_grammar(self, sentence_grammar):
        with pytest.raises(InapplicableOperationError):
            derive(DerivationTree("alpha2"), sentence_grammar)

    def test_duplicate_addresses_rejected(self):
        child = DerivationTree("alpha2")
        with pytest.raises(ValueError):
            DerivationTree(
                "alpha1",
                (
                    DerivationEdge(Operation.SUBSTITUTION, (1,), child),
                    DerivationEdge(Operation.SUBSTITUTION, (1,), child),
                ),
            )

    def test_sibling_order_independence(self, sentence_grammar, narmax_catalog):
        # three siblings at distinct addresses of one additive tree, plus
        # the sentence case mixing substitution and adjunction
        grammar = narmax_catalog.grammar
        host_entry = find(grammar, "beta2")
        ops = [
            (Operation.ADJUNCTION, (), find(grammar, "beta1").tree),
            (Operation.ADJUNCTION, (1,), find(grammar, "beta5").tree),
            (Operation.ADJUNCTION, (1, 3), find(grammar, "beta7").tree),
        ]
        keys = set()
        for order in permutations(range(3)):
            host = host_entry.tree.renumbered(1)
            targets = [node_at(host, address) for _, address, _ in ops]
            for i in order:
                operation, _, part = ops[i]
                if operation is Operation.SUBSTITUTION:
                    host = substitute(host, targets[i], part)
                else:
                    host = adjoin(host, targets[i], part)
            keys.add(host.structural_key())
        assert len(keys) == 1


class TestValidateGrammar:
    def test_clean_grammar(self, sentence_grammar):
        assert validate_grammar(sentence_grammar) == []

    def test_start_not_nonterminal(self):
        tree = parse_tree("A(a)", nonterminals={"A"}, terminals={"a"})
        grammar = Grammar(
            {"A"}, {"a"}, "Z", (ElementaryTree("t", TreeKind.INITIAL, tree),), ()
        )
        codes = [d.code for d in validate_grammar(grammar)]
        assert "start-not-nonterminal" in codes

    def test_foot_label_mismatch(self):
        tree = parse_tree("A(a B★)", nonterminals={"A", "B"}, terminals={"a"})
        grammar = Grammar(
            {"A", "B"}, {"a"}, "A", (), (ElementaryTree("b", TreeKind.AUXILIARY, tree),)
        )
        diagnostics = validate_grammar(grammar)
        assert any(d.code == "foot-label-mismatch" for d in diagnostics)
        mismatch = next(d for d in diagnostics if d.code == "foot-label-mismatch")
        assert mismatch.tree == "b"
        assert mismatch.address == "2"

    def test_missing_foot(self):
        tree = parse_tree("A(a)", nonterminals={"A"}, terminals={"a"})
        grammar = Grammar(
            {"A"}, {"a"}, "A", (), (ElementaryTree("b", TreeKind.AUXILIARY, tree),)
        )
        assert any(d.code == "missing-foot" for d in validate_grammar(grammar))

    def test_alphabet_overlap_and_unknown_label(self):
        tree = parse_tree("A(z)")
        grammar = Grammar(
            {"A", "a"}, {"a"}, "A", (ElementaryTree("t", TreeKind.INITIAL, tree),), ()
        )
        codes = [d.code for d in validate_grammar(grammar)]
        assert "alphabets-overlap" in codes
        assert "unknown-label" in codes

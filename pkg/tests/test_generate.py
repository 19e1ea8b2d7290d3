from narmaxtag import (
    DerivationTree,
    GenBounds,
    GrammarPreset,
    Mode,
    SampleConfig,
    classify,
    enumerate_derivations,
    enumerate_models,
    format_model_text,
    restrict,
    sample_derivation,
    sample_model,
)

from oracles import adjunctions_required, all_models_within_cost


def count_upto(grammar, budget):
    return sum(
        1 for _ in enumerate_derivations(grammar, GenBounds(max_adjunctions=budget))
    )


class TestEnumerate:
    def test_budget_zero_is_the_initial_tree(self, narmax_catalog):
        items = list(
            enumerate_derivations(narmax_catalog.grammar, GenBounds(max_adjunctions=0))
        )
        assert items == [DerivationTree("alpha1")]

    def test_single_adjunction_count(self, narmax_catalog):
        # the start tree exposes one additive slot with three candidates
        assert count_upto(narmax_catalog.grammar, 1) == 4

    def test_counts_match_closed_form(self, narmax_catalog):
        # additive nodes branch 7 ways (3 additive + 3 multiplicative +
        # 1 delay continuation), so exactly 3*7^(n-1) derivations use n
        # adjunctions
        expected = 1
        for budget in range(1, 5):
            expected += 3 * 7 ** (budget - 1)
            assert count_upto(narmax_catalog.grammar, budget) == expected

    def test_preset_counts_match_closed_form(self):
        cases = [
            (GrammarPreset.ARX, 3),  # 2 additive + 1 delay
            (GrammarPreset.NARX, 5),  # 2 additive + 2 multiplicative + 1 delay
            (GrammarPreset.FIR, 2),
            (GrammarPreset.VOLTERRA, 3),
        ]
        for preset, branching in cases:
            grammar = restrict(preset)
            additive = 2 if preset in (GrammarPreset.ARX, GrammarPreset.NARX) else 1
            expected = 1
            for budget in range(1, 5):
                expected += additive * branching ** (budget - 1)
                assert count_upto(grammar, budget) == expected, preset

    def test_no_duplicates(self, narmax_catalog):
        items = list(
            enumerate_derivations(narmax_catalog.grammar, GenBounds(max_adjunctions=3))
        )
        assert len(items) == len(set(items))

    def test_deterministic_stream(self, narmax_catalog):
        bounds = GenBounds(max_adjunctions=2)
        first = list(enumerate_derivations(narmax_catalog.grammar, bounds))
        second = list(enumerate_derivations(narmax_catalog.grammar, bounds))
        assert first == second

    def test_substitution_sites_always_filled(self, sentence_grammar):
        derivations = list(
            enumerate_derivations(sentence_grammar, GenBounds(max_adjunctions=1))
        )
        # one complete sentence with and without the adverb
        assert len(derivations) == 2
        for derivation in derivations:
            names = set(derivation.node_names())
            assert {"alpha1", "alpha2", "alpha3"} <= names

    def test_arx_enumeration_classifies_arx(self):
        grammar = restrict(GrammarPreset.ARX)
        for _, model in enumerate_models(grammar, GenBounds(max_adjunctions=3)):
            assert "ARX" in classify(model)

    def test_completeness_against_model_space(self, narmax_catalog):
        budget = 4
        parsed = set()
        for _, model in enumerate_models(
            narmax_catalog.grammar, GenBounds(max_adjunctions=budget)
        ):
            assert adjunctions_required(model) <= budget
            parsed.add(model.structure())
        direct = all_models_within_cost(budget)
        assert parsed == direct


class TestSample:
    def test_seed_reproducibility(self):
        config = SampleConfig(GenBounds(max_adjunctions=8), seed=42)
        assert sample_model(config) == sample_model(config)
        assert sample_derivation(config) == sample_derivation(config)

    def test_different_seeds_vary(self):
        bounds = GenBounds(max_adjunctions=8)
        models = {
            format_model_text(sample_model(SampleConfig(bounds, seed=s)))
            for s in range(25)
        }
        assert len(models) > 5

    def test_bounds_hold_over_many_draws(self):
        bounds = GenBounds(max_adjunctions=10, max_terms=3, max_delay=3, max_exponent=2)
        for seed in range(1000):
            model = sample_model(SampleConfig(bounds, seed=seed))
            assert model.term_count() <= 3
            for term in model.terms:
                for (_, delay), exponent in term.factors.items():
                    assert delay <= 3
                    assert exponent <= 2

    def test_strict_mode_bounds(self):
        bounds = GenBounds(
            max_adjunctions=10, max_terms=3, max_delay=3, max_exponent=2,
            mode=Mode.STRICT,
        )
        saw_noise = False
        for seed in range(300):
            model = sample_model(SampleConfig(bounds, seed=seed))
            for term in model.terms:
                for (signal, delay), _ in term.factors.items():
                    if signal.value == "xi":
                        saw_noise = True
                        assert delay >= 1
        assert saw_noise

    def test_zero_terms_bound(self):
        config = SampleConfig(GenBounds(max_adjunctions=6, max_terms=0), seed=3)
        model = sample_model(config)
        assert model.term_count() == 0
        assert format_model_text(model) == "xi"

    def test_presets_constrain_samples(self, narmax_catalog):
        bounds = GenBounds(max_adjunctions=8)
        for seed in range(100):
            model = sample_model(SampleConfig(bounds, seed=seed), GrammarPreset.FIR)
            assert "FIR" in classify(model)
        for seed in range(100):
            model = sample_model(
                SampleConfig(bounds, seed=seed), GrammarPreset.VOLTERRA
            )
            assert "Volterra" in classify(model)

    def test_sampled_derivations_use_preset_trees(self):
        allowed = {"alpha1", "beta1", "beta2", "beta7"}
        for seed in range(100):
            derivation = sample_derivation(
                SampleConfig(GenBounds(max_adjunctions=8), seed=seed),
                GrammarPreset.ARX,
            )
            assert set(derivation.node_names()) <= allowed

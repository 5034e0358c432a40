import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dreamloom.errors import InvalidSpec, UnparseableResponse
from dreamloom.metaphor import (
    PromptEngine,
    parse_suggestions,
    render_numbered_list,
)
from dreamloom.story import MeaningType, MetaphorSpec, VisualStructure

from support import random_spec, scenario_spec

import random


@pytest.fixture(scope="module")
def engine():
    return PromptEngine()


RELATION_PHRASES = {
    MeaningType.CONNECTION: "connected with",
    MeaningType.SIMILARITY: "similar to",
    MeaningType.OPPOSITION: "opposite to",
}


class TestSuggestionPrompt:
    def test_contains_fields_and_relation(self, engine):
        prompt = engine.build_suggestion_prompt(scenario_spec(), MeaningType.CONNECTION, n=5)
        assert "old crush holding my hands" in prompt.full
        assert "exciting" in prompt.full
        assert "connected with" in prompt.full
        assert "exactly 5" in prompt.full

    def test_opposition_only_swaps_relation(self, engine):
        spec = scenario_spec()
        a = engine.build_suggestion_prompt(spec, MeaningType.CONNECTION, n=5).full
        b = engine.build_suggestion_prompt(spec, MeaningType.OPPOSITION, n=5).full
        assert a.replace("connected with", "opposite to") == b

    def test_zero_count_rejected(self, engine):
        with pytest.raises(InvalidSpec):
            engine.build_suggestion_prompt(scenario_spec(), MeaningType.CONNECTION, n=0)

    def test_every_adjective_appears(self, engine):
        spec = scenario_spec()
        spec.adjectives = ["thrilling", "a bit worrying"]
        prompt = engine.build_suggestion_prompt(spec, MeaningType.SIMILARITY)
        assert "thrilling" in prompt.full
        assert "a bit worrying" in prompt.full


class TestImagePrompt:
    def test_fusion_scenario(self, engine):
        prompt = engine.build_image_prompt(scenario_spec())
        for phrase in ("old crush holding my hands", "Electric Sparks", "sunset on the beach"):
            assert phrase in prompt.full
        assert engine.structure_directive(VisualStructure.FUSION) in prompt.full

    def test_juxtaposition_scenario(self, engine):
        spec = MetaphorSpec(
            affective_element="hugging and kissing",
            adjectives=["thrilling"],
            metaphor_concept="Embracing Flames",
            visual_structure=VisualStructure.JUXTAPOSITION,
        )
        prompt = engine.build_image_prompt(spec)
        assert "hugging and kissing" in prompt.full
        assert "Embracing Flames" in prompt.full
        assert "side by side" in engine.structure_directive(VisualStructure.JUXTAPOSITION)
        assert engine.structure_directive(VisualStructure.JUXTAPOSITION) in prompt.full

    def test_determinism(self, engine):
        spec = scenario_spec()
        assert engine.build_image_prompt(spec).full == engine.build_image_prompt(spec).full

    def test_missing_concept_rejected(self, engine):
        spec = scenario_spec()
        spec.metaphor_concept = ""
        with pytest.raises(InvalidSpec):
            engine.build_image_prompt(spec)

    def test_no_extra_clause_when_absent(self, engine):
        spec = scenario_spec()
        spec.extra_prompt = None
        prompt = engine.build_image_prompt(spec)
        assert "sunset" not in prompt.full


class TestDepictionPrompt:
    @pytest.mark.parametrize(
        "element,adjective,concept",
        [
            ("Monster in the crowd", "disturbing", "Bomb under the table"),
            ("Talking content", "boring", "Text bubble drizzle"),
        ],
    )
    def test_embeds_all_fields(self, engine, element, adjective, concept):
        spec = MetaphorSpec(
            affective_element=element, adjectives=[adjective], metaphor_concept=concept
        )
        prompt = engine.build_depiction_prompt(spec)
        assert element in prompt.full
        assert adjective in prompt.full
        assert concept in prompt.full
        assert "first person" in prompt.full
        assert "60 words" in prompt.full

    def test_empty_concept_rejected(self, engine):
        spec = scenario_spec()
        spec.metaphor_concept = "  "
        with pytest.raises(InvalidSpec):
            engine.build_depiction_prompt(spec)


class TestDesignSpaceCoverage:
    def test_all_nine_combinations_distinct(self, engine):
        spec = scenario_spec()
        seen = set()
        for meaning in MeaningType:
            for structure in VisualStructure:
                combo = spec.model_copy(deep=True)
                combo.meaning_type = meaning
                combo.visual_structure = structure
                pair = (
                    engine.build_suggestion_prompt(combo, meaning, n=5).full,
                    engine.build_image_prompt(combo).full,
                )
                assert RELATION_PHRASES[meaning] in pair[0]
                assert engine.structure_directive(structure) in pair[1]
                seen.add(pair)
        assert len(seen) == 9


_field_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",), blacklist_characters="\x00"),
    min_size=1,
    max_size=40,
).filter(lambda s: s.strip())


class TestContainmentProperty:
    @pytest.mark.parametrize("seed", range(25))
    def test_fields_verbatim_in_prompts(self, engine, seed):
        spec = random_spec(random.Random(seed))
        suggestion = engine.build_suggestion_prompt(spec, spec.meaning_type).full
        image = engine.build_image_prompt(spec).full
        depiction = engine.build_depiction_prompt(spec).full
        for prompt in (suggestion, image, depiction):
            assert spec.affective_element in prompt
            for adjective in spec.adjectives:
                assert adjective in prompt
        assert spec.metaphor_concept in image
        assert spec.metaphor_concept in depiction

    @settings(max_examples=300, deadline=None)
    @given(
        element=_field_text,
        adjs=st.lists(_field_text, min_size=1, max_size=4),
        concept=_field_text,
        extra=st.none() | _field_text,
    )
    def test_containment_over_arbitrary_text(self, engine, element, adjs, concept, extra):
        spec = MetaphorSpec(
            affective_element=element,
            adjectives=adjs,
            metaphor_concept=concept,
            extra_prompt=extra,
        )
        image = engine.build_image_prompt(spec).full
        depiction = engine.build_depiction_prompt(spec).full
        suggestion = engine.build_suggestion_prompt(spec, spec.meaning_type).full
        for prompt in (suggestion, image, depiction):
            assert spec.affective_element in prompt
            for adjective in spec.adjectives:
                assert adjective in prompt
        assert spec.metaphor_concept in image
        assert spec.metaphor_concept in depiction
        if spec.extra_prompt is not None:
            assert spec.extra_prompt in image


class TestParseSuggestions:
    def test_numbered_list(self):
        text = "1. Electric Sparks\n2. Nostalgic Embrace\n3. Entangled Fingers"
        parsed = parse_suggestions(text)
        assert [s.concept for s in parsed] == [
            "Electric Sparks",
            "Nostalgic Embrace",
            "Entangled Fingers",
        ]

    def test_bullet_with_quotes(self):
        parsed = parse_suggestions('- "Feast of Colors"')
        assert [s.concept for s in parsed] == ["Feast of Colors"]

    def test_no_list_raises(self):
        with pytest.raises(UnparseableResponse):
            parse_suggestions("no list here")

    def test_rationale_split(self):
        parsed = parse_suggestions("1. Electric Sparks - a jolt of joy")
        assert parsed[0].concept == "Electric Sparks"
        assert parsed[0].rationale == "a jolt of joy"

    def test_trailing_punctuation_stripped(self):
        parsed = parse_suggestions("1) Moonlit Silhouette.\n2: Flower Dance!")
        assert [s.concept for s in parsed] == ["Moonlit Silhouette", "Flower Dance"]

    def test_overlong_items_dropped(self):
        text = "1. one two three four five six seven eight nine\n2. Short One"
        parsed = parse_suggestions(text)
        assert [s.concept for s in parsed] == ["Short One"]

    def test_empty_items_dropped(self):
        parsed = parse_suggestions("1. \n2. Kept")
        assert [s.concept for s in parsed] == ["Kept"]


_phrases = st.lists(
    st.lists(
        st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=8),
        min_size=1,
        max_size=8,
    ).map(" ".join),
    min_size=1,
    max_size=10,
)


class TestRoundTrip:
    @settings(max_examples=300, deadline=None)
    @given(_phrases)
    def test_parse_inverts_render(self, phrases):
        parsed = parse_suggestions(render_numbered_list(phrases))
        assert [s.concept for s in parsed] == phrases

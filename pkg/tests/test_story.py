import pytest

from dreamloom.errors import (
    EmptyTitle,
    InvalidSpec,
    MissingSpec,
    NotMetaphorical,
    PositionOutOfRange,
    UnknownGeneration,
)
from dreamloom.palette import FilterOrigin, ColorFilter, parse_hex
from dreamloom.story import (
    BubbleShape,
    MeaningType,
    MetaphorSpec,
    SceneKind,
    VisualStructure,
    bubble_shape,
    create_story,
)

from support import IMAGE_REFS, OpMachine, random_palette, scenario_spec

import random


def make_story_with_metaphorical():
    story = create_story("test story")
    story.add_scene(SceneKind.LITERAL, 0, "opening")
    scene = story.add_scene(SceneKind.METAPHORICAL, 1)
    story.set_metaphor_spec(scene.id, scenario_spec())
    return story, scene


def record(story, scene, n=1):
    recs = []
    for i in range(n):
        recs.append(
            story.record_generation(scene.id, prompt=f"p{i}", image_ref=IMAGE_REFS[i % 4])
        )
    return recs


class TestCreateStory:
    def test_empty_initial_state(self):
        story = create_story("My beach dream")
        assert story.scenes == []
        assert story.layout.items == {}
        assert story.title == "My beach dream"

    def test_whitespace_title_rejected(self):
        with pytest.raises(EmptyTitle):
            create_story("   ")

    def test_same_title_distinct_ids(self):
        a = create_story("twin")
        b = create_story("twin")
        assert a.id != b.id


class TestAddScene:
    def test_literal_opening(self):
        story = create_story("s")
        scene = story.add_scene(SceneKind.LITERAL, 0)
        assert scene.position == 0
        assert scene.bubble_shape() == BubbleShape.ROUNDED
        assert story.layout.items == {}

    def test_metaphorical_gets_layout_item(self):
        story = create_story("s")
        story.add_scene(SceneKind.LITERAL, 0)
        scene = story.add_scene(SceneKind.METAPHORICAL, 1)
        assert scene.bubble_shape() == BubbleShape.SPIKY
        assert set(story.layout.items) == {scene.id}

    def test_position_out_of_range(self):
        story = create_story("s")
        story.add_scene(SceneKind.LITERAL, 0)
        story.add_scene(SceneKind.LITERAL, 1)
        with pytest.raises(PositionOutOfRange):
            story.add_scene(SceneKind.LITERAL, 5)

    def test_insert_shifts_later_scenes(self):
        story = create_story("s")
        first = story.add_scene(SceneKind.LITERAL, 0)
        second = story.add_scene(SceneKind.LITERAL, 1)
        inserted = story.add_scene(SceneKind.LITERAL, 1)
        assert [s.id for s in story.scenes] == [first.id, inserted.id, second.id]
        assert [s.position for s in story.scenes] == [0, 1, 2]


class TestMetaphorSpec:
    def test_scenario_values_stored(self):
        story, scene = make_story_with_metaphorical()
        assert scene.metaphor.metaphor_concept == "Electric Sparks"
        assert scene.metaphor.meaning_type == MeaningType.CONNECTION

    def test_second_scenario_spec(self):
        story, scene = make_story_with_metaphorical()
        spec = MetaphorSpec(
            affective_element="hugging and kissing",
            adjectives=["thrilling", "worrying"],
            metaphor_concept="Embracing Flames",
            meaning_type=MeaningType.SIMILARITY,
            visual_structure=VisualStructure.JUXTAPOSITION,
        )
        story.set_metaphor_spec(scene.id, spec)
        assert scene.metaphor.adjectives == ["thrilling", "worrying"]

    def test_empty_adjectives_rejected(self):
        story, scene = make_story_with_metaphorical()
        bad = scenario_spec()
        bad.adjectives = []
        with pytest.raises(InvalidSpec):
            story.set_metaphor_spec(scene.id, bad)

    def test_spec_edit_keeps_history(self):
        story, scene = make_story_with_metaphorical()
        record(story, scene, 2)
        story.set_metaphor_spec(scene.id, scenario_spec())
        assert len(scene.generations) == 2

    def test_literal_scene_rejects_spec(self):
        story, _ = make_story_with_metaphorical()
        literal = story.scenes[0]
        with pytest.raises(NotMetaphorical):
            story.set_metaphor_spec(literal.id, scenario_spec())


class TestGenerations:
    def test_append_grows_history(self):
        story, scene = make_story_with_metaphorical()
        assert len(scene.generations) == 0
        record(story, scene)
        assert len(scene.generations) == 1

    def test_insertion_order_preserved(self):
        story, scene = make_story_with_metaphorical()
        recs = record(story, scene, 3)
        assert [g.id for g in scene.generations] == [r.id for r in recs]

    def test_record_on_literal_rejected(self):
        story, _ = make_story_with_metaphorical()
        literal = story.scenes[0]
        with pytest.raises(NotMetaphorical):
            story.record_generation(literal.id, prompt="p", image_ref=IMAGE_REFS[0])

    def test_record_without_spec_rejected(self):
        story = create_story("s")
        scene = story.add_scene(SceneKind.METAPHORICAL, 0)
        with pytest.raises(MissingSpec):
            story.record_generation(scene.id, prompt="p", image_ref=IMAGE_REFS[0])

    def test_new_record_not_accepted_or_displayed(self):
        story, scene = make_story_with_metaphorical()
        (rec,) = record(story, scene)
        assert rec.accepted is False
        assert scene.displayed_generation is None


class TestAcceptance:
    def test_accept_only_record(self):
        story, scene = make_story_with_metaphorical()
        (rec,) = record(story, scene)
        pal = random_palette(random.Random(1))
        story.accept_generation(scene.id, rec.id, pal)
        assert rec.accepted is True
        assert scene.displayed_generation == rec.id
        assert scene.palette == pal

    def test_accept_middle_of_three_keeps_others(self):
        story, scene = make_story_with_metaphorical()
        recs = record(story, scene, 3)
        story.accept_generation(scene.id, recs[1].id, random_palette(random.Random(2)))
        assert scene.displayed_generation == recs[1].id
        assert [g.id for g in scene.generations] == [r.id for r in recs]
        item = story.layout.items[scene.id]
        assert item.history_slots == [recs[0].id, recs[2].id]

    def test_accept_foreign_id_rejected(self):
        story, scene = make_story_with_metaphorical()
        record(story, scene)
        with pytest.raises(UnknownGeneration):
            story.accept_generation(scene.id, "nope", random_palette(random.Random(3)))


class TestSwitchDisplay:
    def test_switch_keeps_accepted_flags(self):
        story, scene = make_story_with_metaphorical()
        recs = record(story, scene, 2)
        story.accept_generation(scene.id, recs[1].id, random_palette(random.Random(4)))
        story.switch_display(scene.id, recs[0].id)
        assert scene.displayed_generation == recs[0].id
        assert recs[1].accepted and not recs[0].accepted
        assert len(scene.generations) == 2

    def test_switch_to_displayed_is_noop(self):
        story, scene = make_story_with_metaphorical()
        recs = record(story, scene, 2)
        story.accept_generation(scene.id, recs[0].id, random_palette(random.Random(5)))
        before = scene.model_dump()
        before.pop("palette"), before.pop("filter")
        story.switch_display(scene.id, recs[0].id)
        after = scene.model_dump()
        after.pop("palette"), after.pop("filter")
        assert before == after

    def test_switch_never_recomputes_palette(self):
        story, scene = make_story_with_metaphorical()
        recs = record(story, scene, 2)
        pal = random_palette(random.Random(6))
        story.accept_generation(scene.id, recs[0].id, pal)
        story.switch_display(scene.id, recs[1].id)
        # Non-accepted record has no palette; the accepted one still shows.
        assert scene.palette == pal
        assert recs[1].palette is None

    def test_switch_foreign_id_rejected(self):
        story, scene = make_story_with_metaphorical()
        record(story, scene)
        with pytest.raises(UnknownGeneration):
            story.switch_display(scene.id, "foreign")


class TestBubbleShape:
    def test_shapes(self):
        story, scene = make_story_with_metaphorical()
        assert bubble_shape(story.scenes[0]) == BubbleShape.ROUNDED
        assert bubble_shape(scene) == BubbleShape.SPIKY


class TestDepictions:
    def test_reacceptance_supersedes_depiction(self):
        story, scene = make_story_with_metaphorical()
        story.append_depiction(scene.id, "first")
        story.append_depiction(scene.id, "second")
        assert scene.depiction == "second"
        assert [d.superseded for d in scene.depictions] == [True, False]

    def test_depiction_never_touches_user_text(self):
        story, scene = make_story_with_metaphorical()
        story.set_scene_text(scene.id, "my own words")
        story.append_depiction(scene.id, "generated words")
        assert scene.text == "my own words"


class TestFilters:
    def test_default_follows_palette(self):
        story, scene = make_story_with_metaphorical()
        (rec,) = record(story, scene)
        pal = random_palette(random.Random(7))
        story.accept_generation(scene.id, rec.id, pal)
        assert scene.filter.origin == FilterOrigin.PALETTE_DEFAULT
        assert scene.filter.color == pal.entries[0].color

    def test_user_filter_wins(self):
        story, scene = make_story_with_metaphorical()
        (rec,) = record(story, scene)
        story.accept_generation(scene.id, rec.id, random_palette(random.Random(8)))
        chosen = ColorFilter(color=parse_hex("#808080"), origin=FilterOrigin.CUSTOM_HEX)
        story.set_user_filter(scene.id, chosen)
        assert scene.filter == chosen

    def test_palette_default_reset(self):
        story, scene = make_story_with_metaphorical()
        (rec,) = record(story, scene)
        pal = random_palette(random.Random(9))
        story.accept_generation(scene.id, rec.id, pal)
        story.set_user_filter(
            scene.id, ColorFilter(color=parse_hex("#010203"), origin=FilterOrigin.CUSTOM_HEX)
        )
        story.set_user_filter(
            scene.id,
            ColorFilter(color=parse_hex("#010203"), origin=FilterOrigin.PALETTE_DEFAULT),
        )
        assert scene.user_filter is None
        assert scene.filter.color == pal.entries[0].color


class TestRandomOperationSequences:
    @pytest.mark.parametrize("seed", range(40))
    def test_invariants_hold(self, seed):
        machine = OpMachine(seed)
        machine.run(30)

    def test_kind_is_immutable_by_construction(self):
        # No operation can change a scene's kind; literal scenes never gain
        # metaphor fields across long random sequences (checked in the
        # machine after every step).
        story = OpMachine(4242).run(60)
        for scene in story.scenes:
            if scene.kind == SceneKind.LITERAL:
                assert scene.metaphor is None
                assert scene.generations == []

"""Seeds the bundled demo story: a beach dream told in four scenes.

The demo always runs on mock providers so a fresh checkout can produce a
complete story, palettes and depictions included, without any keys.
"""

from __future__ import annotations

from pathlib import Path

from .config import AppConfig
from .providers import ProviderMode, ProviderSettings
from .service import Studio
from .story import MeaningType, MetaphorSpec, SceneKind, VisualStructure

OPENING_TEXT = (
    "I was walking along the beach at sunset, hand in hand with my old crush."
)
SECOND_SCENE_TEXT = (
    "I realised I already had a girlfriend, but we kissed and hugged regardless."
)
ENDING_TEXT = (
    "Then I woke up all of a sudden, and for a little while the thrill felt "
    "completely real, right up until I got up for coffee."
)

FIRST_SPEC = MetaphorSpec(
    affective_element="old crush holding my hands",
    adjectives=["exciting"],
    metaphor_concept="Electric Sparks",
    meaning_type=MeaningType.CONNECTION,
    visual_structure=VisualStructure.FUSION,
    extra_prompt="sunset on the beach",
)
SECOND_SPEC = MetaphorSpec(
    affective_element="hugging and kissing",
    adjectives=["thrilling", "worrying"],
    metaphor_concept="Embracing Flames",
    meaning_type=MeaningType.SIMILARITY,
    visual_structure=VisualStructure.JUXTAPOSITION,
)


def build_demo_story(studio: Studio) -> str:
    """Drive the full creative loop once; returns the story id."""
    story = studio.create_story("A beach dream")

    studio.add_scene(story.id, SceneKind.LITERAL, 0, OPENING_TEXT)

    first = studio.add_scene(story.id, SceneKind.METAPHORICAL, 1)
    studio.update_scene(first.id, metaphor=FIRST_SPEC.model_copy(deep=True))
    suggestions = studio.request_suggestions(first.id, MeaningType.CONNECTION, 5)
    concepts = [s.concept for s in suggestions]
    if FIRST_SPEC.metaphor_concept not in concepts:  # fixture drift guard
        raise RuntimeError(f"demo fixture missing {FIRST_SPEC.metaphor_concept}: {concepts}")
    record = studio.request_generation(first.id)
    studio.finalize_acceptance(first.id, record.id)

    second = studio.add_scene(story.id, SceneKind.METAPHORICAL, 2, SECOND_SCENE_TEXT)
    studio.update_scene(second.id, metaphor=SECOND_SPEC.model_copy(deep=True))
    first_try = studio.request_generation(second.id)
    studio.finalize_acceptance(second.id, first_try.id)
    # A second exploration, fused this time; accepting it supersedes the
    # first depiction while both images stay in the history.
    fused = SECOND_SPEC.model_copy(deep=True)
    fused.visual_structure = VisualStructure.FUSION
    studio.update_scene(second.id, metaphor=fused)
    second_try = studio.request_generation(second.id)
    studio.finalize_acceptance(second.id, second_try.id)

    studio.add_scene(story.id, SceneKind.LITERAL, 3, ENDING_TEXT)

    # Arrange the storyline: even spacing, the first moment enlarged, the
    # second raised and pushed toward the end.
    studio.update_layout(story.id, reset=True)
    studio.update_layout(
        story.id,
        items={
            first.id: {"scale": 1.4},
            second.id: {"image_offset": (0.1, -0.2)},
        },
    )
    return story.id


def seed_demo(data_dir: str | Path, templates_path: str | Path | None = None) -> Path:
    """Create the demo bundle under data_dir and return its path."""
    config = AppConfig(
        data_dir=Path(data_dir),
        templates_path=Path(templates_path) if templates_path else None,
        provider=ProviderSettings(mode=ProviderMode.MOCK),
    )
    studio = Studio(config)
    story_id = build_demo_story(studio)
    return studio.store.bundle_path(story_id)

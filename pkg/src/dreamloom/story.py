"""Story and scene domain model.

A story is an ordered list of literal and metaphorical scenes plus the
storyline layout. All state transitions go through the operations here;
they maintain the invariants that `check_invariants` spells out, and that
the persistence layer re-checks on load.

Mutations to one story must be serialized by the caller (single writer per
story id); the service layer holds a lock per story.
"""

from __future__ import annotations

import uuid
from datetime import datetime, timezone
from enum import Enum

from pydantic import BaseModel, Field, computed_field, field_validator

from . import layout as layout_mod
from .errors import (
    EmptyTitle,
    InvalidSpec,
    MissingSpec,
    NotMetaphorical,
    PositionOutOfRange,
    UnknownGeneration,
    UnknownScene,
)
from .layout import LayoutState
from .palette import ColorFilter, FilterOrigin, Palette, default_filter

SCHEMA_VERSION = 1

DEFAULT_IMAGE_SIZE = 512
DEFAULT_IMAGE_STEPS = 30


def new_id() -> str:
    return uuid.uuid4().hex


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


class SceneKind(str, Enum):
    LITERAL = "literal"
    METAPHORICAL = "metaphorical"


class MeaningType(str, Enum):
    CONNECTION = "connection"
    SIMILARITY = "similarity"
    OPPOSITION = "opposition"


class VisualStructure(str, Enum):
    JUXTAPOSITION = "juxtaposition"
    FUSION = "fusion"
    REPLACEMENT = "replacement"


class BubbleShape(str, Enum):
    SPIKY = "spiky"
    ROUNDED = "rounded"


class MetaphorSpec(BaseModel):
    """What is affective, how it feels, and the metaphor drawn for it.

    Text fields are whitespace-trimmed on construction, so stored values
    are exactly what prompt templates embed.
    """

    affective_element: str = ""
    adjectives: list[str] = Field(default_factory=list)
    metaphor_concept: str = ""
    meaning_type: MeaningType = MeaningType.CONNECTION
    visual_structure: VisualStructure = VisualStructure.FUSION
    extra_prompt: str | None = None

    @field_validator("affective_element", "metaphor_concept")
    @classmethod
    def _trim(cls, value: str) -> str:
        return value.strip()

    @field_validator("adjectives")
    @classmethod
    def _trim_adjectives(cls, values: list[str]) -> list[str]:
        return [v.strip() for v in values if v.strip()]

    @field_validator("extra_prompt")
    @classmethod
    def _trim_extra(cls, value: str | None) -> str | None:
        if value is None:
            return None
        trimmed = value.strip()
        return trimmed or None

    def g1_complete(self) -> bool:
        """The articulation gate: feelings must be put into words before
        anything may be generated."""
        return bool(self.affective_element.strip()) and any(a.strip() for a in self.adjectives)

    def require_g1(self) -> None:
        if not self.affective_element.strip():
            raise InvalidSpec("affective_element is empty")
        if not any(a.strip() for a in self.adjectives):
            raise InvalidSpec("at least one adjective is required")

    def require_full(self) -> None:
        self.require_g1()
        if not self.metaphor_concept.strip():
            raise InvalidSpec("metaphor_concept is empty")


class Depiction(BaseModel):
    text: str
    created_at: datetime = Field(default_factory=utcnow)
    superseded: bool = False


class GenerationRecord(BaseModel):
    id: str = Field(default_factory=new_id)
    prompt: str
    width: int = DEFAULT_IMAGE_SIZE
    height: int = DEFAULT_IMAGE_SIZE
    steps: int = DEFAULT_IMAGE_STEPS
    image_ref: str
    created_at: datetime = Field(default_factory=utcnow)
    accepted: bool = False
    accepted_at: datetime | None = None
    palette: Palette | None = None


class Scene(BaseModel):
    id: str = Field(default_factory=new_id)
    kind: SceneKind
    position: int = 0
    text: str = ""
    metaphor: MetaphorSpec | None = None
    generations: list[GenerationRecord] = Field(default_factory=list)
    displayed_generation: str | None = None
    depictions: list[Depiction] = Field(default_factory=list)
    user_filter: ColorFilter | None = None

    @property
    def is_metaphorical(self) -> bool:
        return self.kind == SceneKind.METAPHORICAL

    def generation(self, generation_id: str) -> GenerationRecord:
        for rec in self.generations:
            if rec.id == generation_id:
                return rec
        raise UnknownGeneration(f"generation {generation_id} not in scene {self.id}")

    def bubble_shape(self) -> BubbleShape:
        return BubbleShape.SPIKY if self.is_metaphorical else BubbleShape.ROUNDED

    @computed_field
    @property
    def palette(self) -> Palette | None:
        """The displayed record's palette when it has one, else the most
        recently accepted record's. Palettes attach at acceptance time and
        are never recomputed by display switching."""
        if self.displayed_generation is not None:
            for rec in self.generations:
                if rec.id == self.displayed_generation and rec.palette is not None:
                    return rec.palette
        best: GenerationRecord | None = None
        best_key = None
        for idx, rec in enumerate(self.generations):
            if rec.accepted and rec.palette is not None:
                key = (rec.accepted_at or rec.created_at, idx)
                if best_key is None or key > best_key:
                    best, best_key = rec, key
        return best.palette if best else None

    @computed_field
    @property
    def filter(self) -> ColorFilter | None:
        """Effective color filter: the user's explicit choice if any,
        otherwise the default derived from the current palette."""
        if self.user_filter is not None:
            return self.user_filter
        pal = self.palette
        if pal is not None and pal.entries:
            return default_filter(pal)
        return None

    @computed_field
    @property
    def depiction(self) -> str | None:
        for dep in reversed(self.depictions):
            if not dep.superseded:
                return dep.text
        return None


class Story(BaseModel):
    id: str = Field(default_factory=new_id)
    title: str
    scenes: list[Scene] = Field(default_factory=list)
    layout: LayoutState = Field(default_factory=LayoutState)
    created_at: datetime = Field(default_factory=utcnow)
    updated_at: datetime = Field(default_factory=utcnow)
    schema_version: int = SCHEMA_VERSION

    # -- lookups ------------------------------------------------------------

    def scene_by_id(self, scene_id: str) -> Scene:
        for scene in self.scenes:
            if scene.id == scene_id:
                return scene
        raise UnknownScene(f"scene {scene_id} not in story {self.id}")

    def metaphorical_ids(self) -> list[str]:
        return [s.id for s in self.scenes if s.is_metaphorical]

    def touch(self) -> None:
        self.updated_at = utcnow()

    # -- scene lifecycle -----------------------------------------------------

    def add_scene(self, kind: SceneKind, position: int, text: str = "") -> Scene:
        if not 0 <= position <= len(self.scenes):
            raise PositionOutOfRange(
                f"position {position} outside 0..{len(self.scenes)}"
            )
        scene = Scene(kind=SceneKind(kind), position=position, text=text)
        self.scenes.insert(position, scene)
        self._renumber()
        if scene.is_metaphorical:
            layout_mod.insert_default_item(self.layout, self.metaphorical_ids(), scene.id)
        self.touch()
        return scene

    def delete_scene(self, scene_id: str) -> None:
        scene = self.scene_by_id(scene_id)
        self.scenes.remove(scene)
        self.layout.items.pop(scene_id, None)
        self._renumber()
        self.touch()

    def _renumber(self) -> None:
        for idx, scene in enumerate(self.scenes):
            scene.position = idx

    def set_scene_text(self, scene_id: str, text: str) -> Scene:
        scene = self.scene_by_id(scene_id)
        scene.text = text
        self.touch()
        return scene

    # -- metaphor workflow -----------------------------------------------------

    def set_metaphor_spec(self, scene_id: str, spec: MetaphorSpec) -> Scene:
        """Store the spec. Spec edits never erase generation history."""
        scene = self.scene_by_id(scene_id)
        if not scene.is_metaphorical:
            raise NotMetaphorical(f"scene {scene_id} is literal")
        spec.require_g1()
        scene.metaphor = spec
        self.touch()
        return scene

    def record_generation(
        self,
        scene_id: str,
        prompt: str,
        image_ref: str,
        width: int = DEFAULT_IMAGE_SIZE,
        height: int = DEFAULT_IMAGE_SIZE,
        steps: int = DEFAULT_IMAGE_STEPS,
    ) -> GenerationRecord:
        """Append a generation to the scene history (histories only grow).

        MissingSpec covers both an absent and an incomplete metaphor spec;
        the image prompt can only have come from a complete one.
        """
        scene = self.scene_by_id(scene_id)
        if not scene.is_metaphorical:
            raise NotMetaphorical(f"scene {scene_id} is literal")
        if scene.metaphor is None or not scene.metaphor.g1_complete():
            raise MissingSpec(f"scene {scene_id} has no usable metaphor spec")
        record = GenerationRecord(
            prompt=prompt, image_ref=image_ref, width=width, height=height, steps=steps
        )
        scene.generations.append(record)
        layout_mod.sync_history_slots(self.layout, scene)
        self.touch()
        return record

    def accept_generation(self, scene_id: str, generation_id: str, palette: Palette) -> Scene:
        """Mark a record accepted and put it on display.

        The palette extracted from the accepted image is attached to the
        record here so that the palette-iff-accepted invariant holds at all
        times. Acceptance also triggers depiction generation, which the
        service layer orchestrates.
        """
        scene = self.scene_by_id(scene_id)
        record = scene.generation(generation_id)
        record.accepted = True
        record.accepted_at = utcnow()
        record.palette = palette
        scene.displayed_generation = generation_id
        layout_mod.sync_history_slots(self.layout, scene)
        self.touch()
        return scene

    def switch_display(self, scene_id: str, generation_id: str) -> Scene:
        """Swap which generation is on display. Does not touch accepted
        flags or palettes; only acceptance triggers those."""
        scene = self.scene_by_id(scene_id)
        scene.generation(generation_id)
        scene.displayed_generation = generation_id
        layout_mod.sync_history_slots(self.layout, scene)
        self.touch()
        return scene

    def append_depiction(self, scene_id: str, text: str) -> Scene:
        """Add a generated depiction; prior ones are kept but superseded."""
        scene = self.scene_by_id(scene_id)
        if not scene.is_metaphorical:
            raise NotMetaphorical(f"scene {scene_id} is literal")
        for dep in scene.depictions:
            dep.superseded = True
        scene.depictions.append(Depiction(text=text))
        self.touch()
        return scene

    def set_user_filter(self, scene_id: str, color_filter: ColorFilter | None) -> Scene:
        """Store a user-chosen filter. Passing None (or a palette_default
        filter) reverts to the derived default."""
        scene = self.scene_by_id(scene_id)
        if not scene.is_metaphorical:
            raise NotMetaphorical(f"scene {scene_id} is literal")
        if color_filter is not None and color_filter.origin == FilterOrigin.PALETTE_DEFAULT:
            color_filter = None
        scene.user_filter = color_filter
        self.touch()
        return scene

    # -- layout ----------------------------------------------------------------

    def move_layout_item(
        self,
        scene_id: str,
        new_anchor_x: float | None = None,
        new_offset: tuple[float, float] | None = None,
    ) -> None:
        layout_mod.move_item(
            self.layout, self.metaphorical_ids(), scene_id, new_anchor_x, new_offset
        )
        self.touch()

    def resize_layout_item(self, scene_id: str, scale: float) -> None:
        layout_mod.resize_item(self.layout, scene_id, scale)
        self.touch()

    def reset_layout(self) -> None:
        self.layout = layout_mod.default_layout(self)
        self.touch()

    def set_axis(self, axis_y: float) -> None:
        self.layout.axis_y = min(max(float(axis_y), 0.0), 1.0)
        self.touch()

    # -- validation ---------------------------------------------------------------

    def check_invariants(self) -> list[str]:
        """Return a list of violated invariants (empty when healthy)."""
        problems: list[str] = []
        seen_ids = set()
        for idx, scene in enumerate(self.scenes):
            tag = f"scene {scene.id}"
            if scene.id in seen_ids:
                problems.append(f"{tag}: duplicate scene id")
            seen_ids.add(scene.id)
            if scene.position != idx:
                problems.append(f"{tag}: position {scene.position} != index {idx}")
            if not scene.is_metaphorical:
                if scene.metaphor is not None:
                    problems.append(f"{tag}: literal scene has a metaphor spec")
                if scene.generations:
                    problems.append(f"{tag}: literal scene has generations")
                if scene.depictions:
                    problems.append(f"{tag}: literal scene has depictions")
                if scene.user_filter is not None:
                    problems.append(f"{tag}: literal scene has a filter")
                if scene.id in self.layout.items:
                    problems.append(f"{tag}: literal scene has a layout item")
            else:
                if scene.id not in self.layout.items:
                    problems.append(f"{tag}: metaphorical scene missing its layout item")
            gen_ids = [g.id for g in scene.generations]
            if len(gen_ids) != len(set(gen_ids)):
                problems.append(f"{tag}: duplicate generation ids")
            if scene.displayed_generation is not None and scene.displayed_generation not in gen_ids:
                problems.append(f"{tag}: displayed_generation not in history")
            for rec in scene.generations:
                if rec.accepted and rec.palette is None:
                    problems.append(f"{tag}: accepted generation {rec.id} has no palette")
                if rec.accepted != (rec.accepted_at is not None):
                    problems.append(f"{tag}: accepted flag and accepted_at disagree")
            active = [d for d in scene.depictions if not d.superseded]
            if len(active) > 1:
                problems.append(f"{tag}: more than one active depiction")
            item = self.layout.items.get(scene.id)
            if item is not None:
                expected = [g.id for g in scene.generations if g.id != scene.displayed_generation]
                if item.history_slots != expected:
                    problems.append(f"{tag}: history_slots out of sync")
        for sid in self.layout.items:
            if sid not in seen_ids:
                problems.append(f"layout: item for unknown scene {sid}")
        if not layout_mod.anchor_order_ok(self.layout, self.metaphorical_ids()):
            problems.append("layout: anchors not strictly increasing in scene order")
        return problems


def create_story(title: str) -> Story:
    trimmed = title.strip()
    if not trimmed:
        raise EmptyTitle("story title is empty")
    return Story(title=trimmed)


def bubble_shape(scene: Scene) -> BubbleShape:
    """Spiky for metaphorical scenes, rounded for literal ones."""
    return scene.bubble_shape()

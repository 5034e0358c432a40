"""Workflow orchestration over the domain model, providers and store.

The Studio owns the loaded stories and serializes mutations per story id
(single writer per story); reads take the same lock so every caller sees a
consistent snapshot. Provider calls for different stories may overlap.
"""

from __future__ import annotations

import threading
from collections import defaultdict
from contextlib import contextmanager

from . import palette as palette_mod
from .config import AppConfig
from .errors import (
    DreamloomError,
    InvalidFilterPick,
    MissingSpec,
    UnknownScene,
    UnknownStory,
)
from .metaphor import MetaphorSuggestion, PromptEngine, parse_suggestions
from .palette import ColorFilter, FilterOrigin, parse_hex
from .providers import (
    ChatRequest,
    ImageRequest,
    ProviderStatus,
    build_providers,
    health_check,
)
from .store import BundleStore, PlaybackManifest, export_playback
from .story import (
    GenerationRecord,
    MeaningType,
    MetaphorSpec,
    Scene,
    SceneKind,
    Story,
    create_story,
)


class Studio:
    def __init__(self, config: AppConfig, chat=None, image=None):
        self.config = config
        self.settings = config.provider
        self.store = BundleStore(config.data_dir)
        self.engine = PromptEngine(config.templates_path)
        if chat is None or image is None:
            built_chat, built_image = build_providers(self.settings)
            chat = chat or built_chat
            image = image or built_image
        self.chat = chat
        self.image = image
        self._stories: dict[str, Story] = {s.id: s for s in self.store.load_all()}
        self._locks: defaultdict[str, threading.Lock] = defaultdict(threading.Lock)
        self._registry_lock = threading.Lock()

    # -- locking -----------------------------------------------------------

    @contextmanager
    def _story_lock(self, story_id: str):
        with self._registry_lock:
            lock = self._locks[story_id]
        with lock:
            yield

    def _get_story(self, story_id: str) -> Story:
        story = self._stories.get(story_id)
        if story is None:
            raise UnknownStory(f"no story {story_id}")
        return story

    def _find_scene(self, scene_id: str) -> tuple[Story, Scene]:
        for story in self._stories.values():
            for scene in story.scenes:
                if scene.id == scene_id:
                    return story, scene
        raise UnknownScene(f"no scene {scene_id}")

    @contextmanager
    def _scene_context(self, scene_id: str):
        story, _ = self._find_scene(scene_id)
        with self._story_lock(story.id):
            # Re-resolve under the lock in case the scene moved or vanished.
            story, scene = self._find_scene(scene_id)
            yield story, scene

    # -- story CRUD -----------------------------------------------------------

    def create_story(self, title: str) -> Story:
        story = create_story(title)
        with self._story_lock(story.id):
            self._stories[story.id] = story
            self.store.save_story(story)
        return story

    def import_story(self, data: dict) -> Story:
        """Validate a full story payload and register it as-is (same id)."""
        story = Story.model_validate(data)
        with self._story_lock(story.id):
            self._stories[story.id] = story
            self.store.save_story(story)
        return story

    def list_stories(self) -> list[Story]:
        return sorted(self._stories.values(), key=lambda s: s.created_at)

    def get_story(self, story_id: str) -> Story:
        with self._story_lock(story_id):
            return self._get_story(story_id)

    def add_scene(self, story_id: str, kind: SceneKind, position: int, text: str = "") -> Scene:
        with self._story_lock(story_id):
            story = self._get_story(story_id)
            scene = story.add_scene(kind, position, text)
            self.store.save_story(story)
            return scene

    def update_scene(
        self, scene_id: str, text: str | None = None, metaphor: MetaphorSpec | None = None
    ) -> Scene:
        with self._scene_context(scene_id) as (story, scene):
            if text is not None:
                story.set_scene_text(scene_id, text)
            if metaphor is not None:
                story.set_metaphor_spec(scene_id, metaphor)
            self.store.save_story(story)
            return scene

    def delete_scene(self, scene_id: str) -> None:
        with self._scene_context(scene_id) as (story, _):
            story.delete_scene(scene_id)
            self.store.save_story(story)

    # -- generative workflow ------------------------------------------------------

    def request_suggestions(
        self, scene_id: str, meaning_type: MeaningType, n: int = 5
    ) -> list[MetaphorSuggestion]:
        """Build the suggestion prompt and parse the provider's list."""
        with self._scene_context(scene_id) as (_, scene):
            if scene.metaphor is None or not scene.metaphor.g1_complete():
                raise MissingSpec(
                    "scene needs an affective element and at least one adjective"
                )
            prompt = self.engine.build_suggestion_prompt(scene.metaphor, meaning_type, n)
        # Provider call happens outside the story lock; nothing mutates.
        text = self.chat.complete(
            ChatRequest(
                prompt=prompt,
                temperature=self.settings.suggestion_temperature,
                max_tokens=self.settings.suggestion_max_tokens,
            )
        )
        return parse_suggestions(text)[:n]

    def request_generation(self, scene_id: str) -> GenerationRecord:
        """Generate an image for the scene's metaphor and append the record.

        Nothing is recorded unless the provider returned a usable image, so
        a timeout never leaves a half-applied history entry.
        """
        with self._scene_context(scene_id) as (story, scene):
            if scene.metaphor is None:
                raise MissingSpec("scene has no metaphor spec")
            prompt = self.engine.build_image_prompt(scene.metaphor)
            request = ImageRequest(
                prompt=prompt,
                width=self.settings.image_width,
                height=self.settings.image_height,
                steps=self.settings.image_steps,
                seed=self.settings.image_seed,
            )
            result = self.image.generate(request)
            self.store.put_image(story.id, result.data)
            record = story.record_generation(
                scene_id,
                prompt=prompt.full,
                image_ref=result.image_ref,
                width=request.width,
                height=request.height,
                steps=request.steps,
            )
            self.store.save_story(story)
            return record

    def finalize_acceptance(
        self, scene_id: str, generation_id: str
    ) -> tuple[Scene, Exception | None]:
        """Accept a generation: extract its palette, put it on display, then
        ask the chat provider for a metaphorical depiction.

        Re-accepting an already accepted record is a no-op. A depiction
        failure is non-fatal: the image and palette stay committed and the
        error is reported alongside the scene.
        """
        with self._scene_context(scene_id) as (story, scene):
            record = scene.generation(generation_id)
            if record.accepted:
                return scene, None
            image_bytes = self.store.get_image(story.id, record.image_ref)
            extracted = palette_mod.extract_palette(image_bytes)
            story.accept_generation(scene_id, generation_id, extracted)
            self.store.save_story(story)

            depiction_error = None
            try:
                prompt = self.engine.build_depiction_prompt(scene.metaphor)
                text = self.chat.complete(
                    ChatRequest(
                        prompt=prompt,
                        temperature=self.settings.depiction_temperature,
                        max_tokens=self.settings.depiction_max_tokens,
                    )
                )
                story.append_depiction(scene_id, text)
                self.store.save_story(story)
            except DreamloomError as exc:  # depiction is best-effort by contract
                depiction_error = exc
            return scene, depiction_error

    def switch_display(self, scene_id: str, generation_id: str) -> Scene:
        with self._scene_context(scene_id) as (story, _):
            scene = story.switch_display(scene_id, generation_id)
            self.store.save_story(story)
            return scene

    # -- palette & filters ------------------------------------------------------------

    def get_palette(self, scene_id: str):
        with self._scene_context(scene_id) as (_, scene):
            return scene.palette

    def set_filter(self, scene_id: str, origin: FilterOrigin, hex_color: str | None) -> Scene:
        """Set or reset the scene's filter.

        palette_default resets to the derived default; palette_pick must
        name one of the current palette's swatches; custom_hex takes any
        parseable hex color.
        """
        with self._scene_context(scene_id) as (story, scene):
            origin = FilterOrigin(origin)
            if origin == FilterOrigin.PALETTE_DEFAULT:
                story.set_user_filter(scene_id, None)
            else:
                if hex_color is None:
                    raise InvalidFilterPick("a color is required for this filter origin")
                color = parse_hex(hex_color)
                if origin == FilterOrigin.PALETTE_PICK:
                    pal = scene.palette
                    swatches = {e.color.hex for e in pal.entries} if pal else set()
                    if color.hex not in swatches:
                        raise InvalidFilterPick(
                            f"{color.hex} is not one of the palette swatches"
                        )
                story.set_user_filter(scene_id, ColorFilter(color=color, origin=origin))
            self.store.save_story(story)
            return scene

    # -- layout --------------------------------------------------------------------------

    def update_layout(
        self,
        story_id: str,
        axis_y: float | None = None,
        items: dict | None = None,
        reset: bool = False,
    ) -> Story:
        with self._story_lock(story_id):
            story = self._get_story(story_id)
            if reset:
                story.reset_layout()
            if axis_y is not None:
                story.set_axis(axis_y)
            for scene_id, change in (items or {}).items():
                anchor_x = change.get("anchor_x")
                offset = change.get("image_offset")
                if anchor_x is not None or offset is not None:
                    story.move_layout_item(
                        scene_id,
                        anchor_x,
                        tuple(offset) if offset is not None else None,
                    )
                if change.get("scale") is not None:
                    story.resize_layout_item(scene_id, change["scale"])
            self.store.save_story(story)
            return story

    # -- playback & assets ------------------------------------------------------------------

    def playback(self, story_id: str) -> PlaybackManifest:
        with self._story_lock(story_id):
            return export_playback(self._get_story(story_id))

    def image_bytes(self, ref: str) -> bytes:
        return self.store.find_image(ref)

    def health(self) -> list[ProviderStatus]:
        return health_check(self.chat, self.image)

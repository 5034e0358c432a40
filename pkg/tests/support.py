"""Shared test helpers: synthetic images, studio factories, and the
randomized operation machine used by the invariant suites."""

from __future__ import annotations

import hashlib
import io
import random
from pathlib import Path

import numpy as np
from PIL import Image

from dreamloom.config import AppConfig
from dreamloom.errors import DreamloomError
from dreamloom.palette import Color, Palette, PaletteEntry
from dreamloom.providers import ProviderMode, ProviderSettings
from dreamloom.service import Studio
from dreamloom.story import (
    MeaningType,
    MetaphorSpec,
    SceneKind,
    Story,
    VisualStructure,
    create_story,
)

# --- images -------------------------------------------------------------------

def solid_png(rgb: tuple[int, int, int], size: tuple[int, int] = (64, 64)) -> bytes:
    arr = np.full((size[1], size[0], 3), rgb, dtype=np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


def stripe_png(
    stripes: list[tuple[tuple[int, int, int], float]],
    size: tuple[int, int] = (512, 512),
) -> bytes:
    """Horizontal stripes with exact row fractions (fractions must sum to 1
    and produce integral row counts)."""
    w, h = size
    arr = np.zeros((h, w, 3), dtype=np.uint8)
    row = 0
    for rgb, fraction in stripes:
        rows = round(h * fraction)
        arr[row : row + rows, :, :] = rgb
        row += rows
    assert row == h, "stripe fractions must fill the image exactly"
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


def photo_png(seed: int = 42, size: tuple[int, int] = (256, 256)) -> bytes:
    """A photograph-like test image: a layered landscape (sky gradient, sea,
    sand) with smooth in-region variation and sensor-style noise, so the
    color mass concentrates the way real photos do."""
    w, h = size
    rng = np.random.default_rng(seed)
    arr = np.zeros((h, w, 3), dtype=np.float64)
    sky_h = int(h * 0.45)
    sea_h = int(h * 0.30)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    t = (yy[:sky_h] / max(sky_h - 1, 1))[..., None]
    sky_top = np.array([135, 190, 235]) + rng.normal(0, 6, 3)
    sky_low = np.array([250, 205, 150]) + rng.normal(0, 6, 3)
    arr[:sky_h] = sky_top * (1 - t) + sky_low * t
    ripple = 12.0 * np.sin(xx[sky_h : sky_h + sea_h] / (9.0 + (seed % 5)))
    arr[sky_h : sky_h + sea_h] = np.array([30, 85, 145]) + ripple[..., None]
    arr[sky_h + sea_h :] = np.array([212, 182, 140]) + rng.normal(
        0, 9, (h - sky_h - sea_h, w, 3)
    )
    arr += rng.normal(0.0, 5.0, size=arr.shape)
    buf = io.BytesIO()
    Image.fromarray(np.clip(arr, 0, 255).astype(np.uint8)).save(buf, format="PNG")
    return buf.getvalue()


# --- studio -----------------------------------------------------------------------

def make_settings(**overrides) -> ProviderSettings:
    return ProviderSettings(mode=ProviderMode.MOCK, **overrides)


def make_studio(tmp_path: Path, chat=None, image=None, **settings_overrides) -> Studio:
    config = AppConfig(
        data_dir=tmp_path / "data", provider=make_settings(**settings_overrides)
    )
    return Studio(config, chat=chat, image=image)


def scenario_spec() -> MetaphorSpec:
    return MetaphorSpec(
        affective_element="old crush holding my hands",
        adjectives=["exciting"],
        metaphor_concept="Electric Sparks",
        meaning_type=MeaningType.CONNECTION,
        visual_structure=VisualStructure.FUSION,
        extra_prompt="sunset on the beach",
    )


# --- randomized operation machine ---------------------------------------------------

IMAGE_POOL = [b"img-bytes-a", b"img-bytes-b", b"img-bytes-c", b"img-bytes-d"]
IMAGE_REFS = [hashlib.sha256(b).hexdigest() for b in IMAGE_POOL]

_WORDS = ["tide", "ember", "lantern", "mirror", "kite", "thread", "harbor", "anthem"]


def random_palette(rng: random.Random) -> Palette:
    n = rng.randint(1, 4)
    cuts = sorted(rng.random() for _ in range(n - 1))
    weights = []
    prev = 0.0
    for c in [*cuts, 1.0]:
        weights.append(c - prev)
        prev = c
    entries = [
        PaletteEntry(
            color=Color(r=rng.randrange(256), g=rng.randrange(256), b=rng.randrange(256)),
            weight=w,
        )
        for w in weights
    ]
    entries.sort(key=lambda e: (-e.weight, e.color.hex))
    return Palette(entries=entries, source_image=rng.choice(IMAGE_REFS))


def random_spec(rng: random.Random) -> MetaphorSpec:
    return MetaphorSpec(
        affective_element=" ".join(rng.sample(_WORDS, 2)),
        adjectives=[rng.choice(_WORDS) for _ in range(rng.randint(1, 3))],
        metaphor_concept=" ".join(rng.sample(_WORDS, 2)).title(),
        meaning_type=rng.choice(list(MeaningType)),
        visual_structure=rng.choice(list(VisualStructure)),
        extra_prompt=rng.choice([None, "near the shore"]),
    )


class OpMachine:
    """Applies random story operations, asserting invariants and the
    append-only history property after every step."""

    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.story = create_story(f"random story {seed}")
        self.rejected = 0

    def _scene(self, metaphorical=None):
        scenes = self.story.scenes
        if metaphorical is not None:
            scenes = [s for s in scenes if s.is_metaphorical == metaphorical]
        return self.rng.choice(scenes) if scenes else None

    def snapshot(self) -> dict[str, tuple[str, ...]]:
        return {
            s.id: tuple(g.id for g in s.generations) for s in self.story.scenes
        }

    def step(self) -> None:
        before = self.snapshot()
        op = self.rng.choice(
            [
                self._op_add,
                self._op_add,
                self._op_delete,
                self._op_spec,
                self._op_spec,
                self._op_record,
                self._op_record,
                self._op_accept,
                self._op_accept,
                self._op_switch,
                self._op_depict,
                self._op_move,
                self._op_resize,
                self._op_text,
            ]
        )
        try:
            op()
        except DreamloomError:
            self.rejected += 1
        after = self.snapshot()
        # Histories never shrink for scenes that survived the operation.
        for scene_id, old in before.items():
            if scene_id in after:
                assert after[scene_id][: len(old)] == old, "history shrank or reordered"
        problems = self.story.check_invariants()
        assert not problems, problems

    def run(self, steps: int = 25) -> Story:
        for _ in range(steps):
            self.step()
        return self.story

    # -- individual ops; each may legitimately raise a domain error ------------

    def _op_add(self):
        kind = self.rng.choice([SceneKind.LITERAL, SceneKind.METAPHORICAL])
        if self.rng.random() < 0.9:
            position = self.rng.randint(0, len(self.story.scenes))
        else:
            position = self.rng.choice([-1, len(self.story.scenes) + 1])
        self.story.add_scene(kind, position)

    def _op_delete(self):
        scene = self._scene()
        if scene is not None and self.rng.random() < 0.4:
            self.story.delete_scene(scene.id)

    def _op_spec(self):
        # Mostly valid targets; occasionally aim at a literal scene or send
        # an empty spec to exercise the rejection paths.
        scene = self._scene(metaphorical=True if self.rng.random() < 0.85 else None)
        if scene is None:
            return
        spec = random_spec(self.rng)
        if self.rng.random() < 0.1:
            spec.adjectives = []
        self.story.set_metaphor_spec(scene.id, spec)

    def _op_record(self):
        ready = [
            s
            for s in self.story.scenes
            if s.is_metaphorical and s.metaphor is not None and s.metaphor.g1_complete()
        ]
        if ready and self.rng.random() < 0.9:
            scene = self.rng.choice(ready)
        else:
            scene = self._scene()
        if scene is None:
            return
        self.story.record_generation(
            scene.id,
            prompt=f"prompt {self.rng.randrange(1_000_000)}",
            image_ref=self.rng.choice(IMAGE_REFS),
        )

    def _op_accept(self):
        scene = self._scene(metaphorical=True)
        if scene is None or not scene.generations:
            return
        record = self.rng.choice(scene.generations)
        self.story.accept_generation(scene.id, record.id, random_palette(self.rng))

    def _op_switch(self):
        scene = self._scene(metaphorical=True)
        if scene is None or not scene.generations:
            return
        record = self.rng.choice(scene.generations)
        self.story.switch_display(scene.id, record.id)

    def _op_depict(self):
        scene = self._scene(metaphorical=True if self.rng.random() < 0.85 else None)
        if scene is None:
            return
        self.story.append_depiction(scene.id, f"depiction {self.rng.randrange(1000)}")

    def _op_move(self):
        scene = self._scene(metaphorical=True)
        if scene is None:
            return
        self.story.move_layout_item(
            scene.id,
            new_anchor_x=self.rng.random(),
            new_offset=(self.rng.uniform(-0.5, 0.5), self.rng.uniform(-0.5, 0.5)),
        )

    def _op_resize(self):
        scene = self._scene(metaphorical=True)
        if scene is None:
            return
        self.story.resize_layout_item(scene.id, self.rng.uniform(0.05, 6.0))

    def _op_text(self):
        scene = self._scene()
        if scene is None:
            return
        self.story.set_scene_text(scene.id, f"text {self.rng.randrange(1000)}")


def build_random_story(seed: int, steps: int = 20) -> Story:
    """A story with realistic mixed content for round-trip tests."""
    return OpMachine(seed).run(steps)


# --- fault injection --------------------------------------------------------------

class FailingChat:
    """Raises for the first `failures` calls, then delegates to the inner
    provider."""

    def __init__(self, inner, failures=1, exc_type=None):
        from dreamloom.errors import ProviderTimeout

        self.inner = inner
        self.remaining = failures
        self.exc_type = exc_type or ProviderTimeout
        self.calls = 0

    def complete(self, req):
        self.calls += 1
        if self.remaining > 0:
            self.remaining -= 1
            raise self.exc_type("injected chat failure")
        return self.inner.complete(req)

    def health(self):
        return self.inner.health()


class FailingImage:
    def __init__(self, inner, failures=1, exc_type=None):
        from dreamloom.errors import ProviderTimeout

        self.inner = inner
        self.remaining = failures
        self.exc_type = exc_type or ProviderTimeout
        self.calls = 0

    def generate(self, req):
        self.calls += 1
        if self.remaining > 0:
            self.remaining -= 1
            raise self.exc_type("injected image failure")
        return self.inner.generate(req)

    def health(self):
        return self.inner.health()

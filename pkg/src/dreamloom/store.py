"""On-disk story bundles and playback manifests.

A bundle is a self-contained directory: a human-readable ``story.json``
(versioned schema, see docs/bundle-format.md) next to an ``images/``
directory of content-addressed files named by the SHA-256 of their bytes.
Image bytes are stored exactly as received from providers so the addressing
stays stable, and the story file is replaced atomically (temp + rename).
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

from pydantic import BaseModel, Field, ValidationError

from .errors import CorruptBundle, IoFailure, UnknownStory, UnsupportedSchema
from .story import SCHEMA_VERSION, SceneKind, Story

STORY_FILE = "story.json"
IMAGES_DIR = "images"


class PlaybackFrame(BaseModel):
    scene_id: str
    kind: SceneKind
    text: str
    depiction: str | None = None
    image_ref: str | None = None
    filter_color: str | None = None
    missing_image: bool = False


class PlaybackManifest(BaseModel):
    story_id: str
    title: str
    frames: list[PlaybackFrame] = Field(default_factory=list)


class BundleReport(BaseModel):
    path: str
    violations: list[str] = Field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.violations


def _image_refs(story: Story) -> set[str]:
    return {rec.image_ref for scene in story.scenes for rec in scene.generations}


def export_playback(story: Story) -> PlaybackManifest:
    """One frame per scene, in position order, ready to play back scene by
    scene. Metaphorical scenes without a displayed image are flagged rather
    than dropped."""
    frames = []
    for scene in story.scenes:
        frame = PlaybackFrame(scene_id=scene.id, kind=scene.kind, text=scene.text)
        if scene.is_metaphorical:
            frame.depiction = scene.depiction
            if scene.displayed_generation is not None:
                frame.image_ref = scene.generation(scene.displayed_generation).image_ref
            frame.filter_color = scene.filter.color.hex if scene.filter else None
            frame.missing_image = frame.image_ref is None
        frames.append(frame)
    return PlaybackManifest(story_id=story.id, title=story.title, frames=frames)


class BundleStore:
    """Stores each story as one bundle directory under a data root.

    Concurrency contract: saves for one story id must be serialized by the
    caller; different stories may be saved concurrently.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def bundle_path(self, story_id: str) -> Path:
        return self.root / story_id

    def images_path(self, story_id: str) -> Path:
        return self.bundle_path(story_id) / IMAGES_DIR

    # -- images ---------------------------------------------------------------

    def put_image(self, story_id: str, data: bytes) -> str:
        """Write image bytes content-addressed; re-puts are no-ops."""
        ref = hashlib.sha256(data).hexdigest()
        target = self.images_path(story_id) / ref
        if not target.exists():
            target.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".tmp-")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(data)
                os.replace(tmp, target)
            except OSError as exc:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise IoFailure(f"writing image {ref}: {exc}") from exc
        return ref

    def get_image(self, story_id: str, ref: str) -> bytes:
        path = self.images_path(story_id) / ref
        if not path.exists():
            raise IoFailure(f"image {ref} missing from bundle {story_id}", ref=ref)
        return path.read_bytes()

    def find_image(self, ref: str) -> bytes:
        """Resolve an image ref across all bundles (refs are content hashes,
        so identical refs are identical bytes)."""
        for bundle in sorted(self.root.iterdir()):
            candidate = bundle / IMAGES_DIR / ref
            if candidate.exists():
                return candidate.read_bytes()
        raise IoFailure(f"image {ref} not found in any bundle", ref=ref)

    # -- stories -----------------------------------------------------------------

    def save_story(self, story: Story) -> Path:
        """Validate, check referential closure, then atomically replace
        story.json. A missing image aborts the save and names the ref."""
        problems = story.check_invariants()
        if problems:
            raise CorruptBundle("; ".join(problems))
        images = self.images_path(story.id)
        for ref in sorted(_image_refs(story)):
            if not (images / ref).exists():
                raise IoFailure(f"story references missing image {ref}", ref=ref)
        bundle = self.bundle_path(story.id)
        bundle.mkdir(parents=True, exist_ok=True)
        target = bundle / STORY_FILE
        payload = story.model_dump_json(indent=2)
        fd, tmp = tempfile.mkstemp(dir=bundle, prefix=".tmp-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp, target)
        except OSError as exc:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise IoFailure(f"writing story file: {exc}") from exc
        return bundle

    def load_story(self, story_id_or_path: str | Path) -> Story:
        """Load and validate a bundle; schema and story invariants are
        enforced before anything is returned."""
        path = Path(story_id_or_path)
        if not path.exists():
            path = self.bundle_path(str(story_id_or_path))
        story_file = path / STORY_FILE if path.is_dir() else path
        if not story_file.exists():
            raise UnknownStory(f"no bundle at {path}")
        try:
            raw = json.loads(story_file.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise CorruptBundle(f"unreadable story file: {exc}") from exc
        if not isinstance(raw, dict):
            raise CorruptBundle("story file is not an object")
        version = raw.get("schema_version")
        if isinstance(version, int) and version > SCHEMA_VERSION:
            raise UnsupportedSchema(
                f"bundle schema {version} is newer than supported {SCHEMA_VERSION}"
            )
        try:
            story = Story.model_validate(raw)
        except ValidationError as exc:
            raise CorruptBundle(f"story file fails validation: {exc}") from exc
        problems = story.check_invariants()
        if problems:
            raise CorruptBundle("; ".join(problems))
        return story

    def list_story_ids(self) -> list[str]:
        if not self.root.exists():
            return []
        return sorted(
            p.name for p in self.root.iterdir() if (p / STORY_FILE).exists()
        )

    def load_all(self) -> list[Story]:
        return [self.load_story(sid) for sid in self.list_story_ids()]


def validate_bundle(path: str | Path) -> BundleReport:
    """Run every story and bundle invariant; violations become report rows
    rather than exceptions."""
    path = Path(path)
    report = BundleReport(path=str(path))
    story_file = path / STORY_FILE
    if not story_file.exists():
        report.violations.append(f"missing {STORY_FILE}")
        return report
    try:
        raw = json.loads(story_file.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        report.violations.append(f"story file unparseable: {exc}")
        return report
    version = raw.get("schema_version") if isinstance(raw, dict) else None
    if isinstance(version, int) and version > SCHEMA_VERSION:
        report.violations.append(
            f"schema {version} newer than supported {SCHEMA_VERSION}"
        )
        return report
    try:
        story = Story.model_validate(raw)
    except ValidationError as exc:
        report.violations.append(f"story fails validation: {exc}")
        return report
    report.violations.extend(story.check_invariants())
    images = path / IMAGES_DIR
    for ref in sorted(_image_refs(story)):
        if not (images / ref).exists():
            report.violations.append(f"dangling image ref {ref}")
    return report

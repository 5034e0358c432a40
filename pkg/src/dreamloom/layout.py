"""Storyline visualization state.

Metaphorical scenes appear as anchor points on a horizontal axis; the
displayed image dangles from the anchor and prior generations stack above.
All coordinates are normalized to [0, 1] so the backend stays
resolution-independent; the UI maps them to pixels.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Sequence

from pydantic import BaseModel, Field

from .errors import OrderViolation, UnknownScene

if TYPE_CHECKING:  # pragma: no cover
    from .story import Scene, Story

MIN_SCALE = 0.25
MAX_SCALE = 4.0
DEFAULT_IMAGE_OFFSET = (0.0, 0.15)  # below the axis


class LayoutItem(BaseModel):
    anchor_x: float = Field(ge=0.0, le=1.0)
    image_offset: tuple[float, float] = DEFAULT_IMAGE_OFFSET
    scale: float = Field(default=1.0, ge=MIN_SCALE, le=MAX_SCALE)
    history_slots: list[str] = Field(default_factory=list)


class LayoutState(BaseModel):
    items: dict[str, LayoutItem] = Field(default_factory=dict)
    axis_y: float = Field(default=0.5, ge=0.0, le=1.0)


def default_layout(story: "Story") -> LayoutState:
    """Evenly spaced anchors: m metaphorical scenes land at i/(m+1), i=1..m."""
    scenes = [s for s in story.scenes if s.is_metaphorical]
    m = len(scenes)
    state = LayoutState(
        items={s.id: LayoutItem(anchor_x=(i + 1) / (m + 1)) for i, s in enumerate(scenes)}
    )
    for scene in scenes:
        sync_history_slots(state, scene)
    return state


def insert_default_item(state: LayoutState, ordered_ids: Sequence[str], scene_id: str) -> LayoutState:
    """Give a newly added metaphorical scene an anchor at the midpoint of its
    chronological neighbors, preserving every existing anchor."""
    idx = list(ordered_ids).index(scene_id)
    lo = state.items[ordered_ids[idx - 1]].anchor_x if idx > 0 else 0.0
    hi = state.items[ordered_ids[idx + 1]].anchor_x if idx + 1 < len(ordered_ids) else 1.0
    state.items[scene_id] = LayoutItem(anchor_x=(lo + hi) / 2.0)
    return state


def anchor_order_ok(state: LayoutState, ordered_ids: Sequence[str]) -> bool:
    xs = [state.items[sid].anchor_x for sid in ordered_ids if sid in state.items]
    return all(a < b for a, b in zip(xs, xs[1:]))


def move_item(
    state: LayoutState,
    ordered_ids: Sequence[str],
    scene_id: str,
    new_anchor_x: float | None = None,
    new_offset: tuple[float, float] | None = None,
) -> LayoutState:
    """Relocate an anchor and/or its dangling image.

    Anchors must stay strictly increasing in scene order (the axis is
    temporal); offsets are unconstrained, overlaps included.
    """
    item = state.items.get(scene_id)
    if item is None:
        raise UnknownScene(f"no layout item for scene {scene_id}")
    if new_anchor_x is not None:
        x = min(max(float(new_anchor_x), 0.0), 1.0)
        old = item.anchor_x
        item.anchor_x = x
        if not anchor_order_ok(state, ordered_ids):
            item.anchor_x = old
            raise OrderViolation(f"anchor {x} breaks chronological order")
    if new_offset is not None:
        item.image_offset = (float(new_offset[0]), float(new_offset[1]))
    return state


def resize_item(state: LayoutState, scene_id: str, scale: float) -> LayoutState:
    item = state.items.get(scene_id)
    if item is None:
        raise UnknownScene(f"no layout item for scene {scene_id}")
    item.scale = min(max(float(scale), MIN_SCALE), MAX_SCALE)
    return state


def sync_history_slots(state: LayoutState, scene: "Scene") -> LayoutState:
    """history_slots = every generation except the displayed one, creation order."""
    item = state.items.get(scene.id)
    if item is not None:
        item.history_slots = [
            g.id for g in scene.generations if g.id != scene.displayed_generation
        ]
    return state

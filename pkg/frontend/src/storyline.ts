/**
 * Storyline visualization math: anchors on the horizontal axis, dangling
 * current images below, stacked prior generations above. All model
 * coordinates are normalized [0,1]; this module maps them to pixels and
 * back, and hit-tests pointer positions. Canvas painting lives in main.ts;
 * everything here is pure and testable headless.
 */

import type { LayoutItem, LayoutState, Scene, Story } from "./types.js";

export interface CanvasMetrics {
  width: number;
  height: number;
}

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** Visible history thumbnails are capped; older ones scroll. */
export const HISTORY_VISIBLE_CAP = 6;

export const BASE_IMAGE_SIZE = 0.16; // fraction of canvas width at scale 1
export const HISTORY_THUMB_SIZE = 0.07;
export const ANCHOR_RADIUS_PX = 7;

export function anchorToPixel(
  item: LayoutItem,
  layout: LayoutState,
  metrics: CanvasMetrics,
): { x: number; y: number } {
  return { x: item.anchor_x * metrics.width, y: layout.axis_y * metrics.height };
}

export function pixelToAnchorX(px: number, metrics: CanvasMetrics): number {
  return Math.min(1, Math.max(0, px / metrics.width));
}

/** The dangling (displayed) image rectangle for a scene's layout item. */
export function imageRect(
  item: LayoutItem,
  layout: LayoutState,
  metrics: CanvasMetrics,
): Rect {
  const anchor = anchorToPixel(item, layout, metrics);
  const size = BASE_IMAGE_SIZE * metrics.width * item.scale;
  const cx = anchor.x + item.image_offset[0] * metrics.width;
  const cy = anchor.y + item.image_offset[1] * metrics.height + size / 2;
  return { x: cx - size / 2, y: cy - size / 2, w: size, h: size };
}

/**
 * Rectangles for the preserved generations stacked above the axis, newest
 * nearest the axis, at most HISTORY_VISIBLE_CAP visible.
 */
export function historyRects(
  item: LayoutItem,
  layout: LayoutState,
  metrics: CanvasMetrics,
): Map<string, Rect> {
  const anchor = anchorToPixel(item, layout, metrics);
  const size = HISTORY_THUMB_SIZE * metrics.width;
  const gap = size * 0.25;
  const rects = new Map<string, Rect>();
  const visible = item.history_slots.slice(-HISTORY_VISIBLE_CAP);
  visible.forEach((generationId, index) => {
    const row = visible.length - index; // newest closest to the axis
    rects.set(generationId, {
      x: anchor.x - size / 2,
      y: anchor.y - row * (size + gap) - size * 0.4,
      w: size,
      h: size,
    });
  });
  return rects;
}

export function pointInRect(px: number, py: number, rect: Rect): boolean {
  return px >= rect.x && px <= rect.x + rect.w && py >= rect.y && py <= rect.y + rect.h;
}

export type Hit =
  | { kind: "anchor"; sceneId: string }
  | { kind: "image"; sceneId: string }
  | { kind: "history"; sceneId: string; generationId: string };

/**
 * Hit-test a pointer position against anchors, dangling images and
 * history thumbnails. History wins over images, images over anchors, so
 * small targets stay clickable.
 */
export function hitTest(
  story: Story,
  metrics: CanvasMetrics,
  px: number,
  py: number,
): Hit | null {
  const layout = story.layout;
  for (const scene of story.scenes) {
    const item = layout.items[scene.id];
    if (!item) continue;
    for (const [generationId, rect] of historyRects(item, layout, metrics)) {
      if (pointInRect(px, py, rect)) {
        return { kind: "history", sceneId: scene.id, generationId };
      }
    }
  }
  for (const scene of story.scenes) {
    const item = layout.items[scene.id];
    if (!item) continue;
    if (pointInRect(px, py, imageRect(item, layout, metrics))) {
      return { kind: "image", sceneId: scene.id };
    }
  }
  for (const scene of story.scenes) {
    const item = layout.items[scene.id];
    if (!item) continue;
    const anchor = anchorToPixel(item, layout, metrics);
    const dx = px - anchor.x;
    const dy = py - anchor.y;
    if (dx * dx + dy * dy <= ANCHOR_RADIUS_PX * ANCHOR_RADIUS_PX * 4) {
      return { kind: "anchor", sceneId: scene.id };
    }
  }
  return null;
}

/** Scenes plotted on the axis, in chronological order. */
export function plottedScenes(story: Story): Scene[] {
  return story.scenes.filter((scene) => story.layout.items[scene.id] !== undefined);
}

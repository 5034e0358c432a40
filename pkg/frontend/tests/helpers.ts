/** Shared fabricators and flow helpers for the UI tests. */

import { inject } from "vitest";
import { ApiClient } from "../src/api.js";
import { StudioController } from "../src/state.js";
import type { LayoutItem, Scene, Story } from "../src/types.js";

export function client(): ApiClient {
  return new ApiClient(inject("apiBase"));
}

export function controller(): StudioController {
  return new StudioController(client());
}

let counter = 0;

export function uniqueTitle(prefix = "ui test"): string {
  counter += 1;
  return `${prefix} ${Date.now()}-${counter}`;
}

export const SCENARIO_SPEC = {
  affective_element: "old crush holding my hands",
  adjectives: ["exciting"],
  metaphor_concept: "Electric Sparks",
  meaning_type: "connection" as const,
  visual_structure: "fusion" as const,
  extra_prompt: "sunset on the beach",
};

/** A literal or metaphorical scene for pure-function tests. */
export function fakeScene(overrides: Partial<Scene> = {}): Scene {
  return {
    id: "scene-1",
    kind: "literal",
    position: 0,
    text: "a quiet beginning",
    metaphor: null,
    generations: [],
    displayed_generation: null,
    depictions: [],
    user_filter: null,
    palette: null,
    filter: null,
    depiction: null,
    ...overrides,
  };
}

export function fakeItem(overrides: Partial<LayoutItem> = {}): LayoutItem {
  return { anchor_x: 0.5, image_offset: [0, 0.15], scale: 1, history_slots: [], ...overrides };
}

export function fakeStory(scenes: Scene[], items: Record<string, LayoutItem>): Story {
  return {
    id: "story-1",
    title: "fake",
    scenes,
    layout: { items, axis_y: 0.5 },
    created_at: "2026-01-01T00:00:00+00:00",
    updated_at: "2026-01-01T00:00:00+00:00",
    schema_version: 1,
  };
}

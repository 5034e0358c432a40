/**
 * Studio controller: the single state owner behind the UI.
 *
 * Every piece of story state comes from API responses; the controller adds
 * only view state (focus, editor visibility, pan/zoom, pending markers).
 * Re-fetching the story must reproduce the identical rendering, so no
 * story data is ever invented client-side. Layout drags render
 * optimistically and roll back to the server's state when rejected.
 */

import { ApiClient, ApiRequestError } from "./api.js";
import type {
  LayoutState,
  MeaningType,
  MetaphorSpec,
  PlaybackManifest,
  Scene,
  SceneKind,
  Story,
  Suggestion,
} from "./types.js";

export type PendingKind = "suggestions" | "generation" | "acceptance";

export interface ViewState {
  focusedSceneId: string | null;
  editorOpen: boolean;
  pan: { x: number; y: number };
  zoom: number;
  /** In-flight request markers per scene; cleared on response or failure. */
  pending: Map<string, PendingKind>;
}

export type Listener = () => void;

export class StudioController {
  story: Story | null = null;
  view: ViewState = {
    focusedSceneId: null,
    editorOpen: false,
    pan: { x: 0, y: 0 },
    zoom: 1,
    pending: new Map(),
  };
  /** Last error surfaced to the toast area. */
  lastError: ApiRequestError | null = null;

  private listeners: Listener[] = [];

  constructor(readonly api: ApiClient) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  private setStory(story: Story): void {
    this.story = story;
    // Exactly one focused scene whenever the story is non-empty.
    const ids = story.scenes.map((s) => s.id);
    if (ids.length === 0) {
      this.view.focusedSceneId = null;
    } else if (!this.view.focusedSceneId || !ids.includes(this.view.focusedSceneId)) {
      this.view.focusedSceneId = ids[0];
    }
    this.emit();
  }

  private patchScene(scene: Scene): void {
    if (!this.story) return;
    const index = this.story.scenes.findIndex((s) => s.id === scene.id);
    if (index >= 0) {
      this.story.scenes[index] = scene;
      this.emit();
    }
  }

  scene(sceneId: string): Scene | undefined {
    return this.story?.scenes.find((s) => s.id === sceneId);
  }

  focusedScene(): Scene | undefined {
    return this.view.focusedSceneId ? this.scene(this.view.focusedSceneId) : undefined;
  }

  // -- story lifecycle -----------------------------------------------------

  async createStory(title: string): Promise<Story> {
    const story = await this.api.createStory(title);
    this.setStory(story);
    return story;
  }

  async loadStory(storyId: string): Promise<void> {
    this.setStory(await this.api.getStory(storyId));
  }

  /** Forced refetch; state must converge to exactly the server's view. */
  async refetch(): Promise<void> {
    if (this.story) await this.loadStory(this.story.id);
  }

  async addScene(kind: SceneKind, position: number, text = ""): Promise<Scene> {
    if (!this.story) throw new Error("no story loaded");
    const scene = await this.api.addScene(this.story.id, kind, position, text);
    await this.loadStory(this.story.id);
    this.view.focusedSceneId = scene.id;
    this.emit();
    return scene;
  }

  focusScene(sceneId: string): void {
    if (this.scene(sceneId)) {
      this.view.focusedSceneId = sceneId;
      this.emit();
    }
  }

  openEditor(): void {
    this.view.editorOpen = true;
    this.emit();
  }

  closeEditor(): void {
    this.view.editorOpen = false;
    this.emit();
  }

  // -- metaphor workflow ------------------------------------------------------

  async saveText(sceneId: string, text: string): Promise<void> {
    this.patchScene(await this.api.patchScene(sceneId, { text }));
  }

  async saveSpec(sceneId: string, spec: MetaphorSpec): Promise<void> {
    this.patchScene(await this.api.patchScene(sceneId, { metaphor: spec }));
  }

  async requestSuggestions(
    sceneId: string,
    meaningType: MeaningType,
    n = 5,
  ): Promise<Suggestion[]> {
    this.view.pending.set(sceneId, "suggestions");
    this.emit();
    try {
      return await this.api.requestSuggestions(sceneId, meaningType, n);
    } finally {
      this.view.pending.delete(sceneId);
      this.emit();
    }
  }

  /** One in-flight generation per scene; other scenes stay editable. */
  async generate(sceneId: string): Promise<void> {
    if (this.view.pending.get(sceneId) === "generation") {
      throw new Error("a generation is already running for this scene");
    }
    this.view.pending.set(sceneId, "generation");
    this.emit();
    try {
      await this.api.generate(sceneId);
      await this.refetch();
    } finally {
      this.view.pending.delete(sceneId);
      this.emit();
    }
  }

  /**
   * Accept the displayed candidate: the server extracts the palette,
   * derives the default filter and appends the generated depiction. A
   * non-fatal depiction error is surfaced but leaves the scene updated.
   */
  async accept(sceneId: string, generationId: string): Promise<void> {
    this.view.pending.set(sceneId, "acceptance");
    this.emit();
    try {
      const response = await this.api.accept(sceneId, generationId);
      this.patchScene(response.scene);
      if (response.depiction_error) {
        this.lastError = new ApiRequestError(0, response.depiction_error);
      }
      await this.refetch();
    } finally {
      this.view.pending.delete(sceneId);
      this.emit();
    }
  }

  /** Clicking a preserved generation above the axis swaps it into display. */
  async switchDisplay(sceneId: string, generationId: string): Promise<void> {
    this.patchScene(await this.api.switchDisplay(sceneId, generationId));
    await this.refetch();
  }

  // -- filters -------------------------------------------------------------------

  async pickSwatch(sceneId: string, hex: string): Promise<void> {
    this.patchScene(await this.api.setFilter(sceneId, "palette_pick", hex));
  }

  async enterCustomHex(sceneId: string, hex: string): Promise<void> {
    this.patchScene(await this.api.setFilter(sceneId, "custom_hex", hex));
  }

  async resetFilter(sceneId: string): Promise<void> {
    this.patchScene(await this.api.setFilter(sceneId, "palette_default"));
  }

  /** The color tinting the interface for the focused scene, if any. */
  activeFilterHex(): string | null {
    const scene = this.focusedScene();
    return scene?.filter?.color.hex ?? null;
  }

  // -- layout (optimistic with rollback) ----------------------------------------------

  /**
   * Optimistically move an anchor; on an order violation the local state
   * snaps back to the server's layout and the error is reported.
   */
  async moveAnchor(sceneId: string, anchorX: number): Promise<boolean> {
    if (!this.story) return false;
    const item = this.story.layout.items[sceneId];
    if (!item) return false;
    const original = item.anchor_x;
    item.anchor_x = anchorX; // optimistic render
    this.emit();
    try {
      const layout = await this.api.updateLayout(this.story.id, {
        items: { [sceneId]: { anchor_x: anchorX } },
      });
      this.story.layout = layout;
      this.emit();
      return true;
    } catch (error) {
      item.anchor_x = original; // roll back
      if (error instanceof ApiRequestError) {
        this.lastError = error;
        await this.refetch();
        return false;
      }
      throw error;
    }
  }

  async moveOffset(sceneId: string, offset: [number, number]): Promise<void> {
    if (!this.story) return;
    const layout = await this.api.updateLayout(this.story.id, {
      items: { [sceneId]: { image_offset: offset } },
    });
    this.story.layout = layout;
    this.emit();
  }

  async resize(sceneId: string, scale: number): Promise<void> {
    if (!this.story) return;
    const layout = await this.api.updateLayout(this.story.id, {
      items: { [sceneId]: { scale } },
    });
    this.story.layout = layout;
    this.emit();
  }

  async resetLayout(): Promise<void> {
    if (!this.story) return;
    const layout = await this.api.updateLayout(this.story.id, { reset: true });
    this.story.layout = layout;
    this.emit();
  }

  layout(): LayoutState | null {
    return this.story?.layout ?? null;
  }

  // -- playback -------------------------------------------------------------------------

  async playback(): Promise<PlaybackManifest> {
    if (!this.story) throw new Error("no story loaded");
    return this.api.playback(this.story.id);
  }
}

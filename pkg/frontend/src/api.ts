/**
 * Typed client for the studio's HTTP API. All provider keys stay
 * server-side; the browser only ever talks to this API.
 */

import type {
  AcceptResponse,
  ApiError,
  FilterOrigin,
  GenerationRecord,
  HealthResponse,
  LayoutState,
  MeaningType,
  MetaphorSpec,
  PlaybackManifest,
  Scene,
  SceneKind,
  Story,
  StorySummary,
  Suggestion,
} from "./types.js";

export class ApiRequestError extends Error {
  readonly code: string;
  readonly status: number;
  readonly retryable: boolean;

  constructor(status: number, body: ApiError) {
    super(body.message || body.code);
    this.code = body.code;
    this.status = status;
    this.retryable = body.retryable;
  }
}

export interface LayoutItemChange {
  anchor_x?: number;
  image_offset?: [number, number];
  scale?: number;
}

export interface LayoutUpdate {
  axis_y?: number;
  items?: Record<string, LayoutItemChange>;
  reset?: boolean;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers: body !== undefined ? { "content-type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    if (response.status === 204) {
      return undefined as T;
    }
    if (!response.ok) {
      let payload: ApiError;
      try {
        payload = (await response.json()) as ApiError;
      } catch {
        payload = { code: "http_error", message: response.statusText, retryable: false };
      }
      throw new ApiRequestError(response.status, payload);
    }
    return (await response.json()) as T;
  }

  createStory(title: string): Promise<Story> {
    return this.request("POST", "/stories", { title });
  }

  listStories(): Promise<StorySummary[]> {
    return this.request("GET", "/stories");
  }

  getStory(id: string): Promise<Story> {
    return this.request("GET", `/stories/${id}`);
  }

  importStory(payload: Story): Promise<Story> {
    return this.request("POST", "/stories/import", payload);
  }

  addScene(storyId: string, kind: SceneKind, position: number, text = ""): Promise<Scene> {
    return this.request("POST", `/stories/${storyId}/scenes`, { kind, position, text });
  }

  patchScene(sceneId: string, changes: { text?: string; metaphor?: MetaphorSpec }): Promise<Scene> {
    return this.request("PATCH", `/scenes/${sceneId}`, changes);
  }

  deleteScene(sceneId: string): Promise<void> {
    return this.request("DELETE", `/scenes/${sceneId}`);
  }

  async requestSuggestions(
    sceneId: string,
    meaningType: MeaningType,
    n = 5,
  ): Promise<Suggestion[]> {
    const body = await this.request<{ suggestions: Suggestion[] }>(
      "POST",
      `/scenes/${sceneId}/suggestions`,
      { meaning_type: meaningType, n },
    );
    return body.suggestions;
  }

  generate(sceneId: string): Promise<GenerationRecord> {
    return this.request("POST", `/scenes/${sceneId}/generations`);
  }

  accept(sceneId: string, generationId: string): Promise<AcceptResponse> {
    return this.request("POST", `/scenes/${sceneId}/generations/${generationId}/accept`);
  }

  switchDisplay(sceneId: string, generationId: string): Promise<Scene> {
    return this.request("POST", `/scenes/${sceneId}/display/${generationId}`);
  }

  getPalette(sceneId: string): Promise<{ palette: Scene["palette"] }> {
    return this.request("GET", `/scenes/${sceneId}/palette`);
  }

  setFilter(sceneId: string, origin: FilterOrigin, hex?: string): Promise<Scene> {
    return this.request("PUT", `/scenes/${sceneId}/filter`, { origin, hex });
  }

  updateLayout(storyId: string, update: LayoutUpdate): Promise<LayoutState> {
    return this.request("PUT", `/stories/${storyId}/layout`, update);
  }

  playback(storyId: string): Promise<PlaybackManifest> {
    return this.request("GET", `/stories/${storyId}/playback`);
  }

  imageUrl(ref: string): string {
    return `${this.baseUrl}/images/${ref}`;
  }

  health(): Promise<HealthResponse> {
    return this.request("GET", "/healthz");
  }
}

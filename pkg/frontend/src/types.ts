/**
 * Types mirroring the backend's JSON payloads.
 */

export type SceneKind = "literal" | "metaphorical";
export type MeaningType = "connection" | "similarity" | "opposition";
export type VisualStructure = "juxtaposition" | "fusion" | "replacement";
export type FilterOrigin = "palette_default" | "palette_pick" | "custom_hex";
export type BubbleShape = "spiky" | "rounded";

export interface Color {
  r: number;
  g: number;
  b: number;
  hex: string;
}

export interface PaletteEntry {
  color: Color;
  weight: number;
}

export interface Palette {
  entries: PaletteEntry[];
  source_image: string;
}

export interface ColorFilter {
  color: Color;
  origin: FilterOrigin;
}

export interface MetaphorSpec {
  affective_element: string;
  adjectives: string[];
  metaphor_concept: string;
  meaning_type: MeaningType;
  visual_structure: VisualStructure;
  extra_prompt: string | null;
}

export interface GenerationRecord {
  id: string;
  prompt: string;
  width: number;
  height: number;
  steps: number;
  image_ref: string;
  created_at: string;
  accepted: boolean;
  accepted_at: string | null;
  palette: Palette | null;
}

export interface Depiction {
  text: string;
  created_at: string;
  superseded: boolean;
}

export interface Scene {
  id: string;
  kind: SceneKind;
  position: number;
  text: string;
  metaphor: MetaphorSpec | null;
  generations: GenerationRecord[];
  displayed_generation: string | null;
  depictions: Depiction[];
  user_filter: ColorFilter | null;
  /** Derived server-side: displayed record's palette, else latest accepted. */
  palette: Palette | null;
  /** Derived server-side: user filter if set, else palette default. */
  filter: ColorFilter | null;
  depiction: string | null;
  bubble?: BubbleShape;
}

export interface LayoutItem {
  anchor_x: number;
  image_offset: [number, number];
  scale: number;
  history_slots: string[];
}

export interface LayoutState {
  items: Record<string, LayoutItem>;
  axis_y: number;
}

export interface Story {
  id: string;
  title: string;
  scenes: Scene[];
  layout: LayoutState;
  created_at: string;
  updated_at: string;
  schema_version: number;
}

export interface StorySummary {
  id: string;
  title: string;
  scene_count: number;
  created_at: string;
  updated_at: string;
}

export interface Suggestion {
  concept: string;
  rationale: string | null;
}

export interface PlaybackFrame {
  scene_id: string;
  kind: SceneKind;
  text: string;
  depiction: string | null;
  image_ref: string | null;
  filter_color: string | null;
  missing_image: boolean;
}

export interface PlaybackManifest {
  story_id: string;
  title: string;
  frames: PlaybackFrame[];
}

export interface ApiError {
  code: string;
  message: string;
  retryable: boolean;
}

export interface AcceptResponse {
  scene: Scene;
  depiction_error: ApiError | null;
}

export interface ProviderStatus {
  name: string;
  mode: string;
  state: string;
  detail: string;
}

export interface HealthResponse {
  status: string;
  providers: ProviderStatus[];
}

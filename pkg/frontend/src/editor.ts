/**
 * Metaphor editor: a staged form walking the author from feeling to image.
 *
 * Stage order: what is affective -> adjectives -> meaning type ->
 * suggestions -> metaphor concept -> visual structure -> extra prompt ->
 * generate. Suggestions unlock once the feeling is put into words, and
 * generation stays disabled until a concept is chosen; the articulation
 * gate is the point of the form, not a technicality.
 */

import type {
  MeaningType,
  MetaphorSpec,
  Scene,
  Suggestion,
  VisualStructure,
} from "./types.js";

export interface EditorState {
  affectiveElement: string;
  adjectivesText: string;
  meaningType: MeaningType;
  suggestions: Suggestion[];
  concept: string;
  structure: VisualStructure;
  extraPrompt: string;
}

export function emptyEditor(): EditorState {
  return {
    affectiveElement: "",
    adjectivesText: "",
    meaningType: "connection",
    suggestions: [],
    concept: "",
    structure: "fusion",
    extraPrompt: "",
  };
}

export function editorFromScene(scene: Scene): EditorState {
  const state = emptyEditor();
  if (scene.metaphor) {
    state.affectiveElement = scene.metaphor.affective_element;
    state.adjectivesText = scene.metaphor.adjectives.join(", ");
    state.meaningType = scene.metaphor.meaning_type;
    state.concept = scene.metaphor.metaphor_concept;
    state.structure = scene.metaphor.visual_structure;
    state.extraPrompt = scene.metaphor.extra_prompt ?? "";
  }
  return state;
}

export function adjectives(state: EditorState): string[] {
  return state.adjectivesText
    .split(",")
    .map((word) => word.trim())
    .filter((word) => word.length > 0);
}

/** The articulation gate: feelings must be in words first. */
export function canRequestSuggestions(state: EditorState): boolean {
  return state.affectiveElement.trim().length > 0 && adjectives(state).length > 0;
}

export function canGenerate(state: EditorState): boolean {
  return canRequestSuggestions(state) && state.concept.trim().length > 0;
}

/** Clicking a suggestion adopts its concept. */
export function applySuggestion(state: EditorState, suggestion: Suggestion): EditorState {
  return { ...state, concept: suggestion.concept };
}

export function toSpec(state: EditorState): MetaphorSpec {
  return {
    affective_element: state.affectiveElement.trim(),
    adjectives: adjectives(state),
    metaphor_concept: state.concept.trim(),
    meaning_type: state.meaningType,
    visual_structure: state.structure,
    extra_prompt: state.extraPrompt.trim() ? state.extraPrompt.trim() : null,
  };
}

export const MEANING_TYPES: MeaningType[] = ["connection", "similarity", "opposition"];
export const VISUAL_STRUCTURES: VisualStructure[] = [
  "juxtaposition",
  "fusion",
  "replacement",
];

export const MEANING_LABELS: Record<MeaningType, string> = {
  connection: "Connected with the feeling",
  similarity: "Similar to the feeling",
  opposition: "Opposite to the feeling",
};

export const STRUCTURE_LABELS: Record<VisualStructure, string> = {
  juxtaposition: "Side by side",
  fusion: "Fused into one form",
  replacement: "Metaphor stands in",
};

/**
 * App bootstrap and DOM wiring. All state lives in StudioController; this
 * file only renders it and forwards pointer/form events.
 */

import { ApiClient, ApiRequestError } from "./api.js";
import { renderBubble } from "./bubble.js";
import {
  EditorState,
  MEANING_LABELS,
  MEANING_TYPES,
  STRUCTURE_LABELS,
  VISUAL_STRUCTURES,
  applySuggestion,
  canGenerate,
  canRequestSuggestions,
  editorFromScene,
  toSpec,
} from "./editor.js";
import { applyFilterColor, isValidHex, normalizeHex } from "./filter.js";
import { PlaybackPlayer } from "./playback.js";
import { StudioController } from "./state.js";
import {
  ANCHOR_RADIUS_PX,
  CanvasMetrics,
  anchorToPixel,
  hitTest,
  historyRects,
  imageRect,
  pixelToAnchorX,
  plottedScenes,
} from "./storyline.js";
import type { Scene, Suggestion } from "./types.js";

function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return fromQuery ?? (window as any).DREAMLOOM_API ?? "http://127.0.0.1:8700";
}

const api = new ApiClient(apiBase());
const controller = new StudioController(api);

const imageCache = new Map<string, HTMLImageElement>();

function cachedImage(ref: string): HTMLImageElement {
  let img = imageCache.get(ref);
  if (!img) {
    img = new Image();
    img.src = api.imageUrl(ref);
    img.onload = () => render();
    imageCache.set(ref, img);
  }
  return img;
}

// ============================================
// Shell
// ============================================

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function toast(message: string): void {
  const area = document.getElementById("toasts")!;
  const note = el("div", "toast", message);
  area.appendChild(note);
  setTimeout(() => note.remove(), 4000);
}

function reportError(error: unknown): void {
  if (error instanceof ApiRequestError) {
    toast(`${error.code}: ${error.message}`);
  } else {
    toast(String(error));
  }
}

// ============================================
// Story picker
// ============================================

async function boot(): Promise<void> {
  const root = document.getElementById("app")!;
  root.innerHTML = "";
  const stories = await api.listStories();
  const picker = el("div", "picker");
  picker.appendChild(el("h1", "", "Dreamloom"));
  const list = el("div", "picker-list");
  for (const summary of stories) {
    const button = el("button", "picker-item", `${summary.title} (${summary.scene_count})`);
    button.onclick = async () => {
      await controller.loadStory(summary.id);
      showStudio();
    };
    list.appendChild(button);
  }
  picker.appendChild(list);
  const form = el("div", "picker-new");
  const input = el("input") as HTMLInputElement;
  input.placeholder = "Title a new dream story...";
  const create = el("button", "", "Create");
  create.onclick = async () => {
    if (!input.value.trim()) return;
    try {
      await controller.createStory(input.value);
      showStudio();
    } catch (error) {
      reportError(error);
    }
  };
  form.append(input, create);
  picker.appendChild(form);
  root.appendChild(picker);
}

// ============================================
// Studio layout
// ============================================

let canvas: HTMLCanvasElement;

function showStudio(): void {
  const root = document.getElementById("app")!;
  root.innerHTML = "";

  const header = el("header", "topbar");
  header.appendChild(el("h1", "", controller.story?.title ?? ""));
  const actions = el("div", "topbar-actions");
  const addLiteral = el("button", "", "+ literal scene");
  addLiteral.onclick = () => addScene("literal");
  const addMetaphorical = el("button", "", "+ metaphorical scene");
  addMetaphorical.onclick = () => addScene("metaphorical");
  const play = el("button", "", "Play story");
  play.onclick = () => openPlayback();
  const back = el("button", "", "Stories");
  back.onclick = () => boot();
  actions.append(addLiteral, addMetaphorical, play, back);
  header.appendChild(actions);
  root.appendChild(header);

  const main = el("main", "studio");
  const left = el("section", "display-pane");
  left.id = "display-pane";
  const right = el("aside", "editor-pane");
  right.id = "editor-pane";
  main.append(left, right);
  root.appendChild(main);

  const bottom = el("section", "storyline-pane");
  canvas = el("canvas", "storyline-canvas") as HTMLCanvasElement;
  bottom.appendChild(canvas);
  root.appendChild(bottom);
  wireCanvas();

  render();
}

async function addScene(kind: "literal" | "metaphorical"): Promise<void> {
  try {
    await controller.addScene(kind, controller.story?.scenes.length ?? 0);
    if (kind === "metaphorical") controller.openEditor();
  } catch (error) {
    reportError(error);
  }
}

// ============================================
// Display pane: image, bubble, filter picker
// ============================================

function renderDisplayPane(): void {
  const pane = document.getElementById("display-pane");
  if (!pane) return;
  pane.innerHTML = "";
  const scene = controller.focusedScene();
  if (!scene) {
    pane.appendChild(el("p", "hint", "Add a scene to begin."));
    return;
  }

  if (scene.kind === "metaphorical" && scene.displayed_generation) {
    const record = scene.generations.find((g) => g.id === scene.displayed_generation);
    if (record) {
      const img = el("img", "display-image") as HTMLImageElement;
      img.src = api.imageUrl(record.image_ref);
      img.onclick = () => togglePicker();
      pane.appendChild(img);
      const candidates = el("div", "candidate-row");
      for (const generation of scene.generations) {
        const thumb = el("img", "candidate-thumb") as HTMLImageElement;
        thumb.src = api.imageUrl(generation.image_ref);
        if (generation.id === scene.displayed_generation) thumb.classList.add("active");
        thumb.onclick = () =>
          controller.switchDisplay(scene.id, generation.id).catch(reportError);
        candidates.appendChild(thumb);
      }
      const acceptButton = el("button", "accept-button", "Accept this visual metaphor");
      if (!record.accepted) {
        acceptButton.onclick = () =>
          controller.accept(scene.id, record.id).catch(reportError);
      } else {
        acceptButton.textContent = "Accepted";
        acceptButton.disabled = true;
      }
      pane.append(candidates, acceptButton);
    }
  }

  pane.appendChild(renderBubble(document, scene));

  if (scene.kind === "metaphorical") {
    pane.appendChild(renderFilterPicker(scene));
  }
}

let pickerOpen = false;

function togglePicker(): void {
  pickerOpen = !pickerOpen;
  render();
}

function renderFilterPicker(scene: Scene): HTMLElement {
  const wrap = el("div", "filter-picker");
  if (!pickerOpen) {
    const open = el("button", "", "Colour filter...");
    open.onclick = () => togglePicker();
    wrap.appendChild(open);
    return wrap;
  }
  const row = el("div", "swatch-row");
  const activeHex = scene.filter?.color.hex;
  for (const entry of scene.palette?.entries ?? []) {
    const swatch = el("button", "swatch");
    swatch.style.background = entry.color.hex;
    swatch.title = `${entry.color.hex} (${Math.round(entry.weight * 100)}%)`;
    if (entry.color.hex === activeHex) swatch.classList.add("active");
    swatch.onclick = () => controller.pickSwatch(scene.id, entry.color.hex).catch(reportError);
    row.appendChild(swatch);
  }
  wrap.appendChild(row);

  const hexRow = el("div", "hex-row");
  const input = el("input") as HTMLInputElement;
  input.placeholder = "#RRGGBB";
  const error = el("span", "hex-error");
  const apply = el("button", "", "Apply");
  apply.onclick = () => {
    if (!isValidHex(input.value)) {
      error.textContent = "not a hex colour";
      return;
    }
    error.textContent = "";
    controller.enterCustomHex(scene.id, normalizeHex(input.value)!).catch(reportError);
  };
  const reset = el("button", "", "Default");
  reset.onclick = () => controller.resetFilter(scene.id).catch(reportError);
  hexRow.append(input, apply, reset, error);
  wrap.appendChild(hexRow);
  return wrap;
}

// ============================================
// Editor pane
// ============================================

let editorState: EditorState | null = null;
let editorSceneId: string | null = null;
let suggestionList: Suggestion[] = [];

function renderEditorPane(): void {
  const pane = document.getElementById("editor-pane");
  if (!pane) return;
  pane.innerHTML = "";
  const scene = controller.focusedScene();
  if (!scene) return;

  const textBox = el("textarea", "scene-text") as HTMLTextAreaElement;
  textBox.value = scene.text;
  textBox.placeholder = "Write this moment of the dream...";
  textBox.onchange = () => controller.saveText(scene.id, textBox.value).catch(reportError);
  pane.appendChild(el("h2", "", `Scene ${scene.position + 1} (${scene.kind})`));
  pane.appendChild(textBox);

  if (scene.kind !== "metaphorical") return;

  if (editorSceneId !== scene.id) {
    editorSceneId = scene.id;
    editorState = editorFromScene(scene);
    suggestionList = [];
  }
  const state = editorState!;

  const form = el("div", "metaphor-form");
  form.appendChild(el("h3", "", "Metaphor editor"));

  const affective = labeledInput(form, "What is affective?", state.affectiveElement);
  affective.onchange = () => {
    state.affectiveElement = affective.value;
    render();
  };
  const adjectivesInput = labeledInput(
    form,
    "Describe the feeling (adjectives, comma separated)",
    state.adjectivesText,
  );
  adjectivesInput.onchange = () => {
    state.adjectivesText = adjectivesInput.value;
    render();
  };

  const meaning = labeledSelect(form, "Type of meaning", MEANING_TYPES, MEANING_LABELS, state.meaningType);
  meaning.onchange = () => {
    state.meaningType = meaning.value as EditorState["meaningType"];
  };

  const suggestButton = el("button", "", "Suggest metaphors");
  suggestButton.disabled = !canRequestSuggestions(state) ||
    controller.view.pending.has(scene.id);
  suggestButton.onclick = async () => {
    try {
      await controller.saveSpec(scene.id, { ...toSpec(state), metaphor_concept: state.concept || "" });
      suggestionList = await controller.requestSuggestions(scene.id, state.meaningType);
      render();
    } catch (error) {
      reportError(error);
    }
  };
  form.appendChild(suggestButton);

  if (suggestionList.length > 0) {
    const list = el("div", "suggestion-list");
    for (const suggestion of suggestionList) {
      const chip = el("button", "suggestion-chip", suggestion.concept);
      chip.onclick = () => {
        editorState = applySuggestion(state, suggestion);
        render();
      };
      list.appendChild(chip);
    }
    form.appendChild(list);
  }

  const concept = labeledInput(form, "Metaphor to draw", state.concept);
  concept.onchange = () => {
    state.concept = concept.value;
    render();
  };

  const structure = labeledSelect(
    form,
    "Visual structure",
    VISUAL_STRUCTURES,
    STRUCTURE_LABELS,
    state.structure,
  );
  structure.onchange = () => {
    state.structure = structure.value as EditorState["structure"];
  };

  const extra = labeledInput(form, "Extra prompt (optional)", state.extraPrompt);
  extra.onchange = () => {
    state.extraPrompt = extra.value;
  };

  const generate = el("button", "generate-button", "Generate image");
  generate.disabled = !canGenerate(state) || controller.view.pending.has(scene.id);
  generate.onclick = async () => {
    try {
      await controller.saveSpec(scene.id, toSpec(state));
      await controller.generate(scene.id);
    } catch (error) {
      reportError(error);
    }
  };
  form.appendChild(generate);
  if (controller.view.pending.has(scene.id)) {
    form.appendChild(el("p", "pending", `working: ${controller.view.pending.get(scene.id)}...`));
  }
  pane.appendChild(form);
}

function labeledInput(parent: HTMLElement, label: string, value: string): HTMLInputElement {
  const wrap = el("label", "field");
  wrap.appendChild(el("span", "", label));
  const input = el("input") as HTMLInputElement;
  input.value = value;
  wrap.appendChild(input);
  parent.appendChild(wrap);
  return input;
}

function labeledSelect<T extends string>(
  parent: HTMLElement,
  label: string,
  options: T[],
  labels: Record<T, string>,
  value: T,
): HTMLSelectElement {
  const wrap = el("label", "field");
  wrap.appendChild(el("span", "", label));
  const select = el("select") as HTMLSelectElement;
  for (const option of options) {
    const node = el("option", "", labels[option]) as HTMLOptionElement;
    node.value = option;
    select.appendChild(node);
  }
  select.value = value;
  wrap.appendChild(select);
  parent.appendChild(wrap);
  return select;
}

// ============================================
// Storyline canvas
// ============================================

type DragState =
  | { kind: "anchor"; sceneId: string }
  | { kind: "image"; sceneId: string; startOffset: [number, number]; startX: number; startY: number }
  | null;

let drag: DragState = null;

function metrics(): CanvasMetrics {
  return { width: canvas.width, height: canvas.height };
}

function wireCanvas(): void {
  const resize = () => {
    canvas.width = canvas.clientWidth || canvas.parentElement?.clientWidth || 900;
    canvas.height = canvas.clientHeight || 220;
    paintStoryline();
  };
  window.addEventListener("resize", resize);
  setTimeout(resize, 0);

  canvas.addEventListener("pointerdown", (event) => {
    if (!controller.story) return;
    const hit = hitTest(controller.story, metrics(), event.offsetX, event.offsetY);
    if (!hit) return;
    if (hit.kind === "history") {
      controller.switchDisplay(hit.sceneId, hit.generationId).catch(reportError);
      return;
    }
    controller.focusScene(hit.sceneId);
    if (hit.kind === "anchor") {
      drag = { kind: "anchor", sceneId: hit.sceneId };
    } else {
      const item = controller.story.layout.items[hit.sceneId];
      drag = {
        kind: "image",
        sceneId: hit.sceneId,
        startOffset: [...item.image_offset] as [number, number],
        startX: event.offsetX,
        startY: event.offsetY,
      };
    }
  });

  canvas.addEventListener("pointermove", (event) => {
    if (!drag || !controller.story) return;
    const item = controller.story.layout.items[drag.sceneId];
    if (!item) return;
    if (drag.kind === "anchor") {
      item.anchor_x = pixelToAnchorX(event.offsetX, metrics());
    } else {
      item.image_offset = [
        drag.startOffset[0] + (event.offsetX - drag.startX) / canvas.width,
        drag.startOffset[1] + (event.offsetY - drag.startY) / canvas.height,
      ];
    }
    paintStoryline();
  });

  canvas.addEventListener("pointerup", async (event) => {
    if (!drag || !controller.story) return;
    const finished = drag;
    drag = null;
    try {
      if (finished.kind === "anchor") {
        const committed = await controller.moveAnchor(
          finished.sceneId,
          pixelToAnchorX(event.offsetX, metrics()),
        );
        if (!committed) toast("order_violation: anchors keep story order");
      } else {
        const item = controller.story.layout.items[finished.sceneId];
        await controller.moveOffset(finished.sceneId, item.image_offset);
      }
    } catch (error) {
      reportError(error);
    }
  });

  canvas.addEventListener("wheel", (event) => {
    if (!controller.story) return;
    const hit = hitTest(controller.story, metrics(), event.offsetX, event.offsetY);
    if (hit && hit.kind === "image") {
      event.preventDefault();
      const item = controller.story.layout.items[hit.sceneId];
      const next = item.scale * (event.deltaY < 0 ? 1.1 : 0.9);
      controller.resize(hit.sceneId, next).catch(reportError);
    }
  });
}

function paintStoryline(): void {
  if (!canvas) return;
  const ctx = canvas.getContext("2d");
  if (!ctx || !controller.story) return;
  const m = metrics();
  const layout = controller.story.layout;
  const filterHex = controller.activeFilterHex() ?? "#8a8a8a";

  ctx.clearRect(0, 0, m.width, m.height);
  const axisY = layout.axis_y * m.height;
  ctx.strokeStyle = "#555";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(0, axisY);
  ctx.lineTo(m.width, axisY);
  ctx.stroke();

  for (const scene of plottedScenes(controller.story)) {
    const item = layout.items[scene.id];
    const anchor = anchorToPixel(item, layout, m);
    const rect = imageRect(item, layout, m);

    // dangling line, tinted by the active filter
    ctx.strokeStyle = filterHex;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(anchor.x, anchor.y);
    ctx.lineTo(rect.x + rect.w / 2, rect.y);
    ctx.stroke();

    const record = scene.generations.find((g) => g.id === scene.displayed_generation);
    if (record) {
      ctx.drawImage(cachedImage(record.image_ref), rect.x, rect.y, rect.w, rect.h);
    } else {
      ctx.fillStyle = "#2e2e2e";
      ctx.fillRect(rect.x, rect.y, rect.w, rect.h);
    }
    if (scene.id === controller.view.focusedSceneId) {
      ctx.strokeStyle = "#eee";
      ctx.strokeRect(rect.x, rect.y, rect.w, rect.h);
    }

    for (const [generationId, thumb] of historyRects(item, layout, m)) {
      const generation = scene.generations.find((g) => g.id === generationId);
      if (generation) {
        ctx.drawImage(cachedImage(generation.image_ref), thumb.x, thumb.y, thumb.w, thumb.h);
        ctx.strokeStyle = "#444";
        ctx.strokeRect(thumb.x, thumb.y, thumb.w, thumb.h);
      }
    }

    // anchor point, tinted
    ctx.fillStyle = filterHex;
    ctx.beginPath();
    ctx.arc(anchor.x, anchor.y, ANCHOR_RADIUS_PX, 0, Math.PI * 2);
    ctx.fill();
  }
}

// ============================================
// Playback overlay
// ============================================

async function openPlayback(): Promise<void> {
  try {
    const manifest = await controller.playback();
    const player = new PlaybackPlayer(manifest);
    const overlay = el("div", "playback-overlay");
    overlay.id = "playback-overlay";

    const renderFrame = () => {
      overlay.innerHTML = "";
      const frame = player.current();
      if (!frame) return;
      if (frame.filter_color) applyFilterColor(document.documentElement, frame.filter_color);
      const card = el("div", "playback-card");
      if (frame.image_ref && !frame.missing_image) {
        const img = el("img", "playback-image") as HTMLImageElement;
        img.src = api.imageUrl(frame.image_ref);
        card.appendChild(img);
      }
      const scene = controller.scene(frame.scene_id);
      if (scene) card.appendChild(renderBubble(document, scene));
      card.appendChild(
        el("p", "playback-counter", `${player.index + 1} / ${player.frames.length}`),
      );
      const controls = el("div", "playback-controls");
      const prev = el("button", "", "Prev");
      prev.onclick = () => player.previous();
      const next = el("button", "", "Next");
      next.onclick = () => player.next();
      const close = el("button", "", "Close");
      close.onclick = () => {
        player.stop();
        overlay.remove();
        render();
      };
      controls.append(prev, next, close);
      card.appendChild(controls);
      overlay.appendChild(card);
    };

    player.subscribe(renderFrame);
    renderFrame();
    document.body.appendChild(overlay);
    player.start();
  } catch (error) {
    reportError(error);
  }
}

// ============================================
// Render loop
// ============================================

function render(): void {
  const hex = controller.activeFilterHex();
  if (hex) applyFilterColor(document.documentElement, hex);
  renderDisplayPane();
  renderEditorPane();
  paintStoryline();
}

controller.subscribe(render);

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot().catch(reportError);
}

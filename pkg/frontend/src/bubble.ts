/**
 * Text bubbles: spiky outlines for metaphorical scenes (higher arousal),
 * rounded for literal ones. The displayed text is always the author's own
 * words; the generated depiction renders underneath on a filter-tinted
 * background and never replaces them.
 */

import type { Scene } from "./types.js";

/**
 * Bubble title for metaphorical scenes: the felt description and affective
 * element, then the metaphor drawn, e.g.
 * "Exciting old crush holding my hands - Electric Sparks".
 */
export function bubbleTitle(scene: Scene): string | null {
  if (scene.kind !== "metaphorical" || !scene.metaphor) return null;
  const spec = scene.metaphor;
  const feeling = spec.adjectives.join(", ");
  const lead = feeling ? feeling.charAt(0).toUpperCase() + feeling.slice(1) : "";
  const left = [lead, spec.affective_element].filter(Boolean).join(" ");
  if (!spec.metaphor_concept) return left || null;
  return `${left} - ${spec.metaphor_concept}`;
}

/**
 * Zigzag polygon for the spiky outline, as SVG "points". Alternates
 * between the outer edge and an inset ring so every edge is a spike.
 */
export function spikyPolygonPoints(
  width: number,
  height: number,
  spikes = 14,
  inset = 8,
): string {
  const cx = width / 2;
  const cy = height / 2;
  const points: string[] = [];
  const total = spikes * 2;
  for (let i = 0; i < total; i++) {
    const angle = (i / total) * Math.PI * 2;
    const pad = i % 2 === 0 ? 0 : inset;
    const rx = cx - pad;
    const ry = cy - pad;
    const x = cx + rx * Math.cos(angle);
    const y = cy + ry * Math.sin(angle);
    points.push(`${x.toFixed(1)},${y.toFixed(1)}`);
  }
  return points.join(" ");
}

/** True when the scene renders with the spiky outline. */
export function isSpiky(scene: Scene): boolean {
  return scene.kind === "metaphorical";
}

/**
 * Builds the bubble widget. Styling hooks:
 *  - .bubble.spiky / .bubble.rounded for the outline,
 *  - .bubble-shadow tinted via var(--dl-bubble-shadow),
 *  - .bubble-depiction background via var(--dl-depiction-background).
 */
export function renderBubble(doc: Document, scene: Scene): HTMLElement {
  const bubble = doc.createElement("div");
  bubble.className = `bubble ${isSpiky(scene) ? "spiky" : "rounded"} bubble-shadow`;
  bubble.dataset.sceneId = scene.id;

  const title = bubbleTitle(scene);
  if (title) {
    const heading = doc.createElement("div");
    heading.className = "bubble-title";
    heading.textContent = title;
    bubble.appendChild(heading);
  }

  const text = doc.createElement("p");
  text.className = "bubble-text";
  text.textContent = scene.text;
  bubble.appendChild(text);

  if (scene.kind === "metaphorical" && scene.depiction) {
    const depiction = doc.createElement("p");
    depiction.className = "bubble-depiction";
    depiction.textContent = scene.depiction;
    bubble.appendChild(depiction);
  }
  return bubble;
}

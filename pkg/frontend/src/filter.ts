/**
 * Color filter plumbing: hex validation, and recoloring of the four
 * designated interface element classes (text bubble shadows, anchor
 * points, dangling lines, and the generated-text background).
 */

export const RECOLOR_TARGETS = [
  "bubble-shadow",
  "anchor-point",
  "dangling-line",
  "depiction-background",
] as const;

export type RecolorTarget = (typeof RECOLOR_TARGETS)[number];

const HEX_RE = /^#?([0-9a-fA-F]{3}|[0-9a-fA-F]{6})$/;

/** Expand and canonicalize to "#RRGGBB" uppercase; null when invalid. */
export function normalizeHex(text: string): string | null {
  const match = HEX_RE.exec(text.trim());
  if (!match) return null;
  let digits = match[1];
  if (digits.length === 3) {
    digits = digits
      .split("")
      .map((ch) => ch + ch)
      .join("");
  }
  return `#${digits.toUpperCase()}`;
}

export function isValidHex(text: string): boolean {
  return normalizeHex(text) !== null;
}

/** CSS custom property name for one recolor target. */
export function cssVar(target: RecolorTarget): string {
  return `--dl-${target}`;
}

function withAlpha(hex: string, alpha: number): string {
  const r = parseInt(hex.slice(1, 3), 16);
  const g = parseInt(hex.slice(3, 5), 16);
  const b = parseInt(hex.slice(5, 7), 16);
  return `rgba(${r}, ${g}, ${b}, ${alpha})`;
}

/**
 * Computes the style value per target. Shadows and the text background get
 * translucent tints; anchors and lines take the color directly.
 */
export function recolorValues(hex: string): Record<RecolorTarget, string> {
  return {
    "bubble-shadow": withAlpha(hex, 0.45),
    "anchor-point": hex,
    "dangling-line": hex,
    "depiction-background": withAlpha(hex, 0.18),
  };
}

/**
 * Applies the active filter color to the document: every element styled
 * with var(--dl-...) picks it up. Returns the values for inspection.
 */
export function applyFilterColor(
  root: HTMLElement,
  hex: string,
): Record<RecolorTarget, string> {
  const values = recolorValues(hex);
  for (const target of RECOLOR_TARGETS) {
    root.style.setProperty(cssVar(target), values[target]);
  }
  return values;
}

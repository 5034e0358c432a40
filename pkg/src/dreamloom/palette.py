"""Dominant-color extraction and color filter derivation.

Images are clustered in CIELAB space. Seeding comes from a 16x16x16 RGB
histogram rather than randomness, so extraction is a pure function of the
image bytes: same bytes in, same palette out, regardless of pixel order or
process restarts.
"""

from __future__ import annotations

import hashlib
import io
import re
from enum import Enum

import numpy as np
from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel, ConfigDict, Field, computed_field

from .errors import EmptyImage, EmptyPalette, InvalidHex, UndecodableImage

MAX_PALETTE_SIZE = 8
# Clustering knobs: images are box-downsampled to at most this edge length,
# seeds must be at least MIN_SEED_DISTANCE apart in Lab, and iteration stops
# once no centroid moves more than CONVERGENCE_EPS.
DOWNSAMPLE_EDGE = 256
MIN_SEED_DISTANCE = 15.0
MAX_ITERATIONS = 50
CONVERGENCE_EPS = 0.1

_HEX_RE = re.compile(r"^#?([0-9a-fA-F]{3}|[0-9a-fA-F]{6})$")


class Color(BaseModel):
    model_config = ConfigDict(frozen=True)

    r: int = Field(ge=0, le=255)
    g: int = Field(ge=0, le=255)
    b: int = Field(ge=0, le=255)

    @computed_field
    @property
    def hex(self) -> str:
        return "#{:02X}{:02X}{:02X}".format(self.r, self.g, self.b)


class PaletteEntry(BaseModel):
    color: Color
    weight: float = Field(ge=0.0, le=1.0)


class Palette(BaseModel):
    """Up to 8 representative colors, ordered by pixel-share descending."""

    entries: list[PaletteEntry] = Field(default_factory=list)
    source_image: str = ""


class FilterOrigin(str, Enum):
    PALETTE_DEFAULT = "palette_default"
    PALETTE_PICK = "palette_pick"
    CUSTOM_HEX = "custom_hex"


class ColorFilter(BaseModel):
    model_config = ConfigDict(frozen=True)

    color: Color
    origin: FilterOrigin


def parse_hex(text: str) -> Color:
    """Parse ``#RGB`` or ``#RRGGBB`` (case-insensitive, ``#`` optional)."""
    m = _HEX_RE.match(text.strip())
    if not m:
        raise InvalidHex(f"not a hex color: {text!r}")
    digits = m.group(1)
    if len(digits) == 3:
        digits = "".join(ch * 2 for ch in digits)
    return Color(r=int(digits[0:2], 16), g=int(digits[2:4], 16), b=int(digits[4:6], 16))


def default_filter(palette: Palette) -> ColorFilter:
    """The interface default: the most dominant palette color."""
    if not palette.entries:
        raise EmptyPalette("palette has no entries")
    return ColorFilter(color=palette.entries[0].color, origin=FilterOrigin.PALETTE_DEFAULT)


# --- CIELAB conversion (sRGB, D65 white point) -------------------------------

_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_D65 = np.array([0.95047, 1.0, 1.08883])


def srgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    """Convert an (..., 3) array of 0-255 sRGB values to CIELAB."""
    c = np.asarray(rgb, dtype=np.float64) / 255.0
    linear = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _SRGB_TO_XYZ.T / _D65
    delta = 6.0 / 29.0
    f = np.where(xyz > delta**3, np.cbrt(xyz), xyz / (3 * delta**2) + 4.0 / 29.0)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def delta_e(a: Color, b: Color) -> float:
    """CIE76 color difference."""
    la = srgb_to_lab(np.array([a.r, a.g, a.b], dtype=np.float64))
    lb = srgb_to_lab(np.array([b.r, b.g, b.b], dtype=np.float64))
    return float(np.linalg.norm(la - lb))


# --- extraction ---------------------------------------------------------------

def _decode(image_bytes: bytes) -> np.ndarray:
    try:
        img = Image.open(io.BytesIO(image_bytes))
        img = img.convert("RGB")
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise UndecodableImage(str(exc)) from exc
    if img.width == 0 or img.height == 0:
        raise EmptyImage("image has no pixels")
    scale = DOWNSAMPLE_EDGE / max(img.width, img.height)
    if scale < 1.0:
        w = max(1, round(img.width * scale))
        h = max(1, round(img.height * scale))
        img = img.resize((w, h), Image.Resampling.BOX)
    return np.asarray(img, dtype=np.uint8).reshape(-1, 3)


def _histogram(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bucket pixels into 16^3 RGB bins; returns (counts, mean RGB) per occupied bin."""
    bins = (
        (pixels[:, 0].astype(np.int64) >> 4) * 256
        + (pixels[:, 1].astype(np.int64) >> 4) * 16
        + (pixels[:, 2].astype(np.int64) >> 4)
    )
    counts = np.bincount(bins, minlength=4096)
    sums = np.zeros((4096, 3), dtype=np.float64)
    for ch in range(3):
        sums[:, ch] = np.bincount(bins, weights=pixels[:, ch].astype(np.float64), minlength=4096)
    occupied = np.nonzero(counts)[0]
    means = sums[occupied] / counts[occupied, None]
    return counts[occupied].astype(np.float64), means


def _pick_seeds(labs: np.ndarray, counts: np.ndarray, k: int) -> list[int]:
    """Greedy histogram seeding: most-populated bins first, spaced apart in Lab.

    If the spacing constraint yields fewer than k seeds, backfill from the
    remaining bins so that len(seeds) == min(k, number of occupied bins).
    """
    order = np.lexsort((np.arange(len(counts)), -counts))
    seeds: list[int] = []
    for i in order:
        if len(seeds) >= k:
            break
        if all(np.linalg.norm(labs[i] - labs[j]) >= MIN_SEED_DISTANCE for j in seeds):
            seeds.append(int(i))
    if len(seeds) < k:
        taken = set(seeds)
        for i in order:
            if len(seeds) >= k:
                break
            if int(i) not in taken:
                seeds.append(int(i))
    return seeds


def extract_palette(image_bytes: bytes, k: int = MAX_PALETTE_SIZE) -> Palette:
    """Extract up to k dominance-ordered colors from an encoded PNG/JPEG.

    Weighted k-means over histogram bins in CIELAB; weights are the fraction
    of pixels assigned to each cluster. Returns fewer than k entries only
    when the image has fewer distinct quantized colors than k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    pixels = _decode(image_bytes)
    counts, bin_rgbs = _histogram(pixels)
    labs = srgb_to_lab(bin_rgbs)
    total = counts.sum()

    n_clusters = min(k, len(counts))
    centroids = labs[_pick_seeds(labs, counts, n_clusters)].copy()

    assign = np.zeros(len(counts), dtype=np.int64)
    for _ in range(MAX_ITERATIONS):
        dists = np.linalg.norm(labs[:, None, :] - centroids[None, :, :], axis=2)
        assign = np.argmin(dists, axis=1)
        # Re-seed any emptied cluster at the bin contributing the most error.
        for c in range(n_clusters):
            if not np.any(assign == c):
                err = counts * dists[np.arange(len(counts)), assign]
                worst = int(np.argmax(err))
                assign[worst] = c
                centroids[c] = labs[worst]
        moved = 0.0
        for c in range(n_clusters):
            members = assign == c
            w = counts[members]
            new = (labs[members] * w[:, None]).sum(axis=0) / w.sum()
            moved = max(moved, float(np.linalg.norm(new - centroids[c])))
            centroids[c] = new
        if moved < CONVERGENCE_EPS:
            break

    raw: dict[str, float] = {}
    for c in range(n_clusters):
        members = assign == c
        w = counts[members]
        rgb = (bin_rgbs[members] * w[:, None]).sum(axis=0) / w.sum()
        color = Color(
            r=int(np.clip(round(rgb[0]), 0, 255)),
            g=int(np.clip(round(rgb[1]), 0, 255)),
            b=int(np.clip(round(rgb[2]), 0, 255)),
        )
        # Clusters that round to the same swatch are merged, never duplicated.
        raw[color.hex] = raw.get(color.hex, 0.0) + float(w.sum() / total)

    entries = [
        PaletteEntry(color=parse_hex(hx), weight=wt)
        for hx, wt in sorted(raw.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    return Palette(entries=entries, source_image=hashlib.sha256(image_bytes).hexdigest())

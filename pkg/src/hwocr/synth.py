"""Synthetic labeled pages for exercising the pipeline end to end.

Renders grids of single characters in a chosen typeface with per-sample
jitter (rotation, placement, pixel noise), returning both the page image
and its ground-truth box file. Three bundled typefaces stand in for three
writers with distinct hands.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .boxfile import BoxEntry, BoxFile
from .imaging import BBox, PageImage

__all__ = ["FontSpec", "available_fonts", "render_glyph_mask", "render_page"]

_FONT_DIRS = [Path("/usr/share/fonts/truetype/dejavu")]
try:  # matplotlib bundles the same family; handy when system fonts are absent
    import matplotlib

    _FONT_DIRS.append(Path(matplotlib.__file__).parent / "mpl-data" / "fonts" / "ttf")
except ImportError:
    pass

_STYLE_FILES = {
    "sans": "DejaVuSans.ttf",
    "serif": "DejaVuSerif.ttf",
    "mono": "DejaVuSansMono.ttf",
}


@dataclass(frozen=True)
class FontSpec:
    name: str
    path: Path
    size: int = 28

    def load(self) -> ImageFont.FreeTypeFont:
        return ImageFont.truetype(str(self.path), self.size)


def available_fonts(size: int = 28) -> dict[str, FontSpec]:
    """The three bundled writer styles; raises if none can be found."""
    fonts = {}
    for style, filename in _STYLE_FILES.items():
        for d in _FONT_DIRS:
            candidate = d / filename
            if candidate.exists():
                fonts[style] = FontSpec(name=style, path=candidate, size=size)
                break
    if len(fonts) < len(_STYLE_FILES):
        missing = sorted(set(_STYLE_FILES) - set(fonts))
        raise RuntimeError(f"could not locate fonts for styles: {missing}")
    return fonts


def render_glyph_mask(
    char: str,
    font: FontSpec,
    rotation: float = 0.0,
) -> np.ndarray:
    """Tight boolean ink mask of one character, optionally rotated."""
    ft = font.load()
    pad = font.size
    canvas = Image.new("L", (3 * font.size + 2 * pad, 3 * font.size + 2 * pad), 255)
    ImageDraw.Draw(canvas).text((pad, pad), char, font=ft, fill=0)
    if rotation:
        canvas = canvas.rotate(rotation, resample=Image.BILINEAR, fillcolor=255)
    arr = np.asarray(canvas)
    # generous threshold keeps anti-aliased stroke joins connected
    ink = arr < 176
    rows = np.nonzero(ink.any(axis=1))[0]
    cols = np.nonzero(ink.any(axis=0))[0]
    if len(rows) == 0:
        raise ValueError(f"character {char!r} rendered no ink")
    return ink[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1]


def render_page(
    text_rows: list[str],
    font: FontSpec,
    page_id: str = "synthetic",
    *,
    col_pitch: int | None = None,
    row_pitch: int | None = None,
    margin: int = 24,
    word_gap_cols: int = 2,
    max_rotation: float = 0.0,
    offset_jitter: int = 1,
    speckles: int = 0,
    ink_level: int = 25,
    paper_level: int = 240,
    seed: int = 0,
) -> tuple[PageImage, BoxFile]:
    """Render rows of characters on a noisy page with ground-truth boxes.

    Spaces inside a row produce a word-sized gap (word_gap_cols extra cell
    widths) and no box. Jitter: per-glyph rotation within +/-max_rotation
    degrees and per-glyph placement offset within +/-offset_jitter pixels.
    Speckles are 1-3 pixel ink specks that stay below the default
    segmentation noise floor.
    """
    rng = np.random.default_rng(seed)
    col_pitch = col_pitch or int(font.size * 1.6)
    row_pitch = row_pitch or int(font.size * 2.2)

    stamps = []  # (row-index, x, char-or-None-for-space)
    n_cols = 0
    for r, row in enumerate(text_rows):
        x = 0
        for ch in row:
            if ch == " ":
                x += word_gap_cols
                continue
            stamps.append((r, x, ch))
            x += 1
        n_cols = max(n_cols, x)

    width = 2 * margin + max(1, n_cols) * col_pitch
    height = 2 * margin + max(1, len(text_rows)) * row_pitch
    page = np.full((height, width), paper_level, dtype=np.int16)
    page += rng.integers(-5, 6, size=page.shape, dtype=np.int16)

    entries = []
    for r, cx, ch in stamps:
        rotation = float(rng.uniform(-max_rotation, max_rotation)) if max_rotation else 0.0
        mask = render_glyph_mask(ch, font, rotation=rotation)
        mh, mw = mask.shape
        cell_x = margin + cx * col_pitch + col_pitch // 2
        cell_y = margin + r * row_pitch + row_pitch // 2
        jx = int(rng.integers(-offset_jitter, offset_jitter + 1)) if offset_jitter else 0
        jy = int(rng.integers(-offset_jitter, offset_jitter + 1)) if offset_jitter else 0
        r0 = max(0, min(height - mh, cell_y - mh // 2 + jy))
        c0 = max(0, min(width - mw, cell_x - mw // 2 + jx))
        ink = ink_level + rng.integers(-8, 9, size=(mh, mw), dtype=np.int16)
        window = page[r0 : r0 + mh, c0 : c0 + mw]
        window[mask] = ink[mask]
        entries.append(
            BoxEntry(ch, BBox.from_rows_cols(r0, r0 + mh, c0, c0 + mw, height))
        )

    for _ in range(speckles):
        sy = int(rng.integers(0, height - 2))
        sx = int(rng.integers(0, width - 2))
        n_px = int(rng.integers(1, 4))
        for k in range(n_px):
            page[min(height - 1, sy + k % 2), min(width - 1, sx + k // 2)] = ink_level

    pixels = np.clip(page, 0, 255).astype(np.uint8)
    return (
        PageImage(width=width, height=height, pixels=pixels, id=page_id),
        BoxFile(entries=tuple(entries), page_id=page_id),
    )

"""Page binarization and line/word/glyph segmentation.

All box coordinates use the box-file convention: origin at the image's
bottom-left corner, y increasing upward, with `right` and `top` exclusive.
Pixel arrays are numpy row-major with row 0 at the image top; `BBox`
carries the conversion between the two.
"""
from __future__ import annotations

import statistics
from dataclasses import dataclass

import numpy as np
import scipy.ndimage as ndi
from PIL import Image

__all__ = [
    "BBox",
    "PageImage",
    "BinaryImage",
    "Component",
    "GlyphSample",
    "Word",
    "Line",
    "PageSegmentation",
    "SegConfig",
    "load_page",
    "binarize",
    "extract_components",
    "segment_page",
]

_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, order=True)
class BBox:
    """Axis-aligned box, bottom-left origin, right/top exclusive."""

    left: int
    bottom: int
    right: int
    top: int

    def __post_init__(self):
        if not (self.left < self.right and self.bottom < self.top):
            raise ValueError(f"degenerate bbox {(self.left, self.bottom, self.right, self.top)}")

    @property
    def width(self) -> int:
        return self.right - self.left

    @property
    def height(self) -> int:
        return self.top - self.bottom

    @property
    def area(self) -> int:
        return self.width * self.height

    def union(self, other: "BBox") -> "BBox":
        return BBox(
            min(self.left, other.left),
            min(self.bottom, other.bottom),
            max(self.right, other.right),
            max(self.top, other.top),
        )

    def intersection_area(self, other: "BBox") -> int:
        w = min(self.right, other.right) - max(self.left, other.left)
        h = min(self.top, other.top) - max(self.bottom, other.bottom)
        return w * h if w > 0 and h > 0 else 0

    def iou(self, other: "BBox") -> float:
        inter = self.intersection_area(other)
        if inter == 0:
            return 0.0
        return inter / (self.area + other.area - inter)

    def row_slice(self, image_height: int) -> slice:
        """Rows of a row-major array covered by this box."""
        return slice(image_height - self.top, image_height - self.bottom)

    def col_slice(self) -> slice:
        return slice(self.left, self.right)

    @staticmethod
    def from_rows_cols(r0: int, r1: int, c0: int, c1: int, image_height: int) -> "BBox":
        """Box for array rows [r0, r1) and columns [c0, c1)."""
        return BBox(c0, image_height - r1, c1, image_height - r0)


@dataclass(frozen=True, eq=False)
class PageImage:
    """8-bit grayscale page, 0 = black ink, 255 = white paper."""

    width: int
    height: int
    pixels: np.ndarray  # shape (height, width), uint8
    id: str = ""

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("page dimensions must be positive")
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.shape != (self.height, self.width):
            raise ValueError(f"pixel buffer {px.shape} does not match {self.height}x{self.width}")
        object.__setattr__(self, "pixels", px)

    def __eq__(self, other):
        if not isinstance(other, PageImage):
            return NotImplemented
        return (
            self.id == other.id
            and self.width == other.width
            and self.height == other.height
            and np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True, eq=False)
class BinaryImage:
    """Foreground (ink) mask of a page."""

    width: int
    height: int
    bits: np.ndarray  # shape (height, width), bool
    page_id: str = ""

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.shape != (self.height, self.width):
            raise ValueError("mask shape does not match dimensions")
        object.__setattr__(self, "bits", bits)

    def __eq__(self, other):
        if not isinstance(other, BinaryImage):
            return NotImplemented
        return (
            self.page_id == other.page_id
            and self.width == other.width
            and self.height == other.height
            and np.array_equal(self.bits, other.bits)
        )


@dataclass(frozen=True)
class Component:
    """One 8-connected blob of ink."""

    bbox: BBox
    pixel_count: int
    centroid: tuple[float, float]  # (x, y) in box coordinates


@dataclass(frozen=True, eq=False)
class GlyphSample:
    """A candidate character: tight box plus its cropped ink mask."""

    bbox: BBox
    mask: np.ndarray  # bool, shape (bbox.height, bbox.width)
    source_page: str = ""

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != (self.bbox.height, self.bbox.width):
            raise ValueError("glyph mask does not match its bbox")
        if not mask.any():
            raise ValueError("glyph mask has no ink")
        object.__setattr__(self, "mask", mask)

    def __eq__(self, other):
        if not isinstance(other, GlyphSample):
            return NotImplemented
        return (
            self.bbox == other.bbox
            and self.source_page == other.source_page
            and np.array_equal(self.mask, other.mask)
        )


@dataclass(frozen=True)
class Word:
    bbox: BBox
    glyphs: tuple[GlyphSample, ...]


@dataclass(frozen=True)
class Line:
    baseline_band: tuple[int, int]  # (y-low, y-high)
    words: tuple[Word, ...]

    def glyphs(self):
        for word in self.words:
            yield from word.glyphs


@dataclass(frozen=True)
class PageSegmentation:
    """Lines of words of glyphs, in reading order."""

    lines: tuple[Line, ...]
    page_id: str = ""

    def glyphs(self):
        for line in self.lines:
            yield from line.glyphs()

    @property
    def glyph_count(self) -> int:
        return sum(1 for _ in self.glyphs())


@dataclass(frozen=True)
class SegConfig:
    """Knobs for segment_page.

    word_gap_factor: split words where the horizontal gap exceeds this
        multiple of the median intra-line gap.
    noise_floor: components with fewer ink pixels are dropped.
    diacritic_overlap: minimum horizontal overlap (fraction of the
        narrower component) for a diacritic merge.
    diacritic_gap_factor: maximum vertical gap for a merge, as a fraction
        of the taller component's height.
    """

    word_gap_factor: float = 2.5
    noise_floor: int = 4
    diacritic_overlap: float = 0.5
    diacritic_gap_factor: float = 0.5


# ---------------------------------------------------------------------------
# Image IO

def load_page(path, page_id: str | None = None) -> PageImage:
    """Read a PNG or single-page TIFF into a PageImage."""
    img = Image.open(path)
    n_frames = getattr(img, "n_frames", 1)
    if n_frames > 1:
        raise ValueError(f"{path}: multi-page TIFF is not supported; split pages first")
    if img.mode != "L":
        img = img.convert("L")
    arr = np.asarray(img, dtype=np.uint8)
    if page_id is None:
        name = getattr(path, "name", str(path))
        page_id = name.rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return PageImage(width=arr.shape[1], height=arr.shape[0], pixels=arr, id=page_id)


def save_page(page: PageImage, path) -> None:
    Image.fromarray(page.pixels, mode="L").save(path)


# ---------------------------------------------------------------------------
# Binarization

def otsu_threshold(pixels: np.ndarray) -> int:
    """Threshold maximizing between-class variance; first index on ties."""
    hist = np.bincount(pixels.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    weight_lo = np.cumsum(hist)
    weight_hi = total - weight_lo
    moment_lo = np.cumsum(hist * np.arange(256))
    mean_lo = np.divide(moment_lo, weight_lo, out=np.zeros(256), where=weight_lo > 0)
    mean_hi = np.divide(
        moment_lo[-1] - moment_lo, weight_hi, out=np.zeros(256), where=weight_hi > 0
    )
    variance = weight_lo * weight_hi * (mean_lo - mean_hi) ** 2
    return int(np.argmax(variance))


def binarize(page: PageImage) -> BinaryImage:
    """Global Otsu threshold; pixels at or below the threshold are ink.

    A uniform page yields an empty mask unless it is pure black.
    """
    t = otsu_threshold(page.pixels)
    return BinaryImage(page.width, page.height, page.pixels <= t, page_id=page.id)


# ---------------------------------------------------------------------------
# Connected components

def _labeled_blobs(bin_img: BinaryImage, noise_floor: int):
    """8-connected blobs above the noise floor: (bbox, count, mask, centroid)."""
    labels, n = ndi.label(bin_img.bits, structure=_EIGHT_CONNECTED)
    blobs = []
    if n == 0:
        return blobs
    h = bin_img.height
    counts = np.bincount(labels.ravel())
    for idx, sl in enumerate(ndi.find_objects(labels), start=1):
        if sl is None or counts[idx] < noise_floor:
            continue
        rs, cs = sl
        mask = labels[sl] == idx
        bbox = BBox.from_rows_cols(rs.start, rs.stop, cs.start, cs.stop, h)
        rows, cols = np.nonzero(mask)
        cx = float(np.mean(cols + cs.start) + 0.5)
        cy = float(np.mean(h - 1 - (rows + rs.start)) + 0.5)
        blobs.append((bbox, int(counts[idx]), mask, (cx, cy)))
    # stable reading-order-ish ordering: top edge first, then left edge
    blobs.sort(key=lambda b: (-b[0].top, b[0].left, b[0].bottom))
    return blobs


def extract_components(bin_img: BinaryImage, noise_floor: int = 4) -> list[Component]:
    """8-connected ink components with tight boxes; specks below the floor dropped."""
    return [
        Component(bbox=bbox, pixel_count=count, centroid=centroid)
        for bbox, count, _, centroid in _labeled_blobs(bin_img, noise_floor)
    ]


# ---------------------------------------------------------------------------
# Segmentation

def _horizontal_overlap(a: BBox, b: BBox) -> int:
    return min(a.right, b.right) - max(a.left, b.left)


def _vertical_gap(a: BBox, b: BBox) -> int:
    """Gap between vertical spans; negative when they overlap."""
    return max(a.bottom, b.bottom) - min(a.top, b.top)


def _merge_diacritics(blobs, cfg: SegConfig):
    """Union components that stack vertically with strong horizontal overlap.

    Handles dotted glyphs whose dot is a separate component; must run
    before line clustering or the dots would form their own line.
    """
    n = len(blobs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            a, b = blobs[i][0], blobs[j][0]
            overlap = _horizontal_overlap(a, b)
            if overlap < cfg.diacritic_overlap * min(a.width, b.width):
                continue
            if _vertical_gap(a, b) > cfg.diacritic_gap_factor * max(a.height, b.height):
                continue
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[rj] = ri

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [sorted(members) for _, members in sorted(groups.items())]


def _group_to_glyph(blobs, members, image_height: int, page_id: str) -> GlyphSample:
    bbox = blobs[members[0]][0]
    for m in members[1:]:
        bbox = bbox.union(blobs[m][0])
    mask = np.zeros((bbox.height, bbox.width), dtype=bool)
    r0 = image_height - bbox.top
    for m in members:
        mb, _, mmask, _ = blobs[m]
        rr = image_height - mb.top - r0
        cc = mb.left - bbox.left
        mask[rr : rr + mb.height, cc : cc + mb.width] |= mmask
    return GlyphSample(bbox=bbox, mask=mask, source_page=page_id)


def _cluster_lines(glyphs: list[GlyphSample]) -> list[list[GlyphSample]]:
    """Transitive clustering on vertical bbox overlap."""
    n = len(glyphs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            a, b = glyphs[i].bbox, glyphs[j].bbox
            if min(a.top, b.top) - max(a.bottom, b.bottom) > 0:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri

    clusters: dict[int, list[GlyphSample]] = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(glyphs[i])
    lines = list(clusters.values())
    lines.sort(key=lambda gs: -max(g.bbox.top for g in gs))
    return lines


def _split_words(glyphs: list[GlyphSample], gap_factor: float) -> list[list[GlyphSample]]:
    glyphs = sorted(glyphs, key=lambda g: (g.bbox.left, g.bbox.bottom))
    if len(glyphs) == 1:
        return [glyphs]
    gaps = [
        max(0, glyphs[i + 1].bbox.left - glyphs[i].bbox.right)
        for i in range(len(glyphs) - 1)
    ]
    median_gap = statistics.median(gaps)
    words, current = [], [glyphs[0]]
    for g, gap in zip(glyphs[1:], gaps):
        if gap > gap_factor * median_gap:
            words.append(current)
            current = [g]
        else:
            current.append(g)
    words.append(current)
    return words


def segment_page(bin_img: BinaryImage, cfg: SegConfig | None = None) -> PageSegmentation:
    """Group ink components into reading-ordered lines, words and glyphs."""
    cfg = cfg or SegConfig()
    blobs = _labeled_blobs(bin_img, cfg.noise_floor)
    if not blobs:
        return PageSegmentation(lines=(), page_id=bin_img.page_id)

    groups = _merge_diacritics(blobs, cfg)
    glyphs = [_group_to_glyph(blobs, g, bin_img.height, bin_img.page_id) for g in groups]

    lines = []
    for line_glyphs in _cluster_lines(glyphs):
        band = (
            min(g.bbox.bottom for g in line_glyphs),
            max(g.bbox.top for g in line_glyphs),
        )
        words = []
        for word_glyphs in _split_words(line_glyphs, cfg.word_gap_factor):
            wbox = word_glyphs[0].bbox
            for g in word_glyphs[1:]:
                wbox = wbox.union(g.bbox)
            words.append(Word(bbox=wbox, glyphs=tuple(word_glyphs)))
        lines.append(Line(baseline_band=band, words=tuple(words)))

    return PageSegmentation(lines=tuple(lines), page_id=bin_img.page_id)

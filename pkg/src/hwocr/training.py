"""Feature extraction and model training for per-user character classifiers.

A labeled page becomes a `.tr` feature set; feature sets are clustered
into two models: normalization prototypes (4-d mean/variance clusters per
class) and micro-feature templates (quantized outline-segment prototypes
per class, with an expected segment count used for class pruning).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from skimage import measure

from .boxfile import BoxFile
from .imaging import GlyphSample, PageImage, binarize

__all__ = [
    "MicroFeature",
    "TrCharFeatures",
    "TrFeatureSet",
    "Unicharset",
    "PrototypeModel",
    "Prototype",
    "MicroProtoModel",
    "TrainConfig",
    "TrFormatError",
    "extract_features",
    "emit_tr",
    "extract_unicharset",
    "cn_training",
    "mf_training",
    "write_tr",
    "read_tr",
    "write_unicharset",
    "read_unicharset",
    "write_normproto",
    "read_normproto",
    "write_inttemp",
    "read_inttemp",
    "write_pffmtable",
    "read_pffmtable",
    "clustering_log",
]

VARIANCE_FLOOR = 1e-4
QUANT_STEPS = 64  # grid for stored micro-feature prototypes
_RESAMPLE_POINTS = 64
_CORNER_DEGREES = 45.0


class TrFormatError(ValueError):
    """Malformed model or feature file; carries the 1-based line number."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


@dataclass(frozen=True)
class MicroFeature:
    """One straight-ish outline segment in the glyph's unit frame.

    x, y: segment midpoint; dir: one of 8 direction sectors of 45 degrees
    (0 = rightward, counterclockwise); len: segment length normalized by
    the frame diagonal.
    """

    x: float
    y: float
    dir: int
    len: float

    def __post_init__(self):
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0 and 0.0 <= self.len <= 1.0):
            raise ValueError(f"micro-feature fields out of range: {self}")
        if self.dir not in range(8):
            raise ValueError(f"direction sector must be 0-7, got {self.dir}")


@dataclass(frozen=True)
class TrCharFeatures:
    """Features of one character sample: 4-d normalization vector + outline segments."""

    cn: tuple[float, float, float, float]  # aspect, density, centroid-x, centroid-y
    micro: tuple[MicroFeature, ...]
    glyph: str | None = None


@dataclass(frozen=True)
class TrFeatureSet:
    page_id: str
    records: tuple[TrCharFeatures, ...] = ()


@dataclass(frozen=True)
class Unicharset:
    """Distinct glyphs with observed counts, in first-appearance order."""

    entries: tuple[tuple[str, int], ...] = ()

    def glyphs(self) -> list[str]:
        return [g for g, _ in self.entries]

    def count(self, glyph: str) -> int:
        for g, c in self.entries:
            if g == glyph:
                return c
        return 0

    @property
    def total(self) -> int:
        return sum(c for _, c in self.entries)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class Prototype:
    mean: tuple[float, ...]
    var: tuple[float, ...]
    weight: float


@dataclass(frozen=True)
class PrototypeModel:
    """Per-class clustered normalization-feature prototypes."""

    dim: int
    classes: dict[str, tuple[Prototype, ...]]

    def __post_init__(self):
        for glyph, protos in self.classes.items():
            total = sum(p.weight for p in protos)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"class {glyph!r} prototype weights sum to {total}")


@dataclass(frozen=True)
class MicroProtoModel:
    """Per-class quantized micro-feature templates and expected counts."""

    classes: dict[str, tuple[MicroFeature, ...]]
    expected_count: dict[str, int]

    def __post_init__(self):
        if set(self.classes) != set(self.expected_count):
            raise ValueError("template classes and expected counts disagree")
        for glyph, n in self.expected_count.items():
            if n < 1:
                raise ValueError(f"class {glyph!r} expected count must be >= 1")


@dataclass(frozen=True)
class TrainConfig:
    max_protos: int = 4  # normalization-feature clusters per class
    max_mf_protos: int = 16  # micro-feature templates per class


# ---------------------------------------------------------------------------
# Feature extraction

def _tight_crop(mask: np.ndarray) -> np.ndarray:
    rows = np.nonzero(mask.any(axis=1))[0]
    cols = np.nonzero(mask.any(axis=0))[0]
    return mask[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1]


def _cn_vector(mask: np.ndarray) -> tuple[float, float, float, float]:
    h, w = mask.shape
    rows, cols = np.nonzero(mask)
    aspect = w / (w + h)
    density = len(rows) / (w * h)
    centroid_x = (float(np.mean(cols)) + 0.5) / w
    centroid_y = (float(np.mean(h - 1 - rows)) + 0.5) / h
    return (aspect, density, centroid_x, centroid_y)


def _resample_closed(points: np.ndarray, n: int) -> np.ndarray | None:
    """Resample a closed polyline to n points equidistant in arc length."""
    deltas = np.diff(points, axis=0)
    seg_len = np.hypot(deltas[:, 0], deltas[:, 1])
    keep = seg_len > 0.0
    deltas, seg_len = deltas[keep], seg_len[keep]
    points = points[:-1][keep] if keep.any() else points[:0]
    total = float(seg_len.sum())
    if total <= 0.0:
        return None
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    targets = np.arange(n) * (total / n)
    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(seg_len) - 1)
    frac = (targets - cum[idx]) / seg_len[idx]
    return points[idx] + deltas[idx] * frac[:, None]


def _angle_diff(a: float, b: float) -> float:
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def _direction_sector(dx: float, dy: float) -> int:
    angle = math.degrees(math.atan2(dy, dx)) % 360.0
    return int((angle + 22.5) // 45.0) % 8


def _segments_from_contour(contour: np.ndarray, w: int, h: int) -> list[MicroFeature]:
    """Split one closed contour into straight-ish runs, one feature per run.

    The contour is resampled to a fixed number of arc-length-equidistant
    points and lightly smoothed (window fixed as a fraction of arc length,
    so raster staircase noise vanishes at every scale). A new run starts
    wherever the signed turning accumulated since the last corner exceeds
    the corner limit; oscillating staircase turns cancel out, real corners
    accumulate quickly.
    """
    # to pixel coordinates, y upward; padding offset of 1 removed
    xs = contour[:, 1] - 1.0
    ys = (h - 1.0) - (contour[:, 0] - 1.0)
    pts = np.column_stack([xs, ys])
    if np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    if len(pts) < 2:
        return []
    resampled = _resample_closed(np.vstack([pts, pts[:1]]), _RESAMPLE_POINTS)
    if resampled is None:
        return []
    kernel = np.array([0.15, 0.2, 0.3, 0.2, 0.15])
    stacked = np.stack([np.roll(resampled, s, axis=0) for s in (-2, -1, 0, 1, 2)])
    resampled = np.tensordot(kernel, stacked, axes=1)

    n = len(resampled)
    steps = np.roll(resampled, -1, axis=0) - resampled
    angles = np.degrees(np.arctan2(steps[:, 1], steps[:, 0]))
    turning = (angles - np.roll(angles, 1) + 180.0) % 360.0 - 180.0

    breaks = []
    accumulated = 0.0
    for i in range(1, n):
        accumulated += turning[i]
        if abs(accumulated) > _CORNER_DEGREES:
            breaks.append(i)
            accumulated = 0.0
    if not breaks:
        breaks = [0, n // 2]
    elif len(breaks) == 1:
        breaks.append((breaks[0] + n // 2) % n)
        breaks.sort()

    scale = max(w, h)
    feats = []
    for k, start in enumerate(breaks):
        end = breaks[k + 1] if k + 1 < len(breaks) else breaks[0] + n
        p0 = resampled[start % n]
        p1 = resampled[end % n]
        length = float(np.hypot(*(p1 - p0)))
        if length <= 0.0:
            continue
        mid = (p0 + p1) / 2.0
        feats.append(
            MicroFeature(
                x=min(1.0, max(0.0, (mid[0] + 0.5) / w)),
                y=min(1.0, max(0.0, (mid[1] + 0.5) / h)),
                dir=_direction_sector(p1[0] - p0[0], p1[1] - p0[1]),
                len=min(1.0, length / (math.sqrt(2.0) * scale)),
            )
        )
    return feats


def _features_from_mask(mask: np.ndarray) -> TrCharFeatures:
    if not mask.any():
        raise ValueError("cannot extract features from an empty mask")
    tight = _tight_crop(mask)
    cn = _cn_vector(tight)
    if int(tight.sum()) == 1:
        # degenerate one-pixel glyph: pinned single feature
        return TrCharFeatures(cn=cn, micro=(MicroFeature(0.5, 0.5, 0, 0.0),))
    h, w = tight.shape
    padded = np.pad(tight.astype(float), 1)
    micro: list[MicroFeature] = []
    for contour in measure.find_contours(padded, 0.5):
        micro.extend(_segments_from_contour(contour, w, h))
    if not micro:
        micro = [MicroFeature(0.5, 0.5, 0, 0.0)]
    return TrCharFeatures(cn=cn, micro=tuple(micro))


def extract_features(glyph: GlyphSample) -> TrCharFeatures:
    """Features of one glyph sample; the label is left unset."""
    return _features_from_mask(glyph.mask)


def emit_tr(page: PageImage, boxes: BoxFile) -> TrFeatureSet:
    """Crop each labeled box from the binarized page and extract its features.

    Boxes containing no ink are skipped with a UserWarning so the caller
    can reconcile counts.
    """
    bin_img = binarize(page)
    records = []
    for i, entry in enumerate(boxes.entries):
        b = entry.bbox
        window = bin_img.bits[b.row_slice(page.height), b.col_slice()]
        if window.size == 0 or not window.any():
            warnings.warn(f"box {i} ({entry.glyph!r}): no ink inside, record skipped")
            continue
        records.append(replace(_features_from_mask(window), glyph=entry.glyph))
    return TrFeatureSet(page_id=boxes.page_id or page.id, records=tuple(records))


def extract_unicharset(boxfiles: list[BoxFile]) -> Unicharset:
    """Distinct glyphs and total counts across box files, first seen first."""
    counts: dict[str, int] = {}
    for bf in boxfiles:
        for entry in bf.entries:
            counts[entry.glyph] = counts.get(entry.glyph, 0) + 1
    return Unicharset(entries=tuple(counts.items()))


# ---------------------------------------------------------------------------
# Deterministic k-means (lexicographic seed + farthest point, no RNG)

def _kmeans(points: np.ndarray, k: int, max_iter: int = 100):
    """Returns (centers, member-index-lists). Deterministic and order-free:
    points are sorted lexicographically before seeding."""
    order = np.lexsort(points.T[::-1])
    pts = points[order]
    uniq = np.unique(pts, axis=0)
    k = min(k, len(uniq))
    centers = [uniq[0]]
    # farthest-point seeding on the deduplicated, sorted points
    d2 = np.sum((uniq - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        far = int(np.argmax(d2))
        centers.append(uniq[far])
        d2 = np.minimum(d2, np.sum((uniq - uniq[far]) ** 2, axis=1))
    centers = np.array(centers)

    assign = None
    for _ in range(max_iter):
        dists = np.sum((pts[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_assign = np.argmin(dists, axis=1)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(k):
            members = pts[assign == c]
            if len(members):
                centers[c] = members.mean(axis=0)

    clusters = []
    for c in range(k):
        members = pts[assign == c]
        if len(members):
            clusters.append((centers[c], members))
    return clusters


def _group_by_glyph(trs: list[TrFeatureSet]) -> dict[str, list[TrCharFeatures]]:
    grouped: dict[str, list[TrCharFeatures]] = {}
    for tr in trs:
        for rec in tr.records:
            if rec.glyph is None:
                raise ValueError("training record has no glyph label")
            grouped.setdefault(rec.glyph, []).append(rec)
    if not grouped:
        raise ValueError("no training records supplied")
    return grouped


def cn_training(trs: list[TrFeatureSet], cfg: TrainConfig | None = None) -> PrototypeModel:
    """Cluster each class's normalization vectors into mean/variance prototypes."""
    cfg = cfg or TrainConfig()
    classes = {}
    for glyph, recs in sorted(_group_by_glyph(trs).items()):
        pts = np.array([r.cn for r in recs], dtype=float)
        k = max(1, min(cfg.max_protos, len(pts) // 2))
        protos = []
        for center, members in _kmeans(pts, k):
            var = np.maximum(members.var(axis=0), VARIANCE_FLOOR)
            protos.append(
                Prototype(
                    mean=tuple(float(v) for v in members.mean(axis=0)),
                    var=tuple(float(v) for v in var),
                    weight=len(members) / len(pts),
                )
            )
        classes[glyph] = tuple(protos)
    return PrototypeModel(dim=4, classes=classes)


def quantize(value: float, steps: int = QUANT_STEPS) -> float:
    return round(value * steps) / steps


def _embed_micro(feats: list[MicroFeature]) -> np.ndarray:
    """5-d embedding with the direction sector on a circle, so clustering
    treats sectors 7 and 0 as neighbors."""
    arr = np.empty((len(feats), 5), dtype=float)
    for i, f in enumerate(feats):
        theta = f.dir * (math.pi / 4.0)
        arr[i] = (f.x, f.y, f.len, 0.5 * math.cos(theta), 0.5 * math.sin(theta))
    return arr


def mf_training(trs: list[TrFeatureSet], cfg: TrainConfig | None = None) -> MicroProtoModel:
    """Pool each class's outline segments and cluster them into quantized templates."""
    cfg = cfg or TrainConfig()
    classes = {}
    expected = {}
    for glyph, recs in sorted(_group_by_glyph(trs).items()):
        pool = [f for r in recs for f in r.micro]
        pts = _embed_micro(pool)
        k = min(cfg.max_mf_protos, len(pts))
        protos = set()
        for center, _ in _kmeans(pts, k):
            sector = _direction_sector(center[3], center[4])
            protos.add(
                MicroFeature(
                    x=quantize(min(1.0, max(0.0, center[0]))),
                    y=quantize(min(1.0, max(0.0, center[1]))),
                    dir=sector,
                    len=quantize(min(1.0, max(0.0, center[2]))),
                )
            )
        classes[glyph] = tuple(sorted(protos, key=lambda f: (f.x, f.y, f.dir, f.len)))
        mean_count = sum(len(r.micro) for r in recs) / len(recs)
        expected[glyph] = max(1, int(math.floor(mean_count + 0.5)))
    return MicroProtoModel(classes=classes, expected_count=expected)


# ---------------------------------------------------------------------------
# File formats (text, UTF-8, LF)

def write_tr(trs: TrFeatureSet) -> bytes:
    lines = []
    for rec in trs.records:
        lines.append(f"char {rec.glyph} {len(rec.micro)}\n")
        for f in rec.micro:
            lines.append(f"mf {f.x:.6f} {f.y:.6f} {f.dir} {f.len:.6f}\n")
        lines.append("cn " + " ".join(f"{v:.6f}" for v in rec.cn) + "\n")
    return "".join(lines).encode("utf-8")


def read_tr(data: bytes | str, page_id: str = "") -> TrFeatureSet:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.split("\n")
    records = []
    i = 0
    while i < len(lines):
        if lines[i] == "":
            i += 1
            continue
        head = lines[i].split(" ")
        if head[0] != "char" or len(head) != 3:
            raise TrFormatError(i + 1, f"expected 'char <glyph> <count>', got {lines[i]!r}")
        glyph, count = head[1], int(head[2])
        micro = []
        for j in range(count):
            ln = i + 1 + j
            parts = lines[ln].split(" ") if ln < len(lines) else []
            if len(parts) != 5 or parts[0] != "mf":
                raise TrFormatError(ln + 1, "expected 'mf <x> <y> <dir> <len>'")
            micro.append(
                MicroFeature(float(parts[1]), float(parts[2]), int(parts[3]), float(parts[4]))
            )
        ln = i + 1 + count
        parts = lines[ln].split(" ") if ln < len(lines) else []
        if len(parts) != 5 or parts[0] != "cn":
            raise TrFormatError(ln + 1, "expected 'cn <v1> <v2> <v3> <v4>'")
        cn = tuple(float(p) for p in parts[1:])
        records.append(TrCharFeatures(cn=cn, micro=tuple(micro), glyph=glyph))
        i = ln + 1
    return TrFeatureSet(page_id=page_id, records=tuple(records))


def write_unicharset(uc: Unicharset) -> bytes:
    lines = [f"{len(uc.entries)}\n"]
    lines += [f"{g} {c}\n" for g, c in uc.entries]
    return "".join(lines).encode("utf-8")


def read_unicharset(data: bytes | str) -> Unicharset:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = [ln for ln in text.split("\n") if ln != ""]
    if not lines:
        raise TrFormatError(1, "missing entry count")
    try:
        n = int(lines[0])
    except ValueError:
        raise TrFormatError(1, f"bad entry count {lines[0]!r}") from None
    if len(lines) - 1 != n:
        raise TrFormatError(1, f"expected {n} entries, found {len(lines) - 1}")
    entries = []
    for i, ln in enumerate(lines[1:], start=2):
        parts = ln.split(" ")
        if len(parts) != 2 or len(parts[0]) != 1:
            raise TrFormatError(i, f"expected '<glyph> <count>', got {ln!r}")
        entries.append((parts[0], int(parts[1])))
    return Unicharset(entries=tuple(entries))


def write_normproto(model: PrototypeModel) -> bytes:
    lines = [f"{model.dim}\n"]
    for glyph, protos in model.classes.items():
        lines.append(f"class {glyph} {len(protos)}\n")
        for p in protos:
            nums = [repr(p.weight)] + [repr(v) for v in p.mean] + [repr(v) for v in p.var]
            lines.append("proto " + " ".join(nums) + "\n")
    return "".join(lines).encode("utf-8")


def read_normproto(data: bytes | str) -> PrototypeModel:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = [ln for ln in text.split("\n") if ln != ""]
    if not lines:
        raise TrFormatError(1, "missing dimension line")
    dim = int(lines[0])
    classes: dict[str, tuple[Prototype, ...]] = {}
    i = 1
    while i < len(lines):
        head = lines[i].split(" ")
        if head[0] != "class" or len(head) != 3:
            raise TrFormatError(i + 1, f"expected class header, got {lines[i]!r}")
        glyph, k = head[1], int(head[2])
        protos = []
        for j in range(k):
            ln = i + 1 + j
            parts = lines[ln].split(" ") if ln < len(lines) else []
            if len(parts) != 2 + 2 * dim or parts[0] != "proto":
                raise TrFormatError(ln + 1, "malformed prototype line")
            nums = [float(p) for p in parts[1:]]
            protos.append(
                Prototype(
                    weight=nums[0],
                    mean=tuple(nums[1 : 1 + dim]),
                    var=tuple(nums[1 + dim : 1 + 2 * dim]),
                )
            )
        classes[glyph] = tuple(protos)
        i += 1 + k
    return PrototypeModel(dim=dim, classes=classes)


def write_inttemp(model: MicroProtoModel) -> bytes:
    lines = []
    for glyph, protos in model.classes.items():
        lines.append(f"class {glyph} {len(protos)}\n")
        for f in protos:
            lines.append(f"mfp {f.x:.6f} {f.y:.6f} {f.dir} {f.len:.6f}\n")
    return "".join(lines).encode("utf-8")


def read_inttemp(data: bytes | str, expected_count: dict[str, int] | None = None):
    """Parse templates; pair with a pffmtable mapping to build the model."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = [ln for ln in text.split("\n") if ln != ""]
    classes: dict[str, tuple[MicroFeature, ...]] = {}
    i = 0
    while i < len(lines):
        head = lines[i].split(" ")
        if head[0] != "class" or len(head) != 3:
            raise TrFormatError(i + 1, f"expected class header, got {lines[i]!r}")
        glyph, k = head[1], int(head[2])
        protos = []
        for j in range(k):
            ln = i + 1 + j
            parts = lines[ln].split(" ") if ln < len(lines) else []
            if len(parts) != 5 or parts[0] != "mfp":
                raise TrFormatError(ln + 1, "expected 'mfp <x> <y> <dir> <len>'")
            protos.append(
                MicroFeature(float(parts[1]), float(parts[2]), int(parts[3]), float(parts[4]))
            )
        classes[glyph] = tuple(protos)
        i += 1 + k
    if expected_count is None:
        return classes
    return MicroProtoModel(classes=classes, expected_count=expected_count)


def write_pffmtable(model: MicroProtoModel) -> bytes:
    lines = [f"{glyph} {count}\n" for glyph, count in model.expected_count.items()]
    return "".join(lines).encode("utf-8")


def read_pffmtable(data: bytes | str) -> dict[str, int]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    table = {}
    for i, ln in enumerate(text.split("\n"), start=1):
        if ln == "":
            continue
        parts = ln.split(" ")
        if len(parts) != 2 or len(parts[0]) != 1:
            raise TrFormatError(i, f"expected '<glyph> <count>', got {ln!r}")
        table[parts[0]] = int(parts[1])
    return table


def clustering_log(model: MicroProtoModel) -> str:
    """Human-readable clustering summary; informational only."""
    out = ["micro-feature clustering summary", ""]
    for glyph in sorted(model.classes):
        protos = model.classes[glyph]
        out.append(
            f"class {glyph}: {len(protos)} templates, "
            f"expected {model.expected_count[glyph]} features per sample"
        )
        for f in protos:
            out.append(f"  ({f.x:.4f}, {f.y:.4f}) dir {f.dir} len {f.len:.4f}")
    out.append("")
    return "\n".join(out)

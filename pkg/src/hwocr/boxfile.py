"""Reader/writer for `.box` training label files and box generation.

Format: one character per line, `<glyph> <left> <bottom> <right> <top>`,
single spaces, LF line ends, coordinates measured from the image's
bottom-left corner. Parsing and serialization are bit-exact inverses on
well-formed data.
"""
from __future__ import annotations

from dataclasses import dataclass

from .imaging import BBox, PageImage, PageSegmentation

__all__ = [
    "BoxEntry",
    "BoxFile",
    "BoxFormatError",
    "Issue",
    "PLACEHOLDER_LABEL",
    "parse_boxfile",
    "serialize_boxfile",
    "make_boxes",
    "validate_boxes",
]

PLACEHOLDER_LABEL = "*"


class BoxFormatError(ValueError):
    """Malformed box-file line; carries the 1-based line number."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


@dataclass(frozen=True)
class BoxEntry:
    glyph: str
    bbox: BBox

    def __post_init__(self):
        if len(self.glyph) != 1:
            raise ValueError(f"glyph must be a single character, got {self.glyph!r}")


@dataclass(frozen=True)
class BoxFile:
    entries: tuple[BoxEntry, ...] = ()
    page_id: str = ""

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class Issue:
    """A finding from a validation pass. Errors block saving; warnings don't."""

    kind: str
    message: str
    severity: str = "warning"  # "warning" | "error"
    index: int | None = None


def _parse_coord(token: str, line_no: int) -> int:
    # ASCII digits only: locale- and sign-free by design
    if not token or not all("0" <= ch <= "9" for ch in token):
        raise BoxFormatError(line_no, f"non-integer coordinate {token!r}")
    return int(token)


def parse_boxfile(data: bytes | str, page_id: str = "") -> BoxFile:
    """Parse box-file text; raises BoxFormatError naming the bad line."""
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    else:
        text = data
    entries = []
    for line_no, line in enumerate(text.split("\n"), start=1):
        if line == "":
            continue
        fields = line.split(" ")
        if len(fields) != 5:
            raise BoxFormatError(line_no, f"expected 5 fields, got {len(fields)}")
        glyph = fields[0]
        if len(glyph) != 1:
            raise BoxFormatError(line_no, f"glyph must be one character, got {glyph!r}")
        left, bottom, right, top = (_parse_coord(f, line_no) for f in fields[1:])
        if left >= right:
            raise BoxFormatError(line_no, f"left {left} must be < right {right}")
        if bottom >= top:
            raise BoxFormatError(line_no, f"bottom {bottom} must be < top {top}")
        entries.append(BoxEntry(glyph, BBox(left, bottom, right, top)))
    return BoxFile(entries=tuple(entries), page_id=page_id)


def serialize_boxfile(bf: BoxFile) -> bytes:
    """One LF-terminated line per entry; empty file for zero entries."""
    lines = [
        f"{e.glyph} {e.bbox.left} {e.bbox.bottom} {e.bbox.right} {e.bbox.top}\n"
        for e in bf.entries
    ]
    return "".join(lines).encode("utf-8")


def make_boxes(seg: PageSegmentation, pack=None, cfg=None) -> BoxFile:
    """One entry per segmented glyph in reading order.

    With a trained language pack the recognizer's best class labels each
    box; otherwise every label is the placeholder '*' awaiting manual
    correction.
    """
    entries = []
    if pack is None:
        for glyph in seg.glyphs():
            entries.append(BoxEntry(PLACEHOLDER_LABEL, glyph.bbox))
    else:
        from .recognizer import RecogConfig, classify_glyph

        cfg = cfg or RecogConfig()
        for glyph in seg.glyphs():
            scored = classify_glyph(pack, glyph, cfg)
            label = scored[0].glyph if scored else PLACEHOLDER_LABEL
            entries.append(BoxEntry(label, glyph.bbox))
    return BoxFile(entries=tuple(entries), page_id=seg.page_id)


def validate_boxes(bf: BoxFile, page: PageImage) -> list[Issue]:
    """Report out-of-bounds boxes (errors), heavy overlaps and odd labels."""
    issues: list[Issue] = []
    for i, e in enumerate(bf.entries):
        b = e.bbox
        if b.left < 0 or b.bottom < 0 or b.right > page.width or b.top > page.height:
            issues.append(
                Issue(
                    kind="out-of-bounds",
                    severity="error",
                    index=i,
                    message=f"box {i} {(b.left, b.bottom, b.right, b.top)} "
                    f"exceeds page {page.width}x{page.height}",
                )
            )
        if not ("a" <= e.glyph <= "z"):
            issues.append(
                Issue(
                    kind="label",
                    index=i,
                    message=f"box {i} label {e.glyph!r} is not a lowercase letter",
                )
            )
    for i in range(len(bf.entries)):
        for j in range(i + 1, len(bf.entries)):
            iou = bf.entries[i].bbox.iou(bf.entries[j].bbox)
            if iou > 0.8:
                issues.append(
                    Issue(
                        kind="overlap",
                        index=i,
                        message=f"boxes {i} and {j} overlap with IoU {iou:.2f}",
                    )
                )
    return issues

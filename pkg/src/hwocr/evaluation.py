"""Score recognition output against box-file ground truth.

The aligner pairs output segments with ground-truth characters by bbox
overlap (dynamic program over both reading-ordered sequences); when boxes
are unavailable it falls back to label-based edit alignment. Counts follow
the character taxonomy: true classifications, misclassifications (which
include over-segmented characters), unsegmented characters (one output
covering several truth characters), and rejections, which are excluded
from the accuracy denominator:

    accuracy = 100 * true / (true + misclassified + unsegmented)
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .boxfile import BoxFile
from .imaging import BBox
from .recognizer import RecognitionResult

__all__ = [
    "GroundTruth",
    "AlignOp",
    "Alignment",
    "EvalReport",
    "DatasetManifest",
    "ManifestRow",
    "align",
    "compute_metrics",
    "char_frequency",
    "render_report",
    "report_records",
]

_MAX_MERGE = 4  # widest k considered for k:1 and 1:k pairings
_GROUP_PENALTY = 0.01  # per extra unit, so 1:1 wins cost ties


@dataclass(frozen=True)
class GroundTruth:
    """Reading-ordered labeled characters, with optional word starts."""

    chars: tuple[tuple[str, BBox | None], ...]
    word_starts: tuple[int, ...] | None = None
    page_id: str = ""

    def __post_init__(self):
        if self.word_starts is not None:
            starts = self.word_starts
            if list(starts) != sorted(set(starts)) or (starts and starts[0] != 0):
                raise ValueError("word starts must be strictly increasing from 0")
            if starts and starts[-1] >= max(1, len(self.chars)):
                raise ValueError("word start beyond the character sequence")

    @classmethod
    def from_boxfile(cls, bf: BoxFile, word_starts=None) -> "GroundTruth":
        return cls(
            chars=tuple((e.glyph, e.bbox) for e in bf.entries),
            word_starts=tuple(word_starts) if word_starts is not None else None,
            page_id=bf.page_id,
        )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(g for g, _ in self.chars)

    def __len__(self):
        return len(self.chars)


@dataclass(frozen=True)
class AlignOp:
    """One alignment event: spans are half-open index ranges."""

    kind: str  # match | substitute | merge | split | reject | spurious
    gt_span: tuple[int, int]
    out_span: tuple[int, int]

    @property
    def gt_size(self) -> int:
        return self.gt_span[1] - self.gt_span[0]

    @property
    def out_size(self) -> int:
        return self.out_span[1] - self.out_span[0]


@dataclass(frozen=True)
class Alignment:
    ops: tuple[AlignOp, ...]
    gt_labels: tuple[str, ...]
    out_labels: tuple[str, ...]


@dataclass(frozen=True)
class _OutSeg:
    label: str
    bbox: BBox | None
    rejected: bool


def _flatten_result(out: RecognitionResult) -> list[_OutSeg]:
    segs = []
    for word, char in out.chars():
        segs.append(
            _OutSeg(
                label=char.best.glyph,
                bbox=char.bbox,
                rejected=char.rejected or word.rejected,
            )
        )
    return segs


def _flatten_text(text: str) -> list[_OutSeg]:
    return [
        _OutSeg(label=ch, bbox=None, rejected=False)
        for ch in text
        if ch not in (" ", "\n", "\t")
    ]


def _iou(a: BBox, b: BBox) -> float:
    return a.iou(b)


def _union(boxes) -> BBox:
    out = boxes[0]
    for b in boxes[1:]:
        out = out.union(b)
    return out


def align(gt: GroundTruth, out: RecognitionResult | str) -> Alignment:
    """Pair output segments with ground-truth characters.

    Uses bbox overlap when both sides carry boxes, label edit alignment
    otherwise. Every truth character lands in exactly one op; merge spans
    count k characters, and a merge of width 1 records a character the
    engine produced no segment for.
    """
    segs = _flatten_result(out) if isinstance(out, RecognitionResult) else _flatten_text(out)
    gt_boxes = [b for _, b in gt.chars]
    box_mode = all(b is not None for b in gt_boxes) and all(
        s.bbox is not None for s in segs
    ) and (len(gt) > 0 and len(segs) > 0)

    n, m = len(gt.chars), len(segs)
    INF = float("inf")
    # dp[i][j]: best cost aligning gt[i:] with out[j:]
    dp = [[INF] * (m + 1) for _ in range(n + 1)]
    choice: list[list[tuple[int, int] | None]] = [[None] * (m + 1) for _ in range(n + 1)]
    dp[n][m] = 0.0

    def pair_cost(i: int, j: int) -> float:
        if not box_mode:
            return 0.0 if gt.chars[i][0] == segs[j].label else 1.0
        iou = _iou(gt_boxes[i], segs[j].bbox)
        return 1.0 - iou if iou > 0.0 else INF

    def merge_cost(i: int, k: int, j: int) -> float:
        if not box_mode:
            return INF
        u = _union(gt_boxes[i : i + k])
        iou = _iou(u, segs[j].bbox)
        return k * (1.0 - iou) + _GROUP_PENALTY * (k - 1) if iou > 0.0 else INF

    def split_cost(i: int, j: int, k: int) -> float:
        if not box_mode:
            return INF
        u = _union([s.bbox for s in segs[j : j + k]])
        iou = _iou(gt_boxes[i], u)
        return k * (1.0 - iou) + _GROUP_PENALTY * (k - 1) if iou > 0.0 else INF

    for i in range(n, -1, -1):
        for j in range(m, -1, -1):
            if i == n and j == m:
                continue
            best, pick = INF, None
            if i < n and j < m:
                c = pair_cost(i, j) + dp[i + 1][j + 1]
                if c < best:
                    best, pick = c, (1, 1)
                for k in range(2, min(_MAX_MERGE, n - i) + 1):
                    c = merge_cost(i, k, j) + dp[i + k][j + 1]
                    if c < best:
                        best, pick = c, (k, 1)
                for k in range(2, min(_MAX_MERGE, m - j) + 1):
                    c = split_cost(i, j, k) + dp[i + 1][j + k]
                    if c < best:
                        best, pick = c, (1, k)
            if i < n:
                c = 1.0 + dp[i + 1][j]
                if c < best:
                    best, pick = c, (1, 0)
            if j < m:
                c = 1.0 + dp[i][j + 1]
                if c < best:
                    best, pick = c, (0, 1)
            dp[i][j], choice[i][j] = best, pick

    ops = []
    i = j = 0
    while i < n or j < m:
        gi, oj = choice[i][j]
        if gi >= 1 and oj == 1:
            span = segs[j]
            if span.rejected:
                kind = "reject"
            elif gi > 1:
                kind = "merge"
            elif gt.chars[i][0] == span.label:
                kind = "match"
            else:
                kind = "substitute"
            ops.append(AlignOp(kind, (i, i + gi), (j, j + 1)))
        elif gi == 1 and oj > 1:
            group = segs[j : j + oj]
            kind = "reject" if all(s.rejected for s in group) else "split"
            ops.append(AlignOp(kind, (i, i + 1), (j, j + oj)))
        elif gi == 1 and oj == 0:
            # truth character with no output segment: unsegmented
            ops.append(AlignOp("merge", (i, i + 1), (j, j)))
        else:
            ops.append(AlignOp("spurious", (i, i), (j, j + 1)))
        i += gi
        j += oj

    return Alignment(
        ops=tuple(ops),
        gt_labels=gt.labels,
        out_labels=tuple(s.label for s in segs),
    )


# ---------------------------------------------------------------------------
# Metrics

@dataclass(frozen=True)
class EvalReport:
    """Character-taxonomy counts and the derived accuracy."""

    true_count: int = 0
    misclassified: int = 0
    unsegmented: int = 0
    rejected: int = 0
    spurious: int = 0
    per_char: dict = field(default_factory=dict)  # glyph -> [success, failure, rejected]

    @property
    def scored(self) -> int:
        return self.true_count + self.misclassified + self.unsegmented

    @property
    def total(self) -> int:
        return self.scored + self.rejected

    @property
    def accuracy(self) -> float | None:
        if self.scored == 0:
            return None
        return 100.0 * self.true_count / self.scored

    def __add__(self, other: "EvalReport") -> "EvalReport":
        merged = {g: list(v) for g, v in self.per_char.items()}
        for g, v in other.per_char.items():
            slot = merged.setdefault(g, [0, 0, 0])
            for idx in range(3):
                slot[idx] += v[idx]
        return EvalReport(
            true_count=self.true_count + other.true_count,
            misclassified=self.misclassified + other.misclassified,
            unsegmented=self.unsegmented + other.unsegmented,
            rejected=self.rejected + other.rejected,
            spurious=self.spurious + other.spurious,
            per_char=merged,
        )

    def percentages(self) -> dict[str, float | None]:
        if self.scored == 0:
            return {"success": None, "misclassified": None, "unsegmented": None}
        return {
            "success": 100.0 * self.true_count / self.scored,
            "misclassified": 100.0 * self.misclassified / self.scored,
            "unsegmented": 100.0 * self.unsegmented / self.scored,
        }

    @property
    def rejection_rate(self) -> float | None:
        if self.total == 0:
            return None
        return 100.0 * self.rejected / self.total


def compute_metrics(alignment: Alignment) -> EvalReport:
    """Tally alignment ops into the character taxonomy.

    Split characters count as misclassifications; merge spans count every
    covered character as unsegmented; rejected spans are excluded from the
    accuracy denominator entirely.
    """
    true_count = misclassified = unsegmented = rejected = spurious = 0
    per_char: dict[str, list[int]] = {}

    def bucket(glyph: str) -> list[int]:
        return per_char.setdefault(glyph, [0, 0, 0])

    for op in alignment.ops:
        span_glyphs = alignment.gt_labels[op.gt_span[0] : op.gt_span[1]]
        if op.kind == "match":
            true_count += 1
            bucket(span_glyphs[0])[0] += 1
        elif op.kind == "substitute":
            misclassified += 1
            bucket(span_glyphs[0])[1] += 1
        elif op.kind == "split":
            misclassified += 1
            bucket(span_glyphs[0])[1] += 1
        elif op.kind == "merge":
            unsegmented += op.gt_size
            for g in span_glyphs:
                bucket(g)[1] += 1
        elif op.kind == "reject":
            rejected += op.gt_size
            for g in span_glyphs:
                bucket(g)[2] += 1
        elif op.kind == "spurious":
            spurious += 1
        else:
            raise ValueError(f"unknown alignment op kind {op.kind!r}")

    report = EvalReport(
        true_count=true_count,
        misclassified=misclassified,
        unsegmented=unsegmented,
        rejected=rejected,
        spurious=spurious,
        per_char=per_char,
    )
    if report.total != len(alignment.gt_labels):
        raise AssertionError(
            f"alignment lost characters: {report.total} != {len(alignment.gt_labels)}"
        )
    return report


def char_frequency(boxfiles) -> dict[str, int]:
    """Glyph histogram across box files."""
    counts: dict[str, int] = {}
    for bf in boxfiles:
        for e in bf.entries:
            counts[e.glyph] = counts.get(e.glyph, 0) + 1
    return counts


# ---------------------------------------------------------------------------
# Manifest and report rendering

@dataclass(frozen=True)
class ManifestRow:
    user: str
    split: str  # "train" | "test"
    dataset: str  # "Dataset-1" (isolated) | "Dataset-2" (free-flow)
    chars: int
    words: int = 0
    pages: tuple[str, ...] = ()

    def __post_init__(self):
        if self.chars < 0 or self.words < 0:
            raise ValueError("manifest counts must be non-negative")


@dataclass(frozen=True)
class DatasetManifest:
    rows: tuple[ManifestRow, ...] = ()

    def users(self) -> list[str]:
        seen = []
        for r in self.rows:
            if r.user not in seen:
                seen.append(r.user)
        return seen

    def select(self, user: str, split: str, dataset: str | None = None):
        return [
            r
            for r in self.rows
            if r.user == user and r.split == split and (dataset is None or r.dataset == dataset)
        ]

    def total_chars(self, user: str, split: str) -> int:
        return sum(r.chars for r in self.select(user, split))

    def to_json(self) -> str:
        return json.dumps(
            [
                {
                    "user": r.user,
                    "split": r.split,
                    "dataset": r.dataset,
                    "chars": r.chars,
                    "words": r.words,
                    "pages": list(r.pages),
                }
                for r in self.rows
            ],
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "DatasetManifest":
        return cls(
            rows=tuple(
                ManifestRow(
                    user=r["user"],
                    split=r["split"],
                    dataset=r["dataset"],
                    chars=r["chars"],
                    words=r.get("words", 0),
                    pages=tuple(r.get("pages", ())),
                )
                for r in json.loads(text)
            )
        )


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.2f}"


_ROW_LABELS = (
    ("Successful Recognition", "success"),
    ("Misclassification", "misclassified"),
    ("Segmentation Failure", "unsegmented"),
)


def render_report(
    per_user: dict[str, dict[str, EvalReport]],
    manifest: DatasetManifest | None = None,
) -> str:
    """Plain-text per-user performance tables plus a sample-distribution table.

    Rejection is reported as a percentage of all truth characters (the
    other three rows are percentages of the non-rejected pool and sum
    to 100).
    """
    out = [
        "Recognition performance",
        "(rejection % is over all truth characters; other rows are % of scored characters)",
        "",
    ]
    for user, datasets in per_user.items():
        names = sorted(datasets)
        overall = None
        for report in datasets.values():
            overall = report if overall is None else overall + report
        columns = names + ["Overall"] if len(names) > 1 else names
        reports = {**datasets, "Overall": overall}

        width = max(len("Successful Recognition") + 2, 24)
        col_w = max(max((len(c) for c in columns), default=9) + 2, 11)
        out.append(f"-- {user} --")
        out.append(" " * width + "".join(c.rjust(col_w) for c in columns))
        for label, key in _ROW_LABELS:
            cells = [_fmt(reports[c].percentages()[key]) for c in columns]
            out.append(label.ljust(width) + "".join(c.rjust(col_w) for c in cells))
        cells = [_fmt(reports[c].rejection_rate) for c in columns]
        out.append("Rejection".ljust(width) + "".join(c.rjust(col_w) for c in cells))
        out.append("")

    if manifest is not None:
        out.append("Sample distribution")
        header = ["user", "split", "isolated chars", "free-flow chars", "free-flow words", "total chars"]
        out.append("  ".join(h.rjust(16) for h in header))
        for user in manifest.users():
            for split in ("train", "test"):
                rows = manifest.select(user, split)
                if not rows:
                    continue
                iso = sum(r.chars for r in rows if r.dataset == "Dataset-1")
                ff = sum(r.chars for r in rows if r.dataset == "Dataset-2")
                ffw = sum(r.words for r in rows if r.dataset == "Dataset-2")
                cells = [user, split, str(iso), str(ff), str(ffw), str(iso + ff)]
                out.append("  ".join(c.rjust(16) for c in cells))
        out.append("")
    return "\n".join(out)


def report_records(per_user: dict[str, dict[str, EvalReport]]) -> list[dict]:
    """Machine-readable rows: one record per user per dataset plus overall."""
    records = []
    for user, datasets in per_user.items():
        overall = None
        for name in sorted(datasets):
            report = datasets[name]
            overall = report if overall is None else overall + report
            records.append(
                {
                    "user": user,
                    "dataset": name,
                    "ct": report.true_count,
                    "cm": report.misclassified,
                    "cs": report.unsegmented,
                    "rejected": report.rejected,
                    "accuracy": report.accuracy,
                }
            )
        if overall is not None and len(datasets) > 1:
            records.append(
                {
                    "user": user,
                    "dataset": "Overall",
                    "ct": overall.true_count,
                    "cm": overall.misclassified,
                    "cs": overall.unsegmented,
                    "rejected": overall.rejected,
                    "accuracy": overall.accuracy,
                }
            )
    return records

"""Static character classification and page recognition against a language pack.

Scoring is two-stage: a class pruner keeps classes whose expected
outline-segment count is within +/-50% of the glyph's, then survivors are
rated 0.4 * exp(-mahalanobis^2/2) on the normalization features plus
0.6 * (fraction of glyph segments matching a class template). Characters
below the reject threshold, and words where most characters fall below
it, are withheld from the output text.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .imaging import BBox, GlyphSample, PageImage, SegConfig, binarize, segment_page
from .langpack import LanguagePack
from .lexicon import AmbigTable
from .training import VARIANCE_FLOOR, extract_features

__all__ = [
    "ScoredLabel",
    "CharResult",
    "WordResult",
    "RecognitionResult",
    "RecogConfig",
    "AmbigWarning",
    "classify_glyph",
    "recognize_page",
    "flag_ambiguities",
    "REJECTED_MARK",
]

REJECTED_MARK = "~"


@dataclass(frozen=True)
class ScoredLabel:
    glyph: str
    rating: float

    def __post_init__(self):
        if not (0.0 <= self.rating <= 1.0):
            raise ValueError(f"rating must be in [0,1], got {self.rating}")


@dataclass(frozen=True)
class CharResult:
    bbox: BBox
    best: ScoredLabel
    alternatives: tuple[ScoredLabel, ...]
    rejected: bool


@dataclass(frozen=True)
class WordResult:
    bbox: BBox
    chars: tuple[CharResult, ...]
    rejected: bool = False

    @property
    def text(self) -> str:
        return "".join(c.best.glyph for c in self.chars if not c.rejected)

    def debug_text(self) -> str:
        if self.rejected:
            return REJECTED_MARK * len(self.chars)
        return "".join(
            REJECTED_MARK if c.rejected else c.best.glyph for c in self.chars
        )


@dataclass(frozen=True)
class RecognitionResult:
    page_id: str
    lines: tuple[tuple[WordResult, ...], ...]

    @property
    def text(self) -> str:
        rendered = []
        for line in self.lines:
            words = [w.text for w in line if not w.rejected and w.text]
            rendered.append(" ".join(words))
        return "\n".join(rendered)

    @property
    def debug_text(self) -> str:
        return "\n".join(" ".join(w.debug_text() for w in line) for line in self.lines)

    def chars(self):
        for line in self.lines:
            for word in line:
                for c in word.chars:
                    yield word, c

    def to_dict(self) -> dict:
        return {
            "page_id": self.page_id,
            "lines": [
                [
                    {
                        "rejected": w.rejected,
                        "chars": [
                            {
                                "glyph": c.best.glyph,
                                "rating": c.best.rating,
                                "bbox": [c.bbox.left, c.bbox.bottom, c.bbox.right, c.bbox.top],
                                "rejected": c.rejected,
                                "alternatives": [
                                    [a.glyph, a.rating] for a in c.alternatives
                                ],
                            }
                            for c in w.chars
                        ],
                    }
                    for w in line
                ]
                for line in self.lines
            ],
            "text": self.text,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RecognitionResult":
        lines = []
        for line in payload["lines"]:
            words = []
            for w in line:
                chars = tuple(
                    CharResult(
                        bbox=BBox(*c["bbox"]),
                        best=ScoredLabel(c["glyph"], c["rating"]),
                        alternatives=tuple(
                            ScoredLabel(g, r) for g, r in c["alternatives"]
                        ),
                        rejected=c["rejected"],
                    )
                    for c in w["chars"]
                )
                bbox = chars[0].bbox
                for c in chars[1:]:
                    bbox = bbox.union(c.bbox)
                words.append(WordResult(bbox=bbox, chars=chars, rejected=w["rejected"]))
            lines.append(tuple(words))
        return cls(page_id=payload["page_id"], lines=tuple(lines))


@dataclass(frozen=True)
class RecogConfig:
    weight_cn: float = 0.4
    weight_mf: float = 0.6
    reject_threshold: float = 0.35
    word_reject_fraction: float = 0.5
    use_dict: bool = False
    dict_margin: float = 0.05
    dict_beam: int = 64
    mf_match_grid: int = 16  # match-time quantization steps per unit
    mf_match_distance: int = 2  # max grid steps (Chebyshev, dir circular)
    max_alternatives: int = 5
    seg: SegConfig = field(default_factory=SegConfig)


@dataclass(frozen=True)
class AmbigWarning:
    position: int
    wrong: str
    right: str

    @property
    def message(self) -> str:
        return f"offset {self.position}: {self.wrong!r} is easily confused with {self.right!r}"


class _PackScorer:
    """Per-pack arrays for fast repeated scoring."""

    def __init__(self, pack: LanguagePack, cfg: RecogConfig):
        if not pack.proto_model.classes or not pack.micro_model.classes:
            raise ValueError(f"pack {pack.lang!r} has no trained classes")
        self.cfg = cfg
        grid = cfg.mf_match_grid
        self.classes = sorted(pack.proto_model.classes)
        self.cn_protos = {}
        self.mf_protos = {}
        self.expected = pack.micro_model.expected_count
        for glyph in self.classes:
            protos = pack.proto_model.classes[glyph]
            self.cn_protos[glyph] = (
                np.array([p.mean for p in protos]),
                np.maximum(np.array([p.var for p in protos]), VARIANCE_FLOOR),
            )
            mfs = pack.micro_model.classes.get(glyph, ())
            q = np.array(
                [
                    (
                        np.rint(f.x * grid),
                        np.rint(f.y * grid),
                        np.rint(f.len * grid),
                        f.dir,
                    )
                    for f in mfs
                ],
                dtype=np.int64,
            ).reshape(len(mfs), 4)
            self.mf_protos[glyph] = q

    def score(self, feats) -> list[ScoredLabel]:
        cfg = self.cfg
        grid = cfg.mf_match_grid
        n_mf = len(feats.micro)
        glyph_q = np.array(
            [
                (np.rint(f.x * grid), np.rint(f.y * grid), np.rint(f.len * grid), f.dir)
                for f in feats.micro
            ],
            dtype=np.int64,
        )
        cn = np.array(feats.cn)
        scored = []
        for glyph in self.classes:
            expected = self.expected.get(glyph)
            if expected is None or not (0.5 * n_mf <= expected <= 1.5 * n_mf):
                continue
            means, variances = self.cn_protos[glyph]
            d2 = np.sum((cn - means) ** 2 / variances, axis=1)
            s_cn = float(np.exp(-0.5 * d2.min()))

            protos = self.mf_protos[glyph]
            if len(protos) == 0:
                s_mf = 0.0
            else:
                diff = np.abs(glyph_q[:, None, :3] - protos[None, :, :3])
                ddir = np.abs(glyph_q[:, None, 3] - protos[None, :, 3])
                ddir = np.minimum(ddir, 8 - ddir)
                dist = np.maximum(diff.max(axis=2), ddir)
                s_mf = float(np.mean(dist.min(axis=1) <= cfg.mf_match_distance))

            rating = cfg.weight_cn * s_cn + cfg.weight_mf * s_mf
            scored.append(ScoredLabel(glyph, min(1.0, max(0.0, rating))))
        scored.sort(key=lambda s: (-s.rating, s.glyph))
        return scored


def classify_glyph(
    pack: LanguagePack, glyph: GlyphSample, cfg: RecogConfig | None = None
) -> list[ScoredLabel]:
    """Rate every surviving class for one glyph, best first."""
    cfg = cfg or RecogConfig()
    return _PackScorer(pack, cfg).score(extract_features(glyph))


def _dict_rescore(word: WordResult, dawg, cfg: RecogConfig) -> WordResult:
    """Among word readings rated within the margin of the best, prefer one
    the dictionary accepts. Only the kept (non-rejected) characters vary."""
    slots = [i for i, c in enumerate(word.chars) if not c.rejected]
    if not slots:
        return word
    beams: list[tuple[float, tuple[str, ...]]] = [(0.0, ())]
    for i in slots:
        char = word.chars[i]
        options = [a for a in char.alternatives if a.rating >= char.best.rating - cfg.dict_margin]
        if not options:
            options = [char.best]
        grown = [
            (total + opt.rating, picks + (opt.glyph,))
            for total, picks in beams
            for opt in options
        ]
        grown.sort(key=lambda t: (-t[0], t[1]))
        beams = grown[: cfg.dict_beam]
    best_total = beams[0][0]
    chosen = None
    for total, picks in beams:
        if total < best_total - cfg.dict_margin:
            break
        if dawg.accepts("".join(picks)):
            chosen = picks
            break
    if chosen is None or "".join(chosen) == word.text:
        return word
    new_chars = list(word.chars)
    for slot, glyph in zip(slots, chosen):
        char = new_chars[slot]
        pick = next(a for a in char.alternatives if a.glyph == glyph)
        new_chars[slot] = replace(char, best=pick)
    return replace(word, chars=tuple(new_chars))


def recognize_page(
    pack: LanguagePack, page: PageImage, cfg: RecogConfig | None = None
) -> RecognitionResult:
    """Segment a page and classify every glyph; empty page gives an empty result."""
    cfg = cfg or RecogConfig()
    scorer = _PackScorer(pack, cfg)
    seg = segment_page(binarize(page), cfg.seg)

    lines = []
    for line in seg.lines:
        words = []
        for word in line.words:
            chars = []
            for glyph in word.glyphs:
                scored = scorer.score(extract_features(glyph))
                if scored:
                    best = scored[0]
                    rejected = best.rating < cfg.reject_threshold
                else:
                    best = ScoredLabel("*", 0.0)
                    rejected = True
                chars.append(
                    CharResult(
                        bbox=glyph.bbox,
                        best=best,
                        alternatives=tuple(scored[: cfg.max_alternatives]),
                        rejected=rejected,
                    )
                )
            n_rejected = sum(1 for c in chars if c.rejected)
            word_rejected = n_rejected > cfg.word_reject_fraction * len(chars)
            result = WordResult(bbox=word.bbox, chars=tuple(chars), rejected=word_rejected)
            if cfg.use_dict and not word_rejected and not pack.word_dawg.is_empty:
                result = _dict_rescore(result, pack.word_dawg, cfg)
            words.append(result)
        lines.append(tuple(words))
    return RecognitionResult(page_id=page.id, lines=tuple(lines))


def flag_ambiguities(result: RecognitionResult, ambigs: AmbigTable) -> list[AmbigWarning]:
    """Warn wherever a confusable sequence occurs in the text; never edits it."""
    warnings = []
    text = result.text
    for rule in ambigs.rules:
        start = 0
        while True:
            pos = text.find(rule.wrong, start)
            if pos < 0:
                break
            warnings.append(AmbigWarning(position=pos, wrong=rule.wrong, right=rule.right))
            start = pos + 1
    warnings.sort(key=lambda w: (w.position, w.wrong))
    return warnings

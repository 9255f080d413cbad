"""Acceptance criteria, one test per criterion, each printing a PASS line.

The end-to-end criterion builds three per-user packs through the CLI
pipeline exactly as the README describes (makebox, correction, train,
cntraining, mftraining, unicharset-extract, pack, recognize, eval) on
synthetic pages rendered in three distinct typefaces with per-sample
jitter, then scores held-out pages per user and across users.
"""
import json
import random
import string
import time

import numpy as np
import pytest

from hwocr.boxfile import BoxEntry, BoxFile, BoxFormatError, parse_boxfile, serialize_boxfile
from hwocr.cli import dispatch
from hwocr.evaluation import (
    AlignOp,
    Alignment,
    DatasetManifest,
    GroundTruth,
    ManifestRow,
    align,
    compute_metrics,
    render_report,
)
from hwocr.imaging import BBox, BinaryImage, binarize, save_page, segment_page
from hwocr.langpack import (
    PACK_FILE_NAMES,
    PackLoadError,
    assemble_pack,
    load_pack,
    pack_file_path,
    semantic_equal,
)
from hwocr.lexicon import WordList, build_dawg, deserialize_dawg, serialize_dawg
from hwocr.recognizer import RecognitionResult
from hwocr.synth import render_page
from hwocr.training import (
    MicroFeature,
    MicroProtoModel,
    Prototype,
    PrototypeModel,
    Unicharset,
)
from test_lexicon import minimal_dfa_size


def passed(name):
    print(f"PASS: {name}")


# ---------------------------------------------------------------------------
# 1. Metric arithmetic

def counts_alignment(ct, cm, cs, rejected=0):
    ops, labels, i, j = [], [], 0, 0

    def push(kind, gw, ow):
        nonlocal i, j
        ops.append(AlignOp(kind, (i, i + gw), (j, j + ow)))
        labels.extend("x" * gw)
        i += gw
        j += ow

    for _ in range(ct):
        push("match", 1, 1)
    for _ in range(cm):
        push("substitute", 1, 1)
    for _ in range(cs):
        push("merge", 1, 0)
    for _ in range(rejected):
        push("reject", 1, 1)
    return Alignment(ops=tuple(ops), gt_labels=tuple(labels), out_labels=("y",) * j)


def test_metric_arithmetic():
    start = time.monotonic()
    overall_user1 = compute_metrics(counts_alignment(8792, 1152, 56))
    assert overall_user1.accuracy == pytest.approx(87.92, abs=0.005)
    overall_system = compute_metrics(counts_alignment(7839, 1065, 1096))
    assert overall_system.accuracy == pytest.approx(78.39, abs=0.005)

    text = render_report(
        {
            "user-1": {
                "Dataset-1": compute_metrics(counts_alignment(995, 43, 5, 64)),
                "Dataset-2": compute_metrics(counts_alignment(832, 162, 6, 43)),
            }
        }
    )
    rows = {}
    for label in ("Successful Recognition", "Misclassification", "Segmentation Failure"):
        line = next(ln for ln in text.splitlines() if ln.startswith(label))
        rows[label] = [float(v) for v in line[len(label):].split()]
    for col in range(3):
        assert sum(rows[label][col] for label in rows) == pytest.approx(100.0, abs=0.02)
    assert time.monotonic() - start < 1.0
    passed("metric arithmetic reproduces the reference accuracy figures")


# ---------------------------------------------------------------------------
# 2. Manifest echo

REFERENCE_DISTRIBUTION = [
    ("user-1", "train", 1185, 659, 137, 1844),
    ("user-1", "test", 442, 691, 120, 1133),
    ("user-2", "train", 1006, 529, 130, 1535),
    ("user-2", "test", 468, 718, 128, 1186),
    ("user-3", "train", 588, 525, 169, 1113),
    ("user-3", "test", 260, 944, 161, 1204),
]


def test_manifest_echo():
    start = time.monotonic()
    rows = []
    for user, split, iso, ff, ffw, _ in REFERENCE_DISTRIBUTION:
        rows.append(ManifestRow(user=user, split=split, dataset="Dataset-1", chars=iso))
        rows.append(ManifestRow(user=user, split=split, dataset="Dataset-2", chars=ff, words=ffw))
    manifest = DatasetManifest(rows=tuple(rows))
    expected_totals = [1844, 1133, 1535, 1186, 1113, 1204]
    got = [manifest.total_chars(u, s) for u, s, *_ in REFERENCE_DISTRIBUTION]
    assert got == expected_totals
    rendered = render_report({}, manifest=manifest)
    for total in expected_totals:
        assert str(total) in rendered
    assert time.monotonic() - start < 1.0
    passed("manifest echo reproduces the training/test sample totals")


# ---------------------------------------------------------------------------
# 3. Box codec

def test_box_codec():
    start = time.monotonic()
    rng = random.Random(12345)
    glyph_pool = string.ascii_lowercase + "*#?"
    for _ in range(1000):
        entries = []
        for _ in range(rng.randrange(0, 20)):
            left, bottom = rng.randrange(0, 900), rng.randrange(0, 900)
            entries.append(
                BoxEntry(
                    rng.choice(glyph_pool),
                    BBox(left, bottom, left + rng.randrange(1, 80), bottom + rng.randrange(1, 80)),
                )
            )
        bf = BoxFile(entries=tuple(entries), page_id="r")
        data = serialize_boxfile(bf)
        assert parse_boxfile(data, page_id="r") == bf  # parse . serialize
        assert serialize_boxfile(parse_boxfile(data, page_id="r")) == data  # serialize . parse

    malformed = [
        (b"a 1 2 3\n", 1),
        (b"a 1 2 3 4 5\n", 1),
        (b"ab 1 2 3 4\n", 1),
        (b"a x 2 3 4\n", 1),
        (b"a 1 2 3 4.5\n", 1),
        (b"a -1 2 3 4\n", 1),
        (b"a 5 2 3 4\n", 1),
        (b"a 1 8 3 4\n", 1),
        (b"a 1 2 3 4\nz 9 9 8 10\n", 2),
        (b"a 1 2 3 4\nb 5 6 7 8\nc 1 2  3 4\n", 3),
    ]
    for data, line_no in malformed:
        with pytest.raises(BoxFormatError) as err:
            parse_boxfile(data)
        assert err.value.line_no == line_no
    assert time.monotonic() - start < 1.0
    passed("box codec: 1000 bit-exact round trips, 10 malformed lines rejected")


# ---------------------------------------------------------------------------
# 4. DAWG oracle

def test_dawg_oracle():
    start = time.monotonic()
    rng = random.Random(777)
    alphabet = string.ascii_lowercase

    def random_word():
        return "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 12)))

    for case in range(50):
        size = rng.randint(0, 200) if case < 30 else rng.randint(200, 1000)
        vocab = {random_word() for _ in range(size)}
        dawg = build_dawg(sorted(vocab))
        for w in vocab:
            assert dawg.accepts(w)
        misses = 0
        while misses < 10 * max(1, len(vocab)) // 1:
            w = random_word()
            if w not in vocab:
                assert not dawg.accepts(w)
                misses += 1
            if misses >= 10 * max(1, min(len(vocab), 100)):
                break
        if len(vocab) <= 200:
            assert dawg.node_count == minimal_dfa_size(vocab)
        restored = deserialize_dawg(serialize_dawg(dawg))
        assert sorted(restored.iter_words()) == sorted(vocab)
    assert time.monotonic() - start < 30.0
    passed("dawg oracle: language equality, minimality, serialization")


# ---------------------------------------------------------------------------
# 5. Segmentation ground truth

def test_segmentation_ground_truth(fonts):
    start = time.monotonic()
    rng = random.Random(4242)
    styles = list(fonts)
    for layout in range(20):
        rows = []
        for _ in range(rng.randint(2, 5)):
            words = [
                "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(2, 5)))
                for _ in range(rng.randint(1, 3))
            ]
            rows.append(" ".join(words))
        page, boxes = render_page(
            rows,
            fonts[styles[layout % 3]],
            max_rotation=2.0,
            speckles=3,
            seed=9000 + layout,
            page_id=f"layout{layout}",
        )
        seg = segment_page(binarize(page))
        assert len(seg.lines) == len(rows)
        for line, row in zip(seg.lines, rows):
            assert len(line.words) == len(row.split())
            assert sum(len(w.glyphs) for w in line.words) == len(row.replace(" ", ""))
        assert seg.glyph_count == len(boxes)

    # dotted-glyph fixture: stem with a jittered dot above
    merged = 0
    trials = 100
    jrng = random.Random(11)
    for _ in range(trials):
        stem_w, stem_h = jrng.randint(3, 5), jrng.randint(12, 18)
        dot = jrng.randint(2, 4)
        gap = jrng.randint(2, stem_h // 3)
        # keep the construction's premise: >= 50% of the narrower span overlaps
        need = (min(dot, stem_w) + 1) // 2
        dx = jrng.randint(need - dot, stem_w - need)
        height = stem_h + gap + dot + 8
        bits = np.zeros((height, stem_w + 8), dtype=bool)
        x0 = 4
        bits[height - 4 - stem_h : height - 4, x0 : x0 + stem_w] = True
        top = height - 4 - stem_h - gap
        bits[top - dot : top, max(0, x0 + dx) : max(0, x0 + dx) + dot] = True
        seg = segment_page(
            BinaryImage(width=bits.shape[1], height=bits.shape[0], bits=bits),
        )
        if seg.glyph_count == 1:
            merged += 1
    assert merged >= 95
    assert time.monotonic() - start < 30.0
    passed(f"segmentation ground truth: 20 layouts exact, dot merge {merged}/100")


# ---------------------------------------------------------------------------
# 6 + 7. End-to-end multi-user experiment through the CLI

ALPHABET_ROWS = ["abcdefghijklm", "nopqrstuvwxyz"]
USERS = {"us1": "sans", "us2": "serif", "us3": "mono"}
TRAIN_SEEDS = {"us1": 101, "us2": 202, "us3": 303}
TEST_SEEDS = {"us1": 5101, "us2": 5202, "us3": 5303}
TRAIN_PAGES = 10  # 7 alphabet repetitions each: 70 samples per class
REPS_PER_PAGE = 7


@pytest.fixture(scope="module")
def multiuser(tmp_path_factory, fonts):
    t0 = time.monotonic()
    root = tmp_path_factory.mktemp("e2e")
    tessdata = root / "tessdata"
    users = {}
    for lang, style in USERS.items():
        udir = root / lang
        udir.mkdir()
        tr_paths, box_paths = [], []
        for p in range(TRAIN_PAGES):
            rows = ALPHABET_ROWS * REPS_PER_PAGE
            page, boxes = render_page(
                rows,
                fonts[style],
                max_rotation=3.0,
                speckles=4,
                seed=TRAIN_SEEDS[lang] + p,
                page_id=f"{lang}-train-{p}",
            )
            img = udir / f"train{p}.png"
            save_page(page, img)
            if p == 0:
                # first pass produces placeholder labels that a human corrects
                assert dispatch(["makebox", str(img), str(udir / "firstpass")]) == 0
                first = parse_boxfile((udir / "firstpass.box").read_bytes())
                assert len(first) == len(boxes)
                assert all(e.glyph == "*" for e in first.entries)
            box_path = udir / f"train{p}.box"
            box_path.write_bytes(serialize_boxfile(boxes))  # corrected labels
            assert dispatch(["train", str(img), str(box_path)]) == 0
            tr_paths.append(str(udir / f"train{p}.tr"))
            box_paths.append(str(box_path))
        assert dispatch(["cntraining", *tr_paths, "-o", str(udir)]) == 0
        assert dispatch(["mftraining", *tr_paths, "-o", str(udir)]) == 0
        assert dispatch(["unicharset-extract", *box_paths, "-o", str(udir / "unicharset")]) == 0
        assert (
            dispatch(
                [
                    "pack",
                    str(udir / "unicharset"),
                    str(udir / "normproto"),
                    str(udir / "inttemp"),
                    str(udir / "pffmtable"),
                    "-l",
                    lang,
                    "-d",
                    str(tessdata),
                ]
            )
            == 0
        )
        load_pack(tessdata, lang)  # the 8 files exist and cross-validate

        test_pages = []
        for p, reps in enumerate((7, 3)):
            rows = ALPHABET_ROWS * reps
            page, boxes = render_page(
                rows,
                fonts[style],
                max_rotation=3.0,
                speckles=4,
                seed=TEST_SEEDS[lang] + p,
                page_id=f"{lang}-test-{p}",
            )
            img = udir / f"test{p}.png"
            save_page(page, img)
            gt_path = udir / f"test{p}.box"
            gt_path.write_bytes(serialize_boxfile(boxes))
            test_pages.append((img, gt_path))
        users[lang] = {"dir": udir, "tests": test_pages}
    return {
        "root": root,
        "tessdata": tessdata,
        "users": users,
        "build_seconds": time.monotonic() - t0,
    }


def score_pages(multiuser, page_lang, pack_lang):
    """Recognize page_lang's held-out pages under pack_lang; summed report."""
    total = None
    outdir = multiuser["root"] / f"out-{page_lang}-under-{pack_lang}"
    outdir.mkdir(exist_ok=True)
    for img, gt_path in multiuser["users"][page_lang]["tests"]:
        out_base = outdir / img.stem
        rc = dispatch(
            [
                "recognize",
                str(img),
                str(out_base),
                "-l",
                pack_lang,
                "-d",
                str(multiuser["tessdata"]),
            ]
        )
        assert rc == 0
        result = RecognitionResult.from_dict(
            json.loads(out_base.with_suffix(".json").read_text())
        )
        gt = GroundTruth.from_boxfile(parse_boxfile(gt_path.read_bytes(), page_id=img.stem))
        report = compute_metrics(align(gt, result))
        total = report if total is None else total + report
    return total


def test_end_to_end_multiuser(multiuser, capsys):
    start = time.monotonic()
    own = {}
    matrix = {}
    for page_lang in USERS:
        for pack_lang in USERS:
            report = score_pages(multiuser, page_lang, pack_lang)
            matrix[(page_lang, pack_lang)] = report.accuracy
        own[page_lang] = matrix[(page_lang, page_lang)]

    for lang, accuracy in own.items():
        assert accuracy is not None and accuracy >= 95.0, f"{lang} scored {accuracy}"
    for page_lang in USERS:
        for pack_lang in USERS:
            if page_lang != pack_lang:
                assert own[page_lang] > matrix[(page_lang, pack_lang)], (
                    f"{page_lang} pages: own pack {own[page_lang]:.2f} not above "
                    f"{pack_lang} pack {matrix[(page_lang, pack_lang)]:.2f}"
                )

    # the eval subcommand closes the pipeline with exit 0
    lang = "us1"
    img, gt_path = multiuser["users"][lang]["tests"][0]
    pred = multiuser["root"] / f"out-{lang}-under-{lang}" / (img.stem + ".json")
    assert dispatch(["eval", "--gt", str(gt_path), "--pred", str(pred)]) == 0
    capsys.readouterr()

    elapsed = multiuser["build_seconds"] + (time.monotonic() - start)
    assert elapsed < 600.0
    with capsys.disabled():
        print()
        for page_lang in USERS:
            row = "  ".join(
                f"{pack_lang}:{matrix[(page_lang, pack_lang)]:6.2f}" for pack_lang in USERS
            )
            print(f"  {page_lang} test pages -> {row}")
        passed(
            "end-to-end multi-user: own-pack accuracy "
            + ", ".join(f"{lang}={own[lang]:.2f}%" for lang in USERS)
            + f" in {elapsed:.0f}s"
        )


def test_blank_dictionary_equivalence(multiuser):
    start = time.monotonic()
    lang = "us1"
    img, _ = multiuser["users"][lang]["tests"][1]
    outdir = multiuser["root"] / "dictcheck"
    outdir.mkdir(exist_ok=True)
    outputs = {}
    for flag, name in ((False, "off"), (True, "on")):
        base = outdir / f"{img.stem}-{name}"
        argv = [
            "recognize",
            str(img),
            str(base),
            "-l",
            lang,
            "-d",
            str(multiuser["tessdata"]),
        ]
        if flag:
            argv.append("--use-dict")
        assert dispatch(argv) == 0
        outputs[name] = {
            suffix: (outdir / f"{img.stem}-{name}{suffix}").read_bytes()
            for suffix in (".txt", ".debug.txt", ".json")
        }
    assert outputs["on"] == outputs["off"]
    assert time.monotonic() - start < 60.0
    passed("blank-dictionary equivalence: use-dict on/off byte-identical")


# ---------------------------------------------------------------------------
# 8. Pack round trip

def random_pack_parts(rng):
    glyphs = sorted(rng.sample(string.ascii_lowercase, rng.randint(2, 10)))
    uc = Unicharset(entries=tuple((g, rng.randint(1, 90)) for g in glyphs))
    cn_classes, mf_classes, expected = {}, {}, {}
    for g in glyphs:
        k = rng.randint(1, 4)
        weights = [rng.random() + 0.1 for _ in range(k)]
        total = sum(weights)
        protos = []
        for w in weights:
            protos.append(
                Prototype(
                    mean=tuple(rng.random() for _ in range(4)),
                    var=tuple(1e-4 + rng.random() * 0.02 for _ in range(4)),
                    weight=w / total,
                )
            )
        # exact weight normalization for the invariant
        fix = 1.0 - sum(p.weight for p in protos)
        protos[0] = Prototype(mean=protos[0].mean, var=protos[0].var, weight=protos[0].weight + fix)
        cn_classes[g] = tuple(protos)
        mf_classes[g] = tuple(
            MicroFeature(
                rng.randrange(65) / 64, rng.randrange(65) / 64, rng.randrange(8), rng.randrange(65) / 64
            )
            for _ in range(rng.randint(1, 6))
        )
        expected[g] = rng.randint(1, 30)
    words = sorted(
        {
            "".join(rng.choice(glyphs) for _ in range(rng.randint(1, 6)))
            for _ in range(rng.randrange(0, 12))
        }
    )
    return {
        "unicharset": uc,
        "proto_model": PrototypeModel(dim=4, classes=cn_classes),
        "micro_model": MicroProtoModel(classes=mf_classes, expected_count=expected),
        "freq_dawg": build_dawg(words) if words else None,
        "word_dawg": build_dawg(words[: len(words) // 2]) if words else None,
        "user_words": WordList(tuple(words[:3])),
    }


def test_pack_round_trip(tmp_path):
    start = time.monotonic()
    rng = random.Random(2024)
    for i in range(20):
        parts = random_pack_parts(rng)
        d = tmp_path / f"pack{i}"
        pack = assemble_pack(d, "us1", **parts)
        files = sorted(p.name for p in d.iterdir())
        assert files == sorted(f"us1.{n}" for n in PACK_FILE_NAMES)
        assert semantic_equal(load_pack(d, "us1"), pack)

    parts = random_pack_parts(rng)
    tamper_corpus = {
        "unicharset": b"99\na 1\n",
        "normproto": b"4\nclass a one\n",
        "inttemp": b"class a 1\nmfp bad\n",
        "pffmtable": b"a x\n",
        "freq-dawg": b"SDWG\x01\xff\xff\xff\xff",
        "word-dawg": b"JUNKJUNKJUNKJUNK",
        "user-words": "Ärger\n".encode("utf-8"),
        "DangAmbigs": b"no-tab-here\n",
    }
    for name, junk in tamper_corpus.items():
        d = tmp_path / f"tamper-{name}"
        assemble_pack(d, "us1", **parts)
        pack_file_path(d, "us1", name).write_bytes(junk)
        with pytest.raises(PackLoadError) as err:
            load_pack(d, "us1")
        assert f"us1.{name}" in str(err.value)
    for name in PACK_FILE_NAMES:
        d = tmp_path / f"missing-{name}"
        assemble_pack(d, "us1", **parts)
        pack_file_path(d, "us1", name).unlink()
        with pytest.raises(PackLoadError, match=f"us1.{name}"):
            load_pack(d, "us1")
    assert time.monotonic() - start < 10.0
    passed("pack round trip: 20 randomized packs, tamper corpus rejected by name")

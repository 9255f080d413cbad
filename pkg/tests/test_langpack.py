"""Pack assembly, loading, cross-validation and round trips."""
import random

import pytest

from hwocr.langpack import (
    PACK_FILE_NAMES,
    LanguagePack,
    PackLoadError,
    assemble_pack,
    load_pack,
    pack_file_path,
    semantic_equal,
    validate_pack,
)
from hwocr.lexicon import AmbigRule, AmbigTable, WordList, build_dawg
from hwocr.training import (
    MicroFeature,
    MicroProtoModel,
    Prototype,
    PrototypeModel,
    Unicharset,
)


def tiny_models(glyphs, count=3, protos_per_class=1):
    rng = random.Random(hash(glyphs) & 0xFFFF)
    uc = Unicharset(entries=tuple((g, count) for g in glyphs))
    classes = {}
    for g in glyphs:
        ps = []
        for k in range(protos_per_class):
            mean = tuple(round(rng.random(), 6) for _ in range(4))
            var = tuple(1e-4 + round(rng.random() * 0.01, 6) for _ in range(4))
            ps.append(Prototype(mean=mean, var=var, weight=1.0 / protos_per_class))
        classes[g] = tuple(ps)
    pm = PrototypeModel(dim=4, classes=classes)
    mm = MicroProtoModel(
        classes={
            g: (MicroFeature(rng.randrange(65) / 64, rng.randrange(65) / 64, rng.randrange(8), rng.randrange(65) / 64),)
            for g in glyphs
        },
        expected_count={g: rng.randint(1, 20) for g in glyphs},
    )
    return uc, pm, mm


def test_assemble_writes_exactly_eight_files(tmp_path):
    uc, pm, mm = tiny_models("abc")
    assemble_pack(tmp_path, "us1", uc, pm, mm)
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == sorted(f"us1.{n}" for n in PACK_FILE_NAMES)


def test_absent_dictionaries_written_as_blanks(tmp_path):
    uc, pm, mm = tiny_models("ab")
    assemble_pack(tmp_path, "us1", uc, pm, mm)
    from hwocr.lexicon import EMPTY_DAWG, serialize_dawg

    for name in ("freq-dawg", "word-dawg"):
        assert pack_file_path(tmp_path, "us1", name).read_bytes() == serialize_dawg(EMPTY_DAWG)
    for name in ("user-words", "DangAmbigs"):
        assert pack_file_path(tmp_path, "us1", name).read_bytes() == b""


def test_bad_lang_code_rejected(tmp_path):
    uc, pm, mm = tiny_models("a")
    for bad in ("us", "usr1", "US1", "1us", "u_1"):
        with pytest.raises(ValueError, match="language code"):
            assemble_pack(tmp_path, bad, uc, pm, mm)


def test_load_of_assembled_pack_succeeds(tmp_path):
    uc, pm, mm = tiny_models("xyz")
    pack = assemble_pack(tmp_path, "us2", uc, pm, mm)
    assert semantic_equal(load_pack(tmp_path, "us2"), pack)


def test_round_trip_on_randomized_packs(tmp_path):
    rng = random.Random(31)
    for i in range(6):
        glyphs = "".join(sorted(rng.sample("abcdefghijklmnopqrstuvwxyz", rng.randint(1, 8))))
        uc, pm, mm = tiny_models(glyphs, protos_per_class=rng.randint(1, 3))
        words = [
            "".join(rng.choice(glyphs) for _ in range(rng.randint(1, 5)))
            for _ in range(rng.randint(0, 10))
        ]
        pack = assemble_pack(
            tmp_path / str(i),
            "us3",
            uc,
            pm,
            mm,
            freq_dawg=build_dawg(sorted(set(words))) if words else None,
            word_dawg=build_dawg(sorted(set(words))) if words else None,
            user_words=WordList(tuple(words)),
            ambigs=AmbigTable((AmbigRule("rn", "m"),)) if i % 2 else AmbigTable(),
        )
        assert semantic_equal(load_pack(tmp_path / str(i), "us3"), pack)


def test_missing_file_error_names_it(tmp_path):
    uc, pm, mm = tiny_models("ab")
    assemble_pack(tmp_path, "us1", uc, pm, mm)
    pack_file_path(tmp_path, "us1", "normproto").unlink()
    with pytest.raises(PackLoadError, match="us1.normproto"):
        load_pack(tmp_path, "us1")


def test_model_class_missing_from_unicharset_rejected(tmp_path):
    uc, pm, mm = tiny_models("abq")
    assemble_pack(tmp_path, "us1", uc, pm, mm)
    # shrink the unicharset so 'q' is modeled but not listed
    from hwocr.langpack import atomic_write
    from hwocr.training import write_unicharset

    atomic_write(
        pack_file_path(tmp_path, "us1", "unicharset"),
        write_unicharset(Unicharset(entries=(("a", 3), ("b", 3)))),
    )
    with pytest.raises(PackLoadError, match="q"):
        load_pack(tmp_path, "us1")


def test_tampered_files_rejected_with_names(tmp_path):
    uc, pm, mm = tiny_models("ab")
    assemble_pack(tmp_path, "us1", uc, pm, mm)
    corruptions = {
        "freq-dawg": b"SDWGxxxx",
        "normproto": b"not a number\n",
        "pffmtable": b"a notanint\n",
        "unicharset": b"7\na 1\n",
    }
    for name, junk in corruptions.items():
        target = tmp_path / "case" / name
        target.parent.mkdir(exist_ok=True)
        for n in PACK_FILE_NAMES:
            data = pack_file_path(tmp_path, "us1", n).read_bytes()
            pack_file_path(tmp_path / "case", "us1", n).write_bytes(junk if n == name else data)
        with pytest.raises(PackLoadError, match=f"us1.{name}"):
            load_pack(tmp_path / "case", "us1")


def test_zero_length_linguistic_files_accepted(tmp_path):
    uc, pm, mm = tiny_models("ab")
    assemble_pack(tmp_path, "us1", uc, pm, mm)
    for name in ("freq-dawg", "word-dawg", "user-words", "DangAmbigs"):
        pack_file_path(tmp_path, "us1", name).write_bytes(b"")
    pack = load_pack(tmp_path, "us1")
    assert pack.freq_dawg.is_empty and pack.word_dawg.is_empty
    assert len(pack.user_words) == 0 and len(pack.ambigs) == 0


def test_blank_pack_yields_four_empty_dictionary_notices():
    uc, pm, mm = tiny_models("abc")
    pack = LanguagePack("us1", uc, pm, mm)
    issues = validate_pack(pack)
    empties = [i for i in issues if i.kind == "empty-dictionary"]
    assert len(empties) == 4
    assert all(i.severity == "warning" for i in issues)


def test_fully_populated_pack_has_no_issues():
    uc, pm, mm = tiny_models("ab", count=5)
    pack = LanguagePack(
        "us1",
        uc,
        pm,
        mm,
        freq_dawg=build_dawg(["ab"]),
        word_dawg=build_dawg(["ba"]),
        user_words=WordList(("abba",)),
        ambigs=AmbigTable((AmbigRule("rn", "m"),)),
    )
    assert validate_pack(pack) == []


def test_unmodeled_glyph_warns():
    uc, pm, mm = tiny_models("ab", count=5)
    uc = Unicharset(entries=uc.entries + (("z", 5),))
    pack = LanguagePack(
        "us1",
        uc,
        pm,
        mm,
        freq_dawg=build_dawg(["ab"]),
        word_dawg=build_dawg(["ba"]),
        user_words=WordList(("abba",)),
        ambigs=AmbigTable((AmbigRule("rn", "m"),)),
    )
    issues = validate_pack(pack)
    assert [i.kind for i in issues] == ["unmodeled-glyph"]
    assert "'z'" in issues[0].message


def test_thin_class_warns():
    uc, pm, mm = tiny_models("ab", count=1)
    pack = LanguagePack("us1", uc, pm, mm)
    assert any(i.kind == "thin-class" for i in validate_pack(pack))


def test_empty_unicharset_rejected():
    uc, pm, mm = tiny_models("a")
    with pytest.raises(ValueError, match="unicharset"):
        LanguagePack("us1", Unicharset(), PrototypeModel(dim=4, classes={}), mm)

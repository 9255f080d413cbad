"""Assemble, store and load the 8-file per-user language pack.

One pack per 3-letter code in a tessdata-style directory:
`<dir>/<code>.{unicharset,normproto,inttemp,pffmtable,freq-dawg,word-dawg,
user-words,DangAmbigs}`. The four linguistic files may be blank; blank
dawg files load as the empty automaton.
"""
from __future__ import annotations

import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .boxfile import Issue
from .lexicon import (
    EMPTY_DAWG,
    AmbigTable,
    Dawg,
    DawgFormatError,
    WordList,
    deserialize_dawg,
    parse_ambigs,
    parse_wordlist,
    serialize_ambigs,
    serialize_dawg,
    serialize_wordlist,
)
from .training import (
    MicroProtoModel,
    PrototypeModel,
    Unicharset,
    read_inttemp,
    read_normproto,
    read_pffmtable,
    read_unicharset,
    write_inttemp,
    write_normproto,
    write_pffmtable,
    write_unicharset,
)

__all__ = [
    "PACK_FILE_NAMES",
    "LanguagePack",
    "PackLoadError",
    "pack_file_path",
    "assemble_pack",
    "load_pack",
    "validate_pack",
    "semantic_equal",
    "atomic_write",
]

PACK_FILE_NAMES = (
    "unicharset",
    "normproto",
    "inttemp",
    "pffmtable",
    "freq-dawg",
    "word-dawg",
    "user-words",
    "DangAmbigs",
)

# 3-char codes; digits allowed so per-user packs can be named us1, us2, ...
_LANG_RE = re.compile(r"^[a-z][a-z0-9]{2}$")


class PackLoadError(ValueError):
    """A pack file is missing, corrupt, or inconsistent with the unicharset."""


@dataclass(frozen=True)
class LanguagePack:
    lang: str
    unicharset: Unicharset
    proto_model: PrototypeModel
    micro_model: MicroProtoModel
    freq_dawg: Dawg = EMPTY_DAWG
    word_dawg: Dawg = EMPTY_DAWG
    user_words: WordList = WordList()
    ambigs: AmbigTable = AmbigTable()

    def __post_init__(self):
        if not _LANG_RE.match(self.lang):
            raise ValueError(f"language code must be 3 chars [a-z][a-z0-9]*, got {self.lang!r}")
        if len(self.unicharset) == 0:
            raise ValueError("unicharset must not be empty")
        known = set(self.unicharset.glyphs())
        for name, model_classes in (
            ("normproto", self.proto_model.classes),
            ("inttemp", self.micro_model.classes),
        ):
            extra = set(model_classes) - known
            if extra:
                raise ValueError(
                    f"{name} classes {sorted(extra)} missing from the unicharset"
                )


def atomic_write(path: Path, data: bytes) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def pack_file_path(directory, lang: str, name: str) -> Path:
    return Path(directory) / f"{lang}.{name}"


def assemble_pack(
    directory,
    lang: str,
    unicharset: Unicharset,
    proto_model: PrototypeModel,
    micro_model: MicroProtoModel,
    freq_dawg: Dawg | None = None,
    word_dawg: Dawg | None = None,
    user_words: WordList | None = None,
    ambigs: AmbigTable | None = None,
) -> LanguagePack:
    """Write the 8 pack files under `directory` and return the pack.

    Absent dictionaries are written as blanks: the empty-dawg encoding for
    the two dawg files, zero-length files for user-words and DangAmbigs.
    """
    pack = LanguagePack(
        lang=lang,
        unicharset=unicharset,
        proto_model=proto_model,
        micro_model=micro_model,
        freq_dawg=freq_dawg if freq_dawg is not None else EMPTY_DAWG,
        word_dawg=word_dawg if word_dawg is not None else EMPTY_DAWG,
        user_words=user_words if user_words is not None else WordList(),
        ambigs=ambigs if ambigs is not None else AmbigTable(),
    )
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    payloads = {
        "unicharset": write_unicharset(pack.unicharset),
        "normproto": write_normproto(pack.proto_model),
        "inttemp": write_inttemp(pack.micro_model),
        "pffmtable": write_pffmtable(pack.micro_model),
        "freq-dawg": serialize_dawg(pack.freq_dawg),
        "word-dawg": serialize_dawg(pack.word_dawg),
        "user-words": serialize_wordlist(pack.user_words),
        "DangAmbigs": serialize_ambigs(pack.ambigs),
    }
    for name in PACK_FILE_NAMES:
        atomic_write(pack_file_path(directory, lang, name), payloads[name])
    return pack


def _read(directory, lang: str, name: str) -> bytes:
    path = pack_file_path(directory, lang, name)
    if not path.exists():
        raise PackLoadError(f"missing pack file: {path}")
    return path.read_bytes()


def load_pack(directory, lang: str) -> LanguagePack:
    """Load and cross-validate a pack; blank linguistic files are accepted."""
    raw = {name: _read(directory, lang, name) for name in PACK_FILE_NAMES}

    def fail(name: str, exc: Exception):
        raise PackLoadError(f"{pack_file_path(directory, lang, name)}: {exc}") from exc

    try:
        unicharset = read_unicharset(raw["unicharset"])
    except ValueError as exc:
        fail("unicharset", exc)
    try:
        proto_model = read_normproto(raw["normproto"])
    except ValueError as exc:
        fail("normproto", exc)
    try:
        expected = read_pffmtable(raw["pffmtable"])
    except ValueError as exc:
        fail("pffmtable", exc)
    try:
        micro_model = read_inttemp(raw["inttemp"], expected_count=expected)
    except ValueError as exc:
        fail("inttemp", exc)

    dawgs = {}
    for name in ("freq-dawg", "word-dawg"):
        if raw[name] == b"":
            dawgs[name] = EMPTY_DAWG
            continue
        try:
            dawgs[name] = deserialize_dawg(raw[name])
        except DawgFormatError as exc:
            fail(name, exc)
    try:
        user_words = parse_wordlist(raw["user-words"])
    except ValueError as exc:
        fail("user-words", exc)
    try:
        ambigs = parse_ambigs(raw["DangAmbigs"])
    except ValueError as exc:
        fail("DangAmbigs", exc)

    try:
        return LanguagePack(
            lang=lang,
            unicharset=unicharset,
            proto_model=proto_model,
            micro_model=micro_model,
            freq_dawg=dawgs["freq-dawg"],
            word_dawg=dawgs["word-dawg"],
            user_words=user_words,
            ambigs=ambigs,
        )
    except ValueError as exc:
        raise PackLoadError(f"pack {lang} in {directory}: {exc}") from exc


def validate_pack(pack: LanguagePack) -> list[Issue]:
    """Non-fatal findings: blank dictionaries, thin classes, modelless glyphs."""
    issues = []
    for name, empty in (
        ("freq-dawg", pack.freq_dawg.is_empty),
        ("word-dawg", pack.word_dawg.is_empty),
        ("user-words", len(pack.user_words) == 0),
        ("DangAmbigs", len(pack.ambigs) == 0),
    ):
        if empty:
            issues.append(Issue(kind="empty-dictionary", message=f"{name} is empty"))
    for glyph, count in pack.unicharset.entries:
        if count < 2:
            issues.append(
                Issue(
                    kind="thin-class",
                    message=f"class {glyph!r} was trained from only {count} sample(s)",
                )
            )
        if glyph not in pack.proto_model.classes or glyph not in pack.micro_model.classes:
            issues.append(
                Issue(kind="unmodeled-glyph", message=f"glyph {glyph!r} has no trained class")
            )
    return issues


def semantic_equal(a: LanguagePack, b: LanguagePack) -> bool:
    """Equality on pack content; dawgs compare by accepted language."""
    return (
        a.lang == b.lang
        and a.unicharset == b.unicharset
        and a.proto_model == b.proto_model
        and a.micro_model == b.micro_model
        and sorted(a.freq_dawg.iter_words()) == sorted(b.freq_dawg.iter_words())
        and sorted(a.word_dawg.iter_words()) == sorted(b.word_dawg.iter_words())
        and a.user_words == b.user_words
        and a.ambigs == b.ambigs
    )

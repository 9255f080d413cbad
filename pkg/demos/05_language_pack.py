"""Assemble and reload a per-user language pack (the 8-file model directory).

The four linguistic files may be deliberately blank, which the validator
reports as notices, not errors; recognition then runs purely on the
character models.
"""
from pathlib import Path

from hwocr import (
    assemble_pack,
    build_dawg,
    cn_training,
    emit_tr,
    extract_unicharset,
    load_pack,
    mf_training,
    semantic_equal,
    validate_pack,
)
from hwocr.lexicon import WordList
from hwocr.synth import available_fonts, render_page

OUT = Path(__file__).parent / "output" / "tessdata"

fonts = available_fonts(size=32)
page, boxes = render_page(["abcdefghijklm", "nopqrstuvwxyz"] * 3, fonts["sans"],
                          max_rotation=3.0, seed=77, page_id="train")
trs = emit_tr(page, boxes)

pack = assemble_pack(
    OUT,
    "us1",
    extract_unicharset([boxes]),
    cn_training([trs]),
    mf_training([trs]),
)
print(f"assembled pack 'us1' under {OUT}:")
for p in sorted(OUT.glob("us1.*")):
    print(f"  {p.name:20s} {p.stat().st_size:7d} bytes")

reloaded = load_pack(OUT, "us1")
print(f"\nreload is semantically identical: {semantic_equal(pack, reloaded)}")

print("\nvalidator findings on the blank-dictionary pack:")
for issue in validate_pack(reloaded):
    print(f"  [{issue.severity}] {issue.kind}: {issue.message}")

richer = assemble_pack(
    OUT,
    "us2",
    pack.unicharset,
    pack.proto_model,
    pack.micro_model,
    word_dawg=build_dawg(["cab", "bad", "face"]),
    user_words=WordList(("deadbeef",)),
)
issues = validate_pack(richer)
print(f"\npack 'us2' with dictionaries: {len(issues)} findings")

"""Train two writers, recognize held-out pages, and score the output.

Each writer gets their own pack; the score table shows why per-writer
models matter: swapping packs between writers costs tens of points.
"""
from pathlib import Path

from hwocr import (
    GroundTruth,
    align,
    assemble_pack,
    cn_training,
    compute_metrics,
    emit_tr,
    extract_unicharset,
    mf_training,
    recognize_page,
    render_report,
)
from hwocr.evaluation import DatasetManifest, ManifestRow, report_records
from hwocr.synth import available_fonts, render_page

OUT = Path(__file__).parent / "output" / "tessdata"
fonts = available_fonts(size=32)
ALPHABET = ["abcdefghijklm", "nopqrstuvwxyz"]

writers = {"us1": "sans", "us2": "serif"}
packs = {}
for lang, style in writers.items():
    feature_sets, boxfiles = [], []
    for i in range(5):
        page, boxes = render_page(ALPHABET * 5, fonts[style], max_rotation=3.0,
                                  seed=1000 + i, page_id=f"{lang}-train-{i}")
        feature_sets.append(emit_tr(page, boxes))
        boxfiles.append(boxes)
    packs[lang] = assemble_pack(OUT, lang, extract_unicharset(boxfiles),
                                cn_training(feature_sets), mf_training(feature_sets))
    print(f"trained pack {lang} on {sum(len(b) for b in boxfiles)} samples of {style}")

per_user = {}
for lang, style in writers.items():
    page, boxes = render_page(ALPHABET * 3, fonts[style], max_rotation=3.0,
                              seed=9900, page_id=f"{lang}-test")
    gt = GroundTruth.from_boxfile(boxes)
    own = compute_metrics(align(gt, recognize_page(packs[lang], page)))
    other = [l for l in writers if l != lang][0]
    crossed = compute_metrics(align(gt, recognize_page(packs[other], page)))
    per_user[lang] = {"Dataset-1": own}
    print(f"{lang}: own pack {own.accuracy:.2f}%  vs  {other}'s pack {crossed.accuracy:.2f}%")

manifest = DatasetManifest(
    rows=tuple(
        ManifestRow(user=lang, split=split, dataset="Dataset-1", chars=chars)
        for lang in writers
        for split, chars in (("train", 5 * 26 * 5), ("test", 3 * 26))
    )
)
print()
print(render_report(per_user, manifest=manifest))
print("machine-readable records:")
for record in report_records(per_user):
    print(f"  {record}")

"""From labeled pages to model files.

Feature extraction turns each boxed character into a 4-vector of
normalization features plus a handful of outline-segment micro-features;
clustering produces the per-class prototype files a language pack needs.
"""
from pathlib import Path

from hwocr import cn_training, emit_tr, extract_unicharset, mf_training
from hwocr.synth import available_fonts, render_page
from hwocr.training import write_normproto, write_pffmtable, write_tr, write_unicharset

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

fonts = available_fonts(size=32)
pages = []
for i in range(6):
    pages.append(
        render_page(
            ["abcdefghijklm", "nopqrstuvwxyz"] * 2,
            fonts["mono"],
            max_rotation=3.0,
            seed=400 + i,
            page_id=f"train-{i}",
        )
    )

feature_sets = []
boxfiles = []
for page, boxes in pages:
    trs = emit_tr(page, boxes)
    feature_sets.append(trs)
    boxfiles.append(boxes)
print(f"extracted features from {len(pages)} pages, "
      f"{sum(len(t.records) for t in feature_sets)} character samples")

sample = feature_sets[0].records[0]
print(f"\nsample record for {sample.glyph!r}:")
print(f"  cn vector (aspect, density, centroid-x, centroid-y): "
      f"{tuple(round(v, 3) for v in sample.cn)}")
print(f"  {len(sample.micro)} micro-features, first three:")
for f in sample.micro[:3]:
    print(f"    midpoint ({f.x:.3f}, {f.y:.3f}), direction sector {f.dir}, length {f.len:.3f}")

(OUT / "demo.tr").write_bytes(write_tr(feature_sets[0]))
print(f"\nwrote {OUT / 'demo.tr'}")

unicharset = extract_unicharset(boxfiles)
proto_model = cn_training(feature_sets)
micro_model = mf_training(feature_sets)
print(f"unicharset: {len(unicharset)} glyphs, {unicharset.total} samples")
print(f"normproto: {sum(len(p) for p in proto_model.classes.values())} prototypes "
      f"across {len(proto_model.classes)} classes")
print(f"inttemp: {sum(len(p) for p in micro_model.classes.values())} templates; "
      f"expected counts, e.g. a={micro_model.expected_count['a']}, "
      f"m={micro_model.expected_count['m']}, i={micro_model.expected_count['i']}")

(OUT / "unicharset").write_bytes(write_unicharset(unicharset))
(OUT / "normproto").write_bytes(write_normproto(proto_model))
(OUT / "pffmtable").write_bytes(write_pffmtable(micro_model))
print(f"wrote unicharset, normproto, pffmtable under {OUT}")

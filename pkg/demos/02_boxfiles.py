"""The box-file labeling cycle: generate, serialize, validate, correct.

First-pass boxes out of the segmenter carry placeholder '*' labels, the
way a fresh engine mislabels an unseen hand; corrected labels come from a
human (here: the ground truth we rendered with).
"""
from hwocr import binarize, segment_page, validate_boxes
from hwocr.boxfile import make_boxes, parse_boxfile, serialize_boxfile
from hwocr.synth import available_fonts, render_page

fonts = available_fonts(size=32)
page, truth = render_page(["handwriting"], fonts["serif"], max_rotation=2.0, seed=3)

seg = segment_page(binarize(page))
first_pass = make_boxes(seg)
print("first-pass box file (uncorrected labels):")
print(serialize_boxfile(first_pass).decode(), end="")

issues = validate_boxes(first_pass, page)
print(f"validator findings on the first pass: {[i.kind for i in issues]}")

corrected = serialize_boxfile(truth)
print("\nafter manual correction:")
print(corrected.decode(), end="")

# the codec is a bit-exact round trip
reparsed = parse_boxfile(corrected, page_id=truth.page_id)
assert serialize_boxfile(reparsed) == corrected
print("\nround trip: parse(serialize(boxes)) is bit-exact")

import numpy as np
import pytest

from hwocr.langpack import assemble_pack
from hwocr.synth import available_fonts, render_page
from hwocr.training import cn_training, emit_tr, extract_unicharset, mf_training


@pytest.fixture(scope="session")
def fonts():
    return available_fonts(size=32)


@pytest.fixture(scope="session")
def mini_pack(fonts, tmp_path_factory):
    """Small trained pack (6 letters, 8 samples each) plus its training page."""
    d = tmp_path_factory.mktemp("minipack")
    rows = ["abcdef"] * 8
    page, boxes = render_page(rows, fonts["sans"], max_rotation=2.0, seed=42, page_id="mini-train")
    trs = emit_tr(page, boxes)
    pack = assemble_pack(
        d,
        "us1",
        extract_unicharset([boxes]),
        cn_training([trs]),
        mf_training([trs]),
    )
    return {"dir": d, "pack": pack, "page": page, "boxes": boxes}


def glyph_from_mask(mask, page_id="t"):
    from hwocr.imaging import BBox, GlyphSample

    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    return GlyphSample(bbox=BBox(0, 0, w, h), mask=mask, source_page=page_id)

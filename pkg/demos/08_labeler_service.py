"""Generate a few labeled pages and serve them to the browser labeler.

Run, then open http://127.0.0.1:8000/ (install the frontend first for the
full editor, or use the JSON API directly under /api/pages).

    python demos/08_labeler_service.py [port] [ui-dir]
"""
import sys
from pathlib import Path

from hwocr.boxfile import serialize_boxfile
from hwocr.imaging import save_page
from hwocr.service import serve_labeler
from hwocr.synth import available_fonts, render_page

root = Path(__file__).parent / "output" / "labeler-root"
root.mkdir(parents=True, exist_ok=True)

fonts = available_fonts(size=32)
for i, (style, text) in enumerate(
    (("sans", "pack my box"), ("serif", "with five dozen"), ("mono", "liquor jugs"))
):
    page, boxes = render_page([text], fonts[style], max_rotation=3.0,
                              seed=60 + i, page_id=f"sheet{i}")
    save_page(page, root / f"sheet{i}.png")
    (root / f"sheet{i}.box").write_bytes(serialize_boxfile(boxes))
print(f"prepared 3 image/box pairs under {root}")

port = int(sys.argv[1]) if len(sys.argv) > 1 else 8000
ui_dir = sys.argv[2] if len(sys.argv) > 2 else None
default_ui = Path(__file__).resolve().parents[1] / "frontend" / "dist"
if ui_dir is None and default_ui.exists():
    ui_dir = default_ui
print(f"serving on http://127.0.0.1:{port}/ (ui: {ui_dir or 'fallback page'}) — Ctrl-C to stop")
serve_labeler(port, root, ui_dir)

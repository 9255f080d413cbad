"""HTTP service backing the box-label correction UI.

Serves page listings, page images as PNG, and box payloads for editing.
PUT writes are atomic (temp file + rename) with last-write-wins semantics;
payloads that fail hard validation (unparseable entries or out-of-bounds
boxes) are refused with a 422 and a list of issues.
"""
from __future__ import annotations

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from io import BytesIO
from pathlib import Path

from PIL import Image

from .boxfile import BoxEntry, BoxFile, parse_boxfile, serialize_boxfile, validate_boxes
from .imaging import BBox, load_page
from .langpack import atomic_write

__all__ = ["LabelerServer", "make_server", "serve_labeler"]

_IMAGE_SUFFIXES = (".png", ".tif", ".tiff")
_ID_RE = re.compile(r"^[A-Za-z0-9._-]+$")
_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".png": "image/png",
    ".svg": "image/svg+xml",
    ".map": "application/json",
}

_FALLBACK_INDEX = b"""<!doctype html>
<html><head><title>box labeler</title></head>
<body><h1>Box labeler service</h1>
<p>No UI bundle is installed. The JSON API lives under <code>/api/pages</code>.</p>
</body></html>
"""


class LabelerServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, root: Path, ui_dir: Path | None = None):
        self.root = Path(root)
        self.ui_dir = Path(ui_dir) if ui_dir else None
        self.write_lock = threading.Lock()
        super().__init__(address, _Handler)


def _page_paths(root: Path) -> dict[str, Path]:
    pages = {}
    for suffix in _IMAGE_SUFFIXES:
        for p in sorted(root.glob(f"*{suffix}")):
            pages.setdefault(p.stem, p)
    return dict(sorted(pages.items()))


class _Handler(BaseHTTPRequestHandler):
    server: LabelerServer

    def log_message(self, *args):  # quiet by default
        pass

    # -- helpers ----------------------------------------------------------
    def _send(self, status: int, body: bytes, content_type: str = "application/json"):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, payload):
        self._send(status, json.dumps(payload).encode("utf-8"))

    def _error(self, status: int, message: str):
        self._send_json(status, {"error": message})

    def _page_path(self, page_id: str) -> Path | None:
        if not _ID_RE.match(page_id):
            return None
        return _page_paths(self.server.root).get(page_id)

    # -- GET ---------------------------------------------------------------
    def do_GET(self):
        path = self.path.split("?", 1)[0]
        if path == "/api/pages":
            return self._list_pages()
        m = re.match(r"^/api/pages/([^/]+)/(image|boxes)$", path)
        if m:
            page_id, which = m.group(1), m.group(2)
            img = self._page_path(page_id)
            if img is None:
                return self._error(404, f"unknown page {page_id!r}")
            if which == "image":
                return self._send_image(img)
            return self._send_boxes(img)
        return self._static(path)

    def _list_pages(self):
        entries = []
        for page_id, img in _page_paths(self.server.root).items():
            with Image.open(img) as im:
                width, height = im.size
            entries.append(
                {
                    "id": page_id,
                    "image-uri": f"/api/pages/{page_id}/image",
                    "box-uri": f"/api/pages/{page_id}/boxes",
                    "width": width,
                    "height": height,
                }
            )
        self._send_json(200, entries)

    def _send_image(self, img_path: Path):
        with Image.open(img_path) as im:
            if getattr(im, "n_frames", 1) > 1:
                return self._error(422, "multi-page TIFF is not supported")
            buf = BytesIO()
            im.convert("L").save(buf, format="PNG")
        self._send(200, buf.getvalue(), "image/png")

    def _send_boxes(self, img_path: Path):
        box_path = img_path.with_suffix(".box")
        entries = []
        if box_path.exists():
            bf = parse_boxfile(box_path.read_bytes(), page_id=img_path.stem)
            entries = [
                {
                    "glyph": e.glyph,
                    "left": e.bbox.left,
                    "bottom": e.bbox.bottom,
                    "right": e.bbox.right,
                    "top": e.bbox.top,
                }
                for e in bf.entries
            ]
        self._send_json(200, {"entries": entries})

    def _static(self, path: str):
        if path == "/":
            path = "/index.html"
        ui = self.server.ui_dir
        if ui is None:
            if path == "/index.html":
                return self._send(200, _FALLBACK_INDEX, "text/html; charset=utf-8")
            return self._error(404, "no UI assets installed")
        target = (ui / path.lstrip("/")).resolve()
        if not str(target).startswith(str(ui.resolve())) or not target.is_file():
            return self._error(404, f"no such asset {path!r}")
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, target.read_bytes(), ctype)

    # -- PUT ---------------------------------------------------------------
    def do_PUT(self):
        m = re.match(r"^/api/pages/([^/]+)/boxes$", self.path.split("?", 1)[0])
        if not m:
            return self._error(404, "unknown endpoint")
        img = self._page_path(m.group(1))
        if img is None:
            return self._error(404, f"unknown page {m.group(1)!r}")

        length = int(self.headers.get("Content-Length", 0))
        try:
            payload = json.loads(self.rfile.read(length))
        except (ValueError, UnicodeDecodeError):
            return self._error(400, "body is not valid JSON")

        issues = []
        entries = []
        raw_entries = payload.get("entries") if isinstance(payload, dict) else None
        if not isinstance(raw_entries, list):
            return self._error(400, "payload must be {\"entries\": [...]}")
        for i, raw in enumerate(raw_entries):
            try:
                glyph = raw["glyph"]
                coords = [int(raw[k]) for k in ("left", "bottom", "right", "top")]
                if not isinstance(glyph, str) or len(glyph) != 1:
                    raise ValueError(f"glyph must be one character, got {glyph!r}")
                entries.append(BoxEntry(glyph, BBox(*coords)))
            except (KeyError, TypeError, ValueError) as exc:
                issues.append({"kind": "malformed", "index": i, "message": str(exc)})
        if not issues:
            page = load_page(img)
            bf = BoxFile(entries=tuple(entries), page_id=img.stem)
            issues = [
                {"kind": v.kind, "index": v.index, "message": v.message}
                for v in validate_boxes(bf, page)
                if v.severity == "error"
            ]
        if issues:
            return self._send_json(422, {"issues": issues})

        data = serialize_boxfile(BoxFile(entries=tuple(entries), page_id=img.stem))
        with self.server.write_lock:
            atomic_write(img.with_suffix(".box"), data)
        self._send_json(200, {"ok": True, "entries": len(entries)})


def make_server(port: int, root, ui_dir=None) -> LabelerServer:
    return LabelerServer(("127.0.0.1", port), Path(root), ui_dir)


def serve_labeler(port: int, root, ui_dir=None) -> None:
    """Run until interrupted; raises OSError if the port is taken."""
    server = make_server(port, root, ui_dir)
    try:
        server.serve_forever()
    finally:
        server.server_close()

"""Command-line surface for the whole pipeline.

Subcommands mirror the classic training tool names (makebox, train,
cntraining, mftraining, unicharset-extract, wordlist2dawg, pack,
recognize, eval, freq, serve-labeler) and are thin wrappers over the
library modules; all model outputs are written atomically.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import evaluation, recognizer, service, training
from .boxfile import make_boxes, parse_boxfile, serialize_boxfile, validate_boxes
from .imaging import SegConfig, binarize, load_page, segment_page
from .langpack import assemble_pack, atomic_write, load_pack
from .lexicon import (
    build_dawg,
    deserialize_dawg,
    parse_ambigs,
    parse_wordlist,
    serialize_dawg,
)
from .recognizer import RecogConfig, recognize_page
from .training import (
    clustering_log,
    cn_training,
    emit_tr,
    extract_unicharset,
    mf_training,
    read_tr,
    write_inttemp,
    write_normproto,
    write_pffmtable,
    write_tr,
    write_unicharset,
)

# historical invocation tokens accepted for fidelity and skipped
_NOISE_TOKENS = {"batch.nochop", "nobatch", "box.train", "makebox", "junk"}


def _notice(msg: str):
    print(msg, file=sys.stderr)


def _strip_noise(tokens: list[str]) -> list[str]:
    kept = []
    for t in tokens:
        if t in _NOISE_TOKENS:
            _notice(f"note: ignoring legacy token {t!r}")
        else:
            kept.append(t)
    return kept


def _seg_config(args) -> SegConfig:
    cfg = SegConfig()
    if getattr(args, "word_gap_factor", None) is not None:
        cfg = SegConfig(word_gap_factor=args.word_gap_factor)
    return cfg


def _recog_config(args) -> RecogConfig:
    kwargs = {"seg": _seg_config(args)}
    if getattr(args, "reject_threshold", None) is not None:
        kwargs["reject_threshold"] = args.reject_threshold
    if getattr(args, "use_dict", False):
        kwargs["use_dict"] = True
    return RecogConfig(**kwargs)


def _hard_issues(bf, page):
    return [i for i in validate_boxes(bf, page) if i.severity == "error"]


# ---------------------------------------------------------------------------
# Subcommand bodies

def _cmd_makebox(args) -> int:
    page = load_page(args.image)
    seg = segment_page(binarize(page), _seg_config(args))
    pack = load_pack(args.tessdata, args.lang) if args.lang else None
    bf = make_boxes(seg, pack)
    out = Path(str(args.base) + ".box")
    atomic_write(out, serialize_boxfile(bf))
    _notice(f"wrote {out} ({len(bf)} boxes)")
    return 0


def _cmd_train(args) -> int:
    page = load_page(args.image)
    boxes = parse_boxfile(Path(args.boxes).read_bytes(), page_id=Path(args.image).stem)
    bad = _hard_issues(boxes, page)
    if bad:
        raise ValueError(f"{args.boxes}: {bad[0].message}")
    trs = emit_tr(page, boxes)
    out = Path(args.image).with_suffix(".tr")
    atomic_write(out, write_tr(trs))
    _notice(f"wrote {out} ({len(trs.records)} records)")
    return 0


def _read_trs(paths) -> list:
    return [read_tr(Path(p).read_bytes(), page_id=Path(p).stem) for p in paths]


def _cmd_mftraining(args) -> int:
    model = mf_training(_read_trs(args.tr_files))
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    atomic_write(outdir / "inttemp", write_inttemp(model))
    atomic_write(outdir / "pffmtable", write_pffmtable(model))
    atomic_write(outdir / "Microfeat", clustering_log(model).encode("utf-8"))
    _notice(f"wrote inttemp, pffmtable, Microfeat to {outdir} ({len(model.classes)} classes)")
    return 0


def _cmd_cntraining(args) -> int:
    model = cn_training(_read_trs(args.tr_files))
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    atomic_write(outdir / "normproto", write_normproto(model))
    _notice(f"wrote normproto to {outdir} ({len(model.classes)} classes)")
    return 0


def _cmd_unicharset_extract(args) -> int:
    boxfiles = [parse_boxfile(Path(p).read_bytes(), page_id=Path(p).stem) for p in args.box_files]
    uc = extract_unicharset(boxfiles)
    atomic_write(Path(args.output), write_unicharset(uc))
    _notice(f"wrote {args.output} ({len(uc)} glyphs, {uc.total} samples)")
    return 0


def _cmd_wordlist2dawg(args) -> int:
    wl = parse_wordlist(Path(args.wordlist).read_bytes())
    atomic_write(Path(args.output), serialize_dawg(build_dawg(wl)))
    _notice(f"wrote {args.output} ({len(wl)} words)")
    return 0


def _cmd_pack(args) -> int:
    parts: dict[str, Path] = {}
    for p in args.parts:
        path = Path(p)
        for name in (
            "unicharset",
            "normproto",
            "inttemp",
            "pffmtable",
            "freq-dawg",
            "word-dawg",
            "user-words",
            "DangAmbigs",
        ):
            if path.name == name or path.name.endswith("." + name):
                parts[name] = path
                break
        else:
            raise ValueError(f"cannot infer pack role of {p!r} from its name")
    for required in ("unicharset", "normproto", "inttemp", "pffmtable"):
        if required not in parts:
            raise ValueError(f"missing mandatory pack part: {required}")

    unicharset = training.read_unicharset(parts["unicharset"].read_bytes())
    proto_model = training.read_normproto(parts["normproto"].read_bytes())
    expected = training.read_pffmtable(parts["pffmtable"].read_bytes())
    micro_model = training.read_inttemp(parts["inttemp"].read_bytes(), expected_count=expected)

    def opt_dawg(name):
        if name not in parts:
            return None
        data = parts[name].read_bytes()
        return deserialize_dawg(data) if data else None

    pack = assemble_pack(
        args.tessdata,
        args.lang,
        unicharset=unicharset,
        proto_model=proto_model,
        micro_model=micro_model,
        freq_dawg=opt_dawg("freq-dawg"),
        word_dawg=opt_dawg("word-dawg"),
        user_words=parse_wordlist(parts["user-words"].read_bytes())
        if "user-words" in parts
        else None,
        ambigs=parse_ambigs(parts["DangAmbigs"].read_bytes())
        if "DangAmbigs" in parts
        else None,
    )
    _notice(f"assembled pack {pack.lang!r} in {args.tessdata}")
    return 0


def _cmd_recognize(args) -> int:
    pack = load_pack(args.tessdata, args.lang)
    page = load_page(args.image)
    result = recognize_page(pack, page, _recog_config(args))
    base = str(args.output)
    text = result.text
    atomic_write(Path(base + ".txt"), (text + "\n" if text else "").encode("utf-8"))
    atomic_write(
        Path(base + ".debug.txt"),
        (result.debug_text + "\n" if result.debug_text else "").encode("utf-8"),
    )
    atomic_write(
        Path(base + ".json"), json.dumps(result.to_dict(), indent=1).encode("utf-8")
    )
    _notice(f"wrote {base}.txt (+ .debug.txt, .json)")
    return 0


def _cmd_eval(args) -> int:
    gt_boxes = parse_boxfile(Path(args.gt).read_bytes(), page_id=Path(args.gt).stem)
    word_starts = None
    if args.words:
        word_starts = [
            int(ln) for ln in Path(args.words).read_text().split("\n") if ln.strip()
        ]
    gt = evaluation.GroundTruth.from_boxfile(gt_boxes, word_starts=word_starts)

    pred_path = Path(args.pred)
    if pred_path.suffix == ".json":
        pred = recognizer.RecognitionResult.from_dict(json.loads(pred_path.read_text()))
    else:
        pred = pred_path.read_text()

    report = evaluation.compute_metrics(evaluation.align(gt, pred))
    label = args.dataset or "all"
    print(evaluation.render_report({gt.page_id or "page": {label: report}}))
    if args.json:
        records = evaluation.report_records({gt.page_id or "page": {label: report}})
        atomic_write(Path(args.json), json.dumps(records, indent=2).encode("utf-8"))
    return 0


def _cmd_freq(args) -> int:
    boxfiles = [parse_boxfile(Path(p).read_bytes()) for p in args.box_files]
    hist = evaluation.char_frequency(boxfiles)
    for glyph in sorted(hist):
        print(f"{glyph} {hist[glyph]}")
    return 0


def _cmd_serve_labeler(args) -> int:
    try:
        server = service.make_server(args.port, args.root, args.ui)
    except OSError as exc:
        _notice(f"cannot bind port {args.port}: {exc}")
        return 1
    _notice(f"serving labeler on http://127.0.0.1:{server.server_address[1]}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


# ---------------------------------------------------------------------------
# Parser

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hwocr", description="Per-user handwriting OCR pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("makebox", help="segment a page into candidate labeled boxes")
    p.add_argument("image")
    p.add_argument("base", help="output base name; writes <base>.box")
    p.add_argument("-l", "--lang", default=None, help="label using this trained pack")
    p.add_argument("-d", "--tessdata", default="tessdata")
    p.add_argument("--word-gap-factor", type=float, default=None)
    p.set_defaults(fn=_cmd_makebox)

    p = sub.add_parser("train", help="extract .tr features from an image/box pair")
    p.add_argument("image")
    p.add_argument("boxes")
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("mftraining", help="cluster micro-feature templates from .tr files")
    p.add_argument("tr_files", nargs="+")
    p.add_argument("-o", "--outdir", default=".")
    p.set_defaults(fn=_cmd_mftraining)

    p = sub.add_parser("cntraining", help="cluster normalization prototypes from .tr files")
    p.add_argument("tr_files", nargs="+")
    p.add_argument("-o", "--outdir", default=".")
    p.set_defaults(fn=_cmd_cntraining)

    p = sub.add_parser("unicharset-extract", help="collect the character inventory")
    p.add_argument("box_files", nargs="+")
    p.add_argument("-o", "--output", default="unicharset")
    p.set_defaults(fn=_cmd_unicharset_extract)

    p = sub.add_parser("wordlist2dawg", help="compile a wordlist into a dawg file")
    p.add_argument("wordlist")
    p.add_argument("output")
    p.set_defaults(fn=_cmd_wordlist2dawg)

    p = sub.add_parser("pack", help="assemble the 8 pack files under tessdata")
    p.add_argument("parts", nargs="+", help="model/dictionary files, roles from names")
    p.add_argument("-l", "--lang", required=True)
    p.add_argument("-d", "--tessdata", default="tessdata")
    p.set_defaults(fn=_cmd_pack)

    p = sub.add_parser("recognize", help="recognize a page with a trained pack")
    p.add_argument("image")
    p.add_argument("output", help="output base name; writes <output>.txt/.json")
    p.add_argument("-l", "--lang", required=True)
    p.add_argument("-d", "--tessdata", default="tessdata")
    p.add_argument("--use-dict", action="store_true")
    p.add_argument("--reject-threshold", type=float, default=None)
    p.add_argument("--word-gap-factor", type=float, default=None)
    p.set_defaults(fn=_cmd_recognize)

    p = sub.add_parser("eval", help="score recognition output against truth boxes")
    p.add_argument("--gt", required=True, help="ground-truth .box file")
    p.add_argument("--pred", required=True, help="prediction .txt or .json")
    p.add_argument("--words", default=None, help="word-boundary sidecar (one index per line)")
    p.add_argument("--dataset", default=None)
    p.add_argument("--json", default=None, help="write machine-readable records here")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("freq", help="character histogram over box files")
    p.add_argument("box_files", nargs="+")
    p.set_defaults(fn=_cmd_freq)

    p = sub.add_parser("serve-labeler", help="serve the labeling UI and API")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--root", required=True, help="directory of image/box pairs")
    p.add_argument("--ui", default=None, help="directory of built UI assets")
    p.set_defaults(fn=_cmd_serve_labeler)

    return parser


def dispatch(argv: list[str]) -> int:
    """Run one subcommand; returns the exit status."""
    argv = list(argv)
    if argv:
        argv = [argv[0]] + _strip_noise(argv[1:])
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (OSError, ValueError) as exc:
        _notice(f"error: {exc}")
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()

"""Multi-user handwriting OCR toolkit.

Pipeline: segment pages into glyphs, label them via box files (with an
HTTP-served correction UI), train per-user language packs (character
inventory, normalization prototypes, micro-feature templates and DAWG
dictionaries), recognize test pages against a pack, and score the output
with a character-level taxonomy.
"""

from .boxfile import (
    BoxEntry,
    BoxFile,
    BoxFormatError,
    Issue,
    make_boxes,
    parse_boxfile,
    serialize_boxfile,
    validate_boxes,
)
from .evaluation import (
    Alignment,
    DatasetManifest,
    EvalReport,
    GroundTruth,
    ManifestRow,
    align,
    char_frequency,
    compute_metrics,
    render_report,
    report_records,
)
from .imaging import (
    BBox,
    BinaryImage,
    Component,
    GlyphSample,
    PageImage,
    PageSegmentation,
    SegConfig,
    binarize,
    extract_components,
    load_page,
    segment_page,
)
from .langpack import (
    LanguagePack,
    PackLoadError,
    assemble_pack,
    load_pack,
    semantic_equal,
    validate_pack,
)
from .lexicon import (
    AmbigTable,
    Dawg,
    WordList,
    build_dawg,
    dawg_lookup,
    deserialize_dawg,
    parse_ambigs,
    parse_wordlist,
    serialize_dawg,
)
from .recognizer import (
    CharResult,
    RecogConfig,
    RecognitionResult,
    ScoredLabel,
    WordResult,
    classify_glyph,
    flag_ambiguities,
    recognize_page,
)
from .training import (
    MicroFeature,
    MicroProtoModel,
    PrototypeModel,
    TrainConfig,
    TrCharFeatures,
    TrFeatureSet,
    Unicharset,
    cn_training,
    emit_tr,
    extract_features,
    extract_unicharset,
    mf_training,
)

__version__ = "0.1.0"

"""Quantitative evaluation of prototype quality for prototype-based classifiers.

Computes, from a model-agnostic evidence dump and hierarchical ROI
annotations: compactness (global/local prototype counts, sparsity),
relevance, specialization (per category level), uniqueness, coverage,
class-specificity, and localization (IoU/DSC for top-1/top-10/all activated
prototypes). Ships a synthetic-data generator with a planted ground-truth
ledger and a brute-force oracle for end-to-end verification.
"""

from .dumpio import (
    ConsistencyError,
    FormatError,
    cross_validate,
    derive_category_universe,
    dump_to_json,
    load_annotations,
    parse_annotations,
    parse_dump,
    parse_lexicon,
    total_categories,
)
from .geometry import PatchBox, contains_point, dsc, iou, resolve_patch_box, roi_center
from .metrics import (
    EvaluationReport,
    PropertyScores,
    PrototypeVerdict,
    RunConfig,
    TopKEvidence,
    aggregate,
    class_specific,
    coverage,
    evaluate,
    global_prototypes,
    local_prototypes,
    localization,
    relevance,
    specialization,
    top_k_evidence,
    uniqueness,
)
from .oracle import brute_force_scores
from .records import (
    AnnotationSet,
    CategoryId,
    EvidenceDump,
    Lexicon,
    ROIAnnotation,
)
from .synth import GroundTruthLedger, InfeasibleSpecError, SynthSpec, generate

__version__ = "0.1.0"

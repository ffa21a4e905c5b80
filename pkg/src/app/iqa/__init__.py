"""No-reference image quality: BRISQUE, NIQE and externally computed scores."""

from .brisque import (
    FEATURE_DIM,
    BrisqueModel,
    brisque_features,
    brisque_score,
    fit_brisque_model,
    load_brisque_model,
    save_brisque_model,
)
from .images import GrayImage, load_gray
from .niqe import NiqeModel, load_niqe_model, niqe_fit, niqe_score, save_niqe_model
from .nss import AggdParams, GgdParams, estimate_aggd, estimate_ggd, mscn, nss_features
from .reference import distortion_set, fit_reference_model, natural_scene
from .scores import (
    ClipProperty,
    ExternalMetric,
    ExternalScore,
    GroupComparison,
    ImageScore,
    attach_provenance,
    compare_groups,
    comparison_frame,
    load_external_scores,
    read_score_csv,
    score_images,
    write_score_csv,
)

__all__ = [
    "FEATURE_DIM",
    "AggdParams",
    "BrisqueModel",
    "ClipProperty",
    "ExternalMetric",
    "ExternalScore",
    "GgdParams",
    "GrayImage",
    "GroupComparison",
    "ImageScore",
    "NiqeModel",
    "attach_provenance",
    "brisque_features",
    "brisque_score",
    "compare_groups",
    "distortion_set",
    "comparison_frame",
    "estimate_aggd",
    "estimate_ggd",
    "fit_brisque_model",
    "fit_reference_model",
    "load_brisque_model",
    "load_external_scores",
    "load_gray",
    "mscn",
    "natural_scene",
    "niqe_fit",
    "niqe_score",
    "nss_features",
    "read_score_csv",
    "score_images",
    "save_brisque_model",
    "save_niqe_model",
    "write_score_csv",
]

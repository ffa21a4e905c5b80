"""File-based protocol for external model runners, plus deterministic stubs."""

from .schemas import (
    REQUEST_FILE,
    RESPONSE_FILE,
    SCHEMA_VERSION,
    AdapterDocument,
    AnnotationRequest,
    AnnotationResponse,
    BoxPrompt,
    DetectionRequest,
    DetectionResponse,
    GeneratedImage,
    GenerationRequest,
    GenerationResponse,
    ImageToAnnotate,
    SegmentationRequest,
    SegmentationResponse,
    SegmentedBox,
)

__all__ = [
    "REQUEST_FILE",
    "RESPONSE_FILE",
    "SCHEMA_VERSION",
    "AdapterDocument",
    "AnnotationRequest",
    "AnnotationResponse",
    "BoxPrompt",
    "DetectionRequest",
    "DetectionResponse",
    "GeneratedImage",
    "GenerationRequest",
    "GenerationResponse",
    "ImageToAnnotate",
    "SegmentationRequest",
    "SegmentationResponse",
    "SegmentedBox",
]

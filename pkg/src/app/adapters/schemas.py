"""
Request/response documents exchanged with external adapters.
A request is written to `request.json`; the adapter answers with `response.json`
in its output directory. File names in responses are relative to that directory.

Author: Daniel Collier
GitHub: https://github.com/danielfcollier
Year: 2026
"""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field

SCHEMA_VERSION = 1
REQUEST_FILE = "request.json"
RESPONSE_FILE = "response.json"


class AdapterDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: int = SCHEMA_VERSION

    def referenced_files(self) -> list[str]:
        """Files the response promises in the output directory."""
        return []


# --- Segmenter ---


class BoxPrompt(BaseModel):
    class_id: int = Field(ge=0)
    cx: float
    cy: float
    w: float = Field(gt=0)
    h: float = Field(gt=0)


class SegmentationRequest(AdapterDocument):
    image_path: str
    width: int = Field(gt=0)
    height: int = Field(gt=0)
    boxes: list[BoxPrompt]


class SegmentedBox(BaseModel):
    box_index: int = Field(ge=0)
    # Normalized (x, y) vertices.
    polygon: list[tuple[float, float]] = Field(min_length=3)


class SegmentationResponse(AdapterDocument):
    masks: list[SegmentedBox]


# --- Generator ---


class GenerationRequest(AdapterDocument):
    prompt: str
    steps: int = Field(50, ge=1)
    guidance: float = Field(7.5, gt=0)
    scheduler: str = "euler-ancestral"
    seed: int = Field(ge=0, lt=2**64)
    width: int = Field(640, gt=0)
    height: int = Field(640, gt=0)
    count: int = Field(1, ge=1)


class GeneratedImage(BaseModel):
    file: str
    seed: int


class GenerationResponse(AdapterDocument):
    images: list[GeneratedImage]

    def referenced_files(self) -> list[str]:
        return [i.file for i in self.images]


# --- Annotator ---


class ImageToAnnotate(BaseModel):
    id: str
    path: str
    width: int = Field(gt=0)
    height: int = Field(gt=0)


class AnnotationRequest(AdapterDocument):
    images: list[ImageToAnnotate]
    class_names: list[str]


class AnnotationResponse(AdapterDocument):
    # Detection text file: "image_id class conf cx cy w h" per line.
    detections: str

    def referenced_files(self) -> list[str]:
        return [self.detections]


# --- Detector ---


class DetectionRequest(AdapterDocument):
    model: str
    plan_id: str
    seed: int
    train_manifest: str
    val_manifest: str
    test_manifest: str
    class_names: list[str]
    hyperparameters: dict[str, Any]


class DetectionResponse(AdapterDocument):
    detections: str

    def referenced_files(self) -> list[str]:
        return [self.detections]

"""Embedding extraction from transformer checkpoints into binary bundles."""

from .bundle_io import LAYER_POLICY, BundleWriteError, publish_bundle
from .extract import (
    ExtractError,
    ExtractionJob,
    ExtractionResult,
    SkippedInstance,
    extract,
    load_model_and_tokenizer,
)
from .records import RecordError, TargetRecord, read_records

__version__ = "0.1.0"

__all__ = [
    "BundleWriteError",
    "ExtractError",
    "ExtractionJob",
    "ExtractionResult",
    "LAYER_POLICY",
    "RecordError",
    "SkippedInstance",
    "TargetRecord",
    "extract",
    "load_model_and_tokenizer",
    "publish_bundle",
    "read_records",
]

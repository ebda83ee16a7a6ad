"""Person-focused context paragraphs from precomputed image-analysis outputs.

The package turns dense region captions, people detections, and external
classifier reports into a short paragraph describing the person in an image,
and ships the evaluation machinery (BLEU, METEOR, CIDEr, corpus statistics,
concatenation baselines) used to compare generated paragraphs against
human references.
"""

from ctxgen.config import PipelineConfig, ResourceConfig
from ctxgen.context_gen import (
    ExtractiveFallbackBackend,
    HttpSummarizerBackend,
    PipelineResources,
    PipelineResult,
    run_pipeline,
)
from ctxgen.image_analyzer import ImageBundle, parse_bundle
from ctxgen.resources import load_resources

__version__ = "0.1.0"

__all__ = [
    "ExtractiveFallbackBackend",
    "HttpSummarizerBackend",
    "ImageBundle",
    "PipelineConfig",
    "PipelineResources",
    "PipelineResult",
    "ResourceConfig",
    "load_resources",
    "parse_bundle",
    "run_pipeline",
    "__version__",
]

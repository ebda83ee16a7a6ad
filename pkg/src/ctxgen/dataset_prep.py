"""Dataset filtering: keep person-relevant images, strip non-person
reference sentences.

An image survives when (a) at least one human region annotation mentions a
person and (b) at least one person detection covers strictly more than the
configured fraction of the image area.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ctxgen.config import PipelineConfig
from ctxgen.image_analyzer import DetectionSet, RegionCaption, parse_bundle  # noqa: F401
from ctxgen.image_analyzer import BoundingBox, PersonDetection
from ctxgen.lexnet import SynsetGraph, person_nouns_in
from ctxgen.text_core import PosLexicon, SentenceRecord, split_sentences


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    width: float
    height: float
    region_annotations: tuple[RegionCaption, ...]
    reference_paragraph: str
    detections: DetectionSet

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"image size must be positive, got {self.width}x{self.height}")


def parse_image_record(data: dict) -> ImageRecord:
    """Parse one VG-style record JSON into an :class:`ImageRecord`."""
    width = float(data["width"])
    height = float(data["height"])
    annotations = tuple(
        RegionCaption(
            text=str(r["text"]),
            confidence=float(r.get("confidence", 1.0)),
            box=BoundingBox(*(float(v) for v in r["box"])),
        )
        for r in data.get("region_annotations", [])
    )
    people = tuple(
        PersonDetection(
            confidence=float(d["confidence"]),
            box=BoundingBox(*(float(v) for v in d["box"])),
        )
        for d in data.get("detections", [])
        if str(d.get("label", "person")).lower() == "person"
    )
    return ImageRecord(
        image_id=str(data["image_id"]),
        width=width,
        height=height,
        region_annotations=annotations,
        reference_paragraph=str(data.get("reference_paragraph", "")),
        detections=DetectionSet(image_w=width, image_h=height, people=people),
    )


def image_record_to_dict(record: ImageRecord) -> dict:
    return {
        "image_id": record.image_id,
        "width": record.width,
        "height": record.height,
        "region_annotations": [
            {"text": r.text, "confidence": r.confidence, "box": [r.box.x, r.box.y, r.box.w, r.box.h]}
            for r in record.region_annotations
        ],
        "reference_paragraph": record.reference_paragraph,
        "detections": [
            {"label": "person", "confidence": d.confidence, "box": [d.box.x, d.box.y, d.box.w, d.box.h]}
            for d in record.detections.people
        ],
    }


def _has_person_annotation(record: ImageRecord, graph: SynsetGraph, lexicon: PosLexicon) -> bool:
    return any(
        person_nouns_in(SentenceRecord.from_raw(ann.text, lexicon), graph)
        for ann in record.region_annotations
    )


def _has_large_person_box(record: ImageRecord, config: PipelineConfig) -> bool:
    image_area = record.width * record.height
    return any(
        det.box.area > config.person_area_ratio * image_area
        for det in record.detections.people
        if det.confidence >= config.min_person_prob
    )


def keep_reasons(
    record: ImageRecord,
    graph: SynsetGraph,
    lexicon: PosLexicon,
    config: PipelineConfig,
) -> list[str]:
    """Empty list = keep; otherwise the failed predicates, for the manifest."""
    reasons = []
    if not _has_person_annotation(record, graph, lexicon):
        reasons.append("no person-related region annotation")
    if not _has_large_person_box(record, config):
        reasons.append(
            f"no person box covering more than {config.person_area_ratio:.0%} of the image"
        )
    return reasons


def filter_images(
    records: list[ImageRecord],
    graph: SynsetGraph,
    lexicon: PosLexicon,
    config: PipelineConfig,
) -> list[ImageRecord]:
    """Keep records satisfying both person predicates; area check is a
    strict inequality."""
    return [r for r in records if not keep_reasons(r, graph, lexicon, config)]


def filter_reference_sentences(
    paragraph: str, graph: SynsetGraph, lexicon: PosLexicon
) -> str:
    """Keep only the sentences that mention a person, rejoined with single
    spaces. May return the empty string."""
    kept = [
        sentence
        for sentence in split_sentences(paragraph)
        if person_nouns_in(SentenceRecord.from_raw(sentence, lexicon), graph)
    ]
    return " ".join(kept)


def prepped_record(
    record: ImageRecord, graph: SynsetGraph, lexicon: PosLexicon
) -> ImageRecord:
    """A kept record with its reference paragraph stripped to person
    sentences."""
    return replace(
        record,
        reference_paragraph=filter_reference_sentences(
            record.reference_paragraph, graph, lexicon
        ),
    )

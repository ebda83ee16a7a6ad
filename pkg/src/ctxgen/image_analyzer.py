"""Phase 1: gate on people, filter dense captions, render template sentences.

The cascade runs in a fixed order (dedup -> person filter -> short filter ->
subject standardization) over captions that were normalized and tagged once
up front; its output plus the classifier template sentences concatenate into
the text handed to the summarizer.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import median

from ctxgen.config import PipelineConfig
from ctxgen.embeddings import EmbeddingStore, cosine_similarity, embed_sentence
from ctxgen.lexnet import SynsetGraph, is_person_related, person_nouns_in
from ctxgen.text_core import NOUN, PRON, PosLexicon, SentenceRecord, Token

STATUS_OK = "ok"
STATUS_NO_PERSON = "no_person"
STATUS_NO_CONTENT = "no_content"
STATUS_NO_SUMMARY = "no_summary"


class PipelineHalt(Exception):
    """A defined early stop of the pipeline (not a failure)."""

    def __init__(self, status: str, message: str = ""):
        super().__init__(message or status)
        self.status = status


@dataclass(frozen=True)
class BoundingBox:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"bounding box must have positive size, got {self}")

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class RegionCaption:
    text: str
    confidence: float
    box: BoundingBox

    def __post_init__(self):
        if not self.text:
            raise ValueError("caption text must be non-empty")


@dataclass(frozen=True)
class PersonDetection:
    confidence: float
    box: BoundingBox


@dataclass(frozen=True)
class DetectionSet:
    image_w: float
    image_h: float
    people: tuple[PersonDetection, ...]

    def __post_init__(self):
        for det in self.people:
            box = det.box
            if box.x < 0 or box.y < 0 or box.x + box.w > self.image_w or box.y + box.h > self.image_h:
                raise ValueError(f"detection box {box} outside image bounds")


@dataclass(frozen=True)
class AgeEstimate:
    years: float
    confidence: float


@dataclass(frozen=True)
class LabelScore:
    label: str
    confidence: float


@dataclass(frozen=True)
class ClassifierReport:
    age: AgeEstimate | None = None
    emotion: LabelScore | None = None
    scene: LabelScore | None = None


@dataclass(frozen=True)
class AnalyzedCaption:
    """A region caption paired with its normalized, tagged sentence record."""

    caption: RegionCaption
    record: SentenceRecord

    @property
    def text(self) -> str:
        return self.record.raw


@dataclass(frozen=True)
class AnalyzerText:
    """Filtered captions plus template sentences, concatenated for summarization."""

    sentences: tuple[SentenceRecord, ...]
    chosen_noun: str
    concatenated: str


def analyze_captions(
    captions: list[RegionCaption], lexicon: PosLexicon
) -> list[AnalyzedCaption]:
    """Normalize, tokenize, and tag every caption; the normalized token join
    becomes the caption's working text for all later stages."""
    analyzed = []
    for cap in captions:
        record = SentenceRecord.from_raw(cap.text, lexicon)
        normalized = " ".join(record.surfaces())
        analyzed.append(
            AnalyzedCaption(caption=cap, record=SentenceRecord(raw=normalized, tokens=record.tokens))
        )
    return analyzed


def gate_people(detections: DetectionSet, config: PipelineConfig) -> int:
    """Count people detected at or above the minimum probability; zero stops
    the pipeline with the no-person status."""
    count = sum(1 for det in detections.people if det.confidence >= config.min_person_prob)
    if count == 0:
        raise PipelineHalt(STATUS_NO_PERSON, "no person detected")
    return count


def dedup_captions(
    captions: list[AnalyzedCaption], store: EmbeddingStore, config: PipelineConfig
) -> list[AnalyzedCaption]:
    """Greedy first-wins scan: a caption is kept iff its sentence-vector
    cosine to every already-kept caption stays at or below ``t_text_sim``."""
    kept: list[AnalyzedCaption] = []
    kept_vecs = []
    for cap in captions:
        vec = embed_sentence(list(cap.record.tokens), store)
        if all(cosine_similarity(vec, prev) <= config.t_text_sim for prev in kept_vecs):
            kept.append(cap)
            kept_vecs.append(vec)
    return kept


def filter_person_captions(
    captions: list[AnalyzedCaption], graph: SynsetGraph
) -> list[AnalyzedCaption]:
    """Keep captions that carry at least one NOUN/PRON token and at least one
    person-related one among them."""
    kept = []
    for cap in captions:
        has_nominal = any(tok.pos in (NOUN, PRON) for tok in cap.record.tokens)
        if has_nominal and person_nouns_in(cap.record, graph):
            kept.append(cap)
    return kept


def filter_short_captions(captions: list[AnalyzedCaption]) -> list[AnalyzedCaption]:
    """Drop captions strictly shorter than the median token count of the
    input list (even count: mean of the two middle values)."""
    if not captions:
        return []
    cutoff = median(cap.record.token_count for cap in captions)
    return [cap for cap in captions if cap.record.token_count >= cutoff]


def article_for(word: str) -> str:
    return "an" if word[:1] in "aeiou" else "a"


def standardize_subject(
    captions: list[AnalyzedCaption], graph: SynsetGraph
) -> tuple[list[AnalyzedCaption], str]:
    """Replace every person-related noun with the most frequent one.

    Ties break toward the earliest first occurrence; pronouns are left
    alone; a preceding "a"/"an" is repaired by the vowel-initial rule. With
    no person noun at all the subject defaults to "person" and nothing is
    rewritten.
    """
    counts: dict[str, int] = {}
    first_seen: dict[str, int] = {}
    position = 0
    for cap in captions:
        for tok in cap.record.tokens:
            if tok.pos == NOUN and is_person_related(tok.surface, graph):
                counts[tok.surface] = counts.get(tok.surface, 0) + 1
                first_seen.setdefault(tok.surface, position)
            position += 1
    if not counts:
        return list(captions), "person"

    chosen = max(counts, key=lambda w: (counts[w], -first_seen[w]))
    result = []
    for cap in captions:
        tokens = list(cap.record.tokens)
        changed = False
        for i, tok in enumerate(tokens):
            if (
                tok.pos == NOUN
                and tok.surface != chosen
                and is_person_related(tok.surface, graph)
            ):
                tokens[i] = Token(chosen, NOUN)
                changed = True
                if i > 0 and tokens[i - 1].surface in ("a", "an"):
                    correct = article_for(chosen)
                    if tokens[i - 1].surface != correct:
                        tokens[i - 1] = Token(correct, tokens[i - 1].pos)
        if changed:
            raw = " ".join(t.surface for t in tokens)
            result.append(
                AnalyzedCaption(caption=cap.caption, record=SentenceRecord(raw, tuple(tokens)))
            )
        else:
            result.append(cap)
    return result, chosen


def bin_age_group(years: float, config: PipelineConfig) -> str:
    if years < 0:
        raise ValueError(f"age must be non-negative, got {years}")
    for upper, label in config.age_boundaries:
        if upper is None or years <= upper:
            return label
    raise ValueError("age boundaries do not cover all ages")  # unreachable after validate()


def _label_text(label: str) -> str:
    return label.strip().lower().replace("_", " ")


def render_classifier_sentences(
    report: ClassifierReport, p: int, chosen_noun: str, config: PipelineConfig
) -> list[str]:
    """Template sentences for age, emotion, and scene.

    Age and emotion only apply to single-person images; emotion and scene
    additionally require model confidence strictly above
    ``t_model_confidence``. Age has no confidence gate.
    """
    if not chosen_noun:
        raise ValueError("chosen_noun must be non-empty")
    sentences = []
    if p == 1 and report.age is not None:
        age_word = bin_age_group(report.age.years, config).lower()
        sentences.append(f"there is {article_for(age_word)} {age_word} {chosen_noun}")
    if p == 1 and report.emotion is not None and report.emotion.confidence > config.t_model_confidence:
        sentences.append(
            f"there is {article_for(chosen_noun)} {chosen_noun} who is {_label_text(report.emotion.label)}"
        )
    if report.scene is not None and report.scene.confidence > config.t_model_confidence:
        sentences.append(
            f"there is {article_for(chosen_noun)} {chosen_noun} in the {_label_text(report.scene.label)}"
        )
    return sentences


def build_analyzer_text(
    filtered: list[AnalyzedCaption],
    classifier_sentences: list[str],
    chosen_noun: str,
    lexicon: PosLexicon,
) -> AnalyzerText:
    """Append template sentences after the filtered captions and concatenate
    with ". " separators plus a terminal period."""
    records = [cap.record for cap in filtered]
    records += [SentenceRecord.from_raw(s, lexicon) for s in classifier_sentences]
    if not records:
        raise PipelineHalt(STATUS_NO_CONTENT, "no captions or classifier sentences survived")
    concatenated = ". ".join(r.raw for r in records) + "."
    return AnalyzerText(
        sentences=tuple(records), chosen_noun=chosen_noun, concatenated=concatenated
    )


# ---------------------------------------------------------------------------
# Per-image input bundle (JSON) parsing


@dataclass(frozen=True)
class ImageBundle:
    image_id: str
    width: float
    height: float
    captions: tuple[RegionCaption, ...]
    detections: DetectionSet
    classifiers: ClassifierReport


def _parse_box(values) -> BoundingBox:
    x, y, w, h = (float(v) for v in values)
    return BoundingBox(x, y, w, h)


def _parse_confidence(value, what: str) -> float:
    conf = float(value)
    if not 0.0 <= conf <= 1.0:
        raise ValueError(f"{what} confidence {conf} outside [0, 1]")
    return conf


def parse_bundle(data: dict) -> ImageBundle:
    """Parse one per-image JSON bundle into typed inputs."""
    image_id = str(data["image_id"])
    width = float(data["width"])
    height = float(data["height"])
    captions = tuple(
        RegionCaption(
            text=str(c["text"]),
            confidence=_parse_confidence(c["confidence"], "caption"),
            box=_parse_box(c["box"]),
        )
        for c in data.get("captions", [])
    )
    people = tuple(
        PersonDetection(
            confidence=_parse_confidence(d["confidence"], "detection"),
            box=_parse_box(d["box"]),
        )
        for d in data.get("detections", [])
        if str(d.get("label", "person")).lower() == "person"
    )
    detections = DetectionSet(image_w=width, image_h=height, people=people)

    reports = data.get("classifiers", {}) or {}
    age = emotion = scene = None
    if reports.get("age") is not None:
        years = float(reports["age"]["years"])
        if years < 0:
            raise ValueError(f"age years must be non-negative, got {years}")
        age = AgeEstimate(years=years, confidence=_parse_confidence(reports["age"]["confidence"], "age"))
    if reports.get("emotion") is not None:
        emotion = LabelScore(
            label=str(reports["emotion"]["label"]),
            confidence=_parse_confidence(reports["emotion"]["confidence"], "emotion"),
        )
    if reports.get("scene") is not None:
        scene = LabelScore(
            label=str(reports["scene"]["label"]),
            confidence=_parse_confidence(reports["scene"]["confidence"], "scene"),
        )
    return ImageBundle(
        image_id=image_id,
        width=width,
        height=height,
        captions=captions,
        detections=detections,
        classifiers=ClassifierReport(age=age, emotion=emotion, scene=scene),
    )

"""Phase 2: summarize the analyzer text, clean the candidates, pick the best.

Five summaries (one per beam width) come from a pluggable backend: either an
HTTP service speaking the summarizer wire protocol or a deterministic
extractive fallback. Candidates are cleaned with two similarity filters
(relevance-to-source, then intra-summary dedup) and the one with the highest
verb/pronoun/conjunction density wins.
"""

from __future__ import annotations

import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import requests

from ctxgen.config import PipelineConfig
from ctxgen.embeddings import EmbeddingStore, SentenceVector, cosine_similarity, embed_sentence
from ctxgen.image_analyzer import (
    STATUS_NO_SUMMARY,
    STATUS_OK,
    AnalyzerText,
    ImageBundle,
    PipelineHalt,
    analyze_captions,
    build_analyzer_text,
    dedup_captions,
    filter_person_captions,
    filter_short_captions,
    gate_people,
    render_classifier_sentences,
    standardize_subject,
)
from ctxgen.lexnet import SynsetGraph
from ctxgen.text_core import CCONJ, PRON, VERB, PosLexicon, SentenceRecord, split_sentences

log = logging.getLogger(__name__)

_TERMINATORS = ".!?"


class BackendError(RuntimeError):
    """The summarizer backend could not be reached after retrying."""

    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (after {attempts} attempts)")
        self.attempts = attempts


class ProtocolError(RuntimeError):
    """The summarizer backend broke the wire contract."""


@dataclass(frozen=True)
class SummaryCandidate:
    """One summarizer output; ``variant_id`` is its beam width."""

    variant_id: int
    sentences: tuple[SentenceRecord, ...]


@dataclass(frozen=True)
class QualityScore:
    verb_count: int
    pronoun_count: int
    cconj_count: int
    token_count: int

    @property
    def score(self) -> float:
        return (self.verb_count + self.pronoun_count + self.cconj_count) / max(
            self.token_count, 1
        )


class SummarizerBackend(ABC):
    """Contract: one summary string per requested beam width, in order."""

    kind: str

    @abstractmethod
    def summarize(self, text: str, beam_widths: list[int]) -> list[str]:
        raise NotImplementedError


def _records_from_text(text: str) -> list[SentenceRecord]:
    """Sentence records for a wire-format text; trailing terminators are not
    part of the working sentence."""
    records = []
    for sentence in split_sentences(text):
        records.append(SentenceRecord.from_raw(sentence.rstrip(_TERMINATORS + " ")))
    return records


def _pick_central_sentences(
    records: list[SentenceRecord], budget: int, store: EmbeddingStore
) -> list[SentenceRecord]:
    vectors = [embed_sentence(list(r.tokens), store) for r in records]
    centroid = SentenceVector(
        values=sum(v.values for v in vectors) / len(vectors), coverage=1.0
    )
    ranked = sorted(
        range(len(records)),
        key=lambda i: (-cosine_similarity(vectors[i], centroid), i),
    )
    chosen = sorted(ranked[:budget])
    return [records[i] for i in chosen]


def extractive_summarize(text: AnalyzerText, budget: int, store: EmbeddingStore) -> str:
    """Deterministic offline summarizer: keep the ``budget`` sentences whose
    vectors are closest to the centroid (ties toward earlier position),
    emitted in original order."""
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    records = list(text.sentences)
    picked = _pick_central_sentences(records, min(budget, len(records)), store)
    return ". ".join(r.raw for r in picked) + "."


class ExtractiveFallbackBackend(SummarizerBackend):
    """Deterministic stand-in for the neural summarizer; the budget for beam
    width w is min(w, sentence count)."""

    kind = "extractive_fallback"

    def __init__(self, store: EmbeddingStore):
        self.store = store

    def summarize(self, text: str, beam_widths: list[int]) -> list[str]:
        records = _records_from_text(text)
        if not records:
            raise ValueError("cannot summarize empty text")
        summaries = []
        for width in beam_widths:
            picked = _pick_central_sentences(records, min(width, len(records)), self.store)
            summaries.append(". ".join(r.raw for r in picked) + ".")
        return summaries


class HttpSummarizerBackend(SummarizerBackend):
    """Client for the summarizer wire protocol (POST /summarize).

    Transport failures and 5xx responses are retried 3 times with
    exponential backoff starting at 500 ms; a 200 with a mismatched summary
    list is a protocol error, not retried.
    """

    kind = "http_service"

    def __init__(
        self,
        base_url: str,
        attempts: int = 3,
        backoff_start: float = 0.5,
        timeout: float = 60.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.attempts = attempts
        self.backoff_start = backoff_start
        self.timeout = timeout

    def summarize(self, text: str, beam_widths: list[int]) -> list[str]:
        payload = {"text": text, "beam_widths": list(beam_widths)}
        last_error: Exception | None = None
        for attempt in range(self.attempts):
            if attempt:
                time.sleep(self.backoff_start * 2 ** (attempt - 1))
            try:
                response = requests.post(
                    f"{self.base_url}/summarize", json=payload, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = exc
                log.warning("summarizer request failed (attempt %d): %s", attempt + 1, exc)
                continue
            if response.status_code >= 500:
                last_error = RuntimeError(f"server error {response.status_code}")
                log.warning("summarizer 5xx (attempt %d): %s", attempt + 1, response.status_code)
                continue
            if response.status_code != 200:
                detail = ""
                try:
                    detail = response.json().get("error", "")
                except ValueError:
                    pass
                raise ProtocolError(
                    f"summarizer rejected request ({response.status_code}): {detail}"
                )
            return self._parse_response(response.json(), beam_widths)
        raise BackendError(f"summarizer unreachable at {self.base_url}: {last_error}", self.attempts)

    @staticmethod
    def _parse_response(body: dict, beam_widths: list[int]) -> list[str]:
        summaries = body.get("summaries")
        if not isinstance(summaries, list) or len(summaries) != len(beam_widths):
            got = len(summaries) if isinstance(summaries, list) else "no"
            raise ProtocolError(
                f"expected {len(beam_widths)} summaries, got {got}"
            )
        texts = []
        for entry, width in zip(summaries, beam_widths):
            if entry.get("beam_width") != width:
                raise ProtocolError(
                    f"summary order mismatch: expected width {width}, got {entry.get('beam_width')}"
                )
            texts.append(str(entry.get("text", "")))
        return texts


def generate_summaries(
    text: AnalyzerText,
    backend: SummarizerBackend,
    config: PipelineConfig,
    lexicon: PosLexicon,
) -> list[SummaryCandidate]:
    """One tagged candidate per configured beam width."""
    if not text.sentences:
        raise ValueError("analyzer text must contain at least one sentence")
    summaries = backend.summarize(text.concatenated, config.beam_widths)
    if len(summaries) != len(config.beam_widths):
        raise ProtocolError(
            f"backend returned {len(summaries)} summaries for {len(config.beam_widths)} widths"
        )
    candidates = []
    for width, summary in zip(config.beam_widths, summaries):
        records = tuple(
            SentenceRecord.from_raw(s, lexicon) for s in split_sentences(summary)
        )
        candidates.append(SummaryCandidate(variant_id=width, sentences=records))
    return candidates


def _source_vector(source: AnalyzerText, store: EmbeddingStore) -> SentenceVector:
    tokens = [tok for record in source.sentences for tok in record.tokens]
    return embed_sentence(tokens, store)


def clean_summary(
    candidate: SummaryCandidate,
    source: AnalyzerText,
    store: EmbeddingStore,
    config: PipelineConfig,
) -> SummaryCandidate:
    """Two-stage cleaning, in order: drop sentences whose cosine to the full
    source text is below alpha, then drop sentences whose cosine to an
    earlier kept sentence exceeds beta. May return an empty candidate."""
    src = _source_vector(source, store)
    relevant = [
        record
        for record in candidate.sentences
        if cosine_similarity(embed_sentence(list(record.tokens), store), src) >= config.alpha
    ]
    kept: list[SentenceRecord] = []
    kept_vecs: list[SentenceVector] = []
    for record in relevant:
        vec = embed_sentence(list(record.tokens), store)
        if all(cosine_similarity(vec, prev) <= config.beta for prev in kept_vecs):
            kept.append(record)
            kept_vecs.append(vec)
    return SummaryCandidate(variant_id=candidate.variant_id, sentences=tuple(kept))


def score_summary_quality(candidate: SummaryCandidate) -> QualityScore:
    """Density of verbs, pronouns, and coordinating conjunctions."""
    verbs = pronouns = cconjs = tokens = 0
    for record in candidate.sentences:
        for tok in record.tokens:
            tokens += 1
            if tok.pos == VERB:
                verbs += 1
            elif tok.pos == PRON:
                pronouns += 1
            elif tok.pos == CCONJ:
                cconjs += 1
    return QualityScore(
        verb_count=verbs, pronoun_count=pronouns, cconj_count=cconjs, token_count=tokens
    )


def select_best_summary(candidates: list[SummaryCandidate]) -> SummaryCandidate:
    """Argmax by quality score; ties break toward more sentences, then the
    lowest variant id. All-empty input halts with the no-summary status."""
    non_empty = [c for c in candidates if c.sentences]
    if not non_empty:
        raise PipelineHalt(STATUS_NO_SUMMARY, "all summary candidates are empty")
    return max(
        non_empty,
        key=lambda c: (score_summary_quality(c).score, len(c.sentences), -c.variant_id),
    )


@dataclass
class PipelineResources:
    """Read-only resources shared by every image."""

    store: EmbeddingStore
    graph: SynsetGraph
    lexicon: PosLexicon
    backend: SummarizerBackend


@dataclass
class PipelineResult:
    paragraph: str
    status: str
    chosen_variant: int | None = None
    chosen_noun: str | None = None
    stage_counts: dict = field(default_factory=dict)


def render_paragraph(candidate: SummaryCandidate) -> str:
    parts = []
    for record in candidate.sentences:
        raw = record.raw.strip()
        parts.append(raw if raw.endswith(tuple(_TERMINATORS)) else raw + ".")
    return " ".join(parts)


def run_pipeline(
    bundle: ImageBundle, resources: PipelineResources, config: PipelineConfig
) -> PipelineResult:
    """End-to-end: gate -> filters -> templates -> concatenate -> summarize
    -> clean -> score -> select. Defined early stops map to distinct
    statuses instead of raising."""
    counts: dict[str, int] = {}
    try:
        p = gate_people(bundle.detections, config)
        analyzed = analyze_captions(list(bundle.captions), resources.lexicon)
        counts["captions_in"] = len(analyzed)
        analyzed = dedup_captions(analyzed, resources.store, config)
        counts["after_dedup"] = len(analyzed)
        analyzed = filter_person_captions(analyzed, resources.graph)
        counts["after_person_filter"] = len(analyzed)
        analyzed = filter_short_captions(analyzed)
        counts["after_short_filter"] = len(analyzed)
        analyzed, chosen_noun = standardize_subject(analyzed, resources.graph)
        templates = render_classifier_sentences(bundle.classifiers, p, chosen_noun, config)
        counts["classifier_sentences"] = len(templates)
        text = build_analyzer_text(analyzed, templates, chosen_noun, resources.lexicon)
        candidates = generate_summaries(text, resources.backend, config, resources.lexicon)
        cleaned = [clean_summary(c, text, resources.store, config) for c in candidates]
        best = select_best_summary(cleaned)
        return PipelineResult(
            paragraph=render_paragraph(best),
            status=STATUS_OK,
            chosen_variant=best.variant_id,
            chosen_noun=chosen_noun,
            stage_counts=counts,
        )
    except PipelineHalt as halt:
        return PipelineResult(paragraph="", status=halt.status, stage_counts=counts)

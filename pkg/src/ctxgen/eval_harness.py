"""Evaluation machinery: BLEU-1..4, METEOR, CIDEr, corpus statistics,
concatenation baselines, and the sentence-removal ablation.

Metric conventions: BLEU is unsmoothed (any zero precision at an order
<= n scores 0) with closest-reference-length brevity penalty; METEOR uses
the classic three-stage matcher (exact, suffix-strip stem, shared-synset
synonym) with Fmean = 10PR/(R+9P) and penalty 0.5*(chunks/matches)^3;
CIDEr is the consensus formulation with idf = log(N / max(1, df)) and a
x10 scale, averaged over n-gram orders 1..4.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ctxgen.config import PipelineConfig
from ctxgen.context_gen import PipelineResources
from ctxgen.image_analyzer import (
    RegionCaption,
    analyze_captions,
    dedup_captions,
    filter_person_captions,
    filter_short_captions,
    standardize_subject,
)
from ctxgen.lexnet import SynsetGraph
from ctxgen.text_core import (
    ADJ,
    CCONJ,
    NOUN,
    PRON,
    VERB,
    PosLexicon,
    normalize_and_tokenize,
    split_sentences,
    tag_tokens,
)

STAT_TAGS = (NOUN, VERB, ADJ, PRON, CCONJ)


# ---------------------------------------------------------------------------
# BLEU


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _closest_ref_length(references: list[list[str]], cand_len: int) -> int:
    return min((abs(len(r) - cand_len), len(r)) for r in references)[1]


def _clipped_counts(candidate: list[str], references: list[list[str]], k: int) -> tuple[int, int]:
    """(clipped matches, candidate k-gram count) for one segment."""
    cand_counts = _ngram_counts(candidate, k)
    max_ref: Counter = Counter()
    for ref in references:
        for gram, count in _ngram_counts(ref, k).items():
            max_ref[gram] = max(max_ref[gram], count)
    clipped = sum(min(count, max_ref[gram]) for gram, count in cand_counts.items())
    return clipped, max(0, len(candidate) - k + 1)


def bleu_n(candidate: list[str], references: list[list[str]], n: int) -> float:
    """Single-segment BLEU-n: geometric mean of clipped precisions for
    orders 1..n times the brevity penalty. No smoothing."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not candidate or not references:
        return 0.0
    log_sum = 0.0
    for k in range(1, n + 1):
        clipped, guess = _clipped_counts(candidate, references, k)
        if clipped == 0 or guess == 0:
            return 0.0
        log_sum += math.log(clipped / guess)
    c = len(candidate)
    r = _closest_ref_length(references, c)
    bp = min(1.0, math.exp(1.0 - r / c))
    return bp * math.exp(log_sum / n)


def corpus_bleu(candidates: list[list[str]], references: list[list[list[str]]], n: int) -> float:
    """Corpus BLEU-n: n-gram counts aggregate over all segments before the
    geometric mean; r and c are summed lengths."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if len(candidates) != len(references):
        raise ValueError("candidate/reference count mismatch")
    totals = [[0, 0] for _ in range(n)]
    c_total = r_total = 0
    for cand, refs in zip(candidates, references):
        if not cand or not refs:
            continue
        c_total += len(cand)
        r_total += _closest_ref_length(refs, len(cand))
        for k in range(1, n + 1):
            clipped, guess = _clipped_counts(cand, refs, k)
            totals[k - 1][0] += clipped
            totals[k - 1][1] += guess
    if c_total == 0:
        return 0.0
    log_sum = 0.0
    for clipped, guess in totals:
        if clipped == 0 or guess == 0:
            return 0.0
        log_sum += math.log(clipped / guess)
    bp = min(1.0, math.exp(1.0 - r_total / c_total))
    return bp * math.exp(log_sum / n)


# ---------------------------------------------------------------------------
# METEOR

_STEM_SUFFIXES = ("ing", "ed", "es", "s")


def _stem(word: str) -> str:
    """Fixed suffix strip (longest first); stems shorter than two characters
    are left alone."""
    for suffix in _STEM_SUFFIXES:
        if word.endswith(suffix) and len(word) - len(suffix) >= 2:
            return word[: -len(suffix)]
    return word


def meteor(candidate: list[str], reference: list[str], graph: SynsetGraph) -> float:
    """Unigram-alignment METEOR against a single reference.

    Alignment stages run in order (exact, stem, synonym by shared synset),
    matching greedily left-to-right; each unigram aligns at most once.
    """
    if not candidate or not reference:
        return 0.0

    cand_free = [True] * len(candidate)
    ref_free = [True] * len(reference)
    alignment: list[tuple[int, int]] = []

    def run_stage(matcher) -> None:
        for i, word in enumerate(candidate):
            if not cand_free[i]:
                continue
            for j, ref_word in enumerate(reference):
                if ref_free[j] and matcher(word, ref_word):
                    alignment.append((i, j))
                    cand_free[i] = False
                    ref_free[j] = False
                    break

    run_stage(lambda a, b: a == b)
    run_stage(lambda a, b: _stem(a) == _stem(b))
    run_stage(lambda a, b: bool(graph.synsets_of(a) & graph.synsets_of(b)))

    matches = len(alignment)
    if matches == 0:
        return 0.0
    precision = matches / len(candidate)
    recall = matches / len(reference)
    fmean = 10 * precision * recall / (recall + 9 * precision)

    alignment.sort()
    chunks = 1
    for (i1, j1), (i2, j2) in zip(alignment, alignment[1:]):
        if i2 != i1 + 1 or j2 != j1 + 1:
            chunks += 1
    penalty = 0.5 * (chunks / matches) ** 3
    return fmean * (1.0 - penalty)


# ---------------------------------------------------------------------------
# CIDEr

_CIDER_N = 4


def _tfidf_vector(tokens: list[str], k: int, df: Counter, n_images: int) -> dict:
    """tf-idf weights with idf = log(N / max(1, df)); an n-gram seen in no
    reference gets the full log(N) weight (it still inflates the norm)."""
    return {
        gram: count * math.log(n_images / max(1, df.get(gram, 0)))
        for gram, count in _ngram_counts(tokens, k).items()
    }


def _sparse_cosine(u: dict, v: dict) -> float:
    norm_u = math.sqrt(sum(w * w for w in u.values()))
    norm_v = math.sqrt(sum(w * w for w in v.values()))
    if norm_u == 0.0 or norm_v == 0.0:
        return 0.0
    dot = sum(w * v[g] for g, w in u.items() if g in v)
    return dot / (norm_u * norm_v)


def _document_frequencies(corpus: list[list[list[str]]], k: int) -> Counter:
    df: Counter = Counter()
    for image_refs in corpus:
        grams: set = set()
        for ref in image_refs:
            grams.update(_ngram_counts(ref, k).keys())
        df.update(grams)
    return df


def cider(
    candidate: list[str],
    references: list[list[str]],
    corpus: list[list[list[str]]],
) -> float:
    """Consensus score for one candidate given its references and the full
    corpus of reference sets (used only for document frequencies).

    For each n in 1..4 the candidate/reference tf-idf vectors are compared
    by cosine, averaged over references; the final score is the mean over n,
    scaled by 10. A corpus with fewer than 2 images yields degenerate idf.
    """
    if not candidate or not references:
        return 0.0
    n_images = len(corpus)
    per_order = []
    for k in range(1, _CIDER_N + 1):
        df = _document_frequencies(corpus, k)
        cand_vec = _tfidf_vector(candidate, k, df, n_images)
        sims = [
            _sparse_cosine(cand_vec, _tfidf_vector(ref, k, df, n_images))
            for ref in references
        ]
        per_order.append(sum(sims) / len(sims))
    return 10.0 * sum(per_order) / _CIDER_N


def corpus_cider(candidates: list[list[str]], references: list[list[list[str]]]) -> float:
    """Mean per-image CIDEr with document frequencies built once."""
    if len(candidates) != len(references):
        raise ValueError("candidate/reference count mismatch")
    if not candidates:
        return 0.0
    n_images = len(references)
    df_by_order = {
        k: _document_frequencies(references, k) for k in range(1, _CIDER_N + 1)
    }
    scores = []
    for cand, refs in zip(candidates, references):
        if not cand or not refs:
            scores.append(0.0)
            continue
        per_order = []
        for k in range(1, _CIDER_N + 1):
            cand_vec = _tfidf_vector(cand, k, df_by_order[k], n_images)
            sims = [
                _sparse_cosine(cand_vec, _tfidf_vector(ref, k, df_by_order[k], n_images))
                for ref in refs
            ]
            per_order.append(sum(sims) / len(sims))
        scores.append(10.0 * sum(per_order) / _CIDER_N)
    return float(np.mean(scores))


# ---------------------------------------------------------------------------
# Reports


@dataclass
class MetricReport:
    bleu: list[float]
    meteor: float
    cider: float

    def to_dict(self) -> dict:
        return {"bleu": list(self.bleu), "meteor": self.meteor, "cider": self.cider}


def corpus_metrics(
    candidates: list[list[str]],
    references: list[list[list[str]]],
    graph: SynsetGraph,
) -> MetricReport:
    """BLEU at corpus level; METEOR as the mean over images of the best
    single-reference score; CIDEr as the mean per-image consensus score."""
    bleu = [corpus_bleu(candidates, references, n) for n in range(1, 5)]
    meteor_scores = [
        max((meteor(cand, ref, graph) for ref in refs), default=0.0)
        for cand, refs in zip(candidates, references)
    ]
    meteor_mean = float(np.mean(meteor_scores)) if meteor_scores else 0.0
    return MetricReport(bleu=bleu, meteor=meteor_mean, cider=corpus_cider(candidates, references))


@dataclass
class Stat:
    mean: float
    std: float

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std}


@dataclass
class CorpusStats:
    chars: Stat
    words: Stat
    sentences: Stat
    pos_pct: dict[str, float]
    vocab_size: int

    def to_dict(self) -> dict:
        return {
            "chars": self.chars.to_dict(),
            "words": self.words.to_dict(),
            "sentences": self.sentences.to_dict(),
            "pos_pct": dict(self.pos_pct),
            "vocab_size": self.vocab_size,
        }


def language_stats(paragraphs: list[str], lexicon: PosLexicon) -> CorpusStats:
    """Per-paragraph character/word/sentence statistics (population std) and
    corpus-wide POS percentages plus distinct-surface vocabulary size."""
    if not paragraphs:
        zero = Stat(0.0, 0.0)
        return CorpusStats(zero, zero, zero, {tag: 0.0 for tag in STAT_TAGS}, 0)
    chars = []
    words = []
    sentences = []
    tag_counts = Counter()
    vocab: set[str] = set()
    total_tokens = 0
    for paragraph in paragraphs:
        tokens = tag_tokens(normalize_and_tokenize(paragraph), lexicon)
        chars.append(len(paragraph))
        words.append(len(tokens))
        sentences.append(len(split_sentences(paragraph)))
        total_tokens += len(tokens)
        for tok in tokens:
            tag_counts[tok.pos] += 1
            vocab.add(tok.surface)
    pos_pct = {
        tag: 100.0 * tag_counts[tag] / total_tokens if total_tokens else 0.0
        for tag in STAT_TAGS
    }

    def stat(values: list[int]) -> Stat:
        arr = np.asarray(values, dtype=np.float64)
        return Stat(mean=float(arr.mean()), std=float(arr.std()))

    return CorpusStats(
        chars=stat(chars),
        words=stat(words),
        sentences=stat(sentences),
        pos_pct=pos_pct,
        vocab_size=len(vocab),
    )


# ---------------------------------------------------------------------------
# Baselines and ablation


def make_concat_baseline(captions: list[RegionCaption]) -> str:
    """Paragraph from every caption verbatim, in order."""
    if not captions:
        return ""
    return ". ".join(c.text for c in captions) + "."


def make_concat_filter_baseline(
    captions: list[RegionCaption],
    resources: PipelineResources,
    config: PipelineConfig,
) -> str:
    """Paragraph from the person-filter cascade output (no classifier
    sentences, no summarization)."""
    analyzed = analyze_captions(captions, resources.lexicon)
    analyzed = dedup_captions(analyzed, resources.store, config)
    analyzed = filter_person_captions(analyzed, resources.graph)
    analyzed = filter_short_captions(analyzed)
    analyzed, _ = standardize_subject(analyzed, resources.graph)
    if not analyzed:
        return ""
    return ". ".join(cap.record.raw for cap in analyzed) + "."


def ablate_sentences(paragraph: str, keep_fraction: float, seed: int) -> str:
    """Uniformly drop sentences without replacement until
    ceil(keep_fraction * count) remain, preserving order."""
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError(f"keep_fraction must lie in (0, 1], got {keep_fraction}")
    sentences = split_sentences(paragraph)
    if not sentences:
        return ""
    keep = math.ceil(keep_fraction * len(sentences))
    chosen = sorted(random.Random(seed).sample(range(len(sentences)), keep))
    return " ".join(sentences[i] for i in chosen)

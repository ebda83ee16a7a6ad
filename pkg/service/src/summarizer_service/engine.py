"""Summarization engines behind the service.

Two implementations: :class:`CheckpointEngine` wraps any locally available
sequence-to-sequence summarization checkpoint (loaded with transformers,
decoding with the requested beam width, no sampling), and
:class:`CondenserEngine`, a dependency-free deterministic condenser used
when no checkpoint is configured so the wire protocol is always servable.
"""

from __future__ import annotations

import re
from typing import Protocol

_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")
_WORD_RE = re.compile(r"[a-z0-9]+")


class SummaryEngine(Protocol):
    name: str

    def summarize(self, text: str, beam_width: int) -> str: ...


class CondenserEngine:
    """Deterministic sentence condenser.

    Sentences are scored by lexical centrality (summed word overlap with the
    rest of the text, normalized by length); the beam width sets how many of
    the most central sentences survive, emitted in original order.
    """

    name = "condenser"

    def summarize(self, text: str, beam_width: int) -> str:
        sentences = [s.strip() for s in _SENTENCE_RE.split(text) if s.strip()]
        if not sentences:
            return ""
        word_sets = [set(_WORD_RE.findall(s.lower())) for s in sentences]
        scores = []
        for i, words in enumerate(word_sets):
            overlap = sum(
                len(words & other) for j, other in enumerate(word_sets) if j != i
            )
            scores.append(overlap / max(len(words), 1))
        budget = min(max(beam_width, 1), len(sentences))
        ranked = sorted(range(len(sentences)), key=lambda i: (-scores[i], i))
        chosen = sorted(ranked[:budget])
        parts = []
        for i in chosen:
            sentence = sentences[i]
            parts.append(sentence if sentence.endswith((".", "!", "?")) else sentence + ".")
        return " ".join(parts)


class CheckpointEngine:
    """Wraps a local transformers seq2seq checkpoint; deterministic beam
    search decoding (no sampling)."""

    name = "checkpoint"

    def __init__(self, model_path: str, max_new_tokens: int = 120):
        from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

        self.tokenizer = AutoTokenizer.from_pretrained(model_path)
        self.model = AutoModelForSeq2SeqLM.from_pretrained(model_path)
        self.model.eval()
        self.max_new_tokens = max_new_tokens

    def summarize(self, text: str, beam_width: int) -> str:
        import torch

        inputs = self.tokenizer(
            "summarize: " + text, return_tensors="pt", truncation=True, max_length=512
        )
        with torch.no_grad():
            output = self.model.generate(
                **inputs,
                num_beams=max(beam_width, 1),
                do_sample=False,
                max_new_tokens=self.max_new_tokens,
                early_stopping=True,
            )
        return self.tokenizer.decode(output[0], skip_special_tokens=True).strip()

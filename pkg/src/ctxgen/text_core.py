"""Tokenization, sentence segmentation, and lexicon-based POS tagging.

Everything downstream (caption filtering, summary cleaning, quality scoring,
corpus statistics) runs on the primitives in this module, so they are kept
deliberately small and deterministic: no statistical models, no external
NLP dependencies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

NOUN = "NOUN"
VERB = "VERB"
ADJ = "ADJ"
PRON = "PRON"
CCONJ = "CCONJ"
DET = "DET"
ADP = "ADP"
NUM = "NUM"
OTHER = "OTHER"

ALL_TAGS = frozenset({NOUN, VERB, ADJ, PRON, CCONJ, DET, ADP, NUM, OTHER})

CLOSED_CLASS_TAGS = (PRON, CCONJ, DET, ADP)

_TERMINATORS = ".!?"

# Words before a '.' that never end a sentence. Entries may themselves
# contain dots ("e.g"); single letters are treated the same way so that the
# internal dots of such abbreviations (and initials) do not split.
_ABBREVIATIONS = frozenset({"mr", "mrs", "dr", "st", "e.g", "i.e"})


@dataclass(frozen=True)
class Token:
    """One lowercase, punctuation-free word with an optional POS tag."""

    surface: str
    pos: str | None = None

    def __post_init__(self):
        if not self.surface:
            raise ValueError("token surface must be non-empty")

    def tagged(self, pos: str) -> "Token":
        return Token(self.surface, pos)


@dataclass(frozen=True)
class SentenceRecord:
    """A sentence plus its tokenization (tagged when built with a lexicon)."""

    raw: str
    tokens: tuple[Token, ...]

    @classmethod
    def from_raw(cls, raw: str, lexicon: "PosLexicon | None" = None) -> "SentenceRecord":
        tokens = normalize_and_tokenize(raw)
        if lexicon is not None:
            tokens = tag_tokens(tokens, lexicon)
        return cls(raw=raw, tokens=tuple(tokens))

    @property
    def token_count(self) -> int:
        return len(self.tokens)

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]


def normalize_and_tokenize(text: str) -> list[Token]:
    """Lowercase, strip punctuation, and split ``text`` into tokens.

    Punctuation means every non-alphanumeric, non-whitespace character and is
    deleted rather than split on, so apostrophes vanish ("man's" -> "mans").
    Whitespace runs collapse; the empty string yields an empty list.
    """
    cleaned = "".join(
        ch for ch in text.lower() if ch.isalnum() or ch.isspace()
    )
    return [Token(word) for word in cleaned.split()]


def _word_before(text: str, pos: int) -> str:
    """The non-whitespace run ending just before ``pos``, lowercased and
    stripped of leading non-alphanumeric characters."""
    start = pos
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = text[start:pos].lower()
    while word and not word[0].isalnum():
        word = word[1:]
    return word


def _ends_sentence(word: str) -> bool:
    if word in _ABBREVIATIONS:
        return False
    if len(word) == 1 and word.isalpha():
        return False
    return True


def split_sentences(text: str) -> list[str]:
    """Split ``text`` on '.', '!', '?' while honoring the abbreviation list.

    Consecutive terminators stay attached to their sentence, a trailing
    fragment without a terminator is kept, and no empty sentences are
    returned.
    """
    sentences: list[str] = []
    buf: list[str] = []

    def flush():
        sentence = "".join(buf).strip()
        if sentence:
            sentences.append(sentence)
        buf.clear()

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        buf.append(ch)
        if ch in _TERMINATORS:
            run_start = i
            while i + 1 < n and text[i + 1] in _TERMINATORS:
                i += 1
                buf.append(text[i])
            if ch != "." or _ends_sentence(_word_before(text, run_start)):
                flush()
        i += 1
    flush()
    return sentences


@dataclass
class PosLexicon:
    """Word -> most-frequent-tag table plus closed-class word lists.

    Lookup is total: closed-class lists win over entries, unknown words fall
    through to suffix heuristics and finally to OTHER.
    """

    entries: dict[str, str] = field(default_factory=dict)
    closed_class: dict[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        self._closed_of: dict[str, str] = {}
        for tag in CLOSED_CLASS_TAGS:
            for word in self.closed_class.get(tag, ()):
                self._closed_of[word] = tag

    @classmethod
    def load(cls, path: str | Path) -> "PosLexicon":
        """Parse a lexicon file: ``word<TAB>TAG`` lines, with closed-class
        sections headed by ``#PRON``, ``#CCONJ``, ``#DET``, ``#ADP``."""
        entries: dict[str, str] = {}
        sections: dict[str, set[str]] = {tag: set() for tag in CLOSED_CLASS_TAGS}
        section: str | None = None
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    head = line[1:].strip()
                    section = head if head in sections else None
                    continue
                if section is not None:
                    sections[section].add(line.lower())
                    continue
                if "\t" not in line:
                    raise ValueError(
                        f"{path}:{lineno}: expected 'word<TAB>TAG', got {line!r}"
                    )
                word, tag = line.split("\t", 1)
                tag = tag.strip().upper()
                if tag not in ALL_TAGS:
                    raise ValueError(f"{path}:{lineno}: unknown tag {tag!r}")
                entries[word.strip().lower()] = tag
        return cls(
            entries=entries,
            closed_class={tag: frozenset(words) for tag, words in sections.items()},
        )

    def lookup(self, word: str) -> str:
        tag = self._closed_of.get(word)
        if tag is not None:
            return tag
        tag = self.entries.get(word)
        if tag is not None:
            return tag
        return self._heuristic(word)

    def _heuristic(self, word: str) -> str:
        if word.isdigit():
            return NUM
        if word.endswith("ing") and len(word) > 3:
            return VERB
        if word.endswith("ed") and len(word) > 2:
            return VERB
        if word.endswith("ly") and len(word) > 2:
            return OTHER
        if word.endswith("s") and len(word) > 1:
            for stem in (word[:-1], word[:-2] if word.endswith("es") else None):
                if stem and self.entries.get(stem) == NOUN:
                    return NOUN
        return OTHER


def tag_tokens(tokens: list[Token], lexicon: PosLexicon) -> list[Token]:
    """Assign exactly one tag to every token; length-preserving."""
    return [tok.tagged(lexicon.lookup(tok.surface)) for tok in tokens]

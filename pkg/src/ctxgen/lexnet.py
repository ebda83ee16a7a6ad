"""WordNet-style noun databases and the "is this word a person?" query.

Two on-disk formats are supported: the WordNet 3.x grind format
(``data.noun`` + ``index.noun``) and a simplified TSV fallback
(``synset_id<TAB>lemma1,lemma2<TAB>hypernym_id1,hypernym_id2``).

A word counts as person-related when any of its senses can reach a
designated person root by walking hypernym edges upward, or when it is one
of the fixed personal pronouns.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from ctxgen.text_core import NOUN, PRON, SentenceRecord

# Hypernym pointer symbols (plain and instance) in the grind format.
_HYPERNYM_SYMBOLS = {"@", "@i"}

PERSONAL_PRONOUNS = frozenset(
    {"he", "she", "him", "her", "they", "them", "i", "we", "you", "who"}
)


class LexnetLoadError(ValueError):
    """Raised for unparseable records, broken references, or a missing
    person root."""


@dataclass(frozen=True)
class Synset:
    lemmas: frozenset[str]
    hypernyms: frozenset[str]


@dataclass
class SynsetGraph:
    """Noun synsets keyed by id, plus the ids anchoring the person concept."""

    synsets: dict[str, Synset]
    person_roots: frozenset[str]
    _lemma_index: dict[str, frozenset[str]] = field(init=False, repr=False)
    _person_memo: dict[str, bool] = field(init=False, repr=False)

    def __post_init__(self):
        index: dict[str, set[str]] = {}
        for sid, synset in self.synsets.items():
            for lemma in synset.lemmas:
                index.setdefault(lemma, set()).add(sid)
        self._lemma_index = {w: frozenset(ids) for w, ids in index.items()}
        self._person_memo = {}

    def synsets_of(self, word: str) -> frozenset[str]:
        return self._lemma_index.get(word.lower(), frozenset())

    def reaches_person_root(self, synset_id: str) -> bool:
        """Upward hypernym traversal with a visited set, so cyclic graphs
        terminate; results are memoized per synset."""
        memo = self._person_memo
        cached = memo.get(synset_id)
        if cached is not None:
            return cached
        seen: set[str] = set()
        queue = deque([synset_id])
        found = False
        while queue:
            sid = queue.popleft()
            if sid in seen:
                continue
            seen.add(sid)
            if sid in self.person_roots:
                found = True
                break
            synset = self.synsets.get(sid)
            if synset is not None:
                queue.extend(synset.hypernyms)
        memo[synset_id] = found
        return found


def _resolve_graph(
    synsets: dict[str, Synset],
    person_root_ids: list[str] | None,
    source: str | Path,
) -> SynsetGraph:
    for sid, synset in synsets.items():
        for hyp in synset.hypernyms:
            if hyp not in synsets:
                raise LexnetLoadError(
                    f"{source}: synset {sid} has hypernym pointer to unknown synset {hyp}"
                )
    if person_root_ids is not None:
        roots = frozenset(person_root_ids)
        missing = roots - synsets.keys()
        if missing:
            raise LexnetLoadError(
                f"{source}: configured person root(s) not in database: {sorted(missing)}"
            )
    else:
        roots = frozenset(sid for sid, s in synsets.items() if "person" in s.lemmas)
    if not roots:
        raise LexnetLoadError(f"{source}: no person root synset found")
    return SynsetGraph(synsets=synsets, person_roots=roots)


def _is_header(raw: bytes) -> bool:
    return raw.startswith(b"  ")


def _parse_data_line(line: str, offset: int, path: str | Path) -> tuple[str, Synset]:
    body = line.split("|", 1)[0]
    fields = body.split()
    try:
        synset_id = fields[0]
        ss_type = fields[2]
        if ss_type not in ("n",):
            raise ValueError(f"unsupported synset type {ss_type!r}")
        w_cnt = int(fields[3], 16)
        words = [fields[4 + 2 * i].lower() for i in range(w_cnt)]
        p_pos = 4 + 2 * w_cnt
        p_cnt = int(fields[p_pos], 10)
        hypernyms = set()
        for i in range(p_cnt):
            symbol, target, pos, _st = fields[p_pos + 1 + 4 * i : p_pos + 5 + 4 * i]
            if symbol in _HYPERNYM_SYMBOLS and pos == "n":
                hypernyms.add(target)
    except (IndexError, ValueError) as exc:
        raise LexnetLoadError(
            f"{path}: unparseable record at byte offset {offset}: {exc}"
        ) from exc
    return synset_id, Synset(lemmas=frozenset(words), hypernyms=frozenset(hypernyms))


def load_wordnet(
    data_path: str | Path,
    index_path: str | Path,
    person_root_ids: list[str] | None = None,
) -> SynsetGraph:
    """Parse ``data.noun`` / ``index.noun`` into a :class:`SynsetGraph`.

    The index is cross-checked against the data file: an index entry naming
    an absent synset is a load error, as is a dangling hypernym pointer.
    """
    synsets: dict[str, Synset] = {}
    offset = 0
    with open(data_path, "rb") as fh:
        for raw in fh:
            if not _is_header(raw) and raw.strip():
                line = raw.decode("utf-8")
                sid, synset = _parse_data_line(line, offset, data_path)
                synsets[sid] = synset
            offset += len(raw)

    offset = 0
    with open(index_path, "rb") as fh:
        for raw in fh:
            if _is_header(raw) or not raw.strip():
                offset += len(raw)
                continue
            fields = raw.decode("utf-8").split()
            try:
                lemma = fields[0].lower()
                synset_cnt = int(fields[2])
                p_cnt = int(fields[3])
                ids = fields[6 + p_cnt : 6 + p_cnt + synset_cnt]
                if len(ids) != synset_cnt:
                    raise ValueError("offset list shorter than synset_cnt")
            except (IndexError, ValueError) as exc:
                raise LexnetLoadError(
                    f"{index_path}: unparseable record at byte offset {offset}: {exc}"
                ) from exc
            for sid in ids:
                if sid not in synsets:
                    raise LexnetLoadError(
                        f"{index_path}: lemma {lemma!r} names synset {sid} "
                        f"absent from {data_path}"
                    )
            offset += len(raw)

    return _resolve_graph(synsets, person_root_ids, data_path)


def load_person_tsv(path: str | Path, person_root_ids: list[str] | None = None) -> SynsetGraph:
    """Parse the simplified TSV fallback format."""
    synsets: dict[str, Synset] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise LexnetLoadError(
                    f"{path}:{lineno}: expected 2 or 3 tab-separated fields"
                )
            sid = parts[0].strip()
            lemmas = frozenset(
                w.strip().lower() for w in parts[1].split(",") if w.strip()
            )
            hyps = frozenset(
                h.strip() for h in (parts[2].split(",") if len(parts) == 3 else []) if h.strip()
            )
            if not sid or not lemmas:
                raise LexnetLoadError(f"{path}:{lineno}: empty synset id or lemma list")
            synsets[sid] = Synset(lemmas=lemmas, hypernyms=hyps)
    return _resolve_graph(synsets, person_root_ids, path)


def is_person_related(word: str, graph: SynsetGraph) -> bool:
    """True iff ``word`` is a personal pronoun, a lemma of a person root, or
    a lemma of any synset that reaches a person root upward. Any matching
    sense suffices; unknown words are False."""
    word = word.lower()
    if word in PERSONAL_PRONOUNS:
        return True
    return any(graph.reaches_person_root(sid) for sid in graph.synsets_of(word))


def person_nouns_in(sentence: SentenceRecord, graph: SynsetGraph) -> list[str]:
    """Every NOUN or PRON token surface that is person-related, in order."""
    return [
        tok.surface
        for tok in sentence.tokens
        if tok.pos in (NOUN, PRON) and is_person_related(tok.surface, graph)
    ]

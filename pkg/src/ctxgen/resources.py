"""Locating and loading the shared read-only resources.

Lexicon, synset database, and demo word vectors ship with the package;
any of them can be overridden through :class:`~ctxgen.config.ResourceConfig`.
"""

from __future__ import annotations

from pathlib import Path

from ctxgen.config import ResourceConfig
from ctxgen.context_gen import PipelineResources, SummarizerBackend
from ctxgen.embeddings import load_vectors
from ctxgen.lexnet import load_person_tsv, load_wordnet
from ctxgen.text_core import PosLexicon

_DATA_DIR = Path(__file__).parent / "data"

BUNDLED_LEXICON = _DATA_DIR / "pos_lexicon.txt"
BUNDLED_SYNSETS = _DATA_DIR / "person_synsets.tsv"
BUNDLED_VECTORS = _DATA_DIR / "demo_vectors.txt"


class MissingResourceError(FileNotFoundError):
    def __init__(self, what: str, path: str | Path):
        super().__init__(f"{what} file not found: {path}")
        self.path = str(path)


def _checked(what: str, path: str | Path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise MissingResourceError(what, path)
    return path


def load_embeddings(cfg: ResourceConfig | None = None):
    cfg = cfg or ResourceConfig()
    return load_vectors(_checked("embeddings", cfg.embeddings_path or BUNDLED_VECTORS))


def load_lexicon(cfg: ResourceConfig | None = None) -> PosLexicon:
    cfg = cfg or ResourceConfig()
    return PosLexicon.load(_checked("lexicon", cfg.lexicon_path or BUNDLED_LEXICON))


def load_graph(cfg: ResourceConfig | None = None):
    cfg = cfg or ResourceConfig()
    if cfg.wordnet_data_path or cfg.wordnet_index_path:
        if not (cfg.wordnet_data_path and cfg.wordnet_index_path):
            raise ValueError("wordnet_data_path and wordnet_index_path must be set together")
        return load_wordnet(
            _checked("synset data", cfg.wordnet_data_path),
            _checked("synset index", cfg.wordnet_index_path),
            cfg.person_root_ids,
        )
    return load_person_tsv(
        _checked("synset TSV", cfg.wordnet_tsv_path or BUNDLED_SYNSETS),
        cfg.person_root_ids,
    )


def load_resources(
    resource_cfg: ResourceConfig | None = None,
    backend: SummarizerBackend | None = None,
) -> PipelineResources:
    """Load embeddings, synset graph, and lexicon per the resource config,
    falling back to the bundled data files."""
    cfg = resource_cfg or ResourceConfig()
    return PipelineResources(
        store=load_embeddings(cfg),
        graph=load_graph(cfg),
        lexicon=load_lexicon(cfg),
        backend=backend,
    )

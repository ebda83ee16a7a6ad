"""Pipeline thresholds and resource locations.

Precedence when assembling a run: config file < CLI flags < ``CTXGEN_*``
environment variables.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

ENV_PREFIX = "CTXGEN_"

# (upper age inclusive, label); None = unbounded last bin.
DEFAULT_AGE_BOUNDARIES: list[tuple[float | None, str]] = [
    (14, "Child"),
    (24, "Young"),
    (44, "Adult"),
    (59, "Middle-aged"),
    (None, "Elderly"),
]

_FLOAT_FIELDS = (
    "t_text_sim",
    "t_model_confidence",
    "alpha",
    "beta",
    "min_person_prob",
    "person_area_ratio",
)


@dataclass
class PipelineConfig:
    """Every tunable threshold of the generation pipeline."""

    t_text_sim: float = 0.95
    t_model_confidence: float = 0.6
    alpha: float = 0.7
    beta: float = 0.5
    min_person_prob: float = 0.6
    person_area_ratio: float = 0.5
    beam_widths: list[int] = field(default_factory=lambda: [2, 3, 4, 5, 6])
    age_boundaries: list[tuple[float | None, str]] = field(
        default_factory=lambda: list(DEFAULT_AGE_BOUNDARIES)
    )

    def validate(self) -> None:
        for name in _FLOAT_FIELDS:
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if not self.beam_widths or any(w < 1 for w in self.beam_widths):
            raise ValueError(f"beam_widths must be >= 1, got {self.beam_widths}")
        uppers = [u for u, _ in self.age_boundaries[:-1]]
        if self.age_boundaries[-1][0] is not None:
            raise ValueError("last age bin must be unbounded (upper = null)")
        if any(u is None for u in uppers) or uppers != sorted(set(uppers)):
            raise ValueError(f"age boundaries must strictly increase: {self.age_boundaries}")

    def to_dict(self) -> dict:
        return {
            **{name: getattr(self, name) for name in _FLOAT_FIELDS},
            "beam_widths": list(self.beam_widths),
            "age_boundaries": [[u, label] for u, label in self.age_boundaries],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "age_boundaries" in kwargs:
            kwargs["age_boundaries"] = [
                (upper, label) for upper, label in kwargs["age_boundaries"]
            ]
        if "beam_widths" in kwargs:
            kwargs["beam_widths"] = [int(w) for w in kwargs["beam_widths"]]
        config = cls(**kwargs)
        config.validate()
        return config

    def with_overrides(self, overrides: dict) -> "PipelineConfig":
        """Non-None entries in ``overrides`` replace the current values."""
        updates = {k: v for k, v in overrides.items() if v is not None}
        config = replace(self, **updates)
        config.validate()
        return config

    def with_env_overrides(self, env: dict | None = None) -> "PipelineConfig":
        """Apply ``CTXGEN_<FIELD>`` overrides; these beat file and flags."""
        env = os.environ if env is None else env
        updates: dict = {}
        for name in _FLOAT_FIELDS:
            raw = env.get(ENV_PREFIX + name.upper())
            if raw is not None:
                updates[name] = float(raw)
        raw = env.get(ENV_PREFIX + "BEAM_WIDTHS")
        if raw is not None:
            text = raw.strip()
            widths = json.loads(text) if text.startswith("[") else text.split(",")
            updates["beam_widths"] = [int(w) for w in widths]
        raw = env.get(ENV_PREFIX + "AGE_BOUNDARIES")
        if raw is not None:
            updates["age_boundaries"] = [(u, label) for u, label in json.loads(raw)]
        return self.with_overrides(updates) if updates else self


@dataclass
class ResourceConfig:
    """File locations for embeddings, the lexicon, and the synset database.

    Unset lexicon/synset paths fall back to the bundled data files; the
    embeddings path falls back to the bundled demo vectors.
    """

    embeddings_path: str | None = None
    lexicon_path: str | None = None
    wordnet_data_path: str | None = None
    wordnet_index_path: str | None = None
    wordnet_tsv_path: str | None = None
    person_root_ids: list[str] | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "ResourceConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown resource keys: {sorted(unknown)}")
        return cls(**data)

    def with_env_overrides(self, env: dict | None = None) -> "ResourceConfig":
        env = os.environ if env is None else env
        updates: dict = {}
        for f in fields(self):
            raw = env.get(ENV_PREFIX + f.name.upper())
            if raw is None:
                continue
            if f.name == "person_root_ids":
                updates[f.name] = [s for s in raw.split(",") if s]
            else:
                updates[f.name] = raw
        return replace(self, **updates) if updates else self


def load_config_file(path: str | Path) -> tuple[PipelineConfig, ResourceConfig]:
    """Read a JSON config file holding pipeline fields plus an optional
    ``resources`` section."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    resources = ResourceConfig.from_dict(data.pop("resources", {}))
    return PipelineConfig.from_dict(data), resources

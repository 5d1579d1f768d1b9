"""Flat ``key = value`` run configuration."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigInvalid


@dataclass
class RunConfig:
    articles: Path | None = None
    comments: Path | None = None
    workdir: Path = Path("run")
    seed: int = 42
    provider: str = "hash"
    embedding_dim: int = 768
    embedding_file: Path | None = None
    comment_embedding_file: Path | None = None
    n_neighbors: int = 15
    n_components: int = 5
    min_dist: float = 0.0
    spread: float = 1.0
    n_epochs: int = 200
    negative_sample_rate: int = 5
    min_cluster_size: int = 10
    min_samples: int | None = None
    threshold: float = 0.6
    sweep: tuple[float, ...] = (0.4, 0.5, 0.6, 0.7)
    min_words: int = 3
    sentence_filter: bool = False
    top_k: int = 10
    random_k: int = 10
    labels: Path | None = None

    def digest(self) -> str:
        """Hash of every non-path parameter; inputs are tracked by content instead."""
        payload = {k: v for k, v in dataclasses.asdict(self).items() if k not in _PATH_KEYS}
        return hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()

    def validate(self) -> "RunConfig":
        if self.articles is None:
            raise ConfigInvalid("config must name an 'articles' file")
        if self.provider not in ("hash", "file"):
            raise ConfigInvalid(f"unknown provider {self.provider!r}")
        if self.provider == "file" and self.embedding_file is None:
            raise ConfigInvalid("provider 'file' needs 'embedding_file'")
        if self.provider == "file" and self.comments is not None and self.comment_embedding_file is None:
            raise ConfigInvalid("provider 'file' with comments needs 'comment_embedding_file'")
        checks = [
            (self.embedding_dim > 0, "embedding_dim must be positive"),
            (self.n_neighbors >= 2, "n_neighbors must be >= 2"),
            (self.n_components >= 1, "n_components must be >= 1"),
            (self.min_dist >= 0, "min_dist must be >= 0"),
            (self.spread > 0, "spread must be > 0"),
            (self.n_epochs >= 0, "n_epochs must be >= 0"),
            (self.min_cluster_size >= 2, "min_cluster_size must be >= 2"),
            (self.min_samples is None or self.min_samples >= 1, "min_samples must be >= 1"),
            (-1.0 <= self.threshold <= 1.0, "threshold must lie in [-1, 1]"),
            (list(self.sweep) == sorted(self.sweep), "sweep thresholds must be ascending"),
            (self.min_words >= 0, "min_words must be >= 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigInvalid(msg)
        return self


_PATH_KEYS = {"articles", "comments", "workdir", "embedding_file", "comment_embedding_file", "labels"}
_INT_KEYS = {"seed", "embedding_dim", "n_neighbors", "n_components", "n_epochs",
             "negative_sample_rate", "min_cluster_size", "min_samples", "min_words", "top_k", "random_k"}
_FLOAT_KEYS = {"min_dist", "spread", "threshold"}
_ALIASES = {"dims": "n_components", "dim": "embedding_dim"}


def _coerce(key, value: str, base: Path):
    try:
        if key in _PATH_KEYS:
            p = Path(value).expanduser()
            return p if p.is_absolute() else base / p
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key == "sweep":
            return tuple(float(v) for v in value.replace(",", " ").split())
        if key == "sentence_filter":
            low = value.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(value)
            return low in ("true", "1", "yes")
        return value
    except ValueError as exc:
        raise ConfigInvalid(f"bad value for {key!r}: {value!r}") from exc


def parse_config_text(text: str, base: Path = Path(".")) -> RunConfig:
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in fields:
            raise ConfigInvalid(f"config line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value, base)
    return RunConfig(**values)


def load_config(path=None, **overrides) -> RunConfig:
    """Read a config file (if given) and apply non-None ``overrides``."""
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigInvalid(f"config file {p} does not exist")
        cfg = parse_config_text(p.read_text(encoding="utf-8"), base=p.resolve().parent)
    else:
        cfg = RunConfig()
    for key, value in overrides.items():
        if value is None:
            continue
        if not hasattr(cfg, key):
            raise ConfigInvalid(f"unknown setting {key!r}")
        if key in _PATH_KEYS:
            value = Path(value)
        setattr(cfg, key, value)
    return cfg

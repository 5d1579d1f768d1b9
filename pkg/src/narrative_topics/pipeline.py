"""Stage orchestration with content-addressed caching and a run manifest.

Every stage reads its inputs from the work directory, writes its outputs
there, and records a key built from its parameters and the SHA-256 digests of
its inputs. A rerun whose key and output digests match is skipped.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .analytics import (
    assign_origins,
    build_spread_graph,
    comment_origin_attribution,
    domain_statistics,
    stats_csv,
)
from .cluster import HdbscanParams, hdbscan, read_labels, write_labels
from .config import RunConfig
from .corpus import (
    filter_comments,
    ingest_articles,
    load_comment_records,
    read_comments,
    read_sentences,
    write_articles,
    write_comments,
    write_sentences,
)
from .embed import (
    EmbeddingMatrix,
    FileProvider,
    HashProvider,
    embed_batch,
    read_emb1,
    write_emb1,
)
from .errors import (
    ArtifactMissing,
    ConfigInvalid,
    MissingInput,
    NarrativeError,
    NoEligibleClusters,
    StageFailure,
    TooFewKeywords,
    UnsupportedFormat,
)
from .export import csv_text, dumps_json, write_text
from .match import (
    match_corpus,
    matches_csv,
    precision_sample,
    read_matches_csv,
    read_precision_sample,
    score_precision,
    sweep_thresholds,
    user_concentration,
    write_precision_sample,
)
from .reduce import UmapParams, read_coordinates, umap_reduce, write_coordinates
from .topics import build_topic_model, coherence, diversity, intra_cluster_similarity, write_topics_json

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"


def stage_seed(global_seed: int, stage: str) -> int:
    """Per-stage seed: global seed XOR a 64-bit hash of the stage name."""
    h = int.from_bytes(hashlib.blake2b(stage.encode(), digest_size=8).digest(), "little")
    return (int(global_seed) ^ h) & 0xFFFFFFFFFFFFFFFF


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class Stage:
    name: str
    deps: tuple[str, ...]
    outputs: tuple[str, ...]
    optional_outputs: tuple[str, ...] = ()


STAGES: dict[str, Stage] = {
    s.name: s
    for s in [
        Stage("ingest", (), ("articles.jsonl", "sentences.jsonl"), ("comments.jsonl",)),
        Stage("embed", ("ingest",), ("embeddings.emb1",), ("comment_embeddings.emb1",)),
        Stage("reduce", ("embed",), ("coords.csv",)),
        Stage("cluster", ("reduce",), ("labels.csv",)),
        Stage("keywords", ("cluster",), ("topics.json",)),
        Stage("evaluate", ("keywords",), ("evaluation.json",)),
        Stage("match", ("keywords",), ("matches.csv", "match_summary.json")),
        Stage("sweep", ("keywords",), ("sweep.csv",)),
        Stage("origin", ("cluster",), ("origin_report.json",)),
        Stage("graph", ("origin",), ("graph.dot",)),
        Stage("stats", ("origin",), ("stats.csv",), ("attribution.csv",)),
        Stage("precision-sample", ("match",), ("precision_sample.csv",)),
        Stage("precision-score", ("match",), ("precision.json",)),
    ]
}

PIPELINE_ORDER = ["ingest", "embed", "reduce", "cluster", "keywords", "evaluate",
                  "origin", "graph", "match", "sweep", "stats", "precision-sample"]


class Pipeline:
    def __init__(self, config: RunConfig, workdir=None):
        self.config = config.validate()
        self.workdir = Path(workdir if workdir is not None else config.workdir)
        self.workdir.mkdir(parents=True, exist_ok=True)
        self.manifest = self._load_manifest()
        self.executed: list[str] = []
        self.skipped: list[str] = []
        self._done: set[str] = set()

    # -- manifest ---------------------------------------------------------

    def _load_manifest(self) -> dict:
        path = self.workdir / MANIFEST
        if path.exists():
            try:
                return json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError:
                logger.warning("ignoring unreadable manifest %s", path)
        return {"stages": {}}

    def _save_manifest(self):
        cfg = self.config
        self.manifest.update(
            {
                "config_hash": cfg.digest(),
                "seed": cfg.seed,
                "tool_version": __version__,
            }
        )
        text = json.dumps(self.manifest, sort_keys=True, indent=2) + "\n"
        write_text(self.workdir / MANIFEST, text)

    def path(self, name: str) -> Path:
        return self.workdir / name

    @property
    def has_comments(self) -> bool:
        return self.config.comments is not None

    def stage_digests(self) -> dict[str, str]:
        """Combined output digest per recorded stage (timestamps excluded)."""
        out = {}
        for name, rec in sorted(self.manifest.get("stages", {}).items()):
            blob = json.dumps({"key": rec["key"], "outputs": rec["outputs"]}, sort_keys=True)
            out[name] = hashlib.sha256(blob.encode()).hexdigest()
        return out

    # -- stage parameters -------------------------------------------------

    def _params(self, name: str) -> dict:
        c = self.config
        seed = stage_seed(c.seed, name)
        return {
            "ingest": {"min_words": c.min_words, "comments": self.has_comments},
            "embed": {"provider": c.provider, "dim": c.embedding_dim, "seed": stage_seed(c.seed, "embed")},
            "reduce": {
                "n_neighbors": c.n_neighbors, "n_components": c.n_components, "min_dist": c.min_dist,
                "spread": c.spread, "n_epochs": c.n_epochs,
                "negative_sample_rate": c.negative_sample_rate, "seed": seed,
            },
            "cluster": {"min_cluster_size": c.min_cluster_size, "min_samples": c.min_samples},
            "keywords": {},
            "evaluate": {},
            "match": {"threshold": c.threshold, "sentence_filter": c.sentence_filter},
            "sweep": {"thresholds": list(c.sweep)},
            "origin": {},
            "graph": {},
            "stats": {},
            "precision-sample": {"top_k": c.top_k, "random_k": c.random_k, "seed": seed},
            "precision-score": {},
        }[name]

    def _external_inputs(self, name: str) -> dict[str, str]:
        c = self.config
        files = {}
        if name == "ingest":
            files["articles"] = c.articles
            if c.comments is not None:
                files["comments"] = c.comments
        elif name == "embed" and c.provider == "file":
            files["embedding_file"] = c.embedding_file
            if c.comments is not None:
                files["comment_embedding_file"] = c.comment_embedding_file
        elif name == "precision-score":
            if c.labels is None:
                raise ConfigInvalid("precision-score needs a labeled sample ('labels' / --labels)")
            files["labels"] = c.labels
        out = {}
        for key, p in files.items():
            if p is None or not Path(p).is_file():
                raise MissingInput(f"{key} file {p} does not exist")
            out[key] = file_digest(p)
        return out

    def _stage_key(self, name: str) -> str:
        stage = STAGES[name]
        upstream = {}
        for dep in self._all_deps(name):
            rec = self.manifest["stages"].get(dep)
            if rec is None:
                raise ArtifactMissing(f"stage {dep} has not run")
            upstream[dep] = rec["outputs"]
        payload = {
            "stage": stage.name,
            "params": self._params(name),
            "external": self._external_inputs(name),
            "upstream": upstream,
            "tool_version": __version__,
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()

    def _all_deps(self, name: str) -> list[str]:
        seen: list[str] = []
        stack = list(STAGES[name].deps)
        while stack:
            d = stack.pop()
            if d not in seen:
                seen.append(d)
                stack.extend(STAGES[d].deps)
        extra = {"stats": ["match"] if self.has_comments else []}.get(name, [])
        for d in extra:
            if d not in seen:
                seen.append(d)
        return sorted(seen)

    def _outputs_intact(self, rec: dict) -> bool:
        for fname, digest in rec.get("outputs", {}).items():
            p = self.path(fname)
            if not p.exists() or file_digest(p) != digest:
                return False
        return True

    # -- execution --------------------------------------------------------

    def run_stage(self, name: str, force: bool = False) -> None:
        """Run ``name`` after its dependencies, skipping it when cached."""
        if name not in STAGES:
            raise ConfigInvalid(f"unknown stage {name!r}")
        if name in self._done:
            return
        deps = list(STAGES[name].deps)
        if name == "stats" and self.has_comments:
            deps.append("match")
        if name in ("match", "sweep", "precision-sample", "precision-score") and not self.has_comments:
            raise ConfigInvalid(f"stage {name!r} needs a 'comments' file")
        for dep in deps:
            self.run_stage(dep)

        key = self._stage_key(name)
        rec = self.manifest["stages"].get(name)
        if not force and rec and rec.get("key") == key and self._outputs_intact(rec):
            logger.info("stage %s skipped (cached, key %s)", name, key[:12])
            self.skipped.append(name)
            self._done.add(name)
            return

        logger.info("stage %s running", name)
        started = _now()
        try:
            produced = self._runners[name](self)
        except NarrativeError:
            raise
        except Exception as exc:  # noqa: BLE001 - wrapped with the stage name
            raise StageFailure(name, exc) from exc
        outputs = {f: file_digest(self.path(f)) for f in sorted(produced)}
        self.manifest["stages"][name] = {
            "key": key,
            "outputs": outputs,
            "started": started,
            "finished": _now(),
        }
        self._save_manifest()
        self.executed.append(name)
        self._done.add(name)

    def run(self, stages=None) -> dict:
        """Run the whole pipeline (or the listed stages) and return the manifest."""
        if stages is None:
            stages = [s for s in PIPELINE_ORDER
                      if self.has_comments or s not in ("match", "sweep", "precision-sample")]
        for s in stages:
            self.run_stage(s)
        self._save_manifest()
        return self.manifest

    # -- artifact loaders -------------------------------------------------

    def _require(self, fname: str) -> Path:
        p = self.path(fname)
        if not p.exists():
            raise ArtifactMissing(f"artifact {fname} missing from {self.workdir}")
        return p

    def sentences(self):
        return read_sentences(self._require("sentences.jsonl"))

    def comments(self):
        return load_comment_records(self._require("comments.jsonl"))

    def embeddings(self) -> EmbeddingMatrix:
        data = read_emb1(self._require("embeddings.emb1"))
        return EmbeddingMatrix(data, self._provider_id())

    def comment_embeddings(self) -> EmbeddingMatrix:
        p = self.path("comment_embeddings.emb1")
        if not p.exists():
            return EmbeddingMatrix(np.zeros((0, self.embeddings().dim), np.float32), self._provider_id(), [])
        return EmbeddingMatrix(read_emb1(p), self._provider_id())

    def _provider_id(self) -> str:
        c = self.config
        return f"{c.provider}:{c.embedding_dim}:{stage_seed(c.seed, 'embed')}"

    def labels(self) -> np.ndarray:
        _, lab = read_labels(self._require("labels.csv"))
        return lab.labels

    def topic_model(self, with_centroids: bool = True):
        X = self.embeddings() if with_centroids else None
        return build_topic_model(self.sentences(), self.labels(), X)

    def corpus_articles(self):
        return ingest_articles(self._require("articles.jsonl"))

    # -- stage bodies -----------------------------------------------------

    def _run_ingest(self):
        c = self.config
        corpus = ingest_articles(c.articles)
        write_articles(corpus, self.path("articles.jsonl"))
        sentences = corpus.sentences()
        if not sentences:
            raise ArtifactMissing("articles produced no sentences")
        write_sentences(sentences, self.path("sentences.jsonl"))
        produced = ["articles.jsonl", "sentences.jsonl"]
        if c.comments is not None:
            kept = filter_comments(read_comments(c.comments), c.min_words)
            write_comments(kept, self.path("comments.jsonl"))
            produced.append("comments.jsonl")
        return produced

    def _provider(self, which: str):
        c = self.config
        if c.provider == "hash":
            return HashProvider(dim=c.embedding_dim, seed=stage_seed(c.seed, "embed"))
        return FileProvider(c.embedding_file if which == "sentences" else c.comment_embedding_file)

    def _run_embed(self):
        sentences = self.sentences()
        X = embed_batch([s.text for s in sentences], self._provider("sentences"))
        write_emb1(self.path("embeddings.emb1"), X.data)
        produced = ["embeddings.emb1"]
        if self.has_comments:
            comments = self.comments()
            if comments:
                E = embed_batch([cm.body for cm in comments], self._provider("comments")).data
            else:
                E = np.zeros((0, X.dim), np.float32)
            if E.shape[0] and E.shape[1] != X.dim:
                raise ConfigInvalid("comment embeddings and sentence embeddings differ in dimension")
            write_emb1(self.path("comment_embeddings.emb1"), E)
            produced.append("comment_embeddings.emb1")
        return produced

    def _run_reduce(self):
        c = self.config
        p = self._params("reduce")
        params = UmapParams(
            n_neighbors=c.n_neighbors, n_components=c.n_components, min_dist=c.min_dist,
            spread=c.spread, n_epochs=c.n_epochs, negative_sample_rate=c.negative_sample_rate,
            seed=p["seed"],
        )
        coords = umap_reduce(self.embeddings(), params)
        ids = [s.sentence_id for s in self.sentences()]
        write_coordinates(self.path("coords.csv"), coords, ids)
        return ["coords.csv"]

    def _run_cluster(self):
        c = self.config
        keys, coords = read_coordinates(self._require("coords.csv"))
        result = hdbscan(coords, HdbscanParams(c.min_cluster_size, c.min_samples))
        write_labels(self.path("labels.csv"), result, keys)
        logger.info("found %d clusters, %.1f%% outliers", result.K, 100 * result.outlier_fraction)
        return ["labels.csv"]

    def _run_keywords(self):
        model = self.topic_model(with_centroids=False)
        write_topics_json(model, self.path("topics.json"))
        return ["topics.json"]

    def _run_evaluate(self):
        model = self.topic_model(with_centroids=False)
        X = self.embeddings()
        labels = self.labels()
        out = {
            "n_topics": len(model.cluster_members),
            "n_sentences": int(labels.size),
            "outlier_fraction": float(np.mean(labels < 0)) if labels.size else 0.0,
            "diversity": diversity(model) if model.cluster_members else None,
        }
        try:
            out["coherence"] = coherence(model, self._provider("sentences")) if self.config.provider == "hash" else None
        except TooFewKeywords as exc:
            out["coherence"] = None
            out["coherence_note"] = str(exc)
        try:
            out["intra_cluster_similarity"] = intra_cluster_similarity(model, X)
        except NoEligibleClusters as exc:
            out["intra_cluster_similarity"] = None
            out["intra_cluster_note"] = str(exc)
        write_text(self.path("evaluation.json"), dumps_json(out))
        return ["evaluation.json"]

    def _match_inputs(self):
        return self.comments(), self.topic_model(), self.embeddings(), self.comment_embeddings()

    def _run_match(self):
        c = self.config
        comments, model, X, E = self._match_inputs()
        if not model.centroids:
            raise ArtifactMissing("no clusters to match comments against")
        report = match_corpus(comments, model, X, c.threshold, comment_embeddings=E,
                              sentence_filter=c.sentence_filter)
        write_text(self.path("matches.csv"), matches_csv(report, comments))
        summary = {
            "threshold": report.threshold,
            "total": len(report.results),
            "matched": report.matched_count,
            "mapped_fraction": report.mapped_fraction,
            "per_cluster_counts": report.per_cluster_counts,
            "per_day_counts": {d.isoformat(): k for d, k in report.per_day_counts.items()},
            "per_community_counts": report.per_community_counts,
        }
        if report.matched_count:
            uc = user_concentration(report, comments)
            summary["user_concentration"] = {
                "users_for_half": uc.users_for_half,
                "share_of_authors": uc.share_of_authors,
                "n_authors": uc.n_authors,
            }
        write_text(self.path("match_summary.json"), dumps_json(summary))
        return ["matches.csv", "match_summary.json"]

    def _run_sweep(self):
        comments, model, X, E = self._match_inputs()
        fractions = sweep_thresholds(comments, model, X, self.config.sweep, comment_embeddings=E)
        write_text(self.path("sweep.csv"), csv_text(["threshold", "mapped_fraction"], list(fractions.items())))
        return ["sweep.csv"]

    def origin_report(self):
        model = self.topic_model(with_centroids=False)
        domains = [a.domain for a in self.corpus_articles().articles]
        return assign_origins(model, self.sentences(), domains)

    def _run_origin(self):
        write_text(self.path("origin_report.json"), dumps_json(self.origin_report().to_json()))
        return ["origin_report.json"]

    def _run_graph(self):
        graph = build_spread_graph(self.origin_report())
        write_text(self.path("graph.dot"), graph.to_dot())
        return ["graph.dot"]

    def _run_stats(self):
        report = self.origin_report()
        matches = read_matches_csv(self.path("matches.csv")) if self.has_comments else None
        write_text(self.path("stats.csv"), stats_csv(domain_statistics(report, matches)))
        produced = ["stats.csv"]
        if matches is not None:
            attribution = comment_origin_attribution(report, matches)
            write_text(self.path("attribution.csv"),
                       csv_text(["domain", "matched_comments"], sorted(attribution.items())))
            produced.append("attribution.csv")
        return produced

    def _run_precision_sample(self):
        p = self._params("precision-sample")
        report = read_matches_csv(self._require("matches.csv"))
        rows = precision_sample(report, self.comments(), p["top_k"], p["random_k"], p["seed"])
        write_precision_sample(rows, self.path("precision_sample.csv"))
        return ["precision_sample.csv"]

    def _run_precision_score(self):
        rows = read_precision_sample(self.config.labels)
        model = self.topic_model(with_centroids=False)
        score = score_precision(rows, known_topics=model.cluster_members)
        out = {
            "overall": score.overall,
            "labeled": score.labeled,
            "per_topic": {str(t): v for t, v in score.per_topic.items()},
        }
        write_text(self.path("precision.json"), dumps_json(out))
        return ["precision.json"]

    _runners: dict[str, Callable] = {
        "ingest": _run_ingest,
        "embed": _run_embed,
        "reduce": _run_reduce,
        "cluster": _run_cluster,
        "keywords": _run_keywords,
        "evaluate": _run_evaluate,
        "match": _run_match,
        "sweep": _run_sweep,
        "origin": _run_origin,
        "graph": _run_graph,
        "stats": _run_stats,
        "precision-sample": _run_precision_sample,
        "precision-score": _run_precision_score,
    }


def run_pipeline(config: RunConfig, workdir=None) -> Pipeline:
    pipe = Pipeline(config, workdir)
    pipe.run()
    return pipe


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

_EXPORTS = {
    ("topics", "json"): "topics.json",
    ("matches", "csv"): "matches.csv",
    ("origin", "json"): "origin_report.json",
    ("graph", "dot"): "graph.dot",
    ("stats", "csv"): "stats.csv",
}


def _topics_csv(workdir: Path) -> str:
    topics = json.loads((workdir / "topics.json").read_text(encoding="utf-8"))
    rows = [[t["id"], t["size"], "; ".join(k["term"] for k in t["keywords"])] for t in topics]
    return csv_text(["id", "size", "keywords"], rows)


def _origin_csv(workdir: Path) -> str:
    rep = json.loads((workdir / "origin_report.json").read_text(encoding="utf-8"))
    rows = [
        [d, v["origin_topic_count"], v["avg_origin_articles"], v["avg_non_origin_articles"],
         v["avg_external_articles_per_origin_topic"]]
        for d, v in sorted(rep["domains"].items())
    ]
    return csv_text(["domain", "origin_topics", "avg_origin_articles", "avg_non_origin_articles",
                     "avg_external_articles"], rows)


def _csv_to_json(workdir: Path, fname: str) -> str:
    import csv

    with open(workdir / fname, newline="", encoding="utf-8") as fh:
        return dumps_json(list(csv.DictReader(fh)))


_DERIVED = {
    ("topics", "csv"): ("topics.json", _topics_csv),
    ("origin", "csv"): ("origin_report.json", _origin_csv),
    ("matches", "json"): ("matches.csv", lambda w: _csv_to_json(w, "matches.csv")),
    ("stats", "json"): ("stats.csv", lambda w: _csv_to_json(w, "stats.csv")),
}


def export(workdir, what: str, fmt: str, out) -> Path:
    """Copy or convert a stage artifact to ``out`` in the requested format."""
    workdir = Path(workdir)
    key = (what, fmt)
    if key in _EXPORTS:
        src = workdir / _EXPORTS[key]
        if not src.exists():
            raise ArtifactMissing(f"no {what} artifact in {workdir}")
        data = src.read_bytes()
    elif key in _DERIVED:
        fname, conv = _DERIVED[key]
        if not (workdir / fname).exists():
            raise ArtifactMissing(f"no {what} artifact in {workdir}")
        data = conv(workdir).encode("utf-8")
    else:
        raise UnsupportedFormat(f"cannot export {what!r} as {fmt!r}")
    out = Path(out)
    if out.parent and not out.parent.exists():
        os.makedirs(out.parent, exist_ok=True)
    out.write_bytes(data)
    return out

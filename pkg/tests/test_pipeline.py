import json
import logging
import shutil

import pytest

from narrative_topics.config import RunConfig, load_config, parse_config_text
from narrative_topics.errors import ArtifactMissing, ConfigInvalid, MissingInput, StageFailure, UnsupportedFormat
from narrative_topics.pipeline import Pipeline, export, file_digest, stage_seed
from narrative_topics.synthetic import make_corpus


@pytest.fixture()
def small(tmp_path):
    syn = make_corpus(sentences_per_family=60, sentences_per_article=10, n_comments=30, seed=5)
    articles, comments = syn.write(tmp_path / "in")
    return RunConfig(articles=articles, comments=comments, workdir=tmp_path / "run", seed=3,
                     min_cluster_size=8)


class TestConfig:
    def test_parse(self, tmp_path):
        cfg = parse_config_text("# run\narticles = a.jsonl  # input\ndims = 3\nthreshold=0.5\n"
                                "sweep = 0.4, 0.6\nsentence_filter = yes\n", base=tmp_path)
        assert cfg.articles == tmp_path / "a.jsonl"
        assert cfg.n_components == 3 and cfg.threshold == 0.5
        assert cfg.sweep == (0.4, 0.6) and cfg.sentence_filter

    def test_unknown_key(self):
        with pytest.raises(ConfigInvalid):
            parse_config_text("colour = red")

    def test_bad_value(self):
        with pytest.raises(ConfigInvalid):
            parse_config_text("seed = many")

    def test_missing_articles(self):
        with pytest.raises(ConfigInvalid):
            Pipeline(RunConfig())

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigInvalid):
            load_config(tmp_path / "none.cfg")

    def test_overrides(self, tmp_path):
        (tmp_path / "c.cfg").write_text("articles = x.jsonl\nseed = 1\n")
        cfg = load_config(tmp_path / "c.cfg", seed=9, threshold=None)
        assert cfg.seed == 9 and cfg.threshold == 0.6

    def test_digest_ignores_paths(self):
        assert RunConfig(workdir="a").digest() == RunConfig(workdir="b").digest()
        assert RunConfig(seed=1).digest() != RunConfig(seed=2).digest()


def test_stage_seed_derivation():
    assert stage_seed(42, "reduce") != stage_seed(42, "cluster")
    assert stage_seed(42, "reduce") == stage_seed(42, "reduce")
    assert stage_seed(0, "reduce") ^ stage_seed(1, "reduce") == 1


def test_rerun_skips_and_reproduces(small, caplog):
    first = Pipeline(small)
    first.run()
    topics = file_digest(small.workdir / "topics.json")
    with caplog.at_level(logging.INFO, logger="narrative_topics.pipeline"):
        second = Pipeline(small)
        second.run()
    assert second.executed == []
    assert "embed" in second.skipped
    assert any("stage embed skipped" in r.getMessage() for r in caplog.records)
    assert file_digest(small.workdir / "topics.json") == topics


def test_fresh_directory_reproduces_digests(small, tmp_path):
    a = Pipeline(small)
    a.run()
    b = Pipeline(small, tmp_path / "again")
    b.run()
    assert a.stage_digests() == b.stage_digests()


def test_parameter_change_invalidates_downstream_only(small):
    Pipeline(small).run()
    small.threshold = 0.7
    pipe = Pipeline(small)
    pipe.run()
    assert set(pipe.executed) == {"match", "stats", "precision-sample"}


def test_input_change_invalidates_everything(small):
    Pipeline(small).run()
    with open(small.articles, "a", encoding="utf-8") as fh:
        fh.write(json.dumps({"url": "https://new.example/x", "domain": "new.example", "title": "t",
                             "text": "Nato troops border summit.", "published": "2020-03-01"}) + "\n")
    pipe = Pipeline(small)
    pipe.run()
    assert "ingest" in pipe.executed and "embed" in pipe.executed


def test_tampered_artifact_reruns(small):
    Pipeline(small).run()
    (small.workdir / "graph.dot").write_text("digraph {}\n")
    pipe = Pipeline(small)
    pipe.run_stage("graph")
    assert pipe.executed == ["graph"]


def test_missing_input_file(small, tmp_path):
    small.articles = tmp_path / "gone.jsonl"
    with pytest.raises(MissingInput):
        Pipeline(small).run_stage("ingest")


def test_stage_failure_names_stage(small, monkeypatch):
    def boom(self):
        raise RuntimeError("disk on fire")

    monkeypatch.setitem(Pipeline._runners, "keywords", boom)
    with pytest.raises(StageFailure) as info:
        Pipeline(small).run_stage("keywords")
    assert info.value.stage == "keywords"


class TestExport:
    def test_graph_dot(self, synthetic_run, tmp_path):
        out = export(synthetic_run.workdir, "graph", "dot", tmp_path / "g.dot")
        text = out.read_text()
        nodes = [line.split('"')[1] for line in text.splitlines() if "[class=" in line]
        assert nodes == sorted(nodes) and len(nodes) == 4
        assert text.startswith("digraph spread {\n") and text.endswith("}\n")
        for line in text.splitlines()[1:-1]:
            assert line.startswith('  "') and line.endswith("];")

    def test_topics_json_byte_identical(self, synthetic_run, tmp_path):
        a = export(synthetic_run.workdir, "topics", "json", tmp_path / "a.json").read_bytes()
        b = export(synthetic_run.workdir, "topics", "json", tmp_path / "b.json").read_bytes()
        assert a == b
        assert json.loads(a)[0]["keywords"]

    @pytest.mark.parametrize("what,fmt", [("topics", "csv"), ("origin", "csv"), ("matches", "json"),
                                          ("stats", "json"), ("stats", "csv"), ("origin", "json")])
    def test_other_formats(self, synthetic_run, tmp_path, what, fmt):
        a = export(synthetic_run.workdir, what, fmt, tmp_path / f"a.{fmt}").read_bytes()
        b = export(synthetic_run.workdir, what, fmt, tmp_path / f"b.{fmt}").read_bytes()
        assert a == b and a

    def test_missing_artifact(self, synthetic_run, tmp_path):
        work = tmp_path / "w"
        shutil.copytree(synthetic_run.workdir, work)
        (work / "matches.csv").unlink()
        with pytest.raises(ArtifactMissing):
            export(work, "matches", "csv", tmp_path / "m.csv")

    def test_unsupported(self, synthetic_run, tmp_path):
        with pytest.raises(UnsupportedFormat):
            export(synthetic_run.workdir, "graph", "json", tmp_path / "g.json")

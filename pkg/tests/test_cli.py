import pytest

from narrative_topics.cli import main
from narrative_topics.pipeline import Pipeline
from narrative_topics.synthetic import make_corpus


@pytest.fixture()
def config_file(tmp_path):
    syn = make_corpus(sentences_per_family=40, sentences_per_article=10, n_comments=15, seed=2)
    syn.write(tmp_path / "in")
    cfg = tmp_path / "run.cfg"
    cfg.write_text("articles = in/articles.jsonl\ncomments = in/comments.jsonl\nworkdir = out\n")
    return cfg


def test_run_then_cached(config_file, capsys):
    assert main(["keywords", "--config", str(config_file), "--min-cluster-size", "8"]) == 0
    assert "ran     keywords" in capsys.readouterr().out
    assert main(["keywords", "--config", str(config_file), "--min-cluster-size", "8"]) == 0
    assert "cached  keywords" in capsys.readouterr().out


def test_export(config_file, tmp_path):
    assert main(["graph", "--config", str(config_file), "--min-cluster-size", "8"]) == 0
    assert main(["export", "graph", "--config", str(config_file), "--out", str(tmp_path / "g.dot")]) == 0
    assert (tmp_path / "g.dot").read_text().startswith("digraph")


def test_out_sets_workdir(config_file, tmp_path):
    assert main(["ingest", "--config", str(config_file), "--out", str(tmp_path / "elsewhere")]) == 0
    assert (tmp_path / "elsewhere" / "sentences.jsonl").exists()


def test_config_error_exit_2(tmp_path, capsys):
    assert main(["ingest", "--config", str(tmp_path / "missing.cfg")]) == 2
    (tmp_path / "bad.cfg").write_text("nonsense = 1\n")
    assert main(["ingest", "--config", str(tmp_path / "bad.cfg")]) == 2
    assert main(["ingest"]) == 2


def test_data_error_exit_3(tmp_path):
    (tmp_path / "a.jsonl").write_text('{"url": "u"}\n')
    (tmp_path / "c.cfg").write_text("articles = a.jsonl\nworkdir = w\n")
    assert main(["ingest", "--config", str(tmp_path / "c.cfg")]) == 3


def test_export_missing_artifact_exit_3(tmp_path):
    assert main(["export", "matches", "--workdir", str(tmp_path), "--out", str(tmp_path / "m.csv")]) == 3


def test_internal_error_exit_4(config_file, monkeypatch):
    def boom(self):
        raise RuntimeError("unexpected")

    monkeypatch.setitem(Pipeline._runners, "ingest", boom)
    assert main(["ingest", "--config", str(config_file)]) == 4


def test_flags_reach_config(config_file, tmp_path):
    assert main(["reduce", "--config", str(config_file), "--dims", "3", "--n-neighbors", "5",
                 "--seed", "11", "--workdir", str(tmp_path / "w")]) == 0
    header = (tmp_path / "w" / "coords.csv").read_text().splitlines()[0]
    assert header.count(",") == 3

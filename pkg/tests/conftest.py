import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from narrative_topics.config import RunConfig  # noqa: E402
from narrative_topics.pipeline import Pipeline  # noqa: E402
from narrative_topics.synthetic import make_corpus  # noqa: E402


@pytest.fixture(scope="session")
def synthetic():
    return make_corpus(seed=0)


@pytest.fixture(scope="session")
def synthetic_run(synthetic, tmp_path_factory):
    """One full pipeline run on the three-family corpus, shared by read-only tests."""
    root = tmp_path_factory.mktemp("synthetic")
    articles, comments = synthetic.write(root / "in")
    cfg = RunConfig(articles=articles, comments=comments, workdir=root / "run", seed=42)
    pipe = Pipeline(cfg)
    pipe.run()
    return pipe


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])

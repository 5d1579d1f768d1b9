"""
The whole pipeline
==================

Runs every stage on a synthetic corpus, then reruns to show the cache at
work. Artifacts land in a temporary directory.
"""

import json
import tempfile
from pathlib import Path

from narrative_topics.config import RunConfig
from narrative_topics.pipeline import Pipeline, export
from narrative_topics.synthetic import make_corpus

root = Path(tempfile.mkdtemp(prefix="narratives-"))
articles, comments = make_corpus(seed=0).write(root / "in")
cfg = RunConfig(articles=articles, comments=comments, workdir=root / "run", seed=42)

pipe = Pipeline(cfg)
pipe.run()
print("ran:", pipe.executed)

again = Pipeline(cfg)
again.run()
print("second run skipped:", again.skipped)

print(json.loads((root / "run" / "evaluation.json").read_text()))
print((root / "run" / "stats.csv").read_text())
print("exported", export(cfg.workdir, "topics", "csv", root / "topics.csv"))
print((root / "topics.csv").read_text())

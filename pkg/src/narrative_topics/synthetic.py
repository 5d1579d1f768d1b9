"""Seeded synthetic corpora with planted topic families and origin days.

Each family draws its sentences from a private vocabulary, so the families are
disjoint in token space. Articles are spread over a handful of domains and
days; the domains publishing a family on its first day are the planted
originators. Comments paraphrase family sentences with a few stopwords mixed in.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FAMILY_WORDS = [
    ["nato", "alliance", "missile", "treaty", "border", "troops", "defense", "summit",
     "sanctions", "pipeline", "embassy", "minister"],
    ["vaccine", "virus", "clinic", "dose", "outbreak", "doctors", "hospital", "mask",
     "trial", "immunity", "patients", "pharma"],
    ["ballot", "election", "fraud", "voters", "county", "recount", "senate", "campaign",
     "precinct", "candidate", "audit", "polls"],
    ["climate", "carbon", "glacier", "warming", "emissions", "drought", "ocean", "solar",
     "forest", "wildfire", "methane", "energy"],
]
DOMAINS = ["alpha.example", "bravo.example", "charlie.example", "delta.example"]
STOP_FILLERS = ["i", "the", "this", "is", "about", "so"]
FILLERS = ["think", "really", "honestly", "clearly"]
START = dt.date(2020, 1, 1)


@dataclass
class SyntheticCorpus:
    articles: list[dict]
    comments: list[dict]
    # sentence text -> family index, for purity checks
    sentence_family: dict[str, int]
    comment_family: dict[str, int]
    originators: dict[int, tuple[str, ...]]
    first_day: dict[int, dt.date] = field(default_factory=dict)

    def write(self, directory) -> tuple[Path, Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        art = d / "articles.jsonl"
        com = d / "comments.jsonl"
        art.write_text("".join(json.dumps(a, sort_keys=True) + "\n" for a in self.articles), "utf-8")
        com.write_text("".join(json.dumps(c, sort_keys=True) + "\n" for c in self.comments), "utf-8")
        return art, com


def _sentence(rng, words, length):
    picked = rng.choice(len(words), size=length, replace=False)
    return " ".join(words[i] for i in picked)


def make_corpus(
    n_families: int = 3,
    sentences_per_family: int = 200,
    sentences_per_article: int = 20,
    n_comments: int = 300,
    sentence_length: int = 8,
    originators: dict[int, tuple[str, ...]] | None = None,
    seed: int = 0,
) -> SyntheticCorpus:
    """Build a corpus with ``n_families`` disjoint families over four domains.

    By default family 0 starts at the first domain, family 1 is co-originated by
    the second and third, and family 2 starts at the fourth. Origin-day
    articles carry half of each family's sentences, the rest appear on later
    days at the other domains.
    """
    if n_families > len(FAMILY_WORDS):
        raise ValueError(f"at most {len(FAMILY_WORDS)} families")
    rng = np.random.default_rng(seed)
    if originators is None:
        originators = {0: (DOMAINS[0],), 1: (DOMAINS[1], DOMAINS[2]), 2: (DOMAINS[3],), 3: (DOMAINS[0],)}
    originators = {f: tuple(sorted(originators[f])) for f in range(n_families)}

    articles, sentence_family, first_day = [], {}, {}
    for f in range(n_families):
        words = FAMILY_WORDS[f]
        day0 = START + dt.timedelta(days=3 * f)
        first_day[f] = day0
        sents = []
        while len(sents) < sentences_per_family:
            s = _sentence(rng, words, sentence_length)
            if s not in sentence_family:
                sentence_family[s] = f
                sents.append(s)
        chunks = [sents[i : i + sentences_per_article] for i in range(0, len(sents), sentences_per_article)]
        n_origin = max(len(originators[f]), len(chunks) // 2)
        others = [d for d in DOMAINS if d not in originators[f]]
        for j, chunk in enumerate(chunks):
            if j < n_origin:
                domain = originators[f][j % len(originators[f])]
                day = day0
            else:
                domain = others[j % len(others)]
                day = day0 + dt.timedelta(days=1 + j % 5)
            articles.append(
                {
                    "url": f"https://{domain}/f{f}/a{j}",
                    "domain": domain,
                    "title": f"family {f} article {j}",
                    "text": ". ".join(s.capitalize() for s in chunk) + ".",
                    "published": day.isoformat(),
                }
            )

    comments, comment_family = [], {}
    base = int(dt.datetime(2020, 2, 1, tzinfo=dt.timezone.utc).timestamp())
    for i in range(n_comments):
        f = i % n_families
        words = _sentence(rng, FAMILY_WORDS[f], sentence_length).split()
        fill = [STOP_FILLERS[int(rng.integers(len(STOP_FILLERS)))], FILLERS[int(rng.integers(len(FILLERS)))]]
        body = " ".join(fill + words)
        cid = f"c{i:05d}"
        comment_family[cid] = f
        comments.append(
            {
                "id": cid,
                "author": f"user{int(rng.integers(0, 40))}",
                "subreddit": f"community{i % 3}",
                "created_utc": base + 3600 * i,
                "body": body,
            }
        )
    return SyntheticCorpus(articles, comments, sentence_family, comment_family, originators, first_day)

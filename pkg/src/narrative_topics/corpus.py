"""Article and comment ingestion, text normalization and sentence segmentation.

Articles arrive as JSONL (``url``, ``domain``, ``title``, ``text``, ``published``)
and comments as Pushshift-style JSONL (``id``, ``author``, ``subreddit``,
``created_utc``, ``body``).
"""

from __future__ import annotations

import datetime as dt
import json
import logging
import re
import string
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Iterator

from .errors import RecordInvalid

logger = logging.getLogger(__name__)

ARTICLE_FIELDS = ("url", "domain", "title", "text", "published")
COMMENT_FIELDS = ("id", "author", "subreddit", "created_utc", "body")


def _load_wordlist(name: str) -> frozenset[str]:
    text = resources.files(__package__).joinpath("data", name).read_text("utf-8")
    return frozenset(
        line.strip().lower()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


STOPWORDS = _load_wordlist("stopwords.txt")
ABBREVIATIONS = _load_wordlist("abbreviations.txt")


@dataclass(frozen=True)
class ArticleRecord:
    url: str
    domain: str
    title: str
    text: str
    published: dt.date

    def to_json(self) -> dict:
        return {
            "domain": self.domain,
            "published": self.published.isoformat(),
            "text": self.text,
            "title": self.title,
            "url": self.url,
        }


@dataclass(frozen=True)
class SentenceRecord:
    sentence_id: int
    article_url: str
    domain: str
    published: dt.date
    text: str


@dataclass(frozen=True)
class CommentRecord:
    comment_id: str
    author: str
    community: str
    created: int
    body: str

    @property
    def day(self) -> dt.date:
        return dt.datetime.fromtimestamp(self.created, tz=dt.timezone.utc).date()


@dataclass
class Corpus:
    """Unique articles sorted by ``(published, url)``."""

    articles: list[ArticleRecord]
    duplicates: int = 0
    _by_url: dict[str, ArticleRecord] = field(init=False, repr=False)

    def __post_init__(self):
        self._by_url = {a.url: a for a in self.articles}

    def __len__(self):
        return len(self.articles)

    def article(self, url: str) -> ArticleRecord:
        return self._by_url[url]

    def sentences(self) -> list[SentenceRecord]:
        """Explode every article into sentences with dense ids in corpus order."""
        out: list[SentenceRecord] = []
        for article in self.articles:
            for rec in split_sentences(article, start_id=len(out)):
                out.append(rec)
        return out


# --------------------------------------------------------------------------
# normalization
# --------------------------------------------------------------------------

_URL_RE = re.compile(r"(?:[A-Za-z][A-Za-z0-9+.-]*://\S*|www\.\S*)", re.IGNORECASE)
# everything that is not a word character, whitespace, or kept punctuation
_SYMBOL_RE = re.compile(r"[^\w\s.!?',-]|_")
_WS_RE = re.compile(r"\s+")
_ASCII_OK = frozenset(string.ascii_letters + string.digits + string.punctuation)


def remove_urls(text: str) -> str:
    return _URL_RE.sub(" ", text)


def normalize_text(text: str) -> str:
    """Strip URLs, control characters, stray symbols and non-ASCII tokens.

    Sentence punctuation (``.!?``), apostrophes, hyphens and commas survive.
    Whitespace is collapsed to single spaces.
    """
    text = remove_urls(text)
    text = "".join(ch if ch.isprintable() else " " for ch in text)
    text = _SYMBOL_RE.sub(" ", text)
    tokens = [tok for tok in text.split() if tok.isascii()]
    return " ".join(tokens)


# --------------------------------------------------------------------------
# sentence segmentation
# --------------------------------------------------------------------------

_TERMINAL = ".!?"


def segment(text: str) -> list[str]:
    """Split normalized text into sentences.

    A run of terminal punctuation followed by whitespace (or end of text)
    ends a sentence unless the token carrying it is a known abbreviation.
    Terminal punctuation is dropped from the emitted sentence.
    """
    sentences: list[list[str]] = []
    current: list[str] = []
    for token in text.split(" "):
        if not token:
            continue
        current.append(token)
        if token[-1] in _TERMINAL and token.lower() not in ABBREVIATIONS:
            sentences.append(current)
            current = []
    if current:
        sentences.append(current)
    out = []
    for toks in sentences:
        while toks and not toks[-1].strip(_TERMINAL):
            toks = toks[:-1]
        if not toks:
            continue
        # an abbreviation can only end a sentence at the end of the text; keep its dot
        if toks[-1].lower() not in ABBREVIATIONS:
            toks = toks[:-1] + [toks[-1].rstrip(_TERMINAL)]
        out.append(" ".join(toks))
    return out


def split_sentences(article: ArticleRecord, start_id: int = 0) -> list[SentenceRecord]:
    """Segment one article into :class:`SentenceRecord` objects.

    ``start_id`` is the sentence id given to the first sentence, so callers
    can keep ids dense across a corpus.
    """
    pieces = segment(normalize_text(article.text))
    return [
        SentenceRecord(
            sentence_id=start_id + i,
            article_url=article.url,
            domain=article.domain,
            published=article.published,
            text=piece,
        )
        for i, piece in enumerate(pieces)
    ]


# --------------------------------------------------------------------------
# comments
# --------------------------------------------------------------------------


def looks_english(raw_body: str) -> bool:
    """ASCII-share plus stopword heuristic standing in for a language detector."""
    body = remove_urls(raw_body)
    chars = [ch for ch in body if not ch.isspace()]
    if not chars:
        return False
    ascii_share = sum(ch in _ASCII_OK for ch in chars) / len(chars)
    if ascii_share < 0.8:
        return False
    words = normalize_text(body).lower().split()
    if len(words) >= 6:
        return any(w.strip(".!?,-'") in STOPWORDS for w in words)
    return True


def filter_comments(comments: Iterable[dict], min_words: int = 3) -> list[CommentRecord]:
    """Keep English comments with strictly more than ``min_words`` words."""
    if min_words < 0:
        raise ValueError("min_words must be >= 0")
    kept = []
    for raw in comments:
        body_raw = raw.get("body") or ""
        body = normalize_text(body_raw)
        if len(body.split()) <= min_words:
            continue
        if not looks_english(body_raw):
            continue
        kept.append(
            CommentRecord(
                comment_id=str(raw["id"]),
                author=str(raw.get("author", "")),
                community=str(raw.get("subreddit", "")),
                created=int(raw["created_utc"]),
                body=body,
            )
        )
    return kept


# --------------------------------------------------------------------------
# file I/O
# --------------------------------------------------------------------------


def _iter_jsonl(path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordInvalid(f"malformed JSON: {exc.msg}", line=lineno) from exc
            if not isinstance(obj, dict):
                raise RecordInvalid("record is not an object", line=lineno)
            yield lineno, obj


def normalize_domain(domain: str) -> str:
    d = domain.strip().lower()
    if "://" in d:
        d = d.split("://", 1)[1]
    d = d.split("/", 1)[0].split("?", 1)[0].split(":", 1)[0]
    if d.startswith("www."):
        d = d[4:]
    return d


def _parse_article(obj: dict, lineno: int) -> ArticleRecord:
    for key in ARTICLE_FIELDS:
        if key not in obj or obj[key] is None:
            raise RecordInvalid(f"missing field {key!r}", line=lineno)
    url = str(obj["url"]).strip()
    if not url:
        raise RecordInvalid("empty url", line=lineno)
    domain = normalize_domain(str(obj["domain"]))
    if not domain:
        raise RecordInvalid("empty domain", line=lineno)
    try:
        published = dt.date.fromisoformat(str(obj["published"])[:10])
    except ValueError as exc:
        raise RecordInvalid(f"unparseable date {obj['published']!r}", line=lineno) from exc
    return ArticleRecord(
        url=url,
        domain=domain,
        title=str(obj["title"]),
        text=str(obj["text"]),
        published=published,
    )


def ingest_articles(path, format: str = "jsonl") -> Corpus:
    """Read an articles JSONL file into a deduplicated, sorted :class:`Corpus`."""
    if format != "jsonl":
        raise ValueError(f"unsupported article format {format!r}")
    seen: dict[str, ArticleRecord] = {}
    duplicates = 0
    for lineno, obj in _iter_jsonl(path):
        article = _parse_article(obj, lineno)
        if article.url in seen:
            duplicates += 1
            continue
        seen[article.url] = article
    if duplicates:
        logger.warning("dropped %d duplicate article(s) from %s", duplicates, path)
    articles = sorted(seen.values(), key=lambda a: (a.published, a.url))
    return Corpus(articles=articles, duplicates=duplicates)


def write_articles(corpus: Corpus | Iterable[ArticleRecord], path) -> None:
    articles = corpus.articles if isinstance(corpus, Corpus) else list(corpus)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for a in articles:
            fh.write(json.dumps(a.to_json(), sort_keys=True, ensure_ascii=False))
            fh.write("\n")


def read_comments(path) -> list[dict]:
    """Read raw comment objects; each must carry the Pushshift keys."""
    out = []
    for lineno, obj in _iter_jsonl(path):
        for key in ("id", "created_utc", "body"):
            if key not in obj:
                raise RecordInvalid(f"missing field {key!r}", line=lineno)
        try:
            obj["created_utc"] = int(obj["created_utc"])
        except (TypeError, ValueError) as exc:
            raise RecordInvalid("created_utc is not an integer", line=lineno) from exc
        out.append(obj)
    return out


def write_comments(comments: Iterable[CommentRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for c in comments:
            row = {
                "author": c.author,
                "body": c.body,
                "created_utc": c.created,
                "id": c.comment_id,
                "subreddit": c.community,
            }
            fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")


def load_comment_records(path) -> list[CommentRecord]:
    """Read comments previously written by :func:`write_comments` (no filtering)."""
    return [
        CommentRecord(
            comment_id=str(obj["id"]),
            author=str(obj.get("author", "")),
            community=str(obj.get("subreddit", "")),
            created=int(obj["created_utc"]),
            body=str(obj["body"]),
        )
        for obj in read_comments(path)
    ]


def write_sentences(sentences: Iterable[SentenceRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in sentences:
            row = {
                "article_url": s.article_url,
                "domain": s.domain,
                "published": s.published.isoformat(),
                "sentence_id": s.sentence_id,
                "text": s.text,
            }
            fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")


def read_sentences(path) -> list[SentenceRecord]:
    return [
        SentenceRecord(
            sentence_id=int(obj["sentence_id"]),
            article_url=obj["article_url"],
            domain=obj["domain"],
            published=dt.date.fromisoformat(obj["published"]),
            text=obj["text"],
        )
        for _, obj in _iter_jsonl(path)
    ]

"""Story ingestion: articles, paragraph splitting, filtering, intro selection.

A story arrives as one JSON document holding a cluster of related
articles. Ingestion splits article bodies into paragraphs, computes word
counts, marks quote paragraphs, and applies the Q&A eligibility filter
(10 to 45 words, no direct quotation). Headline and summary selection
build the segment introduction.
"""

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .errors import ProviderUnavailable, SchemaError, SummaryUnavailable
from .quotes import detect_quote
from .sentences import count_words, split_sentences

FILTER_MIN_WORDS = 10
FILTER_MAX_WORDS = 45

# Characters that trip up speech synthesis; each costs 5 headline-score
# points, so one of them outweighs a 4-word length difference.
HEADLINE_PENALTY_CHARS = frozenset({":", "-", ";", "|"})
HEADLINE_PENALTY_WEIGHT = 5

SUMMARY_MIN_SENTENCES = 2
SUMMARY_MIN_WORDS = 20


@dataclass(frozen=True)
class Article:
    article_id: str
    source_name: str
    headline: str
    published_at: datetime
    human_summary: Optional[str]
    body: str


@dataclass(frozen=True)
class Paragraph:
    paragraph_id: str
    article_id: str
    text: str
    word_count: int
    is_quote: bool
    passes_filter: bool


@dataclass(frozen=True)
class StoryCluster:
    story_id: str
    title: str
    articles: tuple[Article, ...]
    paragraphs: tuple[Paragraph, ...]

    def filtered_paragraphs(self) -> list[Paragraph]:
        return [p for p in self.paragraphs if p.passes_filter]

    def quote_paragraphs(self) -> list[Paragraph]:
        return [p for p in self.paragraphs if p.is_quote]

    def article_bodies(self) -> list[str]:
        return [a.body for a in self.articles]


@dataclass(frozen=True)
class SummaryChoice:
    text: str
    origin: str  # "human" | "generated"
    below_length: bool = False


def _parse_timestamp(value: str, field_name: str) -> datetime:
    try:
        parsed = datetime.fromisoformat(value.replace("Z", "+00:00"))
    except (ValueError, AttributeError):
        raise SchemaError(field_name, f"not an RFC3339 timestamp: {value!r}")
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed


def _require(raw: dict, key: str, kind, field_name: str):
    if key not in raw:
        raise SchemaError(field_name, "missing")
    value = raw[key]
    if not isinstance(value, kind):
        raise SchemaError(field_name, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def split_paragraphs(body: str) -> list[str]:
    """Split a body on newline paragraph breaks; blank fragments dropped."""
    normalized = body.replace("\r\n", "\n").replace("\r", "\n")
    return [part.strip() for part in normalized.split("\n") if part.strip()]


def ingest_cluster(raw: dict) -> StoryCluster:
    """Validate a story document and derive its paragraph list.

    Splitting is deterministic: the same document always yields
    byte-identical paragraph lists and ids.
    """
    if not isinstance(raw, dict):
        raise SchemaError("$", "document must be a JSON object")
    story_id = _require(raw, "story_id", str, "story_id")
    if not story_id:
        raise SchemaError("story_id", "must be non-empty")
    title = _require(raw, "title", str, "title")
    articles_raw = _require(raw, "articles", list, "articles")
    if not articles_raw:
        raise SchemaError("articles", "must contain at least one article")

    articles = []
    paragraphs = []
    seen_ids = set()
    for index, entry in enumerate(articles_raw):
        prefix = f"articles[{index}]"
        if not isinstance(entry, dict):
            raise SchemaError(prefix, "expected object")
        article_id = _require(entry, "article_id", str, f"{prefix}.article_id")
        if article_id in seen_ids:
            raise SchemaError(f"{prefix}.article_id", f"duplicate id {article_id!r}")
        seen_ids.add(article_id)
        source_name = _require(entry, "source_name", str, f"{prefix}.source_name")
        headline = _require(entry, "headline", str, f"{prefix}.headline")
        published_at = _parse_timestamp(
            _require(entry, "published_at", str, f"{prefix}.published_at"),
            f"{prefix}.published_at",
        )
        summary = entry.get("summary")
        if summary is not None and not isinstance(summary, str):
            raise SchemaError(f"{prefix}.summary", "expected string or null")
        body = _require(entry, "body", str, f"{prefix}.body")
        if not body.strip():
            raise SchemaError(f"{prefix}.body", "must be non-empty")

        articles.append(Article(
            article_id=article_id,
            source_name=source_name,
            headline=headline,
            published_at=published_at,
            human_summary=summary,
            body=body,
        ))
        for p_index, text in enumerate(split_paragraphs(body)):
            words = count_words(text)
            is_quote = detect_quote(text)
            paragraphs.append(Paragraph(
                paragraph_id=f"{article_id}:p{p_index}",
                article_id=article_id,
                text=text,
                word_count=words,
                is_quote=is_quote,
                passes_filter=(FILTER_MIN_WORDS <= words <= FILTER_MAX_WORDS) and not is_quote,
            ))

    return StoryCluster(
        story_id=story_id,
        title=title,
        articles=tuple(articles),
        paragraphs=tuple(paragraphs),
    )


def headline_score(headline: str) -> int:
    penalty = sum(1 for ch in headline if ch in HEADLINE_PENALTY_CHARS)
    return count_words(headline) + HEADLINE_PENALTY_WEIGHT * penalty


def select_headline(cluster: StoryCluster) -> str:
    """Shortest headline wins, with special characters penalized.

    Ties break by earliest published_at, then lexicographic article_id,
    so the pick does not depend on article order.
    """
    best = min(
        cluster.articles,
        key=lambda a: (headline_score(a.headline), a.published_at, a.article_id),
    )
    return best.headline


def summary_meets_length(text: str) -> bool:
    return (
        len(split_sentences(text)) >= SUMMARY_MIN_SENTENCES
        and count_words(text) >= SUMMARY_MIN_WORDS
    )


def select_summary(cluster: StoryCluster, summarizer) -> SummaryChoice:
    """Pick the segment's introductory summary.

    A qualifying human-written summary is used as-is (first by article
    order). Otherwise one candidate per article is requested from the
    summarizer and the highest-likelihood qualifying candidate wins; if
    none qualifies, the best candidate is returned flagged below_length.
    """
    for article in cluster.articles:
        if article.human_summary and summary_meets_length(article.human_summary):
            return SummaryChoice(text=article.human_summary, origin="human")

    candidates = []
    failures = 0
    for article in cluster.articles:
        try:
            text, likelihood = summarizer.summarize(article.body)
        except ProviderUnavailable:
            failures += 1
            continue
        candidates.append((likelihood, text))
    if not candidates:
        raise SummaryUnavailable(
            f"story {cluster.story_id}: no human summary and "
            f"{failures}/{len(cluster.articles)} summarizer calls failed"
        )

    qualifying = [c for c in candidates if summary_meets_length(c[1])]
    if qualifying:
        _, text = max(qualifying, key=lambda c: c[0])
        return SummaryChoice(text=text, origin="generated")
    _, text = max(candidates, key=lambda c: c[0])
    return SummaryChoice(text=text, origin="generated", below_length=True)


class StoryStore:
    """One JSON document per story under a data directory.

    The raw input document is persisted; loading re-ingests it, so the
    derived paragraph list is always consistent with the ingest rules.
    """

    def __init__(self, data_dir: Path | str):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, story_id: str) -> Path:
        if not re.fullmatch(r"[\w.\-]+", story_id):
            raise SchemaError("story_id", f"unsafe id for storage: {story_id!r}")
        return self.data_dir / f"{story_id}.json"

    def save(self, raw: dict) -> StoryCluster:
        cluster = ingest_cluster(raw)
        path = self._path(cluster.story_id)
        path.write_text(json.dumps(raw, indent=2, ensure_ascii=False), encoding="utf-8")
        return cluster

    def load(self, story_id: str) -> StoryCluster:
        path = self._path(story_id)
        if not path.exists():
            raise KeyError(story_id)
        return ingest_cluster(json.loads(path.read_text(encoding="utf-8")))

    def exists(self, story_id: str) -> bool:
        return self._path(story_id).exists()

    def list_stories(self) -> list[dict]:
        summaries = []
        for path in sorted(self.data_dir.glob("*.json")):
            raw = json.loads(path.read_text(encoding="utf-8"))
            summaries.append({
                "story_id": raw.get("story_id", path.stem),
                "title": raw.get("title", ""),
                "n_articles": len(raw.get("articles", [])),
            })
        return summaries

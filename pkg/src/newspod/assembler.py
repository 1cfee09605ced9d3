"""Segment and podcast script composition.

Segments follow the inverted pyramid: headline, summary, Q&A pairs in
relevance order, then the quote, so truncating a segment from the back
always keeps the essentials. A podcast is a greeting, the segments with
transitions between them, and a closing line; optional break units after
each segment invite the listener to ask a question.
"""

import hashlib
import json
import random
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

from .corpus import StoryCluster, select_headline, select_summary, split_paragraphs
from .errors import BudgetTooSmall, GenerationFailed, ReferenceUnavailable, SchemaError
from .providers import ProviderSet, WORDS_PER_MINUTE, WORDS_PER_SECOND
from .qagraph import build_graph, generate_candidates, recommend_questions, select_session, select_session_random
from .quotes import QuoteExtract, extract_quote, pick_segment_quote
from .sentences import count_words, split_sentences

CONDITIONS = ("baseline", "qa_rand", "qa_best", "reference")

UNIT_KINDS = (
    "headline", "summary", "question", "answer", "quote_intro", "quote_body",
    "transition", "greeting", "closing", "break_prompt", "silence",
)

# Voice roles. V1 carries the narration, V2 asks the questions, V3 reads
# the quote.
VOICE_FOR_KIND = {
    "question": "V2",
    "quote_body": "V3",
    "silence": "none",
}
DEFAULT_VOICE_ROLE = "V1"

GREETING_TEMPLATE = "Welcome to NewsPod, today we'll be covering {titles}."
TRANSITION_TEMPLATE = "Next up, {title}."
CLOSING_TEXT = "That's it for today, thank you for tuning in."

BREAK_SENTENCES = (
    "We're wrapping up this story, if you have a question, now is a good time to ask.",
    "Otherwise, we'll be moving on to the next story.",
)
BREAK_SILENCE_MS = 5000

RECOMMENDED_PER_SEGMENT = 2

MIN_SECONDS_PER_SEGMENT = 30


@dataclass(frozen=True)
class ScriptUnit:
    unit_id: str
    kind: str
    text: str
    voice_role: str
    word_count: int
    silence_ms: Optional[int] = None


@dataclass(frozen=True)
class SegmentScript:
    segment_id: str
    story_id: str
    title: str
    condition: str
    units: tuple[ScriptUnit, ...]
    recommended_questions: tuple[str, ...] = ()
    quote: Optional[QuoteExtract] = None
    degraded: bool = False
    over_budget: bool = False

    def word_total(self) -> int:
        return sum(u.word_count for u in self.units)


@dataclass(frozen=True)
class PodcastScript:
    podcast_id: str
    greeting: ScriptUnit
    segments: tuple[SegmentScript, ...]
    transitions: tuple[ScriptUnit, ...]
    closing: ScriptUnit
    target_duration_s: int
    with_breaks: bool

    def play_units(self) -> list[tuple[str, ScriptUnit, Optional[QuoteExtract]]]:
        """(segment_id, unit, segment quote) in playback order.

        The greeting rides on the first segment, each transition on the
        segment it announces, and the closing on the last segment, so
        every audio line lands inside a progress-bar section.
        """
        ordered = [(self.segments[0].segment_id, self.greeting, None)]
        for index, segment in enumerate(self.segments):
            if index > 0:
                ordered.append((segment.segment_id, self.transitions[index - 1], None))
            for unit in segment.units:
                ordered.append((segment.segment_id, unit, segment.quote))
        ordered.append((self.segments[-1].segment_id, self.closing, None))
        return ordered


def _unit(segment_id: str, ordinal: int, kind: str, text: str,
          silence_ms: Optional[int] = None) -> ScriptUnit:
    return ScriptUnit(
        unit_id=f"{segment_id}-u{ordinal}",
        kind=kind,
        text=text,
        voice_role=VOICE_FOR_KIND.get(kind, DEFAULT_VOICE_ROLE),
        word_count=count_words(text),
        silence_ms=silence_ms,
    )


def word_budget(target_duration_s: int, n_segments: int) -> int:
    """Words available to each segment at the fixed speech rate."""
    if n_segments < 1:
        raise BudgetTooSmall("need at least one segment")
    if target_duration_s < MIN_SECONDS_PER_SEGMENT * n_segments:
        raise BudgetTooSmall(
            f"{target_duration_s}s cannot fit {n_segments} segments "
            f"(minimum {MIN_SECONDS_PER_SEGMENT}s each)"
        )
    return target_duration_s * WORDS_PER_MINUTE // (60 * n_segments)


def estimate_seconds(words: int, silence_ms: int = 0) -> float:
    return words / WORDS_PER_SECOND + silence_ms / 1000.0


def segment_quote(cluster: StoryCluster) -> Optional[QuoteExtract]:
    """Extract quotes from the cluster's quote paragraphs and pick one."""
    extracts = []
    for paragraph in cluster.quote_paragraphs():
        extract = extract_quote(paragraph.text, paragraph.paragraph_id)
        if extract is not None:
            extracts.append(extract)
    return pick_segment_quote(extracts, cluster.article_bodies())


def quote_units_text(quote: QuoteExtract) -> tuple[str, str]:
    if quote.descriptor:
        intro = f"{quote.author}, {quote.descriptor}."
    else:
        intro = f"{quote.author}."
    return intro, quote.quote_text


def _qa_segment(cluster: StoryCluster, condition: str, budget_words: int,
                seed: int, providers: ProviderSet) -> SegmentScript:
    segment_id = f"seg-{cluster.story_id}"
    headline = select_headline(cluster)
    summary = select_summary(cluster, providers.summarizer)

    quote = segment_quote(cluster)
    quote_words = 0
    if quote is not None:
        intro_text, body_text = quote_units_text(quote)
        quote_words = count_words(intro_text) + count_words(body_text)

    intro_words = count_words(headline) + count_words(summary.text)
    session_target = max(0, budget_words - intro_words - quote_words)

    session = None
    graph = None
    try:
        candidates = generate_candidates(cluster, providers.question_generator,
                                         providers.parallelism)
        graph = build_graph(candidates, cluster.filtered_paragraphs(),
                            providers.question_answerer, providers.parallelism)
        if condition == "qa_rand":
            session = select_session_random(graph, session_target, seed)
        else:
            session = select_session(graph, session_target)
    except GenerationFailed:
        pass

    units = []
    ordinal = 0
    units.append(_unit(segment_id, ordinal, "headline", headline))
    ordinal += 1
    units.append(_unit(segment_id, ordinal, "summary", summary.text))
    ordinal += 1
    if session is not None:
        for question, paragraph in session.pairs:
            units.append(_unit(segment_id, ordinal, "question", question.text))
            ordinal += 1
            units.append(_unit(segment_id, ordinal, "answer", paragraph.text))
            ordinal += 1
    if quote is not None:
        intro_text, body_text = quote_units_text(quote)
        units.append(_unit(segment_id, ordinal, "quote_intro", intro_text))
        ordinal += 1
        units.append(_unit(segment_id, ordinal, "quote_body", body_text))
        ordinal += 1

    recommended: tuple[str, ...] = ()
    if graph is not None and session is not None:
        recommended = tuple(
            q.text for q in recommend_questions(graph, session, RECOMMENDED_PER_SEGMENT)
        )

    return SegmentScript(
        segment_id=segment_id,
        story_id=cluster.story_id,
        title=cluster.title,
        condition=condition,
        units=tuple(units),
        recommended_questions=recommended,
        quote=quote,
        degraded=(session is None or not session.pairs),
    )


def _baseline_segment(cluster: StoryCluster, budget_words: int, seed: int) -> SegmentScript:
    segment_id = f"seg-{cluster.story_id}"
    article = random.Random(seed).choice(cluster.articles)
    sentences = []
    for paragraph_text in split_paragraphs(article.body):
        sentences.extend(split_sentences(paragraph_text))

    picked = []
    words = 0
    for sentence in sentences:
        picked.append(sentence)
        words += count_words(sentence)
        if words >= budget_words:
            break

    unit = _unit(segment_id, 0, "summary", " ".join(picked))
    return SegmentScript(
        segment_id=segment_id,
        story_id=cluster.story_id,
        title=cluster.title,
        condition="baseline",
        units=(unit,),
    )


def build_segment(cluster: StoryCluster, condition: str, budget_words: int,
                  seed: int, providers: ProviderSet,
                  reference_dir: Optional[Path] = None) -> SegmentScript:
    """Compose one segment under the given experiment condition."""
    if condition not in CONDITIONS:
        raise ValueError(f"unknown condition {condition!r}")
    if condition in ("qa_best", "qa_rand"):
        return _qa_segment(cluster, condition, budget_words, seed, providers)
    if condition == "baseline":
        return _baseline_segment(cluster, budget_words, seed)

    if reference_dir is None:
        raise ReferenceUnavailable("no reference script directory configured")
    path = Path(reference_dir) / f"{cluster.story_id}.json"
    if not path.exists():
        raise ReferenceUnavailable(f"no reference script for story {cluster.story_id}")
    segment = segment_from_dict(json.loads(path.read_text(encoding="utf-8")))
    return replace(segment, condition="reference")


def _atomic_groups(units: Sequence[ScriptUnit]) -> list[list[ScriptUnit]]:
    """Group units that must be kept or dropped together."""
    groups: list[list[ScriptUnit]] = []
    index = 0
    while index < len(units):
        unit = units[index]
        partner = units[index + 1] if index + 1 < len(units) else None
        if unit.kind == "question" and partner is not None and partner.kind == "answer":
            groups.append([unit, partner])
            index += 2
        elif unit.kind == "quote_intro" and partner is not None and partner.kind == "quote_body":
            groups.append([unit, partner])
            index += 2
        elif unit.kind == "break_prompt" and partner is not None and partner.kind == "silence":
            groups.append([unit, partner])
            index += 2
        else:
            groups.append([unit])
            index += 1
    return groups


def truncate_segment(segment: SegmentScript, budget_words: int) -> SegmentScript:
    """Cut a segment down to a word budget, inverted-pyramid style.

    Headline and summary always stay. Later units are appended whole, in
    order, with Q&A pairs and the quote kept atomic; appending stops at
    the first unit that would start at or beyond the budget.
    """
    head = []
    rest_start = 0
    for unit in segment.units:
        if unit.kind in ("headline", "summary") and rest_start == len(head):
            head.append(unit)
            rest_start += 1
        else:
            break

    kept = list(head)
    cumulative = sum(u.word_count for u in head)
    over_budget = cumulative > budget_words

    for group in _atomic_groups(segment.units[rest_start:]):
        if cumulative >= budget_words:
            break
        kept.extend(group)
        cumulative += sum(u.word_count for u in group)

    return replace(segment, units=tuple(kept), over_budget=over_budget)


def _derive_podcast_id(segments: Sequence[SegmentScript], target_duration_s: int,
                       with_breaks: bool) -> str:
    digest = hashlib.sha256(json.dumps([
        [s.segment_id for s in segments], target_duration_s, with_breaks,
    ]).encode()).hexdigest()
    return f"pc-{digest[:12]}"


def assemble_podcast(segments: Sequence[SegmentScript], target_duration_s: int,
                     with_breaks: bool, podcast_id: Optional[str] = None) -> PodcastScript:
    """Wrap segments with greeting, transitions, closing, and breaks."""
    if not segments:
        raise ValueError("assemble_podcast requires at least one segment")
    if podcast_id is None:
        podcast_id = _derive_podcast_id(segments, target_duration_s, with_breaks)

    final_segments = []
    for segment in segments:
        if with_breaks:
            units = list(segment.units)
            ordinal = len(units)
            for sentence in BREAK_SENTENCES:
                units.append(_unit(segment.segment_id, ordinal, "break_prompt", sentence))
                ordinal += 1
                units.append(ScriptUnit(
                    unit_id=f"{segment.segment_id}-u{ordinal}",
                    kind="silence",
                    text="",
                    voice_role="none",
                    word_count=0,
                    silence_ms=BREAK_SILENCE_MS,
                ))
                ordinal += 1
            segment = replace(segment, units=tuple(units))
        final_segments.append(segment)

    titles = [s.title for s in final_segments]
    if len(titles) == 1:
        joined = titles[0]
    else:
        joined = ", ".join(titles[:-1]) + " and " + titles[-1]

    greeting = ScriptUnit(
        unit_id=f"{podcast_id}-greeting",
        kind="greeting",
        text=GREETING_TEMPLATE.format(titles=joined),
        voice_role="V1",
        word_count=count_words(GREETING_TEMPLATE.format(titles=joined)),
    )
    transitions = tuple(
        ScriptUnit(
            unit_id=f"{podcast_id}-t{index}",
            kind="transition",
            text=TRANSITION_TEMPLATE.format(title=segment.title),
            voice_role="V1",
            word_count=count_words(TRANSITION_TEMPLATE.format(title=segment.title)),
        )
        for index, segment in enumerate(final_segments[1:])
    )
    closing = ScriptUnit(
        unit_id=f"{podcast_id}-closing",
        kind="closing",
        text=CLOSING_TEXT,
        voice_role="V1",
        word_count=count_words(CLOSING_TEXT),
    )
    return PodcastScript(
        podcast_id=podcast_id,
        greeting=greeting,
        segments=tuple(final_segments),
        transitions=transitions,
        closing=closing,
        target_duration_s=target_duration_s,
        with_breaks=with_breaks,
    )


# ---------------------------------------------------------------------------
# script JSON schema
# ---------------------------------------------------------------------------


def unit_to_dict(unit: ScriptUnit) -> dict:
    data = {
        "unit_id": unit.unit_id,
        "kind": unit.kind,
        "text": unit.text,
        "voice_role": unit.voice_role,
        "word_count": unit.word_count,
    }
    if unit.silence_ms is not None:
        data["silence_ms"] = unit.silence_ms
    return data


def unit_from_dict(data: dict) -> ScriptUnit:
    kind = data.get("kind")
    if kind not in UNIT_KINDS:
        raise SchemaError("kind", f"unknown unit kind {kind!r}")
    return ScriptUnit(
        unit_id=data["unit_id"],
        kind=kind,
        text=data.get("text", ""),
        voice_role=data.get("voice_role", VOICE_FOR_KIND.get(kind, DEFAULT_VOICE_ROLE)),
        word_count=data.get("word_count", count_words(data.get("text", ""))),
        silence_ms=data.get("silence_ms"),
    )


def segment_to_dict(segment: SegmentScript) -> dict:
    data = {
        "segment_id": segment.segment_id,
        "story_id": segment.story_id,
        "title": segment.title,
        "condition": segment.condition,
        "degraded": segment.degraded,
        "over_budget": segment.over_budget,
        "recommended_questions": list(segment.recommended_questions),
        "units": [unit_to_dict(u) for u in segment.units],
    }
    if segment.quote is not None:
        data["quote"] = {
            "author": segment.quote.author,
            "descriptor": segment.quote.descriptor,
            "quote_text": segment.quote.quote_text,
            "source_paragraph_id": segment.quote.source_paragraph_id,
        }
    return data


def segment_from_dict(data: dict) -> SegmentScript:
    quote = None
    if data.get("quote"):
        quote = QuoteExtract(
            author=data["quote"]["author"],
            descriptor=data["quote"].get("descriptor"),
            quote_text=data["quote"]["quote_text"],
            source_paragraph_id=data["quote"].get("source_paragraph_id", ""),
        )
    return SegmentScript(
        segment_id=data["segment_id"],
        story_id=data["story_id"],
        title=data.get("title", ""),
        condition=data["condition"],
        units=tuple(unit_from_dict(u) for u in data["units"]),
        recommended_questions=tuple(data.get("recommended_questions", ())),
        quote=quote,
        degraded=data.get("degraded", False),
        over_budget=data.get("over_budget", False),
    )


def script_to_dict(script: PodcastScript) -> dict:
    return {
        "podcast_id": script.podcast_id,
        "target_duration_s": script.target_duration_s,
        "with_breaks": script.with_breaks,
        "greeting": unit_to_dict(script.greeting),
        "closing": unit_to_dict(script.closing),
        "transitions": [unit_to_dict(u) for u in script.transitions],
        "segments": [segment_to_dict(s) for s in script.segments],
    }


def script_from_dict(data: dict) -> PodcastScript:
    return PodcastScript(
        podcast_id=data["podcast_id"],
        greeting=unit_from_dict(data["greeting"]),
        segments=tuple(segment_from_dict(s) for s in data["segments"]),
        transitions=tuple(unit_from_dict(u) for u in data.get("transitions", ())),
        closing=unit_from_dict(data["closing"]),
        target_duration_s=data["target_duration_s"],
        with_breaks=data["with_breaks"],
    )


def script_to_json(script: PodcastScript) -> str:
    return json.dumps(script_to_dict(script), indent=2, ensure_ascii=False)

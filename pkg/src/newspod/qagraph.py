"""Bipartite question-paragraph graph and Q&A session selection.

Candidate questions are generated per filtered paragraph, then an
answerer is run over every (question, paragraph) pair; an edge means the
paragraph answers the question. A question's degree counts how many
distinct paragraphs answer it, which stands in for relevance. The
session selector walks the graph greedily: take the most-answered
question, pair it with its best paragraph, drop that paragraph and every
question it answers, repeat until the word target is reached.
"""

import json
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .corpus import Paragraph, StoryCluster
from .errors import GenerationFailed, GraphIncomplete, ProviderProtocol, ProviderUnavailable
from .providers import (
    DEFAULT_PARALLELISM,
    INTERROGATIVES,
    QuestionCandidate,
    parallel_map,
)
from .sentences import count_words

# Abort graph construction when more than this fraction of answer
# verdicts fail.
MAX_VERDICT_FAILURE_RATE = 0.20


@dataclass(frozen=True)
class QAEdge:
    question_id: str
    paragraph_id: str
    span_text: str
    span_score: float


@dataclass(frozen=True)
class QAGraph:
    questions: tuple[QuestionCandidate, ...]
    paragraphs: tuple[Paragraph, ...]
    edges: tuple[QAEdge, ...]
    failed_pairs: int = 0

    def question_by_id(self) -> dict[str, QuestionCandidate]:
        return {q.question_id: q for q in self.questions}

    def paragraph_by_id(self) -> dict[str, Paragraph]:
        return {p.paragraph_id: p for p in self.paragraphs}

    def degrees(self) -> dict[str, int]:
        """Question id -> number of paragraphs answering it."""
        counts = {q.question_id: 0 for q in self.questions}
        for edge in self.edges:
            counts[edge.question_id] += 1
        return counts

    def to_json_dict(self) -> dict:
        return {
            "questions": [
                {
                    "question_id": q.question_id,
                    "source_paragraph_id": q.source_paragraph_id,
                    "interrogative": q.interrogative,
                    "text": q.text,
                    "word_count": q.word_count,
                }
                for q in self.questions
            ],
            "paragraphs": [
                {"paragraph_id": p.paragraph_id, "text": p.text, "word_count": p.word_count}
                for p in self.paragraphs
            ],
            "edges": [
                {
                    "question_id": e.question_id,
                    "paragraph_id": e.paragraph_id,
                    "span_text": e.span_text,
                    "span_score": e.span_score,
                }
                for e in self.edges
            ],
        }

    def to_dot(self) -> str:
        lines = ["graph qa {", "  rankdir=LR;"]
        for q in self.questions:
            label = q.text.replace('"', r"\"")
            lines.append(f'  "{q.question_id}" [shape=box, label="{label}"];')
        for p in self.paragraphs:
            lines.append(f'  "{p.paragraph_id}" [shape=ellipse];')
        for e in self.edges:
            lines.append(f'  "{e.question_id}" -- "{e.paragraph_id}" [label="{e.span_score:g}"];')
        lines.append("}")
        return "\n".join(lines)


@dataclass(frozen=True)
class QASession:
    pairs: tuple[tuple[QuestionCandidate, Paragraph], ...]
    total_words: int

    def to_json_dict(self) -> dict:
        return {
            "pairs": [
                {"question_id": q.question_id, "paragraph_id": p.paragraph_id}
                for q, p in self.pairs
            ],
            "total_words": self.total_words,
        }


def generate_candidates(cluster: StoryCluster, qgen,
                        parallelism: int = DEFAULT_PARALLELISM) -> list[QuestionCandidate]:
    """Seven questions per filtered paragraph, one per interrogative.

    Duplicate question texts (case-folded) are dropped, first occurrence
    kept, so repeated questions cannot inflate graph degrees.
    """
    filtered = cluster.filtered_paragraphs()
    if not filtered:
        raise GenerationFailed(f"story {cluster.story_id}: no paragraph passes the filter")

    requests = [
        (paragraph, interrogative)
        for paragraph in filtered
        for interrogative in INTERROGATIVES
    ]

    def run(request):
        paragraph, interrogative = request
        try:
            return qgen.generate_question(paragraph.text, interrogative)
        except (ProviderUnavailable, ProviderProtocol):
            return None

    texts = parallel_map(run, requests, parallelism)

    candidates: list[QuestionCandidate] = []
    seen: set[str] = set()
    for (paragraph, interrogative), text in zip(requests, texts):
        if text is None:
            continue
        folded = text.casefold()
        if folded in seen:
            continue
        seen.add(folded)
        candidates.append(QuestionCandidate(
            question_id=f"{paragraph.paragraph_id}:q-{interrogative.lower()}",
            source_paragraph_id=paragraph.paragraph_id,
            interrogative=interrogative,
            text=text,
            word_count=count_words(text),
        ))
    if not candidates:
        raise GenerationFailed(f"story {cluster.story_id}: question generation failed everywhere")
    return candidates


def build_graph(candidates: Sequence[QuestionCandidate], paragraphs: Sequence[Paragraph],
                qa, parallelism: int = DEFAULT_PARALLELISM) -> QAGraph:
    """Run the answerer over every (question, paragraph) pair.

    The result is keyed by (question_id, paragraph_id) and sorted, so it
    does not depend on which calls finish first. Individual verdict
    failures skip the pair; more than MAX_VERDICT_FAILURE_RATE of pairs
    failing aborts with GraphIncomplete.
    """
    if not candidates or not paragraphs:
        raise ValueError("build_graph requires candidates and paragraphs")

    pairs = [(q, p) for q in candidates for p in paragraphs]

    def run(pair):
        question, paragraph = pair
        try:
            return qa.answer_question(paragraph.text, question.text)
        except (ProviderUnavailable, ProviderProtocol):
            return None

    verdicts = parallel_map(run, pairs, parallelism)

    failed = sum(1 for v in verdicts if v is None)
    if failed > MAX_VERDICT_FAILURE_RATE * len(pairs):
        raise GraphIncomplete(f"{failed}/{len(pairs)} answer verdicts failed")

    edges = [
        QAEdge(
            question_id=question.question_id,
            paragraph_id=paragraph.paragraph_id,
            span_text=verdict.span_text or "",
            span_score=verdict.span_score,
        )
        for (question, paragraph), verdict in zip(pairs, verdicts)
        if verdict is not None and verdict.has_answer
    ]
    edges.sort(key=lambda e: (e.question_id, e.paragraph_id))
    return QAGraph(
        questions=tuple(sorted(candidates, key=lambda q: q.question_id)),
        paragraphs=tuple(sorted(paragraphs, key=lambda p: p.paragraph_id)),
        edges=tuple(edges),
        failed_pairs=failed,
    )


class _WorkingGraph:
    """Mutable adjacency view used during session selection."""

    def __init__(self, graph: QAGraph):
        self.questions = graph.question_by_id()
        self.paragraphs = graph.paragraph_by_id()
        self.q_edges: dict[str, dict[str, QAEdge]] = {}
        self.p_edges: dict[str, dict[str, QAEdge]] = {}
        for edge in graph.edges:
            self.q_edges.setdefault(edge.question_id, {})[edge.paragraph_id] = edge
            self.p_edges.setdefault(edge.paragraph_id, {})[edge.question_id] = edge

    def live_questions(self) -> list[str]:
        return sorted(qid for qid, adj in self.q_edges.items() if adj)

    def question_degree(self, qid: str) -> int:
        return len(self.q_edges.get(qid, {}))

    def paragraph_degree(self, pid: str) -> int:
        return len(self.p_edges.get(pid, {}))

    def score_sum(self, qid: str) -> float:
        return sum(e.span_score for e in self.q_edges.get(qid, {}).values())

    def remove_paragraph_and_answered(self, pid: str) -> None:
        """Drop the paragraph and every question it answers."""
        answered = list(self.p_edges.pop(pid, {}))
        for qid in answered:
            for other_pid, _ in self.q_edges.pop(qid, {}).items():
                if other_pid != pid and other_pid in self.p_edges:
                    self.p_edges[other_pid].pop(qid, None)


def _run_selection(graph: QAGraph, target_words: float,
                   rng: Optional[random.Random]) -> QASession:
    working = _WorkingGraph(graph)
    pairs: list[tuple[QuestionCandidate, Paragraph]] = []
    total_words = 0

    while total_words < target_words:
        live = working.live_questions()
        if not live:
            break

        if rng is None:
            qid = min(
                live,
                key=lambda q: (-working.question_degree(q), -working.score_sum(q), q),
            )
        else:
            qid = rng.choice(live)

        neighbors = sorted(working.q_edges[qid])
        if rng is None:
            pid = min(
                neighbors,
                key=lambda p: (
                    -working.q_edges[qid][p].span_score,
                    -working.paragraph_degree(p),
                    p,
                ),
            )
        else:
            pid = rng.choice(neighbors)

        question = working.questions[qid]
        paragraph = working.paragraphs[pid]
        pairs.append((question, paragraph))
        total_words += question.word_count + paragraph.word_count
        working.remove_paragraph_and_answered(pid)

    return QASession(pairs=tuple(pairs), total_words=total_words)


def select_session(graph: QAGraph, target_words: float) -> QASession:
    """Greedy selection: most-answered question first.

    Ties on question degree break by the higher sum of incident span
    scores, then lexicographic question id; paragraph choice is the
    neighbor with the best span score, ties by higher paragraph degree,
    then lexicographic id. Selecting a pair removes the paragraph and
    every question it answers. Runs until total_words reaches
    target_words or no question has an edge left.
    """
    if target_words < 0:
        raise ValueError("target_words must be >= 0")
    return _run_selection(graph, target_words, rng=None)


def select_session_random(graph: QAGraph, target_words: float, seed: int) -> QASession:
    """Ablation selector: question and paragraph picked uniformly at
    random (seeded); removal rules unchanged."""
    if target_words < 0:
        raise ValueError("target_words must be >= 0")
    return _run_selection(graph, target_words, rng=random.Random(seed))


def recommend_questions(graph: QAGraph, session: QASession, n: int) -> list[QuestionCandidate]:
    """The n best leftover questions, for the player's suggestion buttons.

    Ranked by original graph degree with the select_session tie-breaks;
    excludes questions used in the session and questions answered by any
    session paragraph. Returns fewer than n when fewer remain.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return []

    used = {q.question_id for q, _ in session.pairs}
    session_paragraphs = {p.paragraph_id for _, p in session.pairs}
    answered_by_session = {
        e.question_id for e in graph.edges if e.paragraph_id in session_paragraphs
    }

    degrees = graph.degrees()
    score_sums: dict[str, float] = {q.question_id: 0.0 for q in graph.questions}
    for edge in graph.edges:
        score_sums[edge.question_id] += edge.span_score

    eligible = [
        q for q in graph.questions
        if q.question_id not in used
        and q.question_id not in answered_by_session
        and degrees[q.question_id] > 0
    ]
    eligible.sort(key=lambda q: (-degrees[q.question_id], -score_sums[q.question_id], q.question_id))
    return eligible[:n]


def graph_to_json(graph: QAGraph) -> str:
    return json.dumps(graph.to_json_dict(), indent=2, ensure_ascii=False)

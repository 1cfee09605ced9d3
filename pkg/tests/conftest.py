import json
import random
from pathlib import Path

import pytest

from newspod.config import EngineConfig
from newspod.corpus import Paragraph, StoryCluster, ingest_cluster
from newspod.engine import Engine
from newspod.providers import QuestionCandidate
from newspod.qagraph import QAEdge, QAGraph

FIXTURE_DIR = Path(__file__).parent.parent / "fixtures"
GOLDEN_DIR = Path(__file__).parent / "golden"

STORY_IDS = [
    "amazon-union-vote",
    "bethesda-acquisition",
    "iceberg-breakoff",
    "rohingya-crisis",
    "swiss-burqa-ban",
    "tesla-autopilot-ban",
]


def load_story_raw(story_id: str) -> dict:
    return json.loads((FIXTURE_DIR / f"{story_id}.json").read_text(encoding="utf-8"))


def load_story(story_id: str) -> StoryCluster:
    return ingest_cluster(load_story_raw(story_id))


@pytest.fixture(scope="session")
def fixture_clusters() -> dict[str, StoryCluster]:
    return {story_id: load_story(story_id) for story_id in STORY_IDS}


@pytest.fixture()
def engine(tmp_path) -> Engine:
    """Engine over a temp data dir with every fixture story ingested."""
    config = EngineConfig(data_dir=tmp_path / "data",
                          reference_dir=FIXTURE_DIR / "reference")
    eng = Engine(config)
    for story_id in STORY_IDS:
        eng.store.save(load_story_raw(story_id))
    return eng


def synthetic_paragraph(pid: str, word_count: int = 20) -> Paragraph:
    text = " ".join(f"w{pid}{i}" for i in range(word_count))
    return Paragraph(pid, "art", text, word_count, False, True)


def synthetic_question(qid: str, source: str = "p0", word_count: int = 5) -> QuestionCandidate:
    text = "What " + " ".join(f"t{qid}{i}" for i in range(word_count - 1)) + "?"
    return QuestionCandidate(qid, source, "What", text, word_count)


def simulate_removal(graph: QAGraph, pairs):
    """Independent replay of the session removal rules.

    Returns (per-step live views, whether any live question remained).
    Asserts each pair was a live edge when picked.
    """
    q_adj = {q.question_id: {} for q in graph.questions}
    p_adj = {p.paragraph_id: {} for p in graph.paragraphs}
    for e in graph.edges:
        q_adj[e.question_id][e.paragraph_id] = e
        p_adj[e.paragraph_id][e.question_id] = e

    steps = []
    for q, p in pairs:
        live_degrees = {qid: len(adj) for qid, adj in q_adj.items() if adj}
        steps.append((dict(live_degrees), {k: dict(v) for k, v in q_adj.items()}))
        assert p.paragraph_id in q_adj[q.question_id], "pair is not a live edge"
        for qid in list(p_adj[p.paragraph_id]):
            for pid in q_adj[qid]:
                if pid != p.paragraph_id:
                    p_adj[pid].pop(qid, None)
            q_adj[qid] = {}
        p_adj[p.paragraph_id] = {}
    remaining_live = any(adj for adj in q_adj.values())
    return steps, remaining_live


def assert_selection_properties(graph: QAGraph, target: float):
    """The session property suite: edges only, distinct paragraphs,
    removal respected, target reached unless exhausted, greedy rule
    verified step by step, permutation invariance."""
    from newspod.qagraph import select_session

    session = select_session(graph, target)
    edge_set = {(e.question_id, e.paragraph_id) for e in graph.edges}

    for q, p in session.pairs:
        assert (q.question_id, p.paragraph_id) in edge_set

    paragraph_ids = [p.paragraph_id for _, p in session.pairs]
    assert len(paragraph_ids) == len(set(paragraph_ids))

    for i, (_, earlier_p) in enumerate(session.pairs):
        for later_q, _ in session.pairs[i + 1:]:
            assert (later_q.question_id, earlier_p.paragraph_id) not in edge_set

    steps, remaining_live = simulate_removal(graph, session.pairs)
    if session.total_words < target:
        assert not remaining_live

    for (live_degrees, live_adj), (q, p) in zip(steps, session.pairs):
        max_degree = max(live_degrees.values())
        assert live_degrees[q.question_id] == max_degree
        best_score = max(e.span_score for e in live_adj[q.question_id].values())
        assert live_adj[q.question_id][p.paragraph_id].span_score == best_score

    shuffled = QAGraph(
        questions=tuple(reversed(graph.questions)),
        paragraphs=tuple(reversed(graph.paragraphs)),
        edges=tuple(reversed(graph.edges)),
    )
    assert select_session(shuffled, target).to_json_dict() == session.to_json_dict()
    return session


def make_random_graph(seed: int, n_questions=(8, 16), n_paragraphs=(4, 8),
                      edge_prob=(0.1, 0.7)) -> QAGraph:
    """Seeded synthetic bipartite graph for selection-rule tests.

    Each question draws its own edge probability from the given range,
    so some questions are answered by many paragraphs and some by few,
    the shape the greedy selector exploits.
    """
    rng = random.Random(seed)
    nq = rng.randint(*n_questions)
    np = rng.randint(*n_paragraphs)
    questions = tuple(
        synthetic_question(f"q{i:02d}", word_count=rng.randint(3, 8)) for i in range(nq)
    )
    paragraphs = tuple(
        synthetic_paragraph(f"p{i:02d}", word_count=rng.randint(15, 35)) for i in range(np)
    )
    edges = []
    for q in questions:
        prob = rng.uniform(*edge_prob) if isinstance(edge_prob, tuple) else edge_prob
        for p in paragraphs:
            if rng.random() < prob:
                edges.append(QAEdge(q.question_id, p.paragraph_id,
                                    p.text.split()[0], round(rng.uniform(1.6, 5.0), 3)))
    return QAGraph(questions=questions, paragraphs=paragraphs, edges=tuple(edges))

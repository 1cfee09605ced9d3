"""Live listener questions.

While a podcast plays, the listener can ask a question; the answerer is
run over every paragraph of the current segment's source cluster, and
the best verdict is accepted only when its score clears the no-answer
score by a confidence margin. Replies use fixed templates, and playback
resumes at the line after the interruption, skipping the sentence that
was cut off.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .corpus import StoryCluster
from .errors import LineUnknown, ProviderProtocol, ProviderUnavailable
from .providers import AnswerVerdict, parallel_map
from .speech import PodcastManifest, ScriptLine, render_extra_lines

HOLDING_TEXT = "I'll look into that, give me a moment."
ANSWER_TEMPLATE = "I think the answer is {span}, I got it from the following paragraph. {paragraph}"
NO_ANSWER_TEXT = (
    "Sorry. I couldn't find the answer. If you rephrase I will try again. "
    "Otherwise I'll keep walking you through the segment."
)

# Accept an answer only when span_score beats no_answer_score by this
# much; the margin is configurable per deployment.
DEFAULT_CONFIDENCE_MARGIN = 0.5

END_OF_PODCAST = "__end_of_podcast__"

QUESTION_ORIGINS = ("typed", "recommended", "spoken")


@dataclass(frozen=True)
class ListenerQuestion:
    question_id: str
    podcast_id: str
    segment_id: str
    text: str
    asked_at_line: str
    origin: str = "typed"


@dataclass(frozen=True)
class AnswerReply:
    status: str  # "answered" | "no_answer"
    answer_text: Optional[str]
    evidence_paragraph: Optional[str]
    reply_lines: tuple[ScriptLine, ...]
    resume_at_line: str
    provider_error: bool = False


def resume_point(manifest: PodcastManifest, interrupted_line: str) -> str:
    """Line to resume at: the successor of the interrupted line."""
    for index, line in enumerate(manifest.lines):
        if line.line_id == interrupted_line:
            if index + 1 < len(manifest.lines):
                return manifest.lines[index + 1].line_id
            return END_OF_PODCAST
    raise LineUnknown(f"line {interrupted_line!r} is not in podcast {manifest.podcast_id}")


def best_verdict(cluster: StoryCluster, question_text: str, qa,
                 parallelism: int = 8) -> tuple[Optional[AnswerVerdict], Optional[str], int]:
    """Run the answerer over every paragraph of the cluster.

    Quote paragraphs are included; live questions may well be about the
    quote. Returns (best verdict by margin, its paragraph text, number
    of failed calls); ties go to the earliest paragraph.
    """
    paragraphs = list(cluster.paragraphs)

    def run(paragraph):
        try:
            return qa.answer_question(paragraph.text, question_text)
        except (ProviderUnavailable, ProviderProtocol):
            return None

    verdicts = parallel_map(run, paragraphs, parallelism)
    failures = sum(1 for v in verdicts if v is None)

    best = None
    best_paragraph = None
    best_margin = None
    for paragraph, verdict in zip(paragraphs, verdicts):
        if verdict is None:
            continue
        margin = verdict.span_score - verdict.no_answer_score
        if best_margin is None or margin > best_margin:
            best = verdict
            best_paragraph = paragraph.text
            best_margin = margin
    return best, best_paragraph, failures


def answer_listener_question(question: ListenerQuestion, cluster: StoryCluster, qa,
                             manifest: PodcastManifest, tts, out_dir: Path | str,
                             margin: float = DEFAULT_CONFIDENCE_MARGIN,
                             voice_map: Optional[dict[str, str]] = None,
                             parallelism: int = 8) -> AnswerReply:
    """Answer a listener question and render the spoken reply.

    The holding line is always the first reply line; the answer or the
    apology follows. Provider failures degrade to a no-answer reply
    flagged provider_error rather than interrupting playback.
    """
    if not question.text or not question.text.strip():
        raise ValueError("listener question must have text")
    if question.origin not in QUESTION_ORIGINS:
        raise ValueError(f"unknown question origin {question.origin!r}")

    verdict, paragraph_text, failures = best_verdict(cluster, question.text, qa, parallelism)

    answered = (
        verdict is not None
        and verdict.has_answer
        and verdict.span_text
        and verdict.span_score - verdict.no_answer_score > margin
    )
    if answered:
        status = "answered"
        answer_text = verdict.span_text
        evidence = paragraph_text
        reply_text = ANSWER_TEMPLATE.format(span=answer_text, paragraph=evidence)
    else:
        status = "no_answer"
        answer_text = None
        evidence = None
        reply_text = NO_ANSWER_TEXT

    reply_lines = render_extra_lines(
        [HOLDING_TEXT, reply_text],
        unit_id=f"live-{question.question_id}",
        segment_id=question.segment_id,
        podcast_id=question.podcast_id,
        tts=tts,
        out_dir=out_dir,
        voice_map=voice_map,
    )

    return AnswerReply(
        status=status,
        answer_text=answer_text,
        evidence_paragraph=evidence,
        reply_lines=tuple(reply_lines),
        resume_at_line=resume_point(manifest, question.asked_at_line),
        provider_error=failures >= len(cluster.paragraphs) or (status == "no_answer" and failures > 0),
    )


def reply_to_dict(reply: AnswerReply) -> dict:
    from .speech import line_to_dict

    return {
        "status": reply.status,
        "answer_text": reply.answer_text,
        "evidence_paragraph": reply.evidence_paragraph,
        "reply_lines": [line_to_dict(line) for line in reply.reply_lines],
        "resume_at_line": reply.resume_at_line,
        "provider_error": reply.provider_error,
    }

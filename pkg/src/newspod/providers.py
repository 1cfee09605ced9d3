"""Model-provider contracts: summarizer, question generator, question
answerer, and speech synthesizer.

The pipeline never talks to a neural model directly; it calls one of
these providers. A deterministic mock implementation of each contract is
built in so the whole engine runs and tests without model weights; the
HTTP implementations delegate to remote inference endpoints.

Mock rules are documented on each class because tests recompute expected
values from them independently.
"""

import base64
import io
import logging
import re
import wave
import xml.etree.ElementTree as ET
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, TypeVar

import requests

from .errors import ProviderProtocol, ProviderUnavailable, VoiceUnknown
from .sentences import count_words, split_sentences

logger = logging.getLogger(__name__)

INTERROGATIVES = ("Who", "What", "Why", "How", "When", "Where", "Which")

# Speech rate used for word budgeting and mock audio durations:
# the midpoint of the 120-150 words-per-minute band.
WORDS_PER_MINUTE = 135
WORDS_PER_SECOND = WORDS_PER_MINUTE / 60.0

DEFAULT_PARALLELISM = 8
DEFAULT_TIMEOUT_S = 30.0

MOCK_SAMPLE_RATE = 22050
MOCK_NO_ANSWER_SCORE = 1.5
MOCK_MIN_OVERLAP = 2

DEFAULT_VOICES = ("en-US-Wavenet-J", "en-US-Wavenet-H", "en-US-Wavenet-D")

# Small fixed stopword list shared by the mock question generator and the
# mock answerer. Interrogatives are stopwords so question/paragraph
# overlap is computed on content words only.
STOPWORDS = frozenset("""
a an the is are was were be been being am do does did done have has had
will would can could should shall may might must to of in on at by for
with from as that this these those it its he she they them his her hers
their theirs and or but not no nor i you we us our your yours my mine me
him who what why how when where which whom whose there here about into
over under again further then once if because so than too very just now
up down out off s t re ve ll d
""".split())

_TOKEN = re.compile(r"[A-Za-z0-9']+")


def tokens_with_spans(text: str) -> list[tuple[str, int, int]]:
    """Lowercased word tokens with their character offsets."""
    return [(m.group(0).lower(), m.start(), m.end()) for m in _TOKEN.finditer(text)]


def content_words(text: str) -> list[str]:
    return [t for t, _, _ in tokens_with_spans(text) if t not in STOPWORDS]


@dataclass(frozen=True)
class QuestionCandidate:
    question_id: str
    source_paragraph_id: str
    interrogative: str
    text: str
    word_count: int


@dataclass(frozen=True)
class AnswerVerdict:
    has_answer: bool
    span_text: Optional[str]
    span_score: float
    no_answer_score: float


@dataclass(frozen=True)
class SpeechResult:
    audio_bytes: bytes
    duration_ms: int
    codec: str  # "ogg" | "wav-pcm16-mono-22050"


def ensure_question_shape(text: str, interrogative: str) -> tuple[str, bool]:
    """Force the first-word constraint and trailing '?'.

    Returns the (possibly repaired) question and whether a repair was
    needed; repairs keep the pipeline total instead of dropping output.
    """
    repaired = False
    text = text.strip()
    if not text.lower().startswith(interrogative.lower()):
        text = f"{interrogative} {text}" if text else interrogative
        repaired = True
    if not text.endswith("?"):
        text = text.rstrip(".!") + "?"
        repaired = True
    return text, repaired


# ---------------------------------------------------------------------------
# mock providers
# ---------------------------------------------------------------------------


class MockSummarizer:
    """Leading-sentence summarizer.

    Rule: take the first k sentences of the body, with k minimal such
    that the prefix has at least 2 sentences and at least 20 words; if no
    prefix qualifies, k is the whole body. Likelihood is 1/k, so shorter
    qualifying summaries rank higher.
    """

    def summarize(self, article_body: str) -> tuple[str, float]:
        if not article_body or not article_body.strip():
            raise ValueError("summarize requires a non-empty body")
        sentences = split_sentences(article_body)
        k = len(sentences)
        for candidate_k in range(1, len(sentences) + 1):
            prefix = sentences[:candidate_k]
            if candidate_k >= 2 and count_words(" ".join(prefix)) >= 20:
                k = candidate_k
                break
        summary = " ".join(sentences[:k])
        return summary, 1.0 / k


class MockQuestionGenerator:
    """Rare-token question generator.

    Rule: the question is the interrogative followed by the paragraph's
    two rarest content tokens and a question mark, with the tokens in
    paragraph order (example: "Where brunt shelf?"). Rarity is the
    token's total count across the corpus texts handed to the
    constructor (the paragraph itself when no corpus is given); rarity
    ties break by first occurrence in the paragraph.
    """

    def __init__(self, corpus_texts: Optional[Sequence[str]] = None):
        self._frequencies: Optional[dict[str, int]] = None
        if corpus_texts is not None:
            self._frequencies = {}
            for text in corpus_texts:
                for token, _, _ in tokens_with_spans(text):
                    self._frequencies[token] = self._frequencies.get(token, 0) + 1

    def _frequency(self, token: str, local: dict[str, int]) -> int:
        if self._frequencies is not None:
            return self._frequencies.get(token, 0)
        return local[token]

    def generate_question(self, paragraph: str, interrogative: str) -> str:
        if interrogative not in INTERROGATIVES:
            raise ValueError(f"unknown interrogative {interrogative!r}")
        if not paragraph or not paragraph.strip():
            raise ValueError("generate_question requires a non-empty paragraph")

        ordered: list[str] = []
        local_freq: dict[str, int] = {}
        for token, _, _ in tokens_with_spans(paragraph):
            local_freq[token] = local_freq.get(token, 0) + 1
            if token not in STOPWORDS and token not in ordered:
                ordered.append(token)
        if not ordered:
            ordered = [t for t, _, _ in tokens_with_spans(paragraph)]

        first_seen = {token: position for position, token in enumerate(ordered)}
        rarest = sorted(ordered, key=lambda t: (self._frequency(t, local_freq), first_seen[t]))[:2]
        rarest.sort(key=lambda t: first_seen[t])
        text, _ = ensure_question_shape(f"{interrogative} {' '.join(rarest)}", interrogative)
        return text


class MockQuestionAnswerer:
    """Token-overlap answerer.

    Rule: the paragraph answers the question iff they share at least 2
    content words (stopwords excluded). span_score is the overlap count
    and no_answer_score is fixed at 1.5, so has_answer is exactly
    span_score > no_answer_score. The answer span is the longest
    contiguous run of paragraph tokens that all appear in the question
    (earliest run wins ties), sliced from the paragraph text.
    """

    def answer_question(self, paragraph: str, question: str) -> AnswerVerdict:
        if not paragraph or not paragraph.strip():
            raise ValueError("answer_question requires a non-empty paragraph")
        if not question or not question.strip():
            raise ValueError("answer_question requires a non-empty question")

        question_tokens = {t for t, _, _ in tokens_with_spans(question)}
        overlap = len(set(content_words(paragraph)) & set(content_words(question)))
        span_score = float(overlap)
        if overlap < MOCK_MIN_OVERLAP:
            return AnswerVerdict(False, None, span_score, MOCK_NO_ANSWER_SCORE)

        tokens = tokens_with_spans(paragraph)
        best: Optional[tuple[int, int]] = None  # (start_index, length)
        run_start = None
        for index, (token, _, _) in enumerate(tokens):
            if token in question_tokens:
                if run_start is None:
                    run_start = index
                length = index - run_start + 1
                if best is None or length > best[1]:
                    best = (run_start, length)
            else:
                run_start = None
        assert best is not None  # overlap >= 2 implies at least one run
        start_index, length = best
        span_text = paragraph[tokens[start_index][1]:tokens[start_index + length - 1][2]]
        return AnswerVerdict(True, span_text, span_score, MOCK_NO_ANSWER_SCORE)


def _silence_wav(duration_ms: int, sample_rate: int = MOCK_SAMPLE_RATE) -> bytes:
    buffer = io.BytesIO()
    with wave.open(buffer, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(sample_rate)
        wav.writeframes(b"\x00\x00" * (duration_ms * sample_rate // 1000))
    return buffer.getvalue()


def ssml_words_and_breaks(ssml: str) -> tuple[int, int]:
    """(word count of spoken text, total break time in ms) of a document."""
    try:
        root = ET.fromstring(ssml)
    except ET.ParseError as exc:
        raise ValueError(f"malformed SSML: {exc}") from exc
    if root.tag != "speak":
        raise ValueError(f"SSML root must be <speak>, got <{root.tag}>")
    words = 0
    break_ms = 0
    for element in root.iter():
        if element.tag == "break":
            time_value = element.get("time", "0ms")
            if not time_value.endswith("ms"):
                raise ValueError(f"break time must be in ms: {time_value!r}")
            break_ms += int(time_value[:-2])
        if element.text:
            words += count_words(element.text)
        if element.tail:
            words += count_words(element.tail)
    return words, break_ms


class MockSpeechSynthesizer:
    """Silence synthesizer.

    Rule: emits silent WAV (PCM 16-bit mono 22050 Hz) lasting
    round(words / 2.25 * 1000) ms plus any <break> time in the document,
    where words counts the document's spoken text.
    """

    codec = "wav-pcm16-mono-22050"

    def __init__(self, known_voices: Iterable[str] = DEFAULT_VOICES):
        self.known_voices = frozenset(known_voices)

    def synthesize(self, ssml: str, voice_id: str) -> SpeechResult:
        if voice_id not in self.known_voices:
            raise VoiceUnknown(f"voice {voice_id!r} not available")
        words, break_ms = ssml_words_and_breaks(ssml)
        if words == 0 and break_ms == 0:
            raise ValueError("synthesize requires spoken text or a break")
        duration_ms = round(words / WORDS_PER_SECOND * 1000) + break_ms
        return SpeechResult(
            audio_bytes=_silence_wav(duration_ms),
            duration_ms=duration_ms,
            codec=self.codec,
        )


# ---------------------------------------------------------------------------
# HTTP providers
# ---------------------------------------------------------------------------


class _HttpBase:
    """JSON-over-POST transport with one retry on transport failure."""

    def __init__(self, base_url: str, timeout_s: float = DEFAULT_TIMEOUT_S,
                 session: Optional[requests.Session] = None):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self.session = session or requests.Session()

    def _post(self, path: str, payload: dict) -> dict:
        url = f"{self.base_url}{path}"
        last_error: Optional[Exception] = None
        for attempt in range(2):
            try:
                response = self.session.post(url, json=payload, timeout=self.timeout_s)
            except requests.RequestException as exc:
                last_error = exc
                if attempt == 0:
                    logger.warning("provider transport failure, retrying: %s", exc)
                continue
            if response.status_code >= 500:
                raise ProviderUnavailable(f"{url} returned {response.status_code}")
            if response.status_code >= 400:
                raise ProviderProtocol(f"{url} rejected request: {response.status_code}")
            try:
                body = response.json()
            except ValueError as exc:
                raise ProviderProtocol(f"{url} returned non-JSON body") from exc
            if not isinstance(body, dict):
                raise ProviderProtocol(f"{url} returned non-object JSON")
            return body
        raise ProviderUnavailable(f"{url} unreachable: {last_error}")

    @staticmethod
    def _field(body: dict, key: str, kind, url_hint: str):
        if key not in body or not isinstance(body[key], kind):
            raise ProviderProtocol(f"{url_hint}: missing or mistyped field {key!r}")
        return body[key]


class HttpSummarizer(_HttpBase):
    def summarize(self, article_body: str) -> tuple[str, float]:
        if not article_body or not article_body.strip():
            raise ValueError("summarize requires a non-empty body")
        body = self._post("/v1/summarize", {"body": article_body})
        summary = self._field(body, "summary", str, "/v1/summarize")
        likelihood = self._field(body, "likelihood", (int, float), "/v1/summarize")
        return summary, float(likelihood)


class HttpQuestionGenerator(_HttpBase):
    def generate_question(self, paragraph: str, interrogative: str) -> str:
        if interrogative not in INTERROGATIVES:
            raise ValueError(f"unknown interrogative {interrogative!r}")
        body = self._post("/v1/question", {
            "paragraph": paragraph,
            "interrogative": interrogative,
        })
        question = self._field(body, "question", str, "/v1/question")
        question, repaired = ensure_question_shape(question, interrogative)
        if repaired:
            logger.warning("question repaired to satisfy first-word constraint: %r", question)
        return question


class HttpQuestionAnswerer(_HttpBase):
    def answer_question(self, paragraph: str, question: str) -> AnswerVerdict:
        body = self._post("/v1/answer", {"paragraph": paragraph, "question": question})
        span_score = float(self._field(body, "span_score", (int, float), "/v1/answer"))
        no_answer_score = float(self._field(body, "no_answer_score", (int, float), "/v1/answer"))
        # The margin rule is enforced locally; the remote has_answer flag
        # is advisory.
        has_answer = span_score > no_answer_score
        span = body.get("span")
        if has_answer:
            if not isinstance(span, str) or not span:
                raise ProviderProtocol("/v1/answer: positive verdict without a span")
            if span not in paragraph:
                raise ProviderProtocol("/v1/answer: span is not a substring of the paragraph")
            return AnswerVerdict(True, span, span_score, no_answer_score)
        return AnswerVerdict(False, None, span_score, no_answer_score)


class HttpSpeechSynthesizer(_HttpBase):
    def synthesize(self, ssml: str, voice_id: str) -> SpeechResult:
        body = self._post("/v1/speech", {"ssml": ssml, "voice": voice_id})
        audio_b64 = self._field(body, "audio_base64", str, "/v1/speech")
        duration_ms = self._field(body, "duration_ms", int, "/v1/speech")
        codec = self._field(body, "codec", str, "/v1/speech")
        if codec not in ("ogg", "wav-pcm16-mono-22050"):
            raise ProviderProtocol(f"/v1/speech: unknown codec {codec!r}")
        if duration_ms <= 0:
            raise ProviderProtocol("/v1/speech: duration_ms must be positive")
        try:
            audio = base64.b64decode(audio_b64, validate=True)
        except (ValueError, TypeError) as exc:
            raise ProviderProtocol("/v1/speech: audio_base64 is not valid base64") from exc
        return SpeechResult(audio_bytes=audio, duration_ms=duration_ms, codec=codec)


# ---------------------------------------------------------------------------
# provider set + batching
# ---------------------------------------------------------------------------


@dataclass
class ProviderSet:
    summarizer: object
    question_generator: object
    question_answerer: object
    speech: object
    parallelism: int = DEFAULT_PARALLELISM


def mock_provider_set(corpus_texts: Optional[Sequence[str]] = None,
                      parallelism: int = DEFAULT_PARALLELISM) -> ProviderSet:
    """All-mock providers; pass the cluster's paragraph texts so question
    generation sees corpus-wide token rarity."""
    return ProviderSet(
        summarizer=MockSummarizer(),
        question_generator=MockQuestionGenerator(corpus_texts),
        question_answerer=MockQuestionAnswerer(),
        speech=MockSpeechSynthesizer(),
        parallelism=parallelism,
    )


def http_provider_set(base_url: str, timeout_s: float = DEFAULT_TIMEOUT_S,
                      parallelism: int = DEFAULT_PARALLELISM) -> ProviderSet:
    return ProviderSet(
        summarizer=HttpSummarizer(base_url, timeout_s),
        question_generator=HttpQuestionGenerator(base_url, timeout_s),
        question_answerer=HttpQuestionAnswerer(base_url, timeout_s),
        speech=HttpSpeechSynthesizer(base_url, timeout_s),
        parallelism=parallelism,
    )


T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Sequence[T],
                 parallelism: int = DEFAULT_PARALLELISM) -> list[R]:
    """Apply fn to every item with a bounded worker pool.

    Results come back in item order regardless of completion order, so
    callers aggregate deterministically.
    """
    if parallelism <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(fn, items))

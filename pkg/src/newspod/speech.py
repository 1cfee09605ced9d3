"""Script-to-audio rendering.

Every sentence of the script becomes its own audio file so the player
can reveal the transcript line by line and resume playback at sentence
granularity. The manifest aligns each sentence with its voice, audio
file, duration, and segment, and is the single source of truth for
playback order.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional
from xml.sax.saxutils import escape

from .assembler import PodcastScript, ScriptUnit
from .errors import ProviderUnavailable, RenderError
from .providers import SpeechResult, parallel_map
from .quotes import QuoteExtract
from .sentences import split_sentences

logger = logging.getLogger(__name__)

DEFAULT_VOICE_MAP = {
    "V1": "en-US-Wavenet-J",
    "V2": "en-US-Wavenet-H",
    "V3": "en-US-Wavenet-D",
}

# SSML pause and emphasis constants. Quotes alternate emphasis between
# the speaker's name, their introduction, and the quote itself; questions
# get a short lead-in silence to mark the speaker change.
QUOTE_BREAK_MS = 300
QUESTION_LEAD_MS = 250

_CODEC_EXT = {"ogg": "ogg", "wav-pcm16-mono-22050": "wav"}


def _speak(inner: str) -> str:
    return f"<speak>{inner}</speak>"


def _break(ms: int) -> str:
    return f'<break time="{ms}ms"/>'


def _emphasis(level: str, text: str) -> str:
    return f'<emphasis level="{level}">{escape(text)}</emphasis>'


def render_ssml(unit: ScriptUnit, quote: Optional[QuoteExtract] = None) -> list[str]:
    """SSML documents for a unit, one per audio line.

    Quote units use the emphasis template (author strong, descriptor
    reduced, body moderate, separated by pauses); a quote unit without
    its QuoteExtract falls back to plain rendering.
    """
    if unit.kind == "silence":
        if not unit.silence_ms or unit.silence_ms <= 0:
            raise ValueError(f"silence unit {unit.unit_id} needs positive silence_ms")
        return [_speak(_break(unit.silence_ms))]

    if not unit.text.strip():
        raise ValueError(f"unit {unit.unit_id} has no text to render")

    if unit.kind == "quote_intro":
        if quote is None or not quote.author:
            logger.warning("quote unit %s without quote structure, rendering plain", unit.unit_id)
        else:
            inner = _emphasis("strong", quote.author) + _break(QUOTE_BREAK_MS)
            if quote.descriptor:
                inner += _emphasis("reduced", quote.descriptor) + _break(QUOTE_BREAK_MS)
            return [_speak(inner)]

    if unit.kind == "quote_body":
        if quote is None:
            logger.warning("quote unit %s without quote structure, rendering plain", unit.unit_id)
        else:
            return [
                _speak(_emphasis("moderate", sentence))
                for sentence in split_sentences(unit.text)
            ]

    if unit.kind == "question":
        return [
            _speak(_break(QUESTION_LEAD_MS) + escape(sentence))
            for sentence in split_sentences(unit.text)
        ]

    return [_speak(escape(sentence)) for sentence in split_sentences(unit.text)]


def unit_line_texts(unit: ScriptUnit) -> list[str]:
    """Transcript text per audio line; silence lines have empty text."""
    if unit.kind == "silence":
        return [""]
    if unit.kind == "quote_body":
        return split_sentences(unit.text)
    if unit.kind == "quote_intro":
        return [unit.text]
    return split_sentences(unit.text)


@dataclass(frozen=True)
class ScriptLine:
    line_id: str
    unit_id: str
    segment_id: str
    sentence_index: int
    text: str
    voice_id: str
    ssml: str
    audio_ref: str
    duration_ms: int


@dataclass(frozen=True)
class PodcastManifest:
    podcast_id: str
    lines: tuple[ScriptLine, ...]
    segment_offsets: tuple[tuple[str, int, int], ...]  # (segment_id, line index, start ms)
    total_duration_ms: int


def render_podcast(script: PodcastScript, tts, out_dir: Path | str,
                   voice_map: Optional[dict[str, str]] = None,
                   parallelism: int = 8) -> PodcastManifest:
    """Synthesize every sentence and write the audio plus manifest.

    One synthesize call per line, fanned out under the parallelism
    bound and joined in script order. Each line is retried once; a
    second failure aborts the render naming the line.
    """
    voices = dict(DEFAULT_VOICE_MAP)
    if voice_map:
        voices.update(voice_map)

    out_dir = Path(out_dir)
    audio_dir = out_dir / script.podcast_id
    audio_dir.mkdir(parents=True, exist_ok=True)

    specs = []  # (line_id, unit, segment_id, sentence_index, text, voice_id, ssml)
    for segment_id, unit, quote in script.play_units():
        ssml_docs = render_ssml(unit, quote)
        texts = unit_line_texts(unit)
        if len(texts) != len(ssml_docs):
            # Quote intros collapse author and descriptor into one line.
            texts = texts[:len(ssml_docs)] + [""] * (len(ssml_docs) - len(texts))
        voice_id = voices["V1"] if unit.voice_role == "none" else voices[unit.voice_role]
        for sentence_index, (text, ssml) in enumerate(zip(texts, ssml_docs)):
            line_id = f"{unit.unit_id}-s{sentence_index}"
            specs.append((line_id, segment_id, unit.unit_id, sentence_index, text, voice_id, ssml))

    def synthesize(spec) -> SpeechResult:
        line_id, _, _, _, _, voice_id, ssml = spec
        try:
            return tts.synthesize(ssml, voice_id)
        except ProviderUnavailable as exc:
            logger.warning("synthesis retry for line %s: %s", line_id, exc)
        try:
            return tts.synthesize(ssml, voice_id)
        except ProviderUnavailable as exc:
            raise RenderError(f"synthesis failed for line {line_id}: {exc}") from exc

    results = parallel_map(synthesize, specs, parallelism)

    lines = []
    for (line_id, segment_id, unit_id, sentence_index, text, voice_id, ssml), result in zip(specs, results):
        ext = _CODEC_EXT.get(result.codec, "bin")
        audio_ref = f"{script.podcast_id}/{line_id}.{ext}"
        (out_dir / audio_ref).write_bytes(result.audio_bytes)
        lines.append(ScriptLine(
            line_id=line_id,
            unit_id=unit_id,
            segment_id=segment_id,
            sentence_index=sentence_index,
            text=text,
            voice_id=voice_id,
            ssml=ssml,
            audio_ref=audio_ref,
            duration_ms=result.duration_ms,
        ))

    segment_offsets = []
    seen_segments = set()
    cumulative = 0
    for index, line in enumerate(lines):
        if line.segment_id not in seen_segments:
            seen_segments.add(line.segment_id)
            segment_offsets.append((line.segment_id, index, cumulative))
        cumulative += line.duration_ms

    return PodcastManifest(
        podcast_id=script.podcast_id,
        lines=tuple(lines),
        segment_offsets=tuple(segment_offsets),
        total_duration_ms=cumulative,
    )


def render_extra_lines(texts: list[str], unit_id: str, segment_id: str,
                       podcast_id: str, tts, out_dir: Path | str,
                       voice_map: Optional[dict[str, str]] = None) -> list[ScriptLine]:
    """Render ad-hoc Voice 1 lines (live Q&A replies) outside a script.

    Files land next to the podcast's audio; line ids are derived from
    unit_id so they never collide with scripted lines.
    """
    voices = dict(DEFAULT_VOICE_MAP)
    if voice_map:
        voices.update(voice_map)
    out_dir = Path(out_dir)
    (out_dir / podcast_id).mkdir(parents=True, exist_ok=True)

    lines = []
    sentence_index = 0
    for text in texts:
        for sentence in split_sentences(text):
            ssml = _speak(escape(sentence))
            try:
                result = tts.synthesize(ssml, voices["V1"])
            except ProviderUnavailable:
                result = tts.synthesize(ssml, voices["V1"])
            line_id = f"{unit_id}-s{sentence_index}"
            ext = _CODEC_EXT.get(result.codec, "bin")
            audio_ref = f"{podcast_id}/{line_id}.{ext}"
            (out_dir / audio_ref).write_bytes(result.audio_bytes)
            lines.append(ScriptLine(
                line_id=line_id,
                unit_id=unit_id,
                segment_id=segment_id,
                sentence_index=sentence_index,
                text=sentence,
                voice_id=voices["V1"],
                ssml=ssml,
                audio_ref=audio_ref,
                duration_ms=result.duration_ms,
            ))
            sentence_index += 1
    return lines


def validate_manifest(manifest: PodcastManifest) -> list[str]:
    """Internal-consistency check; returns problems, empty when valid."""
    problems = []
    if sum(line.duration_ms for line in manifest.lines) != manifest.total_duration_ms:
        problems.append("total_duration_ms does not equal the sum of line durations")

    starts = [offset for _, _, offset in manifest.segment_offsets]
    if any(b <= a for a, b in zip(starts, starts[1:])):
        problems.append("segment offsets are not strictly increasing")

    indices = [index for _, index, _ in manifest.segment_offsets]
    if any(b <= a for a, b in zip(indices, indices[1:])):
        problems.append("segment line indices are not strictly increasing")

    cumulative = 0
    by_index = {index: (segment_id, start) for segment_id, index, start in manifest.segment_offsets}
    for index, line in enumerate(manifest.lines):
        if index in by_index:
            segment_id, start = by_index[index]
            if segment_id != line.segment_id:
                problems.append(f"offset at line {index} names the wrong segment")
            if start != cumulative:
                problems.append(f"offset at line {index} has start {start}, expected {cumulative}")
        if line.duration_ms <= 0:
            problems.append(f"line {line.line_id} has non-positive duration")
        cumulative += line.duration_ms

    manifest_segments = [segment_id for segment_id, _, _ in manifest.segment_offsets]
    line_segments = []
    for line in manifest.lines:
        if not line_segments or line_segments[-1] != line.segment_id:
            line_segments.append(line.segment_id)
    if manifest_segments != line_segments:
        problems.append("segment offsets do not cover the line segments in order")
    return problems


def segment_duration_ms(manifest: PodcastManifest, segment_id: str) -> int:
    return sum(line.duration_ms for line in manifest.lines if line.segment_id == segment_id)


# ---------------------------------------------------------------------------
# manifest JSON schema
# ---------------------------------------------------------------------------


def line_to_dict(line: ScriptLine) -> dict:
    return {
        "line_id": line.line_id,
        "unit_id": line.unit_id,
        "segment_id": line.segment_id,
        "sentence_index": line.sentence_index,
        "text": line.text,
        "voice_id": line.voice_id,
        "ssml": line.ssml,
        "audio_ref": line.audio_ref,
        "duration_ms": line.duration_ms,
    }


def line_from_dict(data: dict) -> ScriptLine:
    return ScriptLine(**data)


def manifest_to_dict(manifest: PodcastManifest) -> dict:
    return {
        "podcast_id": manifest.podcast_id,
        "lines": [line_to_dict(line) for line in manifest.lines],
        "segment_offsets": [
            {"segment_id": segment_id, "first_line_index": index, "start_ms": start}
            for segment_id, index, start in manifest.segment_offsets
        ],
        "total_duration_ms": manifest.total_duration_ms,
    }


def manifest_from_dict(data: dict) -> PodcastManifest:
    return PodcastManifest(
        podcast_id=data["podcast_id"],
        lines=tuple(line_from_dict(line) for line in data["lines"]),
        segment_offsets=tuple(
            (entry["segment_id"], entry["first_line_index"], entry["start_ms"])
            for entry in data["segment_offsets"]
        ),
        total_duration_ms=data["total_duration_ms"],
    )


def manifest_to_json(manifest: PodcastManifest) -> str:
    return json.dumps(manifest_to_dict(manifest), indent=2, ensure_ascii=False)

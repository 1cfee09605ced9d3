"""HTTP API for story listing, podcast generation, playback data, live
questions, and interaction-event logging."""

import logging
import threading
from typing import Optional

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel, Field

from .assembler import CONDITIONS
from .config import EngineConfig
from .engine import EVENT_KINDS, Engine, derive_podcast_id
from .errors import (
    BudgetTooSmall,
    Busy,
    LineUnknown,
    NewsPodError,
    ProviderUnavailable,
    ReferenceUnavailable,
    SchemaError,
)
from .liveqa import ListenerQuestion, answer_listener_question, reply_to_dict
from .speech import manifest_to_dict, validate_manifest

logger = logging.getLogger(__name__)

_MEDIA_TYPES = {"wav": "audio/wav", "ogg": "audio/ogg"}


class PodcastRequest(BaseModel):
    story_ids: list[str] = Field(min_length=1)
    duration_s: int = Field(gt=0)
    condition: str = "qa_best"
    with_breaks: bool = False
    seed: int = 0


class QuestionRequest(BaseModel):
    segment_id: str
    text: str
    at_line: str
    origin: str = "typed"


class EventRequest(BaseModel):
    kind: str
    at_line: str = ""


class _Session:
    """Per-podcast serialization: event appends lock, one question at a time."""

    def __init__(self):
        self.event_lock = threading.Lock()
        self.question_lock = threading.Lock()


class SessionRegistry:
    def __init__(self):
        self._sessions: dict[str, _Session] = {}
        self._lock = threading.Lock()

    def get(self, podcast_id: str) -> _Session:
        with self._lock:
            if podcast_id not in self._sessions:
                self._sessions[podcast_id] = _Session()
            return self._sessions[podcast_id]


def create_app(config: Optional[EngineConfig] = None) -> FastAPI:
    engine = Engine(config)
    sessions = SessionRegistry()
    app = FastAPI(title="newspod", version="0.1.0")
    app.state.engine = engine

    # The webplayer is served separately during development; the API is a
    # loopback research service, so permissive CORS is acceptable.
    from fastapi.middleware.cors import CORSMiddleware
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    def _manifest_or_404(podcast_id: str):
        try:
            return engine.load_manifest(podcast_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown podcast {podcast_id!r}")

    @app.get("/v1/stories")
    def list_stories():
        return engine.store.list_stories()

    @app.post("/v1/podcasts", status_code=201)
    def create_podcast(request: PodcastRequest):
        if request.condition not in CONDITIONS:
            raise HTTPException(status_code=400, detail=f"unknown condition {request.condition!r}")
        for story_id in request.story_ids:
            if not engine.store.exists(story_id):
                raise HTTPException(status_code=404, detail=f"unknown story {story_id!r}")
        podcast_id = derive_podcast_id(
            request.story_ids, request.duration_s, request.condition,
            request.with_breaks, request.seed,
        )
        if not engine.podcast_exists(podcast_id):
            try:
                engine.generate(
                    request.story_ids, request.duration_s, request.condition,
                    request.with_breaks, request.seed, podcast_id=podcast_id,
                )
            except (BudgetTooSmall, SchemaError, ValueError) as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            except ReferenceUnavailable as exc:
                raise HTTPException(status_code=404, detail=str(exc))
            except ProviderUnavailable as exc:
                raise HTTPException(status_code=502, detail=str(exc))
        return {"podcast_id": podcast_id}

    @app.get("/v1/podcasts/{podcast_id}/manifest")
    def get_manifest(podcast_id: str):
        manifest = _manifest_or_404(podcast_id)
        problems = validate_manifest(manifest)
        if problems:
            raise HTTPException(status_code=500, detail=f"inconsistent manifest: {problems}")
        return manifest_to_dict(manifest)

    @app.get("/v1/podcasts/{podcast_id}/script")
    def get_script(podcast_id: str):
        # The player needs unit voice roles and the per-segment
        # recommended questions, which live in the script, not the manifest.
        try:
            script = engine.load_script(podcast_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown podcast {podcast_id!r}")
        from .assembler import script_to_dict
        return script_to_dict(script)

    @app.get("/v1/podcasts/{podcast_id}/audio/{line_id}")
    def get_audio(podcast_id: str, line_id: str):
        manifest = _manifest_or_404(podcast_id)
        audio_ref = None
        for line in manifest.lines:
            if line.line_id == line_id:
                audio_ref = line.audio_ref
                break
        if audio_ref is None:
            for entry in engine.read_extension_lines(podcast_id):
                if entry["line_id"] == line_id:
                    audio_ref = entry["audio_ref"]
                    break
        if audio_ref is None:
            raise HTTPException(status_code=404, detail=f"unknown line {line_id!r}")
        path = engine.audio_dir() / audio_ref
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"audio missing for line {line_id!r}")
        media_type = _MEDIA_TYPES.get(path.suffix.lstrip("."), "application/octet-stream")
        return Response(content=path.read_bytes(), media_type=media_type)

    @app.post("/v1/podcasts/{podcast_id}/questions")
    def ask_question(podcast_id: str, request: QuestionRequest):
        manifest = _manifest_or_404(podcast_id)
        script = engine.load_script(podcast_id)
        segment = next((s for s in script.segments if s.segment_id == request.segment_id), None)
        if segment is None:
            raise HTTPException(status_code=404, detail=f"unknown segment {request.segment_id!r}")
        if not request.text.strip():
            raise HTTPException(status_code=400, detail="question text must be non-empty")

        session = sessions.get(podcast_id)
        if not session.question_lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="a question is already being processed")
        try:
            cluster = engine.store.load(segment.story_id)
            question_number = sum(
                1 for event in engine.read_events(podcast_id) if event["kind"] == "question_asked"
            )
            question = ListenerQuestion(
                question_id=f"{podcast_id}-q{question_number}",
                podcast_id=podcast_id,
                segment_id=request.segment_id,
                text=request.text,
                asked_at_line=request.at_line,
                origin=request.origin,
            )
            try:
                reply = answer_listener_question(
                    question, cluster,
                    engine.question_answerer_for(cluster),
                    manifest, engine.tts(), engine.audio_dir(),
                    margin=engine.config.confidence_margin,
                    voice_map=engine.config.voices,
                    parallelism=engine.config.parallelism,
                )
            except LineUnknown as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            reply_dict = reply_to_dict(reply)
            engine.append_extension_lines(podcast_id, reply_dict["reply_lines"])
            with session.event_lock:
                engine.append_event(podcast_id, "question_asked", request.at_line)
            return reply_dict
        finally:
            session.question_lock.release()

    @app.post("/v1/podcasts/{podcast_id}/events", status_code=204)
    def post_event(podcast_id: str, request: EventRequest):
        if request.kind not in EVENT_KINDS:
            raise HTTPException(status_code=400, detail=f"unknown event kind {request.kind!r}")
        session = sessions.get(podcast_id)
        try:
            with session.event_lock:
                engine.append_event(podcast_id, request.kind, request.at_line)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown podcast {podcast_id!r}")
        return Response(status_code=204)

    @app.get("/v1/podcasts/{podcast_id}/events")
    def get_events(podcast_id: str):
        try:
            return engine.read_events(podcast_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown podcast {podcast_id!r}")

    @app.exception_handler(NewsPodError)
    def newspod_error_handler(request, exc: NewsPodError):
        status = 409 if isinstance(exc, Busy) else 500
        logger.error("unhandled engine error: %s", exc)
        return Response(content=str(exc), status_code=status)

    return app

"""End-to-end podcast generation wired to a data directory.

This is the piece the HTTP API and the CLI share: load stories, build
segments under the word budget, assemble the podcast, render the audio,
and persist script, manifest, and event log to disk so the service is
stateless across restarts.
"""

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .assembler import (
    PodcastScript,
    assemble_podcast,
    build_segment,
    script_from_dict,
    script_to_dict,
    word_budget,
)
from .config import EngineConfig
from .corpus import StoryCluster, StoryStore
from .providers import (
    MockSpeechSynthesizer,
    ProviderSet,
    http_provider_set,
    mock_provider_set,
)
from .speech import (
    PodcastManifest,
    manifest_from_dict,
    manifest_to_dict,
    render_podcast,
    validate_manifest,
)

EVENT_KINDS = (
    "play", "pause", "skip", "seek", "transcript_open", "transcript_close",
    "question_asked",
)


def derive_podcast_id(story_ids, duration_s, condition, with_breaks, seed) -> str:
    payload = json.dumps(
        [list(story_ids), duration_s, condition, with_breaks, seed],
        separators=(",", ":"),
    )
    return "pc-" + hashlib.sha256(payload.encode()).hexdigest()[:12]


@dataclass
class GeneratedPodcast:
    script: PodcastScript
    manifest: PodcastManifest


class Engine:
    def __init__(self, config: Optional[EngineConfig] = None):
        self.config = config or EngineConfig()
        self.store = StoryStore(self.config.stories_dir)
        self.config.podcasts_dir.mkdir(parents=True, exist_ok=True)

    # -- providers ---------------------------------------------------------

    def providers_for(self, cluster: StoryCluster) -> ProviderSet:
        if self.config.provider_url:
            return http_provider_set(self.config.provider_url,
                                     parallelism=self.config.parallelism)
        providers = mock_provider_set(
            corpus_texts=[p.text for p in cluster.paragraphs],
            parallelism=self.config.parallelism,
        )
        providers.speech = self._mock_tts()
        return providers

    def _mock_tts(self):
        known = set(self.config.voices.values()) | set(MockSpeechSynthesizer().known_voices)
        tts = MockSpeechSynthesizer(known_voices=known)
        return tts

    def tts(self):
        if self.config.provider_url:
            return http_provider_set(self.config.provider_url).speech
        return self._mock_tts()

    def question_answerer_for(self, cluster: StoryCluster):
        return self.providers_for(cluster).question_answerer

    # -- generation --------------------------------------------------------

    def generate(self, story_ids, duration_s: int, condition: str,
                 with_breaks: bool, seed: int = 0,
                 podcast_id: Optional[str] = None) -> GeneratedPodcast:
        clusters = [self.store.load(story_id) for story_id in story_ids]
        budget = word_budget(duration_s, len(clusters))

        segments = []
        for cluster in clusters:
            segment = build_segment(
                cluster, condition, budget, seed,
                self.providers_for(cluster),
                reference_dir=self.config.reference_dir,
            )
            segments.append(segment)

        if podcast_id is None:
            podcast_id = derive_podcast_id(story_ids, duration_s, condition, with_breaks, seed)
        script = assemble_podcast(segments, duration_s, with_breaks, podcast_id=podcast_id)
        manifest = render_podcast(
            script, self.tts(), self.audio_dir(),
            voice_map=self.config.voices,
            parallelism=self.config.parallelism,
        )
        problems = validate_manifest(manifest)
        if problems:
            raise AssertionError(f"generated manifest is inconsistent: {problems}")

        self._persist(script, manifest)
        return GeneratedPodcast(script=script, manifest=manifest)

    # -- persistence -------------------------------------------------------

    def audio_dir(self) -> Path:
        return self.config.podcasts_dir / "audio"

    def podcast_dir(self, podcast_id: str) -> Path:
        return self.config.podcasts_dir / podcast_id

    def _persist(self, script: PodcastScript, manifest: PodcastManifest) -> None:
        directory = self.podcast_dir(script.podcast_id)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "script.json").write_text(
            json.dumps(script_to_dict(script), indent=2, ensure_ascii=False),
            encoding="utf-8",
        )
        (directory / "manifest.json").write_text(
            json.dumps(manifest_to_dict(manifest), indent=2, ensure_ascii=False),
            encoding="utf-8",
        )
        events = directory / "events.jsonl"
        if not events.exists():
            events.touch()

    def podcast_exists(self, podcast_id: str) -> bool:
        return (self.podcast_dir(podcast_id) / "manifest.json").exists()

    def load_script(self, podcast_id: str) -> PodcastScript:
        path = self.podcast_dir(podcast_id) / "script.json"
        if not path.exists():
            raise KeyError(podcast_id)
        return script_from_dict(json.loads(path.read_text(encoding="utf-8")))

    def load_manifest(self, podcast_id: str) -> PodcastManifest:
        path = self.podcast_dir(podcast_id) / "manifest.json"
        if not path.exists():
            raise KeyError(podcast_id)
        return manifest_from_dict(json.loads(path.read_text(encoding="utf-8")))

    # -- events ------------------------------------------------------------

    def append_event(self, podcast_id: str, kind: str, at_line: str) -> dict:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        if not self.podcast_exists(podcast_id):
            raise KeyError(podcast_id)
        event = {
            "podcast_id": podcast_id,
            "kind": kind,
            "at_line": at_line,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        path = self.podcast_dir(podcast_id) / "events.jsonl"
        with path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(event) + "\n")
        return event

    def read_events(self, podcast_id: str) -> list[dict]:
        if not self.podcast_exists(podcast_id):
            raise KeyError(podcast_id)
        path = self.podcast_dir(podcast_id) / "events.jsonl"
        if not path.exists():
            return []
        return [
            json.loads(line)
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]

    # -- live question extension lines --------------------------------------

    def append_extension_lines(self, podcast_id: str, lines: list[dict]) -> None:
        path = self.podcast_dir(podcast_id) / "extension.json"
        existing = []
        if path.exists():
            existing = json.loads(path.read_text(encoding="utf-8"))
        existing.extend(lines)
        path.write_text(json.dumps(existing, indent=2, ensure_ascii=False), encoding="utf-8")

    def read_extension_lines(self, podcast_id: str) -> list[dict]:
        path = self.podcast_dir(podcast_id) / "extension.json"
        if not path.exists():
            return []
        return json.loads(path.read_text(encoding="utf-8"))

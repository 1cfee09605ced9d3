"""Engine configuration, from flags or NEWSPOD_* environment variables."""

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .liveqa import DEFAULT_CONFIDENCE_MARGIN
from .providers import DEFAULT_PARALLELISM, WORDS_PER_SECOND
from .speech import DEFAULT_VOICE_MAP


@dataclass
class EngineConfig:
    data_dir: Path = Path("data")
    provider_url: Optional[str] = None  # None -> built-in mock providers
    confidence_margin: float = DEFAULT_CONFIDENCE_MARGIN
    words_per_second: float = WORDS_PER_SECOND
    parallelism: int = DEFAULT_PARALLELISM
    voices: dict = field(default_factory=lambda: dict(DEFAULT_VOICE_MAP))
    reference_dir: Optional[Path] = None

    @classmethod
    def from_env(cls, **overrides) -> "EngineConfig":
        config = cls()
        if os.environ.get("NEWSPOD_DATA_DIR"):
            config.data_dir = Path(os.environ["NEWSPOD_DATA_DIR"])
        if os.environ.get("NEWSPOD_PROVIDER_URL"):
            config.provider_url = os.environ["NEWSPOD_PROVIDER_URL"]
        if os.environ.get("NEWSPOD_CONFIDENCE_MARGIN"):
            config.confidence_margin = float(os.environ["NEWSPOD_CONFIDENCE_MARGIN"])
        if os.environ.get("NEWSPOD_WPS"):
            config.words_per_second = float(os.environ["NEWSPOD_WPS"])
        if os.environ.get("NEWSPOD_PARALLELISM"):
            config.parallelism = int(os.environ["NEWSPOD_PARALLELISM"])
        if os.environ.get("NEWSPOD_REFERENCE_DIR"):
            config.reference_dir = Path(os.environ["NEWSPOD_REFERENCE_DIR"])
        for voice_role in ("V1", "V2", "V3"):
            env_key = f"NEWSPOD_VOICE_{voice_role}"
            if os.environ.get(env_key):
                config.voices[voice_role] = os.environ[env_key]
        for key, value in overrides.items():
            if value is not None:
                setattr(config, key, value)
        return config

    @property
    def stories_dir(self) -> Path:
        return self.data_dir / "stories"

    @property
    def podcasts_dir(self) -> Path:
        return self.data_dir / "podcasts"

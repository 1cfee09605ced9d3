"""Shared exception hierarchy.

Every module raises subclasses of NewsPodError so the CLI and server can
map failures to exit code 1 / HTTP error responses in one place.
"""


class NewsPodError(Exception):
    """Base class for all engine errors."""


class SchemaError(NewsPodError):
    """Input document failed validation. Message names the offending field."""

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class SummaryUnavailable(NewsPodError):
    """No human summary exists and the summarizer produced no candidates."""


class ProviderUnavailable(NewsPodError):
    """Transport failure or timeout talking to a model provider."""


class ProviderProtocol(NewsPodError):
    """Provider answered, but the response violates the wire contract."""


class VoiceUnknown(NewsPodError):
    """Speech synthesis was asked for a voice the provider does not have."""


class GenerationFailed(NewsPodError):
    """Question generation failed for every paragraph of a cluster."""


class GraphIncomplete(NewsPodError):
    """Too many answer verdicts failed while building the Q&A graph."""


class BudgetTooSmall(NewsPodError):
    """Requested podcast duration cannot fit the requested segment count."""


class ReferenceUnavailable(NewsPodError):
    """No hand-written reference script exists for the requested story."""


class RenderError(NewsPodError):
    """Audio rendering failed; message identifies the failing line."""


class LineUnknown(NewsPodError):
    """A line id does not belong to the manifest being queried."""


class Busy(NewsPodError):
    """A live question is already being processed for this session."""

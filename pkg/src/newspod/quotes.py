"""Direct-quotation handling.

Quote paragraphs are excluded from Q&A material and processed on their
own track: detect them, pull out (author, speaker description, quote
text) with attribution patterns, and pick one quote to close a segment
with, favoring the speaker mentioned most across the source articles.
"""

import re
from dataclasses import dataclass
from typing import Optional, Sequence

# A quoted span only counts as a direct quotation when it holds at least
# this many words; shorter spans are scare quotes ("burqa ban").
MIN_QUOTE_WORDS = 5

_DOUBLE_SPAN = re.compile(r'"([^"]+)"')
_CURLY_SPAN = re.compile(r"“([^”]+)”")
# Single-quote spans must be whitespace-delimited so apostrophes inside
# words (won't, Autopilot's) never open a span.
_SINGLE_SPAN = re.compile(r"(?:(?<=\s)|^)'([^']+)'(?=$|[\s.,;:!?])")

_SPAN_PATTERNS = (_DOUBLE_SPAN, _CURLY_SPAN, _SINGLE_SPAN)

_NAME = r"[A-Z][\w.\-']*(?:\s+[A-Z][\w.\-']*){0,3}"
_VERB = r"(?:said|says|told)"
_Q = r"[“\"]([^”\"]+)[”\"]"

# Attribution shapes, tried in order. Descriptor is the free text between
# commas next to the name; the trailing verb-before-name form is a
# fallback for attributions without any descriptor.
_ATTRIBUTIONS = (
    # "Q," said NAME, DESC
    re.compile(_Q + r"\s+" + _VERB + r"\s+(" + _NAME + r")\s*,\s*([^.\"“]+?)\s*(?=\.|$)"),
    # "Q," NAME, DESC, said|told ...
    re.compile(_Q + r"\s+(" + _NAME + r")\s*,\s*([^,\"“]+?)\s*,\s*" + _VERB + r"\b"),
    # NAME, DESC, said: "Q"
    re.compile(r"(" + _NAME + r")\s*,\s*([^,\"“]+?)\s*,\s*" + _VERB + r":?\s+" + _Q),
    # "Q," NAME said
    re.compile(_Q + r"\s+(" + _NAME + r")\s+" + _VERB + r"\b"),
    # "Q," said NAME
    re.compile(_Q + r"\s+" + _VERB + r"\s+(" + _NAME + r")\b"),
)

# Which groups hold (quote, author, descriptor) for each pattern above.
_GROUP_ORDER = (
    ("quote", "author", "descriptor"),
    ("quote", "author", "descriptor"),
    ("author", "descriptor", "quote"),
    ("quote", "author", None),
    ("quote", "author", None),
)


@dataclass(frozen=True)
class QuoteExtract:
    author: str
    descriptor: Optional[str]
    quote_text: str
    source_paragraph_id: str = ""


def quoted_spans(paragraph_text: str) -> list[str]:
    """All quotation-mark-delimited spans in the paragraph."""
    spans = []
    for pattern in _SPAN_PATTERNS:
        spans.extend(m.group(1) for m in pattern.finditer(paragraph_text))
    return spans


def detect_quote(paragraph_text: str) -> bool:
    """True iff the paragraph contains a quoted span of MIN_QUOTE_WORDS or more."""
    return any(len(span.split()) >= MIN_QUOTE_WORDS for span in quoted_spans(paragraph_text))


def extract_quote(paragraph_text: str, source_paragraph_id: str = "") -> Optional[QuoteExtract]:
    """Pull (author, descriptor, quote) from an attribution pattern.

    Returns None when no pattern matches; that is the no-match signal,
    not an error.
    """
    for pattern, order in zip(_ATTRIBUTIONS, _GROUP_ORDER):
        match = pattern.search(paragraph_text)
        if not match:
            continue
        parts = dict(zip(order, match.groups()))
        quote_text = (parts.get("quote") or "").strip()
        author = (parts.get("author") or "").strip()
        descriptor = parts.get("descriptor")
        if descriptor is not None:
            descriptor = descriptor.strip() or None
        if not quote_text or not author:
            continue
        return QuoteExtract(
            author=author,
            descriptor=descriptor,
            quote_text=quote_text,
            source_paragraph_id=source_paragraph_id,
        )
    return None


def speaker_mentions(author: str, article_bodies: Sequence[str]) -> int:
    """Occurrences of the author's final name token across all bodies.

    Counting the surname keeps "Mr. Musk" and "Musk" equivalent.
    """
    tokens = author.split()
    if not tokens:
        return 0
    surname = re.escape(tokens[-1].strip(".,"))
    pattern = re.compile(r"\b" + surname + r"\b", re.IGNORECASE)
    return sum(len(pattern.findall(body)) for body in article_bodies)


def pick_segment_quote(
    extracts: Sequence[QuoteExtract],
    article_bodies: Sequence[str],
) -> Optional[QuoteExtract]:
    """Pick the quote whose speaker is mentioned most across the cluster.

    Ties go to the longest quote text, then to input order. Empty input
    yields None and the segment is built without a quote unit.
    """
    if not extracts:
        return None
    best = None
    best_key = None
    for position, extract in enumerate(extracts):
        mentions = speaker_mentions(extract.author, article_bodies)
        key = (-mentions, -len(extract.quote_text), position)
        if best_key is None or key < best_key:
            best = extract
            best_key = key
    return best

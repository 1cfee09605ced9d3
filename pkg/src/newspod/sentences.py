"""Rule-based sentence splitting with an abbreviation guard.

Scripts are voiced one sentence at a time, so everything downstream
(summary length checks, per-sentence audio, transcript sync) shares this
single splitter.
"""

import re

# Tokens that end with '.' but do not end a sentence.
ABBREVIATIONS = frozenset({
    "Mr.", "Mrs.", "Dr.", "U.S.", "U.K.", "St.", "No.", "vs.",
})

# A boundary is sentence-final punctuation followed by whitespace and an
# upper-case letter, a digit, or an opening quote mark.
_BOUNDARY = re.compile(r'[.?!]+(?=\s+["“‘\']?[A-Z0-9])')


def split_sentences(text: str) -> list[str]:
    """Split text into sentences, never returning empty strings."""
    if not text or not text.strip():
        return []

    sentences = []
    start = 0
    for match in _BOUNDARY.finditer(text):
        end = match.end()
        candidate = text[start:end].strip()
        if not candidate:
            start = end
            continue
        last_token = candidate.split()[-1]
        if last_token in ABBREVIATIONS:
            continue
        sentences.append(candidate)
        start = end

    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def count_words(text: str) -> int:
    """Word count used everywhere: whitespace tokenization."""
    return len(text.split())

"""Tokenization for markup anchoring.

English-style text splits into word and punctuation tokens; Chinese text
tokenizes per character.  Every token keeps its character offsets so the UI
can map token spans back to the raw string.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

_EN_TOKEN = re.compile(r"\w+|[^\w\s]", re.UNICODE)


@dataclass(frozen=True)
class Token:
    text: str
    start: int  # character offset, inclusive
    end: int    # character offset, exclusive


def tokenize(text: str, language: str = "en") -> tuple[Token, ...]:
    if language == "zh":
        return tuple(
            Token(text=ch, start=i, end=i + 1)
            for i, ch in enumerate(text)
            if not ch.isspace()
        )
    return tuple(
        Token(text=m.group(0), start=m.start(), end=m.end())
        for m in _EN_TOKEN.finditer(text)
    )


def span_text(text: str, tokens: tuple[Token, ...], start: int, end: int) -> str:
    """Raw text covered by the inclusive token span [start, end]."""
    return text[tokens[start].start:tokens[end].end]

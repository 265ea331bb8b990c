"""Per-project knowledge base distilled from accepted annotations.

Accepted markups feed a staging tally; a (surface, label) fact that reaches
the frequency threshold is promoted to an entry.  Entries matching the text
under annotation are rendered into a "Note: ..." prefix that a later
auto-label call prepends to its first prompt, which is how human decisions
reach the machine.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

from .markup import AnnotatedDocument, Markup

ENTITY_FACT = "entity-fact"
RELATION_FACT = "relation-fact"

# Minimal per-language noise filters; single-character surfaces are always
# excluded, which covers most Chinese function words.
_STOPLISTS = {
    "en": frozenset(
        "the a an and or of in on at to is was are were be been it he she they "
        "we you i this that these those with for as by from not but his her its "
        "their our your".split()
    ),
    "zh": frozenset(["我们", "你们", "他们", "她们", "它们", "这个", "那个", "什么", "一个", "没有"]),
}


def informative(surface: str, language: str = "en") -> bool:
    text = surface.strip()
    if len(text) <= 1:
        return False
    return text.lower() not in _STOPLISTS.get(language, frozenset())


@dataclass
class KnowledgeEntry:
    kind: str                   # ENTITY_FACT or RELATION_FACT
    surfaces: tuple[str, ...]   # case-preserved; (entity,) or (subject, object)
    label: str
    count: int
    last_seen: float

    def key(self) -> tuple:
        return (self.kind, tuple(s.lower() for s in self.surfaces), self.label)

    def render(self) -> str:
        if self.kind == ENTITY_FACT:
            return f"the type of {self.surfaces[0]} is {self.label};"
        return f"the relation between {self.surfaces[0]} and {self.surfaces[1]} is {self.label};"


@dataclass
class _Tally:
    surfaces: tuple[str, ...]
    count: int
    last_seen: float


class KnowledgeBase:
    """Tally-and-promote store over accepted annotation facts."""

    def __init__(
        self,
        project_id: str = "",
        threshold: int = 2,
        language: str = "en",
        prefix_budget: int = 512,
        clock: Callable[[], float] = time.time,
    ):
        if threshold < 1:
            raise ValueError("threshold must be at least 1")
        self.project_id = project_id
        self.threshold = threshold
        self.language = language
        self.prefix_budget = prefix_budget
        self._clock = clock
        self._tallies: dict[tuple, _Tally] = {}
        self._entries: dict[tuple, KnowledgeEntry] = {}

    # -- ingest ------------------------------------------------------------

    def observe_accept(self, kind: str, surfaces: tuple[str, ...], label: str) -> bool:
        """Count one newly accepted fact; returns False for uninformative surfaces."""
        if kind not in (ENTITY_FACT, RELATION_FACT):
            raise ValueError(f"unknown fact kind {kind!r}")
        if not all(informative(s, self.language) for s in surfaces):
            return False
        now = self._clock()
        key = (kind, tuple(s.lower() for s in surfaces), label)
        entry = self._entries.get(key)
        if entry is not None:
            entry.count += 1
            entry.last_seen = now
            return True
        tally = self._tallies.get(key)
        if tally is None:
            tally = _Tally(surfaces=tuple(surfaces), count=0, last_seen=now)
            self._tallies[key] = tally
        tally.count += 1
        tally.last_seen = now
        if tally.count >= self.threshold:
            del self._tallies[key]
            self._entries[key] = KnowledgeEntry(
                kind=kind, surfaces=tally.surfaces, label=label,
                count=tally.count, last_seen=now,
            )
        return True

    def observe_remove(self, kind: str, surfaces: tuple[str, ...], label: str) -> bool:
        """Undo one accepted fact (the markup was deleted)."""
        if not all(informative(s, self.language) for s in surfaces):
            return False
        key = (kind, tuple(s.lower() for s in surfaces), label)
        entry = self._entries.get(key)
        if entry is not None:
            entry.count -= 1
            if entry.count < self.threshold:
                del self._entries[key]
                if entry.count > 0:
                    self._tallies[key] = _Tally(
                        surfaces=entry.surfaces, count=entry.count, last_seen=entry.last_seen)
            return True
        tally = self._tallies.get(key)
        if tally is not None:
            tally.count -= 1
            if tally.count <= 0:
                del self._tallies[key]
            return True
        return False

    # -- reads ---------------------------------------------------------------

    def entries(self) -> list[KnowledgeEntry]:
        return list(self._entries.values())

    def live_counts(self) -> dict[tuple, int]:
        """Tally + entry counts per fact key; equals a rescan of accepted markups."""
        result = {key: tally.count for key, tally in self._tallies.items()}
        result.update({key: entry.count for key, entry in self._entries.items()})
        return result

    def generate_prefix(self, text: str, budget: Optional[int] = None) -> str:
        """Render the matching entries into a prompt prefix, or "" when none match.

        Entries qualify when every surface occurs case-insensitively in the
        text.  Highest count goes first; the rendering stops at the last whole
        entry that still fits the character budget.
        """
        limit = budget if budget is not None else self.prefix_budget
        haystack = text.lower()
        matching = [
            e for e in self._entries.values()
            if all(s.lower() in haystack for s in e.surfaces)
        ]
        matching.sort(key=lambda e: (-e.count, e.kind, e.label, tuple(s.lower() for s in e.surfaces)))
        prefix = ""
        for entry in matching:
            candidate = f"{prefix} {entry.render()}" if prefix else f"Note: {entry.render()}"
            if len(candidate) > limit:
                break
            prefix = candidate
        return prefix

    # -- persistence -----------------------------------------------------------

    def dump(self) -> dict:
        return {
            "version": 1,
            "projectId": self.project_id,
            "threshold": self.threshold,
            "language": self.language,
            "prefixBudget": self.prefix_budget,
            "entries": sorted(
                (
                    {
                        "kind": e.kind,
                        "surfaces": list(e.surfaces),
                        "label": e.label,
                        "count": e.count,
                        "lastSeen": e.last_seen,
                    }
                    for e in self._entries.values()
                ),
                key=lambda item: (item["kind"], item["label"], item["surfaces"]),
            ),
            "tallies": sorted(
                (
                    {
                        "kind": key[0],
                        "surfaces": list(tally.surfaces),
                        "label": key[2],
                        "count": tally.count,
                        "lastSeen": tally.last_seen,
                    }
                    for key, tally in self._tallies.items()
                ),
                key=lambda item: (item["kind"], item["label"], item["surfaces"]),
            ),
        }

    @classmethod
    def load(cls, payload: dict, clock: Callable[[], float] = time.time) -> "KnowledgeBase":
        kb = cls(
            project_id=payload.get("projectId", ""),
            threshold=payload.get("threshold", 2),
            language=payload.get("language", "en"),
            prefix_budget=payload.get("prefixBudget", 512),
            clock=clock,
        )
        for item in payload.get("entries", []):
            entry = KnowledgeEntry(
                kind=item["kind"],
                surfaces=tuple(item["surfaces"]),
                label=item["label"],
                count=item["count"],
                last_seen=item.get("lastSeen", 0.0),
            )
            kb._entries[entry.key()] = entry
        for item in payload.get("tallies", []):
            key = (item["kind"], tuple(s.lower() for s in item["surfaces"]), item["label"])
            kb._tallies[key] = _Tally(
                surfaces=tuple(item["surfaces"]),
                count=item["count"],
                last_seen=item.get("lastSeen", 0.0),
            )
        return kb


def fact_from_markup(doc: AnnotatedDocument, markup: Markup) -> tuple[str, tuple[str, ...], str]:
    """(kind, surfaces, label) for one markup, resolving relation endpoints."""
    if markup.is_entity:
        return (ENTITY_FACT, (markup.entity_text,), markup.name)
    source = doc.get(markup.source)
    target = doc.get(markup.target)
    return (RELATION_FACT, (source.entity_text, target.entity_text), markup.name)

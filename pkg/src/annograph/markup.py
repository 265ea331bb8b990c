"""Per-document markup store and its mutation operations.

A markup is either an entity (a labeled token span) or a relation (a labeled
edge between two entity markups).  Each markup is born ``suggested`` or
``accepted``; suggested markups may be accepted once, and deleting an entity
cascades to every relation touching it.  Propagation replicates a seed markup
across a corpus as suggestions using case-insensitive, token-aligned surface
matching.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .scheme import (
    EventArgument,
    EventRecord,
    NativeRecord,
    NerRecord,
    Ontology,
    PSEUDO_TOKEN,
    ReRecord,
    TaskKind,
    to_unified,
)
from .tokenize import Token, span_text, tokenize

SUGGESTED = "suggested"
ACCEPTED = "accepted"


class MarkupError(ValueError):
    """Base class for markup mutation failures."""


class UnknownMarkupError(MarkupError):
    pass


class UnknownLabelError(MarkupError):
    pass


class ConstraintViolation(MarkupError):
    """Relation drafted between entity types its constraint forbids."""


class DanglingReferenceError(MarkupError):
    pass


class SpanOutOfRangeError(MarkupError):
    pass


class IllegalTransitionError(MarkupError):
    """Accepting a markup that is not in the suggested state."""


class VersionConflictError(MarkupError):
    """Writer supplied a stale document version; safe to re-read and retry."""


@dataclass
class Markup:
    is_entity: bool
    suggested: bool
    id: str
    name: str
    label_id: str
    source: Optional[str] = None       # relation only: subject entity markup id
    target: Optional[str] = None       # relation only: object entity markup id
    start: Optional[int] = None        # entity only: first token index, inclusive
    end: Optional[int] = None          # entity only: last token index, inclusive
    entity_text: Optional[str] = None  # entity only: covered surface


@dataclass(frozen=True)
class MarkupDraft:
    is_entity: bool
    name: str
    source: Optional[str] = None
    target: Optional[str] = None
    start: Optional[int] = None
    end: Optional[int] = None


class AnnotatedDocument:
    """One text with its token layer and markup collection.

    ``version`` increases by exactly one per successful mutation batch, and
    mutating calls may pass the version they read to detect lost updates.
    """

    def __init__(self, doc_id: str, text: str, language: str = "en",
                 cluster_id: Optional[int] = None, saved: bool = False):
        self.doc_id = doc_id
        self.text = text
        self.language = language
        self.cluster_id = cluster_id
        self.saved = saved
        self.version = 0
        self.tokens: tuple[Token, ...] = tokenize(text, language)
        self.markups: dict[str, Markup] = {}
        self._counter = 0

    def fresh_id(self) -> str:
        self._counter += 1
        return f"{self.doc_id}.m{self._counter:04d}"

    def restore_markup(self, markup: Markup) -> None:
        """Re-insert a persisted markup verbatim (no version bump)."""
        self.markups[markup.id] = markup
        tail = markup.id.rsplit("m", 1)[-1]
        try:
            self._counter = max(self._counter, int(tail))
        except ValueError:
            pass

    def get(self, markup_id: str) -> Markup:
        try:
            return self.markups[markup_id]
        except KeyError:
            raise UnknownMarkupError(f"no markup {markup_id!r} in document {self.doc_id!r}") from None

    def entity_markups(self) -> list[Markup]:
        return [m for m in self.markups.values() if m.is_entity]

    def relation_markups(self) -> list[Markup]:
        return [m for m in self.markups.values() if not m.is_entity]


def label_identifier(ontology: Ontology, is_entity: bool, name: str) -> str:
    """Stable per-scheme identifier for a type: E<n> / R<n> in declaration order."""
    defs = ontology.entity_types if is_entity else ontology.relation_types
    for index, type_def in enumerate(defs, start=1):
        if type_def.name == name:
            return f"{'E' if is_entity else 'R'}{index}"
    kind = "entity" if is_entity else "relation"
    raise UnknownLabelError(f"{kind} type {name!r} is not in the scheme")


def _check_version(doc: AnnotatedDocument, expected_version: Optional[int]) -> None:
    if expected_version is not None and expected_version != doc.version:
        raise VersionConflictError(
            f"document {doc.doc_id!r} is at version {doc.version}, writer read {expected_version}"
        )


def _find_duplicate(doc: AnnotatedDocument, draft: MarkupDraft) -> Optional[Markup]:
    for m in doc.markups.values():
        if m.is_entity != draft.is_entity or m.name != draft.name:
            continue
        if draft.is_entity and (m.start, m.end) == (draft.start, draft.end):
            return m
        if not draft.is_entity and (m.source, m.target) == (draft.source, draft.target):
            return m
    return None


def add_markup(
    doc: AnnotatedDocument,
    draft: MarkupDraft,
    state: str,
    ontology: Ontology,
    expected_version: Optional[int] = None,
) -> Markup:
    """Validate and persist one markup draft.

    Exact duplicates (same span+label, or same endpoints+relation) are
    idempotent: the existing markup is returned and nothing changes.
    """
    if state not in (SUGGESTED, ACCEPTED):
        raise MarkupError(f"state must be {SUGGESTED!r} or {ACCEPTED!r}, got {state!r}")
    _check_version(doc, expected_version)

    if draft.is_entity:
        if ontology.get_entity_type(draft.name) is None:
            raise UnknownLabelError(f"entity type {draft.name!r} is not in the scheme")
        if draft.start is None or draft.end is None:
            raise MarkupError("entity draft needs start and end token indices")
        if not (0 <= draft.start <= draft.end < len(doc.tokens)):
            raise SpanOutOfRangeError(
                f"span [{draft.start}, {draft.end}] outside document of {len(doc.tokens)} tokens"
            )
    else:
        if ontology.get_relation_type(draft.name) is None:
            raise UnknownLabelError(f"relation type {draft.name!r} is not in the scheme")
        if draft.source is None or draft.target is None:
            raise MarkupError("relation draft needs source and target markup ids")
        for endpoint_id in (draft.source, draft.target):
            endpoint = doc.markups.get(endpoint_id)
            if endpoint is None or not endpoint.is_entity:
                raise DanglingReferenceError(f"relation endpoint {endpoint_id!r} is not an entity markup")
        subject = doc.markups[draft.source]
        obj = doc.markups[draft.target]
        if not ontology.relation_allows(draft.name, subject.name, obj.name):
            raise ConstraintViolation(
                f"{draft.name!r} is not allowed between {subject.name!r} and {obj.name!r}"
            )

    existing = _find_duplicate(doc, draft)
    if existing is not None:
        return existing

    markup = Markup(
        is_entity=draft.is_entity,
        suggested=(state == SUGGESTED),
        id=doc.fresh_id(),
        name=draft.name,
        label_id=label_identifier(ontology, draft.is_entity, draft.name),
        source=draft.source,
        target=draft.target,
        start=draft.start,
        end=draft.end,
        entity_text=span_text(doc.text, doc.tokens, draft.start, draft.end) if draft.is_entity else None,
    )
    doc.markups[markup.id] = markup
    doc.version += 1
    return markup


@dataclass(frozen=True)
class MutationSummary:
    action: str
    accepted: tuple[str, ...] = ()
    deleted: tuple[str, ...] = ()
    version: int = 0


def _signature(doc: AnnotatedDocument, markup: Markup) -> tuple:
    if markup.is_entity:
        return (True, markup.label_id, markup.entity_text.lower())
    source = doc.get(markup.source)
    target = doc.get(markup.target)
    return (False, markup.label_id, source.entity_text.lower(), target.entity_text.lower())


def _cascade(doc: AnnotatedDocument, ids: Iterable[str]) -> list[str]:
    """Expand a deletion set with every relation referencing a doomed entity."""
    doomed = set(ids)
    for m in doc.markups.values():
        if not m.is_entity and (m.source in doomed or m.target in doomed):
            doomed.add(m.id)
    return [mid for mid in doc.markups if mid in doomed]


def transition(
    doc: AnnotatedDocument,
    markup_id: str,
    action: str,
    expected_version: Optional[int] = None,
) -> MutationSummary:
    """Apply a tooltip action: accept / delete, singly or for the whole signature group.

    ``accept_all``/``delete_all`` reach every markup in the document sharing
    the clicked markup's (kind, label, surface-or-endpoint-surfaces) signature;
    surface comparison is case-insensitive, matching propagation.
    """
    _check_version(doc, expected_version)
    markup = doc.get(markup_id)

    if action == "accept":
        if not markup.suggested:
            raise IllegalTransitionError(f"markup {markup_id!r} is already accepted")
        markup.suggested = False
        doc.version += 1
        return MutationSummary(action=action, accepted=(markup_id,), version=doc.version)

    if action == "accept_all":
        if not markup.suggested:
            raise IllegalTransitionError(f"markup {markup_id!r} is already accepted")
        signature = _signature(doc, markup)
        flipped = []
        for m in doc.markups.values():
            if m.suggested and _signature(doc, m) == signature:
                m.suggested = False
                flipped.append(m.id)
        doc.version += 1
        return MutationSummary(action=action, accepted=tuple(flipped), version=doc.version)

    if action == "delete":
        removed = _cascade(doc, [markup_id])
        for mid in removed:
            del doc.markups[mid]
        doc.version += 1
        return MutationSummary(action=action, deleted=tuple(removed), version=doc.version)

    if action == "delete_all":
        signature = _signature(doc, markup)
        seeds = [m.id for m in doc.markups.values() if _signature(doc, m) == signature]
        removed = _cascade(doc, seeds)
        for mid in removed:
            del doc.markups[mid]
        doc.version += 1
        return MutationSummary(action=action, deleted=tuple(removed), version=doc.version)

    raise MarkupError(f"unknown action {action!r}")


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------

def token_aligned_occurrences(doc: AnnotatedDocument, surface: str) -> list[tuple[int, int]]:
    """Inclusive token spans whose token texts equal the surface's tokens,
    compared case-insensitively."""
    needle = [t.text.lower() for t in tokenize(surface, doc.language)]
    if not needle:
        return []
    haystack = [t.text.lower() for t in doc.tokens]
    width = len(needle)
    return [
        (i, i + width - 1)
        for i in range(len(haystack) - width + 1)
        if haystack[i:i + width] == needle
    ]


def _covered(doc: AnnotatedDocument, name: str, span: tuple[int, int]) -> Optional[Markup]:
    for m in doc.markups.values():
        if m.is_entity and m.name == name and (m.start, m.end) == span:
            return m
    return None


def _insert_suggested(doc: AnnotatedDocument, ontology: Ontology, draft: MarkupDraft) -> Markup:
    markup = Markup(
        is_entity=draft.is_entity,
        suggested=True,
        id=doc.fresh_id(),
        name=draft.name,
        label_id=label_identifier(ontology, draft.is_entity, draft.name),
        source=draft.source,
        target=draft.target,
        start=draft.start,
        end=draft.end,
        entity_text=span_text(doc.text, doc.tokens, draft.start, draft.end) if draft.is_entity else None,
    )
    doc.markups[markup.id] = markup
    return markup


def suggest_entity_occurrences(
    doc: AnnotatedDocument,
    ontology: Ontology,
    name: str,
    surface: str,
) -> list[Markup]:
    """Suggest `name` on every uncovered occurrence of `surface` in one document.

    Does not bump the document version; callers batch their own bump.
    """
    created = []
    for span in token_aligned_occurrences(doc, surface):
        if _covered(doc, name, span) is not None:
            continue
        created.append(_insert_suggested(doc, ontology, MarkupDraft(
            is_entity=True, name=name, start=span[0], end=span[1])))
    return created


def suggest_relation_in_document(
    doc: AnnotatedDocument,
    ontology: Ontology,
    name: str,
    subject_label: str,
    subject_surface: str,
    object_label: str,
    object_surface: str,
) -> list[Markup]:
    """Suggest one relation in a document if both endpoint surfaces occur.

    Endpoints reuse an existing same-label markup on any occurrence of their
    surface, otherwise a suggested markup is created on the first occurrence.
    Does not bump the document version.
    """
    subject_spans = token_aligned_occurrences(doc, subject_surface)
    object_spans = token_aligned_occurrences(doc, object_surface)
    if not subject_spans or not object_spans:
        return []
    created = []

    def endpoint_for(label: str, spans: list[tuple[int, int]]) -> Markup:
        for span in spans:
            existing = _covered(doc, label, span)
            if existing is not None:
                return existing
        markup = _insert_suggested(doc, ontology, MarkupDraft(
            is_entity=True, name=label, start=spans[0][0], end=spans[0][1]))
        created.append(markup)
        return markup

    subject = endpoint_for(subject_label, subject_spans)
    obj = endpoint_for(object_label, object_spans)
    duplicate = any(
        not m.is_entity and m.name == name and (m.source, m.target) == (subject.id, obj.id)
        for m in doc.markups.values()
    )
    if not duplicate:
        created.append(_insert_suggested(doc, ontology, MarkupDraft(
            is_entity=False, name=name, source=subject.id, target=obj.id)))
    return created


def propagate(
    corpus: list[AnnotatedDocument],
    seed: Markup,
    scope: str,
    ontology: Ontology,
) -> list[Markup]:
    """Replicate a seed markup across the corpus as suggestions.

    Entity seeds suggest the seed's label on every uncovered case-insensitive
    token-aligned occurrence of its surface.  Relation seeds, per document
    where both endpoint surfaces occur, reuse-or-create suggested endpoints
    and connect them with one suggested relation.  Documents gaining at least
    one markup get a single version bump.
    """
    if scope not in ("document", "project"):
        raise MarkupError(f"scope must be 'document' or 'project', got {scope!r}")

    home = next((d for d in corpus if seed.id in d.markups and d.markups[seed.id] is seed), None)
    if home is None:
        raise UnknownMarkupError(f"seed markup {seed.id!r} is not part of the corpus")
    docs = [home] if scope == "document" else corpus

    created: list[Markup] = []
    for doc in docs:
        if seed.is_entity:
            added = suggest_entity_occurrences(doc, ontology, seed.name, seed.entity_text)
        else:
            source = home.get(seed.source)
            target = home.get(seed.target)
            added = suggest_relation_in_document(
                doc, ontology, seed.name,
                source.name, source.entity_text,
                target.name, target.entity_text,
            )
        created.extend(added)
        if added:
            doc.version += 1
    return created


# ---------------------------------------------------------------------------
# Record materialization and counts
# ---------------------------------------------------------------------------

def document_to_records(
    doc: AnnotatedDocument,
    task: TaskKind,
    markups: Optional[Iterable[Markup]] = None,
) -> list[NativeRecord]:
    """Read task-native records off a document's markups.

    For event projects, an entity markup whose label is not the pseudo type
    is a trigger carrying the event type; role edges from it supply the
    arguments.
    """
    pool = list(markups) if markups is not None else list(doc.markups.values())
    pool_ids = {m.id for m in pool}
    entities = [m for m in pool if m.is_entity]
    relations = [m for m in pool if not m.is_entity]

    if task is TaskKind.NER:
        return [
            NerRecord(entity_type=m.name, text=m.entity_text, span=(m.start, m.end))
            for m in entities
        ]

    if task is TaskKind.RE:
        records: list[NativeRecord] = []
        for rel in relations:
            if rel.source not in pool_ids or rel.target not in pool_ids:
                continue
            subject = doc.get(rel.source)
            obj = doc.get(rel.target)
            records.append(ReRecord(
                subject_type=subject.name,
                subject=subject.entity_text,
                relation=rel.name,
                object_type=obj.name,
                object=obj.entity_text,
                subject_span=(subject.start, subject.end),
                object_span=(obj.start, obj.end),
            ))
        return records

    records = []
    for trigger in entities:
        if trigger.name == PSEUDO_TOKEN:
            continue
        arguments = []
        for rel in relations:
            if rel.source != trigger.id or rel.target not in pool_ids:
                continue
            argument = doc.get(rel.target)
            arguments.append(EventArgument(
                role=rel.name, text=argument.entity_text, span=(argument.start, argument.end)))
        records.append(EventRecord(
            event_type=trigger.name,
            trigger=trigger.entity_text,
            arguments=tuple(arguments),
            trigger_span=(trigger.start, trigger.end),
        ))
    return records


def counts(
    docs: Union[AnnotatedDocument, Iterable[AnnotatedDocument]],
    task: TaskKind,
    markup_filter: Optional[str] = None,
) -> dict:
    """Tallies across one document or a whole project.

    ``triples`` counts the unified triples the current markups materialize
    to, so an entity-only project counts one triple per entity while an
    event project counts one per role edge (or one per bare trigger).
    """
    if isinstance(docs, AnnotatedDocument):
        docs = [docs]
    result = {"entities": 0, "relations": 0, "triples": 0, "accepted": 0, "suggested": 0}
    for doc in docs:
        pool = list(doc.markups.values())
        if markup_filter == SUGGESTED:
            pool = [m for m in pool if m.suggested]
        elif markup_filter == ACCEPTED:
            pool = [m for m in pool if not m.suggested]
        result["entities"] += sum(1 for m in pool if m.is_entity)
        result["relations"] += sum(1 for m in pool if not m.is_entity)
        result["accepted"] += sum(1 for m in pool if not m.suggested)
        result["suggested"] += sum(1 for m in pool if m.suggested)
        for record in document_to_records(doc, task, markups=pool):
            result["triples"] += len(to_unified(task, record))
    return result

"""Unified annotation scheme shared by the three extraction tasks.

Entity recognition, relation extraction, and event extraction all reduce to
one triple form ``(subject_type:subject, relation, object_type:object)``.
Positions that a task does not fill carry a pseudo token, serialized as
``"_"``.  This module owns the task kinds, the triple record, the project
ontology, and the lossless conversions between task-native records and the
unified form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union


class TaskKind(str, Enum):
    NER = "NER"
    RE = "RE"
    EE = "EE"


class Pseudo:
    """Sentinel filling triple positions a task leaves empty."""

    _instance: Optional["Pseudo"] = None

    def __new__(cls) -> "Pseudo":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "PSEUDO"

    def __reduce__(self):
        return (Pseudo, ())


PSEUDO = Pseudo()

#: On-disk spelling of the pseudo token.
PSEUDO_TOKEN = "_"

# Token-index span, inclusive on both ends.
Span = tuple[int, int]
Surface = Union[str, Pseudo]


class SchemeError(ValueError):
    """Base class for scheme-level failures."""


class InvalidRecordError(SchemeError):
    """A native record violates its task's shape rules."""


class AmbiguousGroupError(SchemeError):
    """Triples cannot be regrouped into one native record."""


class SchemeParseError(SchemeError):
    """A scheme text line could not be parsed."""

    def __init__(self, section: str, line_no: int, message: str):
        self.section = section
        self.line_no = line_no
        super().__init__(f"{section} line {line_no}: {message}")


def surface_to_token(value: Surface) -> str:
    return PSEUDO_TOKEN if isinstance(value, Pseudo) else value


def surface_from_token(value: str) -> Surface:
    return PSEUDO if value == PSEUDO_TOKEN else value


@dataclass(frozen=True)
class UnifiedTriple:
    """One row of the unified scheme.

    ``subject_span``/``object_span`` are optional token anchors carried along
    so that two same-surface subjects (e.g. two identical triggers in one
    sentence) stay distinguishable when regrouping.
    """

    subject_type: str
    subject: str
    relation: Surface
    object_type: Surface
    object: Surface
    subject_span: Optional[Span] = None
    object_span: Optional[Span] = None

    def to_json(self) -> dict:
        payload = {
            "subjectType": self.subject_type,
            "subject": self.subject,
            "relation": surface_to_token(self.relation),
            "objectType": surface_to_token(self.object_type),
            "object": surface_to_token(self.object),
        }
        if self.subject_span is not None:
            payload["subjectSpan"] = list(self.subject_span)
        if self.object_span is not None:
            payload["objectSpan"] = list(self.object_span)
        return payload

    @classmethod
    def from_json(cls, payload: dict) -> "UnifiedTriple":
        return cls(
            subject_type=payload["subjectType"],
            subject=payload["subject"],
            relation=surface_from_token(payload["relation"]),
            object_type=surface_from_token(payload["objectType"]),
            object=surface_from_token(payload["object"]),
            subject_span=tuple(payload["subjectSpan"]) if payload.get("subjectSpan") else None,
            object_span=tuple(payload["objectSpan"]) if payload.get("objectSpan") else None,
        )


# ---------------------------------------------------------------------------
# Task-native records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NerRecord:
    entity_type: str
    text: str
    span: Optional[Span] = None


@dataclass(frozen=True)
class ReRecord:
    subject_type: str
    subject: str
    relation: str
    object_type: str
    object: str
    subject_span: Optional[Span] = None
    object_span: Optional[Span] = None


@dataclass(frozen=True)
class EventArgument:
    role: str
    text: str
    span: Optional[Span] = None


@dataclass(frozen=True)
class EventRecord:
    event_type: str
    trigger: str
    arguments: tuple[EventArgument, ...] = ()
    trigger_span: Optional[Span] = None


NativeRecord = Union[NerRecord, ReRecord, EventRecord]


def _require_surface(value: str, what: str) -> None:
    if not isinstance(value, str) or not value:
        raise InvalidRecordError(f"{what} must be a non-empty string, got {value!r}")


def to_unified(
    task: TaskKind,
    record: NativeRecord,
    ontology: Optional["Ontology"] = None,
) -> list[UnifiedTriple]:
    """Transform one task-native record into unified triples.

    An entity mention becomes a single triple with a pseudo tail.  A relation
    triple is already in unified form.  An event with n arguments becomes n
    triples sharing the ``event_type:trigger`` subject; with no arguments it
    becomes one triple whose relation and object are pseudo.

    When `ontology` is given, type names are checked against it.
    """
    if task is TaskKind.NER:
        if not isinstance(record, NerRecord):
            raise InvalidRecordError(f"NER expects NerRecord, got {type(record).__name__}")
        _require_surface(record.text, "entity text")
        _require_surface(record.entity_type, "entity type")
        if ontology is not None and not ontology.has_entity_type(record.entity_type):
            raise InvalidRecordError(f"unknown entity type {record.entity_type!r}")
        return [
            UnifiedTriple(
                subject_type=record.entity_type,
                subject=record.text,
                relation=PSEUDO,
                object_type=PSEUDO,
                object=PSEUDO,
                subject_span=record.span,
            )
        ]

    if task is TaskKind.RE:
        if not isinstance(record, ReRecord):
            raise InvalidRecordError(f"RE expects ReRecord, got {type(record).__name__}")
        for value, what in (
            (record.subject, "subject"),
            (record.object, "object"),
            (record.subject_type, "subject type"),
            (record.object_type, "object type"),
            (record.relation, "relation"),
        ):
            _require_surface(value, what)
        if ontology is not None:
            for name in (record.subject_type, record.object_type):
                if not ontology.has_entity_type(name):
                    raise InvalidRecordError(f"unknown entity type {name!r}")
            if ontology.get_relation_type(record.relation) is None:
                raise InvalidRecordError(f"unknown relation {record.relation!r}")
        return [
            UnifiedTriple(
                subject_type=record.subject_type,
                subject=record.subject,
                relation=record.relation,
                object_type=record.object_type,
                object=record.object,
                subject_span=record.subject_span,
                object_span=record.object_span,
            )
        ]

    if task is TaskKind.EE:
        if not isinstance(record, EventRecord):
            raise InvalidRecordError(f"EE expects EventRecord, got {type(record).__name__}")
        _require_surface(record.trigger, "trigger")
        _require_surface(record.event_type, "event type")
        if ontology is not None:
            if not ontology.has_entity_type(record.event_type):
                raise InvalidRecordError(f"unknown event type {record.event_type!r}")
        if not record.arguments:
            return [
                UnifiedTriple(
                    subject_type=record.event_type,
                    subject=record.trigger,
                    relation=PSEUDO,
                    object_type=PSEUDO,
                    object=PSEUDO,
                    subject_span=record.trigger_span,
                )
            ]
        triples = []
        for arg in record.arguments:
            _require_surface(arg.text, "argument text")
            _require_surface(arg.role, "argument role")
            if ontology is not None and ontology.get_relation_type(arg.role) is None:
                raise InvalidRecordError(f"unknown argument role {arg.role!r}")
            triples.append(
                UnifiedTriple(
                    subject_type=record.event_type,
                    subject=record.trigger,
                    relation=arg.role,
                    object_type=PSEUDO,
                    object=arg.text,
                    subject_span=record.trigger_span,
                    object_span=arg.span,
                )
            )
        return triples

    raise SchemeError(f"unknown task {task!r}")


def _is_pseudo(value: Surface) -> bool:
    return isinstance(value, Pseudo)


def from_unified(task: TaskKind, triples: list[UnifiedTriple]) -> list[NativeRecord]:
    """Regroup unified triples back into task-native records.

    Inverse of :func:`to_unified`: for any well-formed record ``x``,
    ``from_unified(task, to_unified(task, x)) == [x]`` up to triple order.
    Event triples group by (event type, trigger surface, trigger span); a
    group mixing pseudo-relation rows with role rows cannot come from one
    event record and raises :class:`AmbiguousGroupError`.
    """
    if task is TaskKind.NER:
        records: list[NativeRecord] = []
        for t in triples:
            if not (_is_pseudo(t.relation) and _is_pseudo(t.object_type) and _is_pseudo(t.object)):
                raise InvalidRecordError(f"not an entity-shaped triple: {t}")
            records.append(NerRecord(entity_type=t.subject_type, text=t.subject, span=t.subject_span))
        return records

    if task is TaskKind.RE:
        records = []
        for t in triples:
            if _is_pseudo(t.relation) or _is_pseudo(t.object_type) or _is_pseudo(t.object):
                raise InvalidRecordError(f"pseudo token in a relation triple: {t}")
            records.append(
                ReRecord(
                    subject_type=t.subject_type,
                    subject=t.subject,
                    relation=t.relation,
                    object_type=t.object_type,
                    object=t.object,
                    subject_span=t.subject_span,
                    object_span=t.object_span,
                )
            )
        return records

    if task is TaskKind.EE:
        groups: dict[tuple, list[UnifiedTriple]] = {}
        for t in triples:
            groups.setdefault((t.subject_type, t.subject, t.subject_span), []).append(t)
        records = []
        for (event_type, trigger, span), rows in groups.items():
            pseudo_rows = [r for r in rows if _is_pseudo(r.relation)]
            role_rows = [r for r in rows if not _is_pseudo(r.relation)]
            if pseudo_rows and role_rows:
                raise AmbiguousGroupError(
                    f"event {event_type}:{trigger} mixes argument rows with a no-argument row"
                )
            if pseudo_rows and len(pseudo_rows) > 1:
                raise AmbiguousGroupError(
                    f"event {event_type}:{trigger} has {len(pseudo_rows)} no-argument rows"
                )
            args = []
            for r in role_rows:
                if not _is_pseudo(r.object_type) or _is_pseudo(r.object):
                    raise InvalidRecordError(f"not an event argument triple: {r}")
                args.append(EventArgument(role=r.relation, text=r.object, span=r.object_span))
            records.append(
                EventRecord(
                    event_type=event_type,
                    trigger=trigger,
                    arguments=tuple(args),
                    trigger_span=span,
                )
            )
        return records

    raise SchemeError(f"unknown task {task!r}")


# ---------------------------------------------------------------------------
# Ontology
# ---------------------------------------------------------------------------

_COLOR_PALETTE = (
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4",
    "#4699c9", "#f032e6", "#9a6324", "#808000", "#008080",
)
PSEUDO_COLOR = "#9e9e9e"


@dataclass(frozen=True)
class EntityTypeDef:
    name: str
    color: str = ""
    parent: Optional[str] = None

    @property
    def is_pseudo(self) -> bool:
        return self.name == PSEUDO_TOKEN


@dataclass(frozen=True)
class RelationTypeDef:
    name: str
    subject_types: tuple[str, ...]
    object_types: tuple[str, ...]
    parent: Optional[str] = None


@dataclass(frozen=True)
class Ontology:
    task: TaskKind
    entity_types: tuple[EntityTypeDef, ...] = ()
    relation_types: tuple[RelationTypeDef, ...] = ()

    def has_entity_type(self, name: str) -> bool:
        return any(t.name == name for t in self.entity_types)

    def get_entity_type(self, name: str) -> Optional[EntityTypeDef]:
        for t in self.entity_types:
            if t.name == name:
                return t
        return None

    def get_relation_type(self, name: str) -> Optional[RelationTypeDef]:
        for r in self.relation_types:
            if r.name == name:
                return r
        return None

    def event_types(self) -> tuple[str, ...]:
        """Non-pseudo entity types, which for EE projects are the event types."""
        return tuple(t.name for t in self.entity_types if not t.is_pseudo)

    def roles_for_event(self, event_type: str) -> tuple[str, ...]:
        return tuple(r.name for r in self.relation_types if event_type in r.subject_types)

    def relation_allows(self, relation: str, subject_type: str, object_type: str) -> bool:
        rel = self.get_relation_type(relation)
        if rel is None:
            return False
        return subject_type in rel.subject_types and object_type in rel.object_types

    def to_json(self) -> dict:
        entity_types = []
        for t in self.entity_types:
            item = {"name": t.name, "color": t.color}
            if t.parent is not None:
                item["parent"] = t.parent
            entity_types.append(item)
        relation_types = []
        for r in self.relation_types:
            item = {
                "name": r.name,
                "subjectTypes": list(r.subject_types),
                "objectTypes": list(r.object_types),
            }
            if r.parent is not None:
                item["parent"] = r.parent
            relation_types.append(item)
        return {"task": self.task.value, "entityTypes": entity_types, "relationTypes": relation_types}

    @classmethod
    def from_json(cls, payload: dict) -> "Ontology":
        return cls(
            task=TaskKind(payload["task"]),
            entity_types=tuple(
                EntityTypeDef(name=t["name"], color=t.get("color", ""), parent=t.get("parent"))
                for t in payload.get("entityTypes", [])
            ),
            relation_types=tuple(
                RelationTypeDef(
                    name=r["name"],
                    subject_types=tuple(r.get("subjectTypes", [])),
                    object_types=tuple(r.get("objectTypes", [])),
                    parent=r.get("parent"),
                )
                for r in payload.get("relationTypes", [])
            ),
        )


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    message: str


def _find_cycles(names: list[str], parent_of: dict[str, Optional[str]]) -> set[str]:
    """Names that sit on a parent cycle."""
    on_cycle: set[str] = set()
    for start in names:
        seen = []
        node: Optional[str] = start
        while node is not None and node in parent_of:
            if node in seen:
                on_cycle.update(seen[seen.index(node):])
                break
            seen.append(node)
            node = parent_of[node]
    return on_cycle


def validate_ontology(ontology: Ontology) -> list[ValidationIssue]:
    """Collect scheme violations; an empty list means the ontology is accepted."""
    issues: list[ValidationIssue] = []

    entity_names = [t.name for t in ontology.entity_types]
    relation_names = [r.name for r in ontology.relation_types]

    for kind, names in (("entity", entity_names), ("relation", relation_names)):
        seen = set()
        for name in names:
            if name in seen:
                issues.append(ValidationIssue("duplicate-name", f"duplicate {kind} type {name!r}"))
            seen.add(name)

    for kind, defs in (("entity", ontology.entity_types), ("relation", ontology.relation_types)):
        declared = {d.name for d in defs}
        parent_of = {d.name: d.parent for d in defs}
        for d in defs:
            if d.parent is not None and d.parent not in declared:
                issues.append(
                    ValidationIssue("dangling-parent", f"{kind} type {d.name!r} has unknown parent {d.parent!r}")
                )
        for name in sorted(_find_cycles(list(declared), parent_of)):
            issues.append(ValidationIssue("cycle", f"{kind} type {name!r} is on a parent cycle"))

    declared_entities = set(entity_names)
    for r in ontology.relation_types:
        for name in itertools.chain(r.subject_types, r.object_types):
            if name not in declared_entities:
                issues.append(
                    ValidationIssue(
                        "unknown-type-in-constraint",
                        f"relation {r.name!r} constrains on undeclared entity type {name!r}",
                    )
                )

    if ontology.task is TaskKind.NER and ontology.relation_types:
        issues.append(ValidationIssue("task-forbids-relations", "an entity-only scheme declares relation types"))

    if ontology.task is TaskKind.EE:
        pseudo_count = sum(1 for t in ontology.entity_types if t.is_pseudo)
        if pseudo_count != 1:
            issues.append(
                ValidationIssue("missing-pseudo", f"event scheme needs exactly one {PSEUDO_TOKEN!r} entity type, found {pseudo_count}")
            )
        for r in ontology.relation_types:
            if tuple(r.object_types) != (PSEUDO_TOKEN,):
                issues.append(
                    ValidationIssue("role-object-not-pseudo", f"role {r.name!r} must target the pseudo entity type")
                )
            if PSEUDO_TOKEN in r.subject_types:
                issues.append(
                    ValidationIssue("role-pseudo-subject", f"role {r.name!r} cannot hang off the pseudo entity type")
                )

    return issues


# ---------------------------------------------------------------------------
# Scheme text format
# ---------------------------------------------------------------------------
#
# Entity lines declare one type each; slash paths declare hierarchy, so
# "Location/City" declares City under Location (creating Location if needed).
# Relation lines read  name@[subject, object]  for relation schemes and
# event@[role1, role2, ...]  for event schemes, where roles become relation
# types constrained to subject {event} and object {_}.  Alternative types in
# one constraint slot join with "|".


def _split_constraint(line: str, section: str, line_no: int) -> tuple[str, list[str]]:
    if "@" not in line:
        raise SchemeParseError(section, line_no, f"missing '@' in {line!r}")
    name, _, rest = line.partition("@")
    name = name.strip()
    rest = rest.strip()
    if not name:
        raise SchemeParseError(section, line_no, f"empty name in {line!r}")
    if not (rest.startswith("[") and rest.endswith("]")):
        raise SchemeParseError(section, line_no, f"unbalanced brackets in {line!r}")
    inner = rest[1:-1].strip()
    items = [part.strip() for part in inner.split(",")] if inner else []
    if any(not item for item in items):
        raise SchemeParseError(section, line_no, f"empty constraint item in {line!r}")
    return name, items


class _TypeCollector:
    """Accumulates declarations in first-mention order, rejecting conflicts."""

    def __init__(self, section: str):
        self.section = section
        self.order: list[str] = []
        self.parent: dict[str, Optional[str]] = {}

    def declare(self, name: str, parent: Optional[str], line_no: int) -> None:
        if name in self.parent:
            if self.parent[name] != parent and parent is not None and self.parent[name] is not None:
                raise SchemeParseError(
                    self.section, line_no,
                    f"{name!r} already declared with parent {self.parent[name]!r}",
                )
            if parent is not None and self.parent[name] is None:
                self.parent[name] = parent
            return
        self.order.append(name)
        self.parent[name] = parent

    def declare_path(self, path: str, line_no: int) -> str:
        segments = [s.strip() for s in path.split("/")]
        if any(not s for s in segments):
            raise SchemeParseError(self.section, line_no, f"empty path segment in {path!r}")
        parent = None
        for segment in segments:
            self.declare(segment, parent, line_no)
            parent = segment
        return segments[-1]


def parse_scheme_text(
    task: TaskKind,
    entity_lines: list[str],
    relation_lines: list[str],
) -> Ontology:
    """Parse the line-oriented scheme format into an :class:`Ontology`.

    Raises :class:`SchemeParseError` with the offending section and 1-based
    line number on malformed input.
    """
    entities = _TypeCollector("entity")
    for line_no, raw in enumerate(entity_lines, start=1):
        line = raw.strip()
        if not line:
            continue
        entities.declare_path(line, line_no)

    relations = _TypeCollector("relation")
    rel_subjects: dict[str, list[str]] = {}
    rel_objects: dict[str, list[str]] = {}

    for line_no, raw in enumerate(relation_lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if task is TaskKind.NER:
            raise SchemeParseError("relation", line_no, "an entity-only scheme takes no relation lines")
        name, items = _split_constraint(line, "relation", line_no)

        if task is TaskKind.RE:
            # name@[] declares an abstract grouping node with no constraint
            if len(items) not in (0, 2):
                raise SchemeParseError(
                    "relation", line_no,
                    f"expected [subject, object] with exactly two slots, got {len(items)}",
                )
            leaf = relations.declare_path(name, line_no)
            if leaf in rel_subjects:
                raise SchemeParseError("relation", line_no, f"relation {leaf!r} declared twice")
            if items:
                rel_subjects[leaf] = [alt.strip() for alt in items[0].split("|") if alt.strip()]
                rel_objects[leaf] = [alt.strip() for alt in items[1].split("|") if alt.strip()]
            else:
                rel_subjects[leaf] = []
                rel_objects[leaf] = []
        else:  # EE: event@[role1, ...]
            entities.declare(name, None, line_no)
            for role in items:
                relations.declare(role, None, line_no)
                rel_subjects.setdefault(role, [])
                rel_objects.setdefault(role, [PSEUDO_TOKEN])
                if name not in rel_subjects[role]:
                    rel_subjects[role].append(name)

    if task is TaskKind.EE and PSEUDO_TOKEN not in entities.parent:
        entities.order.insert(0, PSEUDO_TOKEN)
        entities.parent[PSEUDO_TOKEN] = None

    palette = itertools.cycle(_COLOR_PALETTE)
    entity_defs = tuple(
        EntityTypeDef(
            name=name,
            color=PSEUDO_COLOR if name == PSEUDO_TOKEN else next(palette),
            parent=entities.parent[name],
        )
        for name in entities.order
    )
    relation_defs = tuple(
        RelationTypeDef(
            name=name,
            subject_types=tuple(rel_subjects.get(name, [])),
            object_types=tuple(rel_objects.get(name, [])),
            parent=relations.parent[name],
        )
        for name in relations.order
    )
    return Ontology(task=task, entity_types=entity_defs, relation_types=relation_defs)


def _path_of(name: str, parent_of: dict[str, Optional[str]]) -> str:
    segments = [name]
    node = parent_of.get(name)
    while node is not None:
        segments.append(node)
        node = parent_of.get(node)
    return "/".join(reversed(segments))


def ontology_to_scheme_lines(ontology: Ontology) -> tuple[list[str], list[str]]:
    """Render an ontology back to scheme text lines (inverse of parsing)."""
    entity_parent = {t.name: t.parent for t in ontology.entity_types}
    relation_parent = {r.name: r.parent for r in ontology.relation_types}

    if ontology.task is TaskKind.EE:
        entity_lines = [PSEUDO_TOKEN]
        relation_lines = []
        for event in ontology.event_types():
            roles = ontology.roles_for_event(event)
            relation_lines.append(f"{event}@[{', '.join(roles)}]")
        return entity_lines, relation_lines

    entity_lines = [_path_of(t.name, entity_parent) for t in ontology.entity_types]
    relation_lines = []
    for r in ontology.relation_types:
        path = _path_of(r.name, relation_parent)
        if r.subject_types or r.object_types:
            relation_lines.append(f"{path}@[{'|'.join(r.subject_types)}, {'|'.join(r.object_types)}]")
        else:
            relation_lines.append(f"{path}@[]")
    return entity_lines, relation_lines


def preset_ontology(task: TaskKind) -> Ontology:
    """Small built-in schemes matching the common public-benchmark setups."""
    if task is TaskKind.NER:
        return parse_scheme_text(task, ["PER", "LOC", "ORG", "MISC"], [])
    if task is TaskKind.RE:
        return parse_scheme_text(
            task,
            ["Person", "Organization", "Location"],
            [
                "person-company@[Person, Organization]",
                "place-of-birth@[Person, Location]",
                "company-location@[Organization, Location]",
            ],
        )
    return parse_scheme_text(
        task,
        [PSEUDO_TOKEN],
        [
            "Life:Marry@[Person, Time, Place]",
            "Movement:Transport@[Artifact, Origin, Destination]",
        ],
    )

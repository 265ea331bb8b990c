"""Staged-prompt automatic labeling.

A plan asks the generation endpoint which types from the project scheme are
present, then runs one extraction prompt per confirmed type (plus one
trigger-recognition prompt per confirmed event type).  Replies are parsed
tolerantly, re-asked once with a stricter format reminder, and anything the
scheme does not declare is dropped with a warning.  Extracted triples anchor
to the document text as suggested markups.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from string import Template
from typing import Optional, Union

from .generation import GenerationClient
from .markup import (
    AnnotatedDocument,
    Markup,
    MarkupDraft,
    _find_duplicate,
    _insert_suggested,
    token_aligned_occurrences,
)
from .scheme import (
    EventArgument,
    EventRecord,
    InvalidRecordError,
    NativeRecord,
    NerRecord,
    Ontology,
    PSEUDO,
    PSEUDO_TOKEN,
    ReRecord,
    TaskKind,
    UnifiedTriple,
    from_unified,
    to_unified,
)

logger = logging.getLogger(__name__)

TEMPLATE_ROOT = Path(__file__).parent / "templates"


class TemplateNotFoundError(FileNotFoundError):
    pass


class ReplyParseError(ValueError):
    pass


def render_type_list(ontology: Ontology) -> str:
    """Scheme rendering embedded in the first prompt.

    Entity schemes list type names; relation schemes map each relation to its
    [subject, object] constraint; event schemes map each event type to its
    argument roles.
    """
    if ontology.task is TaskKind.NER:
        return "[" + ", ".join(t.name for t in ontology.entity_types) + "]"
    if ontology.task is TaskKind.RE:
        parts = [
            f"{r.name}: [{'|'.join(r.subject_types)}, {'|'.join(r.object_types)}]"
            for r in ontology.relation_types
            if r.subject_types and r.object_types  # abstract grouping nodes are not annotatable
        ]
        return "{" + ", ".join(parts) + "}"
    parts = [
        f"{event}: [{', '.join(ontology.roles_for_event(event))}]"
        for event in ontology.event_types()
    ]
    return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class PlanStage:
    index: int
    template_id: str
    parser_id: str
    per_type: bool
    template: str
    prompt: Optional[str] = None  # rendered up front only for the opening stage


@dataclass(frozen=True)
class PromptPlan:
    task: TaskKind
    language: str
    text: str
    prefix: str
    ontology: Ontology
    stages: tuple[PlanStage, ...]
    reask_template: str


def _load_template(template_dir: Path, language: str, name: str) -> str:
    path = template_dir / language / f"{name}.txt"
    if not path.is_file():
        raise TemplateNotFoundError(f"no prompt template {language}/{name} under {template_dir}")
    return path.read_text(encoding="utf-8").rstrip("\n")


def build_plan(
    task: TaskKind,
    text: str,
    ontology: Ontology,
    prefix: Optional[str] = None,
    language: str = "en",
    template_dir: Union[str, Path, None] = None,
) -> PromptPlan:
    """Assemble the staged conversation for one text.

    A prefix, when given, lands verbatim before the opening prompt; nothing
    else about the plan changes.
    """
    if not text:
        raise ValueError("cannot plan prompts for empty text")
    root = Path(template_dir) if template_dir else TEMPLATE_ROOT
    key = task.value.lower()

    stage1_template = _load_template(root, language, f"{key}_stage1")
    stage1_prompt = Template(stage1_template).substitute(
        text=text, type_list=render_type_list(ontology))
    if prefix:
        stage1_prompt = f"{prefix}\n\n{stage1_prompt}"

    stages = [
        PlanStage(
            index=1,
            template_id=f"{language}/{key}_stage1",
            parser_id="type-list",
            per_type=False,
            template=stage1_template,
            prompt=stage1_prompt,
        ),
        PlanStage(
            index=2,
            template_id=f"{language}/{key}_stage2",
            parser_id={"ner": "surface-list", "re": "pair-list", "ee": "role-map"}[key],
            per_type=True,
            template=_load_template(root, language, f"{key}_stage2"),
        ),
    ]
    if task is TaskKind.EE:
        stages.append(PlanStage(
            index=3,
            template_id=f"{language}/{key}_stage3",
            parser_id="trigger",
            per_type=True,
            template=_load_template(root, language, f"{key}_stage3"),
        ))

    return PromptPlan(
        task=task,
        language=language,
        text=text,
        prefix=prefix or "",
        ontology=ontology,
        stages=tuple(stages),
        reask_template=_load_template(root, language, "reask"),
    )


# ---------------------------------------------------------------------------
# Reply parsing
# ---------------------------------------------------------------------------

def _is_none_reply(reply: str) -> bool:
    norm = reply.strip().strip('"\'' ).lower().rstrip(".。!")
    if not norm:
        return False
    return (
        norm.startswith("none")
        or norm == "no"
        or norm.startswith("no ")
        or norm.startswith("没有")
        or norm.startswith("无")
        or norm == "n/a"
    )


def _json_fragment(reply: str, opener: str, closer: str):
    start = reply.find(opener)
    end = reply.rfind(closer)
    if start == -1 or end == -1 or end <= start:
        return None
    try:
        return json.loads(reply[start:end + 1])
    except json.JSONDecodeError:
        return None


_BULLET = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s*")


def _loose_items(reply: str) -> list[str]:
    lines = [_BULLET.sub("", line).strip() for line in reply.splitlines()]
    lines = [line for line in lines if line]
    if len(lines) == 1 and "," in lines[0]:
        lines = [part.strip() for part in lines[0].split(",")]
    items = [line.strip("[](){}").strip().strip('"\'' ) for line in lines]
    return [item for item in items if item]


def parse_type_list(reply: str, candidates: list[str]) -> tuple[list[str], list[str]]:
    """Candidate type names confirmed by the reply, in candidate order.

    Names the reply offers that the scheme does not declare come back as
    warnings instead of results.
    """
    if _is_none_reply(reply):
        return [], []
    by_lower = {c.lower(): c for c in candidates}
    warnings: list[str] = []
    confirmed: set[str] = set()

    data = _json_fragment(reply, "[", "]")
    tokens: list[str]
    structured = isinstance(data, list)
    if structured:
        tokens = [str(item).strip() for item in data]
    else:
        tokens = _loose_items(reply)

    for token in tokens:
        canonical = by_lower.get(token.lower())
        if canonical is not None:
            confirmed.add(canonical)
        elif re.fullmatch(r"[\w:.\-]+", token):
            warnings.append(f"reply names undeclared type {token!r}; dropped")

    if not confirmed and not structured:
        # Prose replies: fall back to scanning for the candidate names.
        for candidate in candidates:
            if re.search(rf"(?<!\w){re.escape(candidate)}(?!\w)", reply, re.IGNORECASE):
                confirmed.add(candidate)
        if not confirmed and not warnings:
            raise ReplyParseError(f"cannot read a type list from {reply!r}")

    return [c for c in candidates if c in confirmed], warnings


def parse_surface_list(reply: str) -> list[str]:
    if _is_none_reply(reply):
        return []
    data = _json_fragment(reply, "[", "]")
    if isinstance(data, list):
        return [str(item).strip() for item in data if str(item).strip()]
    items = _loose_items(reply)
    if not items:
        raise ReplyParseError(f"cannot read an entity list from {reply!r}")
    if len(items) == 1 and len(items[0].split()) > 6:
        # A long single line is prose (a refusal or explanation), not a list.
        raise ReplyParseError(f"cannot read an entity list from {reply!r}")
    return items


_PAIR = re.compile(r"[\[(]([^()\[\]]+)[\])]")


def parse_pair_list(reply: str) -> list[tuple[str, str]]:
    if _is_none_reply(reply):
        return []
    data = _json_fragment(reply, "[", "]")
    pairs: list[tuple[str, str]] = []
    if isinstance(data, list):
        for element in data:
            if isinstance(element, (list, tuple)) and len(element) >= 2:
                pairs.append((str(element[0]).strip(), str(element[1]).strip()))
            elif isinstance(element, dict) and len(element) >= 2:
                values = [str(v).strip() for v in element.values()]
                pairs.append((values[0], values[1]))
        if pairs:
            return pairs
    for match in _PAIR.finditer(reply):
        first, _, second = match.group(1).partition(",")
        if second.strip():
            pairs.append((first.strip().strip('"\'' ), second.strip().strip('"\'' )))
    if pairs:
        return pairs
    for line in _loose_items(reply):
        first, _, second = line.partition(",")
        if second.strip():
            pairs.append((first.strip(), second.strip()))
    if not pairs:
        raise ReplyParseError(f"cannot read (subject, object) pairs from {reply!r}")
    return pairs


_ROLE_LINE = re.compile(r"^\s*[-*•]?\s*([^:：]+?)\s*[:：]\s*(.+?)\s*$")


def parse_role_map(reply: str, roles: list[str]) -> tuple[dict[str, str], list[str]]:
    """Role → argument surface, with warnings for roles the scheme lacks."""
    if _is_none_reply(reply):
        return {}, []
    by_lower = {r.lower(): r for r in roles}
    warnings: list[str] = []
    extracted: dict[str, str] = {}

    data = _json_fragment(reply, "{", "}")
    if isinstance(data, dict):
        raw_items = [(str(k), v) for k, v in data.items()]
    else:
        raw_items = []
        for line in reply.splitlines():
            match = _ROLE_LINE.match(line)
            if match:
                raw_items.append((match.group(1), match.group(2)))
        if not raw_items:
            raise ReplyParseError(f"cannot read a role mapping from {reply!r}")

    for raw_role, raw_value in raw_items:
        if isinstance(raw_value, (list, tuple)):
            raw_value = raw_value[0] if raw_value else ""
        value = str(raw_value).strip().strip('"\'' )
        if not value or _is_none_reply(value):
            continue
        role = by_lower.get(raw_role.strip().strip('"\'' ).lower())
        if role is None:
            warnings.append(f"reply names undeclared role {raw_role.strip()!r}; dropped")
            continue
        extracted[role] = value
    return extracted, warnings


def parse_trigger(reply: str) -> str:
    if _is_none_reply(reply):
        return ""
    text = reply.strip()
    lowered = text.lower()
    marker = "trigger word is"
    if marker in lowered:
        text = text[lowered.rindex(marker) + len(marker):]
    text = text.strip().lstrip(":：").strip()
    for line in text.splitlines():
        candidate = line.strip().strip('"\'.。 ')
        if candidate:
            return candidate
    raise ReplyParseError(f"cannot read a trigger word from {reply!r}")


_TYPE_PREFIX = re.compile(r"[A-Za-z][\w.\-]*")


def split_typed_surface(
    item: str,
    requested_type: str,
    ontology: Ontology,
) -> tuple[Optional[str], Optional[str]]:
    """Handle ``TYPE:surface`` reply items.

    Returns (surface, warning): the bare surface when the prefix matches the
    requested type (or is not type-like at all), otherwise no surface plus a
    warning explaining the drop.
    """
    if ":" not in item:
        return item, None
    prefix, _, rest = item.partition(":")
    prefix = prefix.strip()
    rest = rest.strip()
    if not rest:
        return item, None
    if prefix.lower() == requested_type.lower():
        return rest, None
    declared = {t.name.lower() for t in ontology.entity_types}
    if prefix.lower() in declared:
        return None, f"reply typed {rest!r} as {prefix!r} during a {requested_type!r} stage; dropped"
    if _TYPE_PREFIX.fullmatch(prefix):
        return None, f"reply uses undeclared type {prefix!r} for {rest!r}; dropped"
    return item, None


_FORMAT_HINTS = {
    "type-list": 'a JSON list of type names from the given list, e.g. ["TYPE-A"], or "none"',
    "surface-list": 'a JSON list of entity strings, e.g. ["entity one"], or "none"',
    "pair-list": 'a JSON list of [subject, object] pairs, e.g. [["s", "o"]], or "none"',
    "role-map": 'a JSON object mapping role names to argument strings, e.g. {"Role": "text"}, or "none"',
    "trigger": "the trigger word only",
}


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

@dataclass
class ExtractionOutcome:
    triples: list[UnifiedTriple] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


class _Conversation:
    """One sequential exchange with the endpoint, with a single re-ask on
    unparseable replies."""

    def __init__(self, client: GenerationClient, plan: PromptPlan, outcome: ExtractionOutcome):
        self.client = client
        self.plan = plan
        self.outcome = outcome
        self.history: list[tuple[str, str]] = []

    def ask(self, prompt: str, parser, parser_id: str, meta: dict):
        reply = self.client.generate(prompt, list(self.history), meta)
        self.history.append((prompt, reply))
        try:
            return parser(reply)
        except ReplyParseError:
            reask = Template(self.plan.reask_template).substitute(
                format_hint=_FORMAT_HINTS[parser_id])
            retry = self.client.generate(reask, list(self.history), meta)
            self.history.append((reask, retry))
            try:
                return parser(retry)
            except ReplyParseError:
                warning = f"stage {meta.get('stage')} ({meta.get('type') or 'overview'}): reply unparseable after re-ask; skipped"
                self.outcome.warnings.append(warning)
                logger.warning(warning)
                return None


def _stage(plan: PromptPlan, index: int) -> PlanStage:
    return next(s for s in plan.stages if s.index == index)


def execute_plan(client: GenerationClient, plan: PromptPlan) -> ExtractionOutcome:
    """Run the staged conversation and collect unified triples.

    Fires the opening type-presence prompt, then one extraction prompt per
    confirmed type in scheme declaration order.  Every surviving triple
    references only declared types; everything else lands in ``warnings``.
    """
    outcome = ExtractionOutcome()
    conversation = _Conversation(client, plan, outcome)
    ontology = plan.ontology
    task = plan.task

    if task is TaskKind.NER:
        candidates = [t.name for t in ontology.entity_types]
    elif task is TaskKind.RE:
        candidates = [
            r.name for r in ontology.relation_types if r.subject_types and r.object_types
        ]
    else:
        candidates = list(ontology.event_types())

    stage1 = _stage(plan, 1)
    parsed = conversation.ask(
        stage1.prompt,
        lambda reply: parse_type_list(reply, candidates),
        stage1.parser_id,
        {"task": task.value, "stage": 1},
    )
    if parsed is None:
        return outcome
    confirmed, warnings = parsed
    outcome.warnings.extend(warnings)

    stage2 = _stage(plan, 2)
    records: list[NativeRecord] = []

    if task is TaskKind.NER:
        for entity_type in confirmed:
            prompt = Template(stage2.template).substitute(entity_type=entity_type)
            surfaces = conversation.ask(
                prompt, parse_surface_list, stage2.parser_id,
                {"task": task.value, "stage": 2, "type": entity_type})
            if surfaces is None:
                continue
            for item in surfaces:
                surface, warning = split_typed_surface(item, entity_type, ontology)
                if warning:
                    outcome.warnings.append(warning)
                    logger.warning(warning)
                if surface:
                    records.append(NerRecord(entity_type=entity_type, text=surface))

    elif task is TaskKind.RE:
        for relation in confirmed:
            rel_def = ontology.get_relation_type(relation)
            prompt = Template(stage2.template).substitute(
                relation_type=relation,
                subject_types=" or ".join(rel_def.subject_types),
                object_types=" or ".join(rel_def.object_types),
            )
            pairs = conversation.ask(
                prompt, parse_pair_list, stage2.parser_id,
                {"task": task.value, "stage": 2, "type": relation})
            if pairs is None:
                continue
            for subject, obj in pairs:
                if not subject or not obj:
                    outcome.warnings.append(f"incomplete pair for {relation!r}; dropped")
                    continue
                records.append(ReRecord(
                    subject_type=rel_def.subject_types[0],
                    subject=subject,
                    relation=relation,
                    object_type=rel_def.object_types[0],
                    object=obj,
                ))

    else:
        stage3 = _stage(plan, 3)
        role_maps: dict[str, dict[str, str]] = {}
        for event_type in confirmed:
            roles = list(ontology.roles_for_event(event_type))
            prompt = Template(stage2.template).substitute(
                event_type=event_type,
                role_list="[" + ", ".join(roles) + "]",
            )
            parsed = conversation.ask(
                prompt,
                lambda reply, roles=roles: parse_role_map(reply, roles),
                stage2.parser_id,
                {"task": task.value, "stage": 2, "type": event_type})
            if parsed is None:
                role_maps[event_type] = {}
                continue
            role_map, warnings = parsed
            outcome.warnings.extend(warnings)
            role_maps[event_type] = role_map

        for event_type in confirmed:
            prompt = Template(stage3.template).substitute(event_type=event_type)
            trigger = conversation.ask(
                prompt, parse_trigger, stage3.parser_id,
                {"task": task.value, "stage": 3, "type": event_type})
            if trigger is None:
                continue  # unparseable after re-ask; already warned
            if not trigger:
                outcome.warnings.append(f"no trigger recognized for event {event_type!r}; event skipped")
                continue
            role_map = role_maps.get(event_type, {})
            arguments = tuple(
                EventArgument(role=role, text=role_map[role])
                for role in ontology.roles_for_event(event_type)
                if role in role_map
            )
            records.append(EventRecord(event_type=event_type, trigger=trigger, arguments=arguments))

    for record in records:
        try:
            outcome.triples.extend(to_unified(task, record, ontology))
        except InvalidRecordError as error:
            outcome.warnings.append(f"dropped extraction: {error}")
            logger.warning("dropped extraction: %s", error)
    return outcome


# ---------------------------------------------------------------------------
# Materialization
# ---------------------------------------------------------------------------

@dataclass
class MaterializeResult:
    created: list[Markup] = field(default_factory=list)
    unanchorable: list[UnifiedTriple] = field(default_factory=list)


def materialize(
    doc: AnnotatedDocument,
    triples: list[UnifiedTriple],
    task: TaskKind,
    ontology: Ontology,
) -> MaterializeResult:
    """Anchor extracted triples into the document as suggested markups.

    Each distinct surface consumes its case-insensitive token-aligned
    occurrences left to right, so repeated mentions spread over repeated
    extractions deterministically.  Triples whose surfaces never occur are
    reported back, not silently dropped.  One version bump covers the batch.
    """
    result = MaterializeResult()
    occurrences: dict[str, list[tuple[int, int]]] = {}
    cursors: dict[str, int] = {}

    def take_anchor(surface: str) -> Optional[tuple[int, int]]:
        key = surface.lower()
        if key not in occurrences:
            occurrences[key] = token_aligned_occurrences(doc, surface)
        index = cursors.get(key, 0)
        if index >= len(occurrences[key]):
            return None
        cursors[key] = index + 1
        return occurrences[key][index]

    def ensure_entity(name: str, span: tuple[int, int]) -> Markup:
        draft = MarkupDraft(is_entity=True, name=name, start=span[0], end=span[1])
        existing = _find_duplicate(doc, draft)
        if existing is not None:
            return existing
        markup = _insert_suggested(doc, ontology, draft)
        result.created.append(markup)
        return markup

    def ensure_relation(name: str, source: Markup, target: Markup) -> None:
        draft = MarkupDraft(is_entity=False, name=name, source=source.id, target=target.id)
        if _find_duplicate(doc, draft) is None:
            result.created.append(_insert_suggested(doc, ontology, draft))

    for record in from_unified(task, triples):
        if isinstance(record, NerRecord):
            span = take_anchor(record.text)
            if span is None:
                result.unanchorable.extend(to_unified(task, record))
                continue
            ensure_entity(record.entity_type, span)

        elif isinstance(record, ReRecord):
            subject_span = take_anchor(record.subject)
            object_span = take_anchor(record.object)
            if subject_span is None or object_span is None:
                result.unanchorable.extend(to_unified(task, record))
                continue
            subject = ensure_entity(record.subject_type, subject_span)
            obj = ensure_entity(record.object_type, object_span)
            ensure_relation(record.relation, subject, obj)

        else:
            trigger_span = take_anchor(record.trigger)
            if trigger_span is None:
                result.unanchorable.extend(to_unified(task, record))
                continue
            trigger = ensure_entity(record.event_type, trigger_span)
            for argument in record.arguments:
                argument_span = take_anchor(argument.text)
                if argument_span is None:
                    result.unanchorable.append(UnifiedTriple(
                        subject_type=record.event_type,
                        subject=record.trigger,
                        relation=argument.role,
                        object_type=PSEUDO,
                        object=argument.text,
                    ))
                    continue
                argument_markup = ensure_entity(PSEUDO_TOKEN, argument_span)
                ensure_relation(argument.role, trigger, argument_markup)

    if result.created:
        doc.version += 1
    return result

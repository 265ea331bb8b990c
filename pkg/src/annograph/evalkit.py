"""Micro-averaged scoring and annotator-agreement measures.

Matching is exact: an entity counts when its whole span and type agree; a
relation triple when both endpoint spans and the relation agree; an event
argument when its span, role, and event type agree (argument-correct), and a
trigger when its span and event type agree (trigger-correct).  Records that
carry no token span fall back to comparing surfaces.
"""

from __future__ import annotations

from math import comb
from typing import Iterable, Mapping, Optional, Sequence, Union

from .scheme import (
    EventArgument,
    EventRecord,
    NativeRecord,
    NerRecord,
    PSEUDO_TOKEN,
    ReRecord,
    TaskKind,
)

DocSet = Mapping[str, Sequence[NativeRecord]]

ARG_C = "arg_c"
TRIG_C = "trig_c"


def _anchor(span: Optional[tuple[int, int]], text: str) -> tuple:
    return (span, text)


def match_keys(task: TaskKind, records: Iterable[NativeRecord]) -> dict[str, set]:
    """Exact-match keys per scoring criterion.

    Entity and relation tasks use one criterion; event records contribute to
    both the trigger-correct and the argument-correct sets.
    """
    if task is TaskKind.NER:
        keys = {
            (r.entity_type, _anchor(r.span, r.text))
            for r in records
            if isinstance(r, NerRecord)
        }
        return {"f1": keys}
    if task is TaskKind.RE:
        keys = {
            (_anchor(r.subject_span, r.subject), r.relation, _anchor(r.object_span, r.object))
            for r in records
            if isinstance(r, ReRecord)
        }
        return {"f1": keys}

    triggers = set()
    arguments = set()
    for r in records:
        if not isinstance(r, EventRecord):
            continue
        triggers.add((r.event_type, _anchor(r.trigger_span, r.trigger)))
        for arg in r.arguments:
            arguments.add((r.event_type, arg.role, _anchor(arg.span, arg.text)))
    return {TRIG_C: triggers, ARG_C: arguments}


def _prf(true_positive: int, n_pred: int, n_gold: int) -> dict[str, float]:
    if n_pred == 0 and n_gold == 0:
        # Agreement on "nothing to annotate" is vacuously perfect.
        return {"P": 1.0, "R": 1.0, "F1": 1.0}
    precision = true_positive / n_pred if n_pred else 0.0
    recall = true_positive / n_gold if n_gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"P": precision, "R": recall, "F1": f1}


def micro_f1(
    task: TaskKind,
    gold: DocSet,
    pred: DocSet,
) -> dict:
    """Micro-averaged precision/recall/F1 over a document collection.

    Returns ``{"P", "R", "F1"}``; event tasks instead return the pair
    ``{"arg_c": {...}, "trig_c": {...}}``.
    """
    if set(gold) != set(pred):
        missing = set(gold) ^ set(pred)
        raise ValueError(f"gold and pred cover different documents: {sorted(missing)}")

    criteria = ("f1",) if task in (TaskKind.NER, TaskKind.RE) else (ARG_C, TRIG_C)
    tp = {c: 0 for c in criteria}
    n_pred = {c: 0 for c in criteria}
    n_gold = {c: 0 for c in criteria}
    for doc_id in gold:
        gold_keys = match_keys(task, gold[doc_id])
        pred_keys = match_keys(task, pred[doc_id])
        for c in criteria:
            tp[c] += len(gold_keys[c] & pred_keys[c])
            n_pred[c] += len(pred_keys[c])
            n_gold[c] += len(gold_keys[c])

    if task in (TaskKind.NER, TaskKind.RE):
        return _prf(tp["f1"], n_pred["f1"], n_gold["f1"])
    return {c: _prf(tp[c], n_pred[c], n_gold[c]) for c in criteria}


def _pairwise_doc_f1(task: TaskKind, a: Sequence[NativeRecord], b: Sequence[NativeRecord]) -> dict[str, float]:
    keys_a = match_keys(task, a)
    keys_b = match_keys(task, b)
    return {
        c: _prf(len(keys_a[c] & keys_b[c]), len(keys_b[c]), len(keys_a[c]))["F1"]
        for c in keys_a
    }


def intra_group_variance(
    task: TaskKind,
    group: Sequence[DocSet],
    doc_ids: Optional[Sequence[str]] = None,
) -> Union[float, dict[str, float]]:
    """Disagreement within an annotator group.

    One minus the mean pairwise per-document F1, averaged over all documents
    and all unordered member pairs.  Identical members give 0; members with
    no overlap anywhere give 1.  Event tasks report the measure per scoring
    criterion.
    """
    if len(group) < 2:
        raise ValueError("need at least two group members")
    ids = list(doc_ids) if doc_ids is not None else sorted(group[0])
    for member in group:
        if set(member) != set(ids):
            raise ValueError("every group member must cover the same documents")
    if not ids:
        raise ValueError("empty document list")

    criteria = ["f1"] if task in (TaskKind.NER, TaskKind.RE) else [ARG_C, TRIG_C]
    totals = {c: 0.0 for c in criteria}
    pair_count = comb(len(group), 2)
    for doc_id in ids:
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                doc_f1 = _pairwise_doc_f1(task, group[i][doc_id], group[j][doc_id])
                for c in criteria:
                    totals[c] += doc_f1[c]

    normalizer = len(ids) * pair_count
    variances = {c: 1.0 - totals[c] / normalizer for c in criteria}
    if task in (TaskKind.NER, TaskKind.RE):
        return variances["f1"]
    return variances


# ---------------------------------------------------------------------------
# Export-file loading for the CLI
# ---------------------------------------------------------------------------

def records_from_export(payload: dict, task: TaskKind) -> dict[str, list[NativeRecord]]:
    """Read per-document native records out of an export payload."""
    result: dict[str, list[NativeRecord]] = {}
    for text_block in payload.get("texts", []):
        doc_id = text_block["docId"]
        markups = {m["_id"]: m for m in text_block.get("markups", [])}
        entities = [m for m in markups.values() if m["isEntity"]]
        relations = [m for m in markups.values() if not m["isEntity"]]
        records: list[NativeRecord] = []

        if task is TaskKind.NER:
            records = [
                NerRecord(entity_type=m["name"], text=m["entityText"], span=(m["start"], m["end"]))
                for m in entities
            ]
        elif task is TaskKind.RE:
            for rel in relations:
                subject = markups.get(rel.get("source"))
                obj = markups.get(rel.get("target"))
                if subject is None or obj is None:
                    continue
                records.append(ReRecord(
                    subject_type=subject["name"],
                    subject=subject["entityText"],
                    relation=rel["name"],
                    object_type=obj["name"],
                    object=obj["entityText"],
                    subject_span=(subject["start"], subject["end"]),
                    object_span=(obj["start"], obj["end"]),
                ))
        else:
            for trigger in entities:
                if trigger["name"] == PSEUDO_TOKEN:
                    continue
                arguments = []
                for rel in relations:
                    if rel.get("source") != trigger["_id"]:
                        continue
                    argument = markups.get(rel.get("target"))
                    if argument is None:
                        continue
                    arguments.append(EventArgument(
                        role=rel["name"],
                        text=argument["entityText"],
                        span=(argument["start"], argument["end"]),
                    ))
                records.append(EventRecord(
                    event_type=trigger["name"],
                    trigger=trigger["entityText"],
                    arguments=tuple(arguments),
                    trigger_span=(trigger["start"], trigger["end"]),
                ))
        result[doc_id] = records
    return result

"""Export format: the stable JSON the service emits and re-ingests.

Markups serialize under their canonical attribute spellings (``isEntity``,
``suggested``, ``_id``, ``name``, ``labelId``, ``source``, ``target``,
``start``, ``end``, ``entityText``); fields a markup kind does not carry are
omitted.  Key order and array ordering are fixed so identical project state
always produces identical bytes, and an export→import→export cycle is
lossless.
"""

from __future__ import annotations

import json
from typing import Iterable, Optional

from .markup import AnnotatedDocument, Markup, document_to_records
from .scheme import Ontology, TaskKind, to_unified


def markup_to_json(markup: Markup) -> dict:
    payload = {
        "isEntity": markup.is_entity,
        "suggested": markup.suggested,
        "_id": markup.id,
        "name": markup.name,
        "labelId": markup.label_id,
    }
    if markup.is_entity:
        payload["start"] = markup.start
        payload["end"] = markup.end
        payload["entityText"] = markup.entity_text
    else:
        payload["source"] = markup.source
        payload["target"] = markup.target
    return payload


def markup_from_json(payload: dict) -> Markup:
    return Markup(
        is_entity=payload["isEntity"],
        suggested=payload["suggested"],
        id=payload["_id"],
        name=payload["name"],
        label_id=payload["labelId"],
        source=payload.get("source"),
        target=payload.get("target"),
        start=payload.get("start"),
        end=payload.get("end"),
        entity_text=payload.get("entityText"),
    )


def _markup_sort_key(markup: Markup) -> tuple:
    # Entities first by span position; relations follow by id.
    if markup.is_entity:
        return (0, markup.start, markup.id)
    return (1, 0, markup.id)


def filter_markups(doc: AnnotatedDocument, quality: str = "all") -> list[Markup]:
    """Markups passing a quality filter, relations only when both endpoints pass."""
    if quality == "all":
        pool = list(doc.markups.values())
    elif quality == "accepted":
        pool = [m for m in doc.markups.values() if not m.suggested]
    elif quality == "suggested":
        pool = [m for m in doc.markups.values() if m.suggested]
    else:
        raise ValueError(f"quality must be all|accepted|suggested, got {quality!r}")
    kept_ids = {m.id for m in pool if m.is_entity}
    return [
        m for m in pool
        if m.is_entity or (m.source in kept_ids and m.target in kept_ids)
    ]


def document_to_export_block(doc: AnnotatedDocument, task: TaskKind, quality: str = "all") -> dict:
    markups = sorted(filter_markups(doc, quality), key=_markup_sort_key)
    triples = []
    for record in document_to_records(doc, task, markups=markups):
        triples.extend(t.to_json() for t in to_unified(task, record))
    return {
        "docId": doc.doc_id,
        "text": doc.text,
        "language": doc.language,
        "clusterId": doc.cluster_id,
        "saved": doc.saved,
        "tokens": [{"text": t.text, "start": t.start, "end": t.end} for t in doc.tokens],
        "markups": [markup_to_json(m) for m in markups],
        "triples": triples,
    }


def build_export(
    project_meta: dict,
    ontology: Ontology,
    docs: Iterable[AnnotatedDocument],
    task: TaskKind,
    quality: str = "all",
    saved_only: bool = False,
) -> dict:
    """Assemble the export envelope for a project.

    `project_meta` carries only reproducible fields (name, description,
    language, task) so that re-exporting an imported copy is byte-identical.
    """
    selected = [d for d in docs if d.saved or not saved_only]
    selected.sort(key=lambda d: d.doc_id)
    return {
        "project": {
            "name": project_meta.get("name", ""),
            "description": project_meta.get("description", ""),
            "task": task.value,
            "language": project_meta.get("language", "en"),
            "ontology": ontology.to_json(),
        },
        "filter": {"quality": quality, "savedOnly": saved_only},
        "texts": [document_to_export_block(d, task, quality) for d in selected],
    }


def export_bytes(payload: dict) -> bytes:
    return (json.dumps(payload, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def document_from_export_block(block: dict, doc_id: Optional[str] = None) -> AnnotatedDocument:
    doc = AnnotatedDocument(
        doc_id=doc_id or block["docId"],
        text=block["text"],
        language=block.get("language", "en"),
        cluster_id=block.get("clusterId"),
        saved=block.get("saved", False),
    )
    for item in block.get("markups", []):
        doc.restore_markup(markup_from_json(item))
    return doc

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from annograph.export import (
    build_export,
    document_from_export_block,
    document_to_export_block,
    export_bytes,
    markup_from_json,
    markup_to_json,
)
from annograph.markup import AnnotatedDocument, MarkupDraft, add_markup
from annograph.scheme import TaskKind
from annograph.service import create_app
from annograph.store import DocumentStore

TABLE_FIELDS_ENTITY = ["isEntity", "suggested", "_id", "name", "labelId", "start", "end", "entityText"]
TABLE_FIELDS_RELATION = ["isEntity", "suggested", "_id", "name", "labelId", "source", "target"]


class TestMarkupSerialization:
    def test_entity_field_names_and_order(self, james_doc, ner_ontology):
        markup = add_markup(james_doc, MarkupDraft(True, "PER", start=0, end=0),
                            "accepted", ner_ontology)
        payload = markup_to_json(markup)
        assert list(payload) == TABLE_FIELDS_ENTITY
        assert payload["entityText"] == "James"
        assert markup_from_json(payload) == markup

    def test_relation_field_names(self, johnson_doc, re_ontology):
        subject = add_markup(johnson_doc, MarkupDraft(True, "Person", start=0, end=2),
                             "accepted", re_ontology)
        obj = add_markup(johnson_doc, MarkupDraft(True, "Organization", start=16, end=18),
                         "accepted", re_ontology)
        rel = add_markup(
            johnson_doc,
            MarkupDraft(False, "person-company", source=subject.id, target=obj.id),
            "accepted", re_ontology)
        payload = markup_to_json(rel)
        assert list(payload) == TABLE_FIELDS_RELATION
        assert markup_from_json(payload) == rel


class TestDocumentBlock:
    def test_block_round_trip(self, james_doc, ner_ontology):
        add_markup(james_doc, MarkupDraft(True, "PER", start=0, end=0), "accepted", ner_ontology)
        add_markup(james_doc, MarkupDraft(True, "ORG", start=3, end=3), "suggested", ner_ontology)
        block = document_to_export_block(james_doc, TaskKind.NER)
        restored = document_from_export_block(block)
        assert document_to_export_block(restored, TaskKind.NER) == block

    def test_quality_filter_in_block(self, james_doc, ner_ontology):
        add_markup(james_doc, MarkupDraft(True, "PER", start=0, end=0), "accepted", ner_ontology)
        add_markup(james_doc, MarkupDraft(True, "ORG", start=3, end=3), "suggested", ner_ontology)
        accepted = document_to_export_block(james_doc, TaskKind.NER, quality="accepted")
        assert len(accepted["markups"]) == 1
        assert len(accepted["triples"]) == 1

    def test_triples_use_pseudo_token(self, james_doc, ner_ontology):
        add_markup(james_doc, MarkupDraft(True, "PER", start=0, end=0), "accepted", ner_ontology)
        block = document_to_export_block(james_doc, TaskKind.NER)
        assert block["triples"] == [{
            "subjectType": "PER", "subject": "James",
            "relation": "_", "objectType": "_", "object": "_",
            "subjectSpan": [0, 0],
        }]

    def test_relation_dropped_when_endpoint_filtered_out(self, johnson_doc, re_ontology):
        subject = add_markup(johnson_doc, MarkupDraft(True, "Person", start=0, end=2),
                             "suggested", re_ontology)
        obj = add_markup(johnson_doc, MarkupDraft(True, "Organization", start=16, end=18),
                         "accepted", re_ontology)
        add_markup(johnson_doc,
                   MarkupDraft(False, "person-company", source=subject.id, target=obj.id),
                   "accepted", re_ontology)
        accepted = document_to_export_block(johnson_doc, TaskKind.RE, quality="accepted")
        assert [m["_id"] for m in accepted["markups"]] == [obj.id]


@pytest.fixture
def api():
    app = create_app(store=DocumentStore())
    with TestClient(app) as client:
        client.post("/auth/register", json={"name": "ann", "password": "pw"})
        token = client.post("/auth/login", json={"name": "ann", "password": "pw"}).json()["token"]
        client.headers["Authorization"] = f"Bearer {token}"
        yield client


_WIZARD = {
    "name": "news",
    "task": "NER",
    "entity_lines": ["PER", "LOC", "ORG", "MISC"],
    "texts": ["James worked for Google in Tokyo.", "Google expanded again."],
}


class TestServiceExport:
    def test_empty_project_envelope(self, api):
        project_id = api.post("/projects", json={**_WIZARD, "texts": []}).json()["project_id"]
        payload = api.get(f"/projects/{project_id}/export").json()
        assert payload["texts"] == []
        assert payload["project"]["name"] == "news"

    def test_quality_filter_counts(self, api):
        project_id = api.post("/projects", json=_WIZARD).json()["project_id"]
        text_id = api.get(f"/projects/{project_id}/texts").json()["texts"][0]["text_id"]
        for start, state in [(0, "accepted"), (3, "accepted"), (5, "suggested"),
                             (1, "suggested"), (2, "suggested")]:
            api.post(f"/texts/{text_id}/markups", json={
                "is_entity": True, "name": "MISC", "start": start, "end": start, "state": state})
        payload = api.get(f"/projects/{project_id}/export", params={"quality": "accepted"}).json()
        assert len(payload["texts"][0]["markups"]) == 2
        all_payload = api.get(f"/projects/{project_id}/export").json()
        assert len(all_payload["texts"][0]["markups"]) == 5

    def test_round_trip_bytes_identical(self, api):
        project_id = api.post("/projects", json=_WIZARD).json()["project_id"]
        texts = api.get(f"/projects/{project_id}/texts").json()["texts"]
        text_id = texts[0]["text_id"]
        markup = api.post(f"/texts/{text_id}/markups", json={
            "is_entity": True, "name": "ORG", "start": 3, "end": 3}).json()["markup"]
        api.post(f"/markups/{markup['_id']}/propagate", json={"scope": "project"})
        api.post(f"/texts/{text_id}/save", json={"saved": True})

        first = api.get(f"/projects/{project_id}/export").content
        fresh_id = api.post("/projects", json={**_WIZARD, "texts": []}).json()["project_id"]
        imported = api.post(f"/projects/{fresh_id}/import", json=json.loads(first))
        assert imported.status_code == 200
        assert imported.json()["imported"] == 2
        second = api.get(f"/projects/{fresh_id}/export").content
        assert first == second

    def test_import_rejects_duplicate_doc_ids(self, api):
        project_id = api.post("/projects", json=_WIZARD).json()["project_id"]
        payload = api.get(f"/projects/{project_id}/export").json()
        assert api.post(f"/projects/{project_id}/import", json=payload).status_code == 422

    def test_import_rejects_unknown_labels_and_bad_spans(self, api):
        project_id = api.post("/projects", json={**_WIZARD, "texts": []}).json()["project_id"]
        base = {
            "docId": "alien", "text": "short text", "language": "en",
            "clusterId": None, "saved": False, "tokens": [],
        }
        bad_label = {**base, "markups": [{
            "isEntity": True, "suggested": False, "_id": "alien.m0001",
            "name": "NOPE", "labelId": "E9", "start": 0, "end": 0, "entityText": "short"}]}
        response = api.post(f"/projects/{project_id}/import", json={"texts": [bad_label]})
        assert response.status_code == 422
        assert "NOPE" in response.json()["detail"]
        bad_span = {**base, "markups": [{
            "isEntity": True, "suggested": False, "_id": "alien.m0001",
            "name": "PER", "labelId": "E1", "start": 5, "end": 9, "entityText": "x"}]}
        assert api.post(f"/projects/{project_id}/import",
                        json={"texts": [bad_span]}).status_code == 422

    def test_saved_only_filter(self, api):
        project_id = api.post("/projects", json=_WIZARD).json()["project_id"]
        texts = api.get(f"/projects/{project_id}/texts").json()["texts"]
        api.post(f"/texts/{texts[0]['text_id']}/save", json={"saved": True})
        payload = api.get(f"/projects/{project_id}/export",
                          params={"saved_only": True}).json()
        assert len(payload["texts"]) == 1

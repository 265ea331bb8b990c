"""HTTP facade: accounts, projects, texts, markups, auto-labeling, export.

State lives in three store collections (users, projects, texts).  Document
mutations are optimistic: writers may send the version they read and get a
409 back when someone else moved the document first.
"""

from __future__ import annotations

import hashlib
import json
import logging
import secrets
import threading
from typing import Optional, Union

from fastapi import Depends, FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from . import autolabel as autolabel_mod
from .export import (
    build_export,
    document_from_export_block,
    document_to_export_block,
    export_bytes,
    filter_markups,
    markup_to_json,
)
from .generation import GenerationClient, GenerationUnavailableError
from .knowledge import KnowledgeBase, fact_from_markup
from .markup import (
    AnnotatedDocument,
    MarkupDraft,
    MarkupError,
    UnknownMarkupError,
    VersionConflictError,
    add_markup,
    counts,
    propagate,
    transition,
)
from .pipeline import (
    PreprocessFlags,
    ProjectConfig,
    cluster,
    import_preannotation,
    preprocess,
    review_summary,
)
from .scheme import (
    Ontology,
    SchemeError,
    TaskKind,
    parse_scheme_text,
    validate_ontology,
)
from .store import DocumentStore

logger = logging.getLogger(__name__)


class HttpError(Exception):
    def __init__(self, status_code: int, detail, headers: Optional[dict] = None):
        self.status_code = status_code
        self.detail = detail
        self.headers = headers
        super().__init__(str(detail))


# ---------------------------------------------------------------------------
# Request bodies
# ---------------------------------------------------------------------------

class Credentials(BaseModel):
    name: str
    password: str


class PreprocessingModel(BaseModel):
    lowercase: bool = False
    remove_chars: list[str] = Field(default_factory=list)
    deduplicate: bool = False

    def to_flags(self) -> PreprocessFlags:
        return PreprocessFlags(
            lowercase=self.lowercase,
            remove_chars=frozenset(self.remove_chars),
            deduplicate=self.deduplicate,
        )


class WizardPayload(BaseModel):
    name: str
    description: str = ""
    task: str
    language: str = "en"
    model_update: bool = False
    clustering: bool = False
    preprocessing: PreprocessingModel = Field(default_factory=PreprocessingModel)
    entity_lines: list[str] = Field(default_factory=list)
    relation_lines: list[str] = Field(default_factory=list)
    texts: list[str] = Field(default_factory=list)
    texts_raw: str = ""  # keyboard/file upload: one document per line
    preannotation: Union[list[dict], str] = Field(default_factory=list)
    kb_threshold: int = 2

    def all_texts(self) -> list[str]:
        uploaded = [line for line in self.texts_raw.splitlines() if line.strip()]
        return list(self.texts) + uploaded

    def preannotation_rows(self) -> list[dict]:
        if isinstance(self.preannotation, list):
            return self.preannotation
        rows = []
        for line_no, line in enumerate(self.preannotation.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as error:
                raise HttpError(422, f"preannotation line {line_no}: {error}")
        return rows


class TextsPayload(BaseModel):
    texts: list[str]


class MarkupPayload(BaseModel):
    is_entity: bool
    name: str
    state: str = "accepted"
    start: Optional[int] = None
    end: Optional[int] = None
    source: Optional[str] = None
    target: Optional[str] = None
    version: Optional[int] = None


class TransitionPayload(BaseModel):
    action: str
    version: Optional[int] = None


class PropagatePayload(BaseModel):
    scope: str = "project"


class SavePayload(BaseModel):
    saved: bool
    version: Optional[int] = None


# ---------------------------------------------------------------------------
# Persistence helpers
# ---------------------------------------------------------------------------

def _hash_password(password: str, salt: str) -> str:
    return hashlib.pbkdf2_hmac("sha256", password.encode(), bytes.fromhex(salt), 100_000).hex()


def _doc_to_record(doc: AnnotatedDocument, project_id: str, text_id: str) -> dict:
    return {
        "_id": text_id,
        "project_id": project_id,
        "doc_id": doc.doc_id,
        "text": doc.text,
        "language": doc.language,
        "cluster_id": doc.cluster_id,
        "saved": doc.saved,
        "version": doc.version,
        "markups": [markup_to_json(m) for m in doc.markups.values()],
    }


def _doc_from_record(record: dict) -> AnnotatedDocument:
    doc = document_from_export_block(
        {
            "docId": record["doc_id"],
            "text": record["text"],
            "language": record.get("language", "en"),
            "clusterId": record.get("cluster_id"),
            "saved": record.get("saved", False),
            "markups": record.get("markups", []),
        }
    )
    doc.version = record.get("version", 0)
    return doc


def _project_ontology(project: dict) -> Ontology:
    return Ontology.from_json(project["ontology"])


def _validate_imported_doc(doc: AnnotatedDocument, ontology: Ontology) -> None:
    for m in doc.markups.values():
        where = f"document {doc.doc_id!r}, markup {m.id!r}"
        if m.is_entity:
            if ontology.get_entity_type(m.name) is None:
                raise HttpError(422, f"{where}: unknown entity type {m.name!r}")
            if m.start is None or m.end is None or not (0 <= m.start <= m.end < len(doc.tokens)):
                raise HttpError(422, f"{where}: span out of range")
        else:
            if ontology.get_relation_type(m.name) is None:
                raise HttpError(422, f"{where}: unknown relation type {m.name!r}")
            for endpoint in (m.source, m.target):
                other = doc.markups.get(endpoint or "")
                if other is None or not other.is_entity:
                    raise HttpError(422, f"{where}: dangling endpoint {endpoint!r}")


def _project_config(project: dict) -> ProjectConfig:
    pp = project.get("preprocessing", {})
    return ProjectConfig(
        name=project["name"],
        description=project.get("description", ""),
        task=TaskKind(project["task"]),
        language=project.get("language", "en"),
        model_update=project.get("model_update", False),
        clustering=project.get("clustering", False),
        preprocessing=PreprocessFlags(
            lowercase=pp.get("lowercase", False),
            remove_chars=frozenset(pp.get("remove_chars", [])),
            deduplicate=pp.get("deduplicate", False),
        ),
    )


# ---------------------------------------------------------------------------
# App factory
# ---------------------------------------------------------------------------

def create_app(
    store: Optional[DocumentStore] = None,
    generation_client: Optional[GenerationClient] = None,
    template_dir=None,
    embedding_provider=None,
    autolabel_cap: int = 4,
) -> FastAPI:
    app = FastAPI(title="annograph", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store or DocumentStore()
    app.state.gen_client = generation_client
    app.state.template_dir = template_dir
    app.state.embedding_provider = embedding_provider
    # Bounds concurrent generation conversations; stages within one plan stay sequential.
    app.state.autolabel_slots = threading.BoundedSemaphore(autolabel_cap)

    @app.exception_handler(HttpError)
    async def _http_error(request: Request, exc: HttpError):
        return JSONResponse(status_code=exc.status_code, content={"detail": exc.detail},
                            headers=exc.headers)

    @app.exception_handler(VersionConflictError)
    async def _conflict(request: Request, exc: VersionConflictError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(UnknownMarkupError)
    async def _unknown_markup(request: Request, exc: UnknownMarkupError):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(MarkupError)
    async def _markup_error(request: Request, exc: MarkupError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(SchemeError)
    async def _scheme_error(request: Request, exc: SchemeError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(GenerationUnavailableError)
    async def _generation_down(request: Request, exc: GenerationUnavailableError):
        return JSONResponse(status_code=503, content={"detail": str(exc)})

    def get_store() -> DocumentStore:
        return app.state.store

    def current_user(request: Request) -> dict:
        token = None
        auth = request.headers.get("Authorization", "")
        if auth.startswith("Bearer "):
            token = auth[len("Bearer "):]
        if token is None:
            token = request.cookies.get("session")
        if token:
            for user in get_store().all("users"):
                if token in user.get("tokens", []):
                    return user
        raise HttpError(401, "not authenticated")

    def project_for(user: dict, project_id: str) -> dict:
        project = get_store().get("projects", project_id)
        if project is None or user["_id"] not in project.get("members", []):
            raise HttpError(404, f"no project {project_id!r}")
        return project

    def project_text_records(project_id: str) -> list[dict]:
        records = get_store().find("texts", lambda r: r["project_id"] == project_id)
        records.sort(key=lambda r: r["_id"])
        return records

    def text_for(user: dict, text_id: str) -> tuple[dict, dict]:
        record = get_store().get("texts", text_id)
        if record is None:
            raise HttpError(404, f"no text {text_id!r}")
        project = project_for(user, record["project_id"])
        return project, record

    def locate_markup(user: dict, markup_id: str) -> tuple[dict, dict]:
        """Find the text record holding a markup among the user's projects."""
        matches = []
        for record in get_store().all("texts"):
            if any(m["_id"] == markup_id for m in record.get("markups", [])):
                project = get_store().get("projects", record["project_id"])
                if project and user["_id"] in project.get("members", []):
                    matches.append((project, record))
        if not matches:
            raise HttpError(404, f"no markup {markup_id!r}")
        if len(matches) > 1:
            raise HttpError(409, f"markup id {markup_id!r} is ambiguous across projects")
        return matches[0]

    def load_kb(project: dict) -> KnowledgeBase:
        return KnowledgeBase.load(project.get("kb", {"projectId": project["_id"]}))

    def save_doc(project: dict, record: dict, doc: AnnotatedDocument) -> None:
        get_store().put("texts", record["_id"], _doc_to_record(doc, project["_id"], record["_id"]))

    def ingest_accept(kb: KnowledgeBase, doc: AnnotatedDocument, markup_ids) -> None:
        for markup_id in markup_ids:
            kind, surfaces, label = fact_from_markup(doc, doc.get(markup_id))
            kb.observe_accept(kind, surfaces, label)

    # -- auth ---------------------------------------------------------------

    @app.post("/auth/register", status_code=201)
    def register(body: Credentials):
        store = get_store()
        with store.lock:
            if store.find("users", lambda u: u["name"] == body.name):
                raise HttpError(422, f"user name {body.name!r} is taken")
            salt = secrets.token_hex(8)
            user_id = store.insert("users", {
                "name": body.name,
                "salt": salt,
                "password_hash": _hash_password(body.password, salt),
                "tokens": [],
            })
        return {"user_id": user_id}

    @app.post("/auth/login")
    def login(body: Credentials, response: Response):
        store = get_store()
        with store.lock:
            users = store.find("users", lambda u: u["name"] == body.name)
            if not users or users[0]["password_hash"] != _hash_password(body.password, users[0]["salt"]):
                raise HttpError(401, "bad credentials")
            user = users[0]
            token = secrets.token_hex(16)
            user.setdefault("tokens", []).append(token)
            store.put("users", user["_id"], user)
        response.set_cookie("session", token, httponly=True)
        return {"token": token, "user_id": user["_id"]}

    # -- projects -------------------------------------------------------------

    @app.post("/projects", status_code=201)
    def create_project(body: WizardPayload, user: dict = Depends(current_user)):
        store = get_store()
        try:
            task = TaskKind(body.task)
        except ValueError:
            raise HttpError(422, f"task must be one of NER|RE|EE, got {body.task!r}")
        ontology = parse_scheme_text(task, body.entity_lines, body.relation_lines)
        issues = validate_ontology(ontology)
        if issues:
            raise HttpError(422, {
                "message": "scheme validation failed",
                "violations": [{"code": i.code, "message": i.message} for i in issues],
            })

        flags = body.preprocessing.to_flags()
        cleaned, report = preprocess(body.all_texts(), flags)
        assignments = (
            cluster(cleaned, provider=app.state.embedding_provider)
            if (body.clustering and cleaned) else [None] * len(cleaned)
        )

        with store.lock:
            kb = KnowledgeBase(threshold=body.kb_threshold, language=body.language)
            project_id = store.insert("projects", {
                "name": body.name,
                "description": body.description,
                "task": task.value,
                "language": body.language,
                "model_update": body.model_update,
                "clustering": body.clustering,
                "preprocessing": {
                    "lowercase": flags.lowercase,
                    "remove_chars": sorted(flags.remove_chars),
                    "deduplicate": flags.deduplicate,
                },
                "ontology": ontology.to_json(),
                "members": [user["_id"]],
                "kb": kb.dump(),
            })
            project = store.get("projects", project_id)
            kb.project_id = project_id
            project["kb"] = kb.dump()
            store.put("projects", project_id, project)

            docs = []
            for index, text in enumerate(cleaned):
                text_id = store.insert("texts", {"project_id": project_id})
                doc = AnnotatedDocument(
                    doc_id=text_id, text=text,
                    language=body.language,
                    cluster_id=assignments[index],
                )
                store.put("texts", text_id, _doc_to_record(doc, project_id, text_id))
                docs.append((text_id, doc))

            preann = import_preannotation([d for _, d in docs], ontology, body.preannotation_rows())
            for text_id, doc in docs:
                store.put("texts", text_id, _doc_to_record(doc, project_id, text_id))

        config = _project_config(project)
        return {
            "project_id": project_id,
            "review": review_summary(config, cleaned, ontology),
            "preprocessing": {
                "duplicates_dropped": len(report.duplicates),
                "characters_removed": sum(report.removed_chars),
            },
            "preannotation": {
                "created": len(preann.created),
                "errors": preann.errors,
            },
        }

    @app.get("/projects")
    def list_projects(user: dict = Depends(current_user)):
        projects = get_store().find("projects", lambda p: user["_id"] in p.get("members", []))
        return {
            "projects": [
                {"project_id": p["_id"], "name": p["name"], "task": p["task"],
                 "language": p.get("language", "en")}
                for p in sorted(projects, key=lambda p: p["_id"])
            ]
        }

    @app.get("/projects/{project_id}")
    def get_project(project_id: str, user: dict = Depends(current_user)):
        project = project_for(user, project_id)
        return {
            "project_id": project["_id"],
            "name": project["name"],
            "description": project.get("description", ""),
            "task": project["task"],
            "language": project.get("language", "en"),
            "model_update": project.get("model_update", False),
            "clustering": project.get("clustering", False),
            "ontology": project["ontology"],
        }

    @app.get("/projects/{project_id}/texts")
    def list_texts(project_id: str, cluster_id: Optional[int] = Query(default=None),
                   user: dict = Depends(current_user)):
        project_for(user, project_id)
        records = project_text_records(project_id)
        if cluster_id is not None:
            records = [r for r in records if r.get("cluster_id") == cluster_id]
        return {
            "texts": [
                {
                    "text_id": r["_id"],
                    "doc_id": r["doc_id"],
                    "text": r["text"],
                    "cluster_id": r.get("cluster_id"),
                    "saved": r.get("saved", False),
                    "version": r.get("version", 0),
                    "markup_count": len(r.get("markups", [])),
                }
                for r in records
            ]
        }

    @app.post("/projects/{project_id}/texts", status_code=201)
    def add_texts(project_id: str, body: TextsPayload, user: dict = Depends(current_user)):
        store = get_store()
        project = project_for(user, project_id)
        config = _project_config(project)
        cleaned, _ = preprocess(body.texts, config.preprocessing)
        with store.lock:
            text_ids = []
            for text in cleaned:
                text_id = store.insert("texts", {"project_id": project_id})
                doc = AnnotatedDocument(doc_id=text_id, text=text, language=config.language)
                store.put("texts", text_id, _doc_to_record(doc, project_id, text_id))
                text_ids.append(text_id)
        return {"text_ids": text_ids}

    @app.get("/texts/{text_id}")
    def get_text(text_id: str, user: dict = Depends(current_user)):
        project, record = text_for(user, text_id)
        doc = _doc_from_record(record)
        block = document_to_export_block(doc, TaskKind(project["task"]))
        block["text_id"] = record["_id"]
        block["project_id"] = project["_id"]
        block["version"] = doc.version
        return block

    # -- markups -----------------------------------------------------------

    @app.post("/texts/{text_id}/markups", status_code=201)
    def create_markup(text_id: str, body: MarkupPayload, user: dict = Depends(current_user)):
        store = get_store()
        project, record = text_for(user, text_id)
        ontology = _project_ontology(project)
        with store.lock:
            doc = _doc_from_record(record)
            draft = MarkupDraft(
                is_entity=body.is_entity, name=body.name,
                source=body.source, target=body.target,
                start=body.start, end=body.end,
            )
            version_before = doc.version
            markup = add_markup(doc, draft, body.state, ontology, expected_version=body.version)
            newly_created = doc.version > version_before
            if newly_created and body.state == "accepted" and project.get("model_update"):
                kb = load_kb(project)
                ingest_accept(kb, doc, [markup.id])
                project["kb"] = kb.dump()
                store.put("projects", project["_id"], project)
            save_doc(project, record, doc)
        return {"markup": markup_to_json(markup), "version": doc.version}

    @app.post("/markups/{markup_id}/transition")
    def transition_markup(markup_id: str, body: TransitionPayload,
                          user: dict = Depends(current_user)):
        store = get_store()
        project, record = locate_markup(user, markup_id)
        ontology = _project_ontology(project)
        with store.lock:
            doc = _doc_from_record(record)
            # Snapshot facts before deletion so relation endpoints still resolve.
            accepted_facts = {
                m.id: fact_from_markup(doc, m)
                for m in doc.markups.values() if not m.suggested
            }
            summary = transition(doc, markup_id, body.action, expected_version=body.version)
            if project.get("model_update"):
                kb = load_kb(project)
                ingest_accept(kb, doc, summary.accepted)
                for removed_id in summary.deleted:
                    fact = accepted_facts.get(removed_id)
                    if fact is not None:
                        kb.observe_remove(*fact)
                project["kb"] = kb.dump()
                store.put("projects", project["_id"], project)
            save_doc(project, record, doc)
        return {
            "action": summary.action,
            "accepted": list(summary.accepted),
            "deleted": list(summary.deleted),
            "version": doc.version,
        }

    @app.post("/markups/{markup_id}/propagate")
    def propagate_markup(markup_id: str, body: PropagatePayload,
                         user: dict = Depends(current_user)):
        store = get_store()
        project, record = locate_markup(user, markup_id)
        ontology = _project_ontology(project)
        with store.lock:
            records = project_text_records(project["_id"])
            docs = {r["_id"]: _doc_from_record(r) for r in records}
            seed_doc = docs[record["_id"]]
            seed = seed_doc.get(markup_id)
            created = propagate(list(docs.values()), seed, body.scope, ontology)
            created_ids = {m.id for m in created}
            versions = {}
            for r in records:
                doc = docs[r["_id"]]
                save_doc(project, r, doc)
                versions[r["_id"]] = doc.version
            payload = []
            for r in records:
                doc = docs[r["_id"]]
                for m in doc.markups.values():
                    if m.id in created_ids:
                        item = markup_to_json(m)
                        item["text_id"] = r["_id"]
                        payload.append(item)
        return {"created": payload, "versions": versions}

    @app.post("/texts/{text_id}/autolabel")
    def autolabel_text(text_id: str, user: dict = Depends(current_user)):
        store = get_store()
        client = app.state.gen_client
        if client is None:
            raise GenerationUnavailableError("no generation endpoint configured")
        project, record = text_for(user, text_id)
        ontology = _project_ontology(project)
        task = TaskKind(project["task"])
        doc = _doc_from_record(record)

        prefix = None
        if project.get("model_update"):
            prefix = load_kb(project).generate_prefix(doc.text) or None
        plan = autolabel_mod.build_plan(
            task, doc.text, ontology, prefix=prefix,
            language=project.get("language", "en"),
            template_dir=app.state.template_dir,
        )
        with app.state.autolabel_slots:
            outcome = autolabel_mod.execute_plan(client, plan)  # may raise 503

        with store.lock:
            doc = _doc_from_record(store.get("texts", text_id))
            result = autolabel_mod.materialize(doc, outcome.triples, task, ontology)
            save_doc(project, record, doc)
        return {
            "created": [markup_to_json(m) for m in result.created],
            "unanchorable": [t.to_json() for t in result.unanchorable],
            "warnings": outcome.warnings,
            "prefix": prefix or "",
            "version": doc.version,
        }

    @app.post("/texts/{text_id}/save")
    def save_text(text_id: str, body: SavePayload, user: dict = Depends(current_user)):
        store = get_store()
        project, record = text_for(user, text_id)
        with store.lock:
            doc = _doc_from_record(record)
            if body.version is not None and body.version != doc.version:
                raise VersionConflictError(
                    f"document {doc.doc_id!r} is at version {doc.version}, writer read {body.version}")
            doc.saved = body.saved
            doc.version += 1
            save_doc(project, record, doc)
        return {"saved": doc.saved, "version": doc.version}

    # -- views ------------------------------------------------------------

    @app.get("/projects/{project_id}/knowledge")
    def knowledge_dump(project_id: str, user: dict = Depends(current_user)):
        project = project_for(user, project_id)
        return load_kb(project).dump()

    @app.get("/projects/{project_id}/dashboard")
    def dashboard(project_id: str, user: dict = Depends(current_user)):
        project = project_for(user, project_id)
        task = TaskKind(project["task"])
        records = project_text_records(project_id)
        docs = [_doc_from_record(r) for r in records]
        tallies = counts(docs, task)
        clusters: dict[str, int] = {}
        for doc in docs:
            if doc.cluster_id is not None:
                clusters[str(doc.cluster_id)] = clusters.get(str(doc.cluster_id), 0) + 1
        return {
            "texts": len(docs),
            "saved": sum(1 for d in docs if d.saved),
            "clusters": clusters,
            **tallies,
        }

    @app.get("/projects/{project_id}/graph")
    def graph(project_id: str, quality: str = Query(default="all"),
              user: dict = Depends(current_user)):
        project = project_for(user, project_id)
        if quality not in ("all", "accepted", "suggested"):
            raise HttpError(422, f"quality must be all|accepted|suggested, got {quality!r}")
        docs = [_doc_from_record(r) for r in project_text_records(project_id)]
        return graph_view(docs, quality)

    @app.get("/projects/{project_id}/export")
    def export_project(project_id: str, quality: str = Query(default="all"),
                       saved_only: bool = Query(default=False),
                       user: dict = Depends(current_user)):
        project = project_for(user, project_id)
        if quality not in ("all", "accepted", "suggested"):
            raise HttpError(422, f"quality must be all|accepted|suggested, got {quality!r}")
        docs = [_doc_from_record(r) for r in project_text_records(project_id)]
        payload = build_export(
            project, _project_ontology(project), docs,
            TaskKind(project["task"]), quality=quality, saved_only=saved_only,
        )
        return Response(
            content=export_bytes(payload),
            media_type="application/json",
            headers={"Content-Disposition": f'attachment; filename="{project["name"]}-export.json"'},
        )

    @app.post("/projects/{project_id}/import")
    def import_project(project_id: str, payload: dict, user: dict = Depends(current_user)):
        store = get_store()
        project = project_for(user, project_id)
        if payload.get("project", {}).get("task") not in (None, project["task"]):
            raise HttpError(422, "export task does not match this project")
        ontology = _project_ontology(project)
        with store.lock:
            existing = {r["doc_id"] for r in project_text_records(project_id)}
            imported = 0
            kb = load_kb(project) if project.get("model_update") else None
            for block in payload.get("texts", []):
                if block["docId"] in existing:
                    raise HttpError(422, f"document id {block['docId']!r} already exists here")
                doc = document_from_export_block(block)
                _validate_imported_doc(doc, ontology)
                text_id = store.insert("texts", {"project_id": project_id})
                store.put("texts", text_id, _doc_to_record(doc, project_id, text_id))
                if kb is not None:
                    ingest_accept(kb, doc, [m.id for m in doc.markups.values() if not m.suggested])
                imported += 1
            if kb is not None:
                project["kb"] = kb.dump()
                store.put("projects", project["_id"], project)
        return {"imported": imported}

    return app


def graph_view(docs: list[AnnotatedDocument], quality: str = "all") -> dict:
    """Aggregate markups into graph nodes and edges.

    Nodes merge by (type, case-insensitive surface); an element is tagged
    accepted as soon as any contributing markup is accepted.  Event projects
    come out with trigger nodes typed by event type and role-labeled edges.
    """
    nodes: dict[tuple, dict] = {}
    edges: dict[tuple, dict] = {}
    for doc in docs:
        pool = filter_markups(doc, quality)
        entity_by_id = {m.id: m for m in pool if m.is_entity}
        for m in pool:
            if not m.is_entity:
                continue
            key = (m.name, m.entity_text.lower())
            node = nodes.setdefault(key, {
                "id": f"{m.name}::{m.entity_text.lower()}",
                "type": m.name,
                "surface": m.entity_text,
                "quality": "suggested",
                "count": 0,
            })
            node["count"] += 1
            if not m.suggested:
                node["quality"] = "accepted"
        for m in pool:
            if m.is_entity:
                continue
            source = entity_by_id[m.source]
            target = entity_by_id[m.target]
            key = (
                f"{source.name}::{source.entity_text.lower()}",
                m.name,
                f"{target.name}::{target.entity_text.lower()}",
            )
            edge = edges.setdefault(key, {
                "source": key[0],
                "name": m.name,
                "target": key[2],
                "quality": "suggested",
                "count": 0,
            })
            edge["count"] += 1
            if not m.suggested:
                edge["quality"] = "accepted"
    return {
        "nodes": sorted(nodes.values(), key=lambda n: n["id"]),
        "edges": sorted(edges.values(), key=lambda e: (e["source"], e["name"], e["target"])),
    }

"""Project creation backend: cleaning, clustering, and preannotation.

Clustering groups semantically close texts so annotators can work one
concept at a time.  Embeddings come from a pluggable provider; the default
is a deterministic lexical one (normalized character-n-gram counts), and an
HTTP provider can swap in a real sentence-embedding service.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

import httpx
import numpy as np

from .markup import (
    AnnotatedDocument,
    Markup,
    suggest_entity_occurrences,
    suggest_relation_in_document,
)
from .scheme import Ontology, TaskKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PreprocessFlags:
    lowercase: bool = False
    remove_chars: frozenset[str] = frozenset()
    deduplicate: bool = False


@dataclass(frozen=True)
class ProjectConfig:
    name: str
    description: str = ""
    task: TaskKind = TaskKind.NER
    language: str = "en"
    model_update: bool = False
    clustering: bool = False
    preprocessing: PreprocessFlags = PreprocessFlags()


@dataclass
class PreprocessReport:
    removed_chars: list[int] = field(default_factory=list)  # per input text
    duplicates: list[dict] = field(default_factory=list)    # {"index", "duplicate_of"}


def preprocess(texts: Sequence[str], flags: PreprocessFlags) -> tuple[list[str], PreprocessReport]:
    """Clean raw texts: casing, then character removal, then exact dedup.

    Duplicates are decided on the cleaned strings; the first occurrence wins.
    """
    report = PreprocessReport()
    cleaned: list[str] = []
    for text in texts:
        out = text.lower() if flags.lowercase else text
        removed = 0
        if flags.remove_chars:
            kept = []
            for ch in out:
                if ch in flags.remove_chars:
                    removed += 1
                else:
                    kept.append(ch)
            out = "".join(kept)
        report.removed_chars.append(removed)
        cleaned.append(out)

    if not flags.deduplicate:
        return cleaned, report

    seen: dict[str, int] = {}
    result = []
    for index, text in enumerate(cleaned):
        if text in seen:
            report.duplicates.append({"index": index, "duplicate_of": seen[text]})
            continue
        seen[text] = index
        result.append(text)
    return result, report


# ---------------------------------------------------------------------------
# Clustering
# ---------------------------------------------------------------------------

class EmbeddingProvider(Protocol):
    def embed(self, texts: Sequence[str]) -> np.ndarray:
        ...


class LexicalNgramProvider:
    """Normalized character n-gram count vectors; deterministic, no model."""

    def __init__(self, n: int = 3):
        self.n = n

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        grams_per_text = []
        vocabulary: dict[str, int] = {}
        for text in texts:
            lowered = text.lower()
            grams = (
                [lowered[i:i + self.n] for i in range(len(lowered) - self.n + 1)]
                if len(lowered) >= self.n else ([lowered] if lowered else [])
            )
            grams_per_text.append(grams)
            for gram in grams:
                vocabulary.setdefault(gram, len(vocabulary))
        vectors = np.zeros((len(texts), max(len(vocabulary), 1)), dtype=float)
        for row, grams in enumerate(grams_per_text):
            for gram in grams:
                vectors[row, vocabulary[gram]] += 1.0
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return vectors / norms


class HttpEmbeddingProvider:
    """POSTs ``{"texts": [...]}`` and expects ``{"embeddings": [[...], ...]}``."""

    def __init__(self, endpoint: str, token_env: str = "ANNOGRAPH_EMBEDDING_TOKEN",
                 timeout: float = 30.0):
        self.endpoint = endpoint
        self.token_env = token_env
        self.timeout = timeout

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        headers = {}
        token = os.environ.get(self.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        response = httpx.post(self.endpoint, json={"texts": list(texts)},
                              headers=headers, timeout=self.timeout)
        response.raise_for_status()
        return np.asarray(response.json()["embeddings"], dtype=float)


def cosine_distances(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    unit = vectors / safe[:, None]
    similarity = unit @ unit.T
    distance = 1.0 - similarity
    # Pairs of all-zero vectors are identical (distance 0); zero against
    # anything else is maximally far.
    zero = norms == 0.0
    if zero.any():
        distance[zero, :] = 1.0
        distance[:, zero] = 1.0
        both = np.outer(zero, zero)
        distance[both] = 0.0
    np.fill_diagonal(distance, 0.0)
    return np.clip(distance, 0.0, 2.0)


def cluster(
    texts: Sequence[str],
    provider: Optional[EmbeddingProvider] = None,
    cutoff: float = 0.5,
) -> list[int]:
    """Agglomerative average-linkage clustering over cosine distance.

    Merging continues while the closest pair of clusters sits below the
    cutoff.  Cluster ids are assigned by first text position.  A failing
    provider downgrades to a single cluster 0 with a warning rather than
    blocking project creation.
    """
    if not texts:
        raise ValueError("need at least one text to cluster")
    provider = provider or LexicalNgramProvider()
    try:
        vectors = provider.embed(texts)
        if vectors.shape[0] != len(texts):
            raise ValueError("provider returned a wrong number of embeddings")
        distance = cosine_distances(vectors)
    except Exception as error:
        logger.warning("embedding provider failed (%s); clustering disabled", error)
        return [0] * len(texts)

    clusters: list[list[int]] = [[i] for i in range(len(texts))]
    while len(clusters) > 1:
        best: Optional[tuple[float, int, int]] = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                pairwise = [distance[a, b] for a in clusters[i] for b in clusters[j]]
                average = float(np.mean(pairwise))
                if best is None or average < best[0] - 1e-12:
                    best = (average, i, j)
        if best is None or best[0] >= cutoff:
            break
        _, i, j = best
        clusters[i] = clusters[i] + clusters[j]
        del clusters[j]

    clusters.sort(key=min)
    assignment = [0] * len(texts)
    for cluster_id, members in enumerate(clusters):
        for index in members:
            assignment[index] = cluster_id
    return assignment


# ---------------------------------------------------------------------------
# Preannotation
# ---------------------------------------------------------------------------

@dataclass
class PreannotationOutcome:
    created: list[Markup] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)  # {"row", "error"}


def import_preannotation(
    docs: Sequence[AnnotatedDocument],
    ontology: Ontology,
    rows: Sequence[dict],
) -> PreannotationOutcome:
    """Apply gazetteer-style facts corpus-wide as suggested markups.

    Rows are ``{"kind": "entity-fact", "label", "surface"}`` or
    ``{"kind": "relation-fact", "label", "subject", "object"}``; relation
    endpoints take the first entity types the relation's constraint allows.
    Bad rows are reported per row and do not block the rest.
    """
    outcome = PreannotationOutcome()
    for row_no, row in enumerate(rows):
        kind = row.get("kind")
        label = row.get("label", "")
        try:
            if kind == "entity-fact":
                surface = row.get("surface", "")
                if not surface:
                    raise ValueError("entity fact needs a surface")
                if ontology.get_entity_type(label) is None:
                    raise ValueError(f"unknown entity type {label!r}")
                created = []
                for doc in docs:
                    added = suggest_entity_occurrences(doc, ontology, label, surface)
                    created.extend(added)
                    if added:
                        doc.version += 1
            elif kind == "relation-fact":
                subject = row.get("subject", "")
                obj = row.get("object", "")
                if not subject or not obj:
                    raise ValueError("relation fact needs subject and object surfaces")
                rel_def = ontology.get_relation_type(label)
                if rel_def is None:
                    raise ValueError(f"unknown relation type {label!r}")
                created = []
                for doc in docs:
                    added = suggest_relation_in_document(
                        doc, ontology, label,
                        rel_def.subject_types[0], subject,
                        rel_def.object_types[0], obj,
                    )
                    created.extend(added)
                    if added:
                        doc.version += 1
            else:
                raise ValueError(f"unknown fact kind {kind!r}")
        except ValueError as error:
            outcome.errors.append({"row": row_no, "error": str(error)})
            continue
        outcome.created.extend(created)
    return outcome


def review_summary(
    config: ProjectConfig,
    texts: Sequence[str],
    ontology: Optional[Ontology],
) -> dict:
    """Snapshot of a project draft for the wizard's review step."""
    entity_types = len(ontology.entity_types) if ontology else 0
    relation_types = len(ontology.relation_types) if ontology else 0
    constraints = 0
    if ontology:
        constraints = sum(
            len(r.subject_types) * len(r.object_types) for r in ontology.relation_types
        )
    return {
        "name": config.name,
        "task": config.task.value,
        "language": config.language,
        "texts": len(texts),
        "entity_types": entity_types,
        "relation_types": relation_types,
        "constraints": constraints,
        "model_update": config.model_update,
        "clustering": config.clustering,
        "preprocessing": {
            "lowercase": config.preprocessing.lowercase,
            "remove_chars": sorted(config.preprocessing.remove_chars),
            "deduplicate": config.preprocessing.deduplicate,
        },
    }

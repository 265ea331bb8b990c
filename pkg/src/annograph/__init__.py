"""annograph: human-machine annotation service for knowledge graph construction."""

from .scheme import (
    EventArgument,
    EventRecord,
    NerRecord,
    Ontology,
    PSEUDO,
    PSEUDO_TOKEN,
    ReRecord,
    TaskKind,
    UnifiedTriple,
    from_unified,
    parse_scheme_text,
    preset_ontology,
    to_unified,
    validate_ontology,
)
from .markup import (
    AnnotatedDocument,
    Markup,
    MarkupDraft,
    add_markup,
    counts,
    propagate,
    transition,
)
from .knowledge import KnowledgeBase
from .generation import HttpGenerationClient, MockGenerationClient, prompt_key
from .autolabel import build_plan, execute_plan, materialize
from .evalkit import intra_group_variance, micro_f1

__version__ = "0.1.0"

__all__ = [
    "AnnotatedDocument",
    "EventArgument",
    "EventRecord",
    "HttpGenerationClient",
    "KnowledgeBase",
    "Markup",
    "MarkupDraft",
    "MockGenerationClient",
    "NerRecord",
    "Ontology",
    "PSEUDO",
    "PSEUDO_TOKEN",
    "ReRecord",
    "TaskKind",
    "UnifiedTriple",
    "add_markup",
    "build_plan",
    "counts",
    "execute_plan",
    "from_unified",
    "intra_group_variance",
    "materialize",
    "micro_f1",
    "parse_scheme_text",
    "preset_ontology",
    "prompt_key",
    "propagate",
    "to_unified",
    "transition",
    "validate_ontology",
]

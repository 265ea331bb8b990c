from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from annograph.markup import AnnotatedDocument
from annograph.scheme import TaskKind, parse_scheme_text

JAMES_SENTENCE = "James worked for Google in Tokyo, the capital of Japan."
JOHNSON_SENTENCE = (
    "Mr.Johnson retired before the 2005 season and briefly worked "
    "as a football analyst for WBZ-TV in Boston."
)
MARRY_SENTENCE = "Yesterday Bob and his wife got married in Beijing."


@pytest.fixture
def ner_ontology():
    return parse_scheme_text(TaskKind.NER, ["PER", "LOC", "ORG", "MISC"], [])


@pytest.fixture
def re_ontology():
    return parse_scheme_text(
        TaskKind.RE,
        ["Person", "Organization", "Location"],
        ["person-company@[Person, Organization]", "place-of-birth@[Person, Location]"],
    )


@pytest.fixture
def ee_ontology():
    return parse_scheme_text(TaskKind.EE, ["_"], ["Life:Marry@[Person, Time, Place]"])


@pytest.fixture
def james_doc():
    return AnnotatedDocument("d-james", JAMES_SENTENCE)


@pytest.fixture
def johnson_doc():
    return AnnotatedDocument("d-johnson", JOHNSON_SENTENCE)


@pytest.fixture
def marry_doc():
    return AnnotatedDocument("d-marry", MARRY_SENTENCE)

from __future__ import annotations

import random

from annograph.knowledge import (
    ENTITY_FACT,
    RELATION_FACT,
    KnowledgeBase,
    fact_from_markup,
    informative,
)
from annograph.markup import AnnotatedDocument, MarkupDraft, add_markup


def _kb(threshold=2):
    return KnowledgeBase(project_id="p1", threshold=threshold, clock=lambda: 1000.0)


class TestIngest:
    def test_threshold_promotes_entry(self):
        kb = _kb()
        kb.observe_accept(ENTITY_FACT, ("Apple",), "ORG")
        assert kb.entries() == []
        kb.observe_accept(ENTITY_FACT, ("Apple",), "ORG")
        entries = kb.entries()
        assert len(entries) == 1
        assert entries[0].count == 2
        assert entries[0].surfaces == ("Apple",)

    def test_add_then_remove_returns_to_zero(self):
        kb = _kb()
        kb.observe_accept(ENTITY_FACT, ("Apple",), "ORG")
        kb.observe_remove(ENTITY_FACT, ("Apple",), "ORG")
        assert kb.entries() == []
        assert kb.live_counts() == {}

    def test_case_insensitive_tally_with_case_preserved_surface(self):
        kb = _kb()
        kb.observe_accept(ENTITY_FACT, ("Apple",), "ORG")
        kb.observe_accept(ENTITY_FACT, ("APPLE",), "ORG")
        entries = kb.entries()
        assert len(entries) == 1
        assert entries[0].surfaces == ("Apple",)  # first seen casing wins

    def test_relation_fact_promotion(self):
        kb = _kb()
        kb.observe_accept(RELATION_FACT, ("James", "Google"), "person-company")
        kb.observe_accept(RELATION_FACT, ("James", "Google"), "person-company")
        entries = kb.entries()
        assert len(entries) == 1
        assert entries[0].kind == RELATION_FACT

    def test_removal_demotes_below_threshold(self):
        kb = _kb()
        for _ in range(3):
            kb.observe_accept(ENTITY_FACT, ("Apple",), "ORG")
        kb.observe_remove(ENTITY_FACT, ("Apple",), "ORG")
        kb.observe_remove(ENTITY_FACT, ("Apple",), "ORG")
        assert kb.entries() == []
        assert kb.live_counts() == {(ENTITY_FACT, ("apple",), "ORG"): 1}

    def test_stopwords_and_single_characters_rejected(self):
        kb = _kb()
        assert not kb.observe_accept(ENTITY_FACT, ("the",), "MISC")
        assert not kb.observe_accept(ENTITY_FACT, ("x",), "MISC")
        assert kb.live_counts() == {}

    def test_conservation_against_rescan(self):
        # Oracle: replay the event log and recount from scratch.
        rng = random.Random(99)
        kb = _kb(threshold=2)
        surfaces = ["Apple", "Google", "Tokyo"]
        live: list[tuple] = []
        for _ in range(300):
            fact = (ENTITY_FACT, (rng.choice(surfaces),), "ORG")
            if live and rng.random() < 0.4:
                victim = live.pop(rng.randrange(len(live)))
                kb.observe_remove(*victim)
            else:
                kb.observe_accept(*fact)
                live.append(fact)
        rescan: dict[tuple, int] = {}
        for kind, (surface,), label in live:
            key = (kind, (surface.lower(),), label)
            rescan[key] = rescan.get(key, 0) + 1
        assert kb.live_counts() == rescan


class TestGeneratePrefix:
    def test_matching_entry_rendered_in_note_style(self):
        kb = _kb()
        kb.observe_accept(ENTITY_FACT, ("Apple",), "ORG")
        kb.observe_accept(ENTITY_FACT, ("Apple",), "ORG")
        prefix = kb.generate_prefix("The middle class likes using Apple.")
        assert prefix == "Note: the type of Apple is ORG;"

    def test_relation_fact_rendering(self):
        kb = _kb()
        kb.observe_accept(RELATION_FACT, ("James", "Google"), "person-company")
        kb.observe_accept(RELATION_FACT, ("James", "Google"), "person-company")
        prefix = kb.generate_prefix("James joined Google yesterday.")
        assert prefix == "Note: the relation between James and Google is person-company;"

    def test_empty_kb_gives_empty_prefix(self):
        assert _kb().generate_prefix("anything") == ""

    def test_entry_missing_from_text_is_skipped(self):
        kb = _kb()
        kb.observe_accept(ENTITY_FACT, ("Apple",), "ORG")
        kb.observe_accept(ENTITY_FACT, ("Apple",), "ORG")
        assert kb.generate_prefix("No fruit companies here.") == ""

    def test_budget_truncates_at_entry_boundary_highest_count_first(self):
        kb = _kb()
        for _ in range(5):
            kb.observe_accept(ENTITY_FACT, ("Google",), "ORG")
        for _ in range(2):
            kb.observe_accept(ENTITY_FACT, ("Tokyo",), "LOC")
        text = "Google opened an office in Tokyo."
        full = kb.generate_prefix(text)
        assert full == "Note: the type of Google is ORG; the type of Tokyo is LOC;"
        # budget only fits the first (highest-count) entry
        one = kb.generate_prefix(text, budget=len("Note: the type of Google is ORG;"))
        assert one == "Note: the type of Google is ORG;"

    def test_determinism_under_ties(self):
        kb = _kb()
        for surface, label in [("Google", "ORG"), ("Tokyo", "LOC")]:
            kb.observe_accept(ENTITY_FACT, (surface,), label)
            kb.observe_accept(ENTITY_FACT, (surface,), label)
        text = "Google and Tokyo."
        assert kb.generate_prefix(text) == kb.generate_prefix(text)

    def test_all_rendered_surfaces_occur_in_text(self):
        kb = _kb()
        for surface in ["Google", "Tokyo", "Apple"]:
            kb.observe_accept(ENTITY_FACT, (surface,), "ORG")
            kb.observe_accept(ENTITY_FACT, (surface,), "ORG")
        text = "google tokyo"
        prefix = kb.generate_prefix(text)
        assert "Apple" not in prefix
        assert "Google" in prefix and "Tokyo" in prefix


class TestDumpLoad:
    def test_round_trip(self):
        kb = _kb()
        kb.observe_accept(ENTITY_FACT, ("Apple",), "ORG")
        kb.observe_accept(ENTITY_FACT, ("Apple",), "ORG")
        kb.observe_accept(ENTITY_FACT, ("Tokyo",), "LOC")
        payload = kb.dump()
        restored = KnowledgeBase.load(payload)
        assert restored.dump() == payload
        assert restored.live_counts() == kb.live_counts()


class TestFactFromMarkup:
    def test_entity_and_relation_facts(self, re_ontology):
        doc = AnnotatedDocument("d1", "James works at Google.")
        subject = add_markup(doc, MarkupDraft(True, "Person", start=0, end=0), "accepted", re_ontology)
        obj = add_markup(doc, MarkupDraft(True, "Organization", start=3, end=3), "accepted", re_ontology)
        rel = add_markup(doc, MarkupDraft(False, "person-company", source=subject.id, target=obj.id),
                         "accepted", re_ontology)
        assert fact_from_markup(doc, subject) == ("entity-fact", ("James",), "Person")
        assert fact_from_markup(doc, rel) == ("relation-fact", ("James", "Google"), "person-company")


def test_informative_filter():
    assert informative("Apple")
    assert not informative("the")
    assert not informative("x")
    assert not informative("我们", language="zh")
    assert informative("北京", language="zh")

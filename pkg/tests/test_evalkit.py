from __future__ import annotations

import random

import pytest

from annograph.evalkit import intra_group_variance, micro_f1, records_from_export
from annograph.scheme import EventArgument, EventRecord, NerRecord, ReRecord, TaskKind

from oracles import micro_f1_oracle, variance_oracle


def _ner(t, s, span):
    return NerRecord(entity_type=t, text=s, span=span)


class TestMicroF1:
    def test_identical_sets_score_one(self):
        gold = {"d1": [_ner("PER", "James", (0, 0)), _ner("ORG", "Google", (3, 3))]}
        result = micro_f1(TaskKind.NER, gold, gold)
        assert result == {"P": 1.0, "R": 1.0, "F1": 1.0}

    def test_four_sevenths_example(self):
        # gold has 4 entities, pred has 3 of which 2 match exactly
        gold = {"d1": [
            _ner("PER", "James", (0, 0)),
            _ner("ORG", "Google", (3, 3)),
            _ner("LOC", "Tokyo", (5, 5)),
            _ner("LOC", "Japan", (10, 10)),
        ]}
        pred = {"d1": [
            _ner("PER", "James", (0, 0)),
            _ner("ORG", "Google", (3, 3)),
            _ner("LOC", "Kyoto", (8, 8)),
        ]}
        result = micro_f1(TaskKind.NER, gold, pred)
        assert abs(result["P"] - 2 / 3) < 1e-12
        assert abs(result["R"] - 1 / 2) < 1e-12
        assert abs(result["F1"] - 4 / 7) < 1e-12

    def test_span_must_match_not_only_surface(self):
        gold = {"d1": [_ner("PER", "Bob", (0, 0))]}
        pred = {"d1": [_ner("PER", "Bob", (4, 4))]}
        assert micro_f1(TaskKind.NER, gold, pred)["F1"] == 0.0

    def test_re_requires_relation_and_both_spans(self):
        gold = {"d1": [ReRecord("Person", "Mr.Johnson", "person-company", "Organization",
                                "WBZ-TV", (0, 2), (16, 18))]}
        pred_wrong_rel = {"d1": [ReRecord("Person", "Mr.Johnson", "place-of-birth",
                                          "Organization", "WBZ-TV", (0, 2), (16, 18))]}
        assert micro_f1(TaskKind.RE, gold, gold)["F1"] == 1.0
        assert micro_f1(TaskKind.RE, gold, pred_wrong_rel)["F1"] == 0.0

    def test_trigger_correct_diverges_from_argument_correct(self):
        gold = {"d1": [EventRecord(
            "Life:Marry", "married",
            (EventArgument("Time", "Yesterday", (0, 0)),), trigger_span=(6, 6))]}
        pred = {"d1": [EventRecord(
            "Life:Marry", "married",
            (EventArgument("Place", "Yesterday", (0, 0)),), trigger_span=(6, 6))]}
        result = micro_f1(TaskKind.EE, gold, pred)
        assert result["trig_c"]["F1"] == 1.0
        assert result["arg_c"]["F1"] == 0.0

    def test_doc_id_mismatch_rejected(self):
        with pytest.raises(ValueError):
            micro_f1(TaskKind.NER, {"d1": []}, {"d2": []})

    def test_both_empty_is_vacuous_agreement(self):
        assert micro_f1(TaskKind.NER, {"d1": []}, {"d1": []})["F1"] == 1.0

    def test_empty_prediction_scores_zero(self):
        gold = {"d1": [_ner("PER", "Bob", (0, 0))]}
        assert micro_f1(TaskKind.NER, gold, {"d1": []})["F1"] == 0.0


def _random_ner_records(rng, n):
    types = ["PER", "LOC", "ORG", "MISC"]
    words = ["alpha", "beta", "gamma", "delta"]
    out = []
    for _ in range(n):
        start = rng.randrange(0, 12)
        out.append(_ner(rng.choice(types), rng.choice(words), (start, start)))
    return out


def _random_re_records(rng, n):
    rels = ["r1", "r2"]
    words = ["alpha", "beta", "gamma"]
    out = []
    for _ in range(n):
        s, o = rng.randrange(0, 8), rng.randrange(0, 8)
        out.append(ReRecord("A", rng.choice(words), rng.choice(rels), "B",
                            rng.choice(words), (s, s), (o, o)))
    return out


def _random_ee_records(rng, n):
    events = ["E1", "E2"]
    roles = ["Ra", "Rb"]
    words = ["alpha", "beta"]
    out = []
    for _ in range(n):
        t = rng.randrange(0, 8)
        args = tuple(
            EventArgument(rng.choice(roles), rng.choice(words), (k, k))
            for k in range(rng.randrange(0, 3))
        )
        out.append(EventRecord(rng.choice(events), rng.choice(words), args, (t, t)))
    return out


_GENERATORS = {
    TaskKind.NER: _random_ner_records,
    TaskKind.RE: _random_re_records,
    TaskKind.EE: _random_ee_records,
}


@pytest.mark.parametrize("task", list(TaskKind))
def test_swapping_gold_and_pred_swaps_precision_and_recall(task):
    rng = random.Random(4242)
    generate = _GENERATORS[task]
    for _ in range(25):
        gold = {f"d{k}": generate(rng, rng.randrange(0, 5)) for k in range(2)}
        pred = {f"d{k}": generate(rng, rng.randrange(0, 5)) for k in range(2)}
        forward = micro_f1(task, gold, pred)
        backward = micro_f1(task, pred, gold)
        if task is TaskKind.EE:
            for criterion in ("arg_c", "trig_c"):
                assert forward[criterion]["P"] == backward[criterion]["R"]
                assert forward[criterion]["F1"] == backward[criterion]["F1"]
        else:
            assert forward["P"] == backward["R"]
            assert forward["R"] == backward["P"]
            assert forward["F1"] == backward["F1"]


@pytest.mark.parametrize("task", list(TaskKind))
def test_micro_f1_matches_brute_force_oracle(task):
    rng = random.Random(hash(task.value) & 0xFFFF)
    generate = _GENERATORS[task]
    for _ in range(50):
        gold = {f"d{k}": generate(rng, rng.randrange(0, 5)) for k in range(3)}
        pred = {f"d{k}": generate(rng, rng.randrange(0, 5)) for k in range(3)}
        assert micro_f1(task, gold, pred) == micro_f1_oracle(task, gold, pred)


class TestVariance:
    def test_identical_members_give_zero(self):
        member = {"d1": [_ner("PER", "a", (0, 0))], "d2": []}
        assert intra_group_variance(TaskKind.NER, [member, dict(member), dict(member)]) == 0.0

    def test_disjoint_members_give_one(self):
        a = {"d1": [_ner("PER", "a", (0, 0))], "d2": [_ner("PER", "b", (1, 1))]}
        b = {"d1": [_ner("ORG", "c", (2, 2))], "d2": [_ner("ORG", "d", (3, 3))]}
        assert intra_group_variance(TaskKind.NER, [a, b]) == 1.0

    def test_three_member_two_doc_fixture(self):
        g1 = {
            "d1": [_ner("PER", "James", (0, 0)), _ner("ORG", "Google", (3, 3))],
            "d2": [_ner("LOC", "Tokyo", (0, 0))],
        }
        g2 = {
            "d1": [_ner("PER", "James", (0, 0))],
            "d2": [_ner("LOC", "Tokyo", (0, 0))],
        }
        g3 = {
            "d1": [_ner("ORG", "Google", (3, 3)), _ner("LOC", "Tokyo", (5, 5))],
            "d2": [],
        }
        value = intra_group_variance(TaskKind.NER, [g1, g2, g3], ["d1", "d2"])
        # Pairwise per-doc F1: d1 -> 2/3, 1/2, 0; d2 -> 1, 0, 0.
        # var = 1 - (2/3 + 1/2 + 0 + 1 + 0 + 0) / 6 = 23/36, confirmed by the
        # brute-force oracle below.
        assert abs(value - 23 / 36) < 1e-12
        assert abs(value - variance_oracle(TaskKind.NER, [g1, g2, g3], ["d1", "d2"])) < 1e-12

    def test_two_members_one_doc_reduces_to_one_minus_f1(self):
        a = {"d1": [_ner("PER", "x", (0, 0)), _ner("PER", "y", (1, 1))]}
        b = {"d1": [_ner("PER", "x", (0, 0))]}
        value = intra_group_variance(TaskKind.NER, [a, b])
        pair_f1 = micro_f1(TaskKind.NER, a, b)["F1"]
        assert abs(value - (1.0 - pair_f1)) < 1e-12

    def test_member_permutation_invariance(self):
        rng = random.Random(7)
        members = [
            {f"d{k}": _random_ner_records(rng, rng.randrange(0, 4)) for k in range(2)}
            for _ in range(3)
        ]
        base = intra_group_variance(TaskKind.NER, members)
        shuffled = intra_group_variance(TaskKind.NER, [members[2], members[0], members[1]])
        assert abs(base - shuffled) < 1e-12

    def test_requires_two_members(self):
        with pytest.raises(ValueError):
            intra_group_variance(TaskKind.NER, [{"d1": []}])

    def test_bounds(self):
        rng = random.Random(11)
        for _ in range(25):
            members = [
                {f"d{k}": _random_ner_records(rng, rng.randrange(0, 4)) for k in range(2)}
                for _ in range(rng.randrange(2, 5))
            ]
            value = intra_group_variance(TaskKind.NER, members)
            assert 0.0 <= value <= 1.0

    def test_ee_variance_reports_both_criteria(self):
        rng = random.Random(13)
        members = [
            {"d1": _random_ee_records(rng, 2)} for _ in range(2)
        ]
        value = intra_group_variance(TaskKind.EE, members)
        assert set(value) == {"arg_c", "trig_c"}


class TestRecordsFromExport:
    def test_reads_ner_markups(self):
        payload = {"texts": [{
            "docId": "t1",
            "markups": [
                {"isEntity": True, "suggested": False, "_id": "m1", "name": "PER",
                 "labelId": "E1", "start": 0, "end": 0, "entityText": "James"},
            ],
        }]}
        records = records_from_export(payload, TaskKind.NER)
        assert records == {"t1": [NerRecord("PER", "James", (0, 0))]}

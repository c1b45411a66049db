import json
import math
import random

import pytest

from entailrank.bm25 import ScoredCandidate
from entailrank.corpus import CandidateParagraph, Dataset, QueryExample
from entailrank.errors import ValidationError
from entailrank.runs import (
    Run,
    ScoringRequest,
    read_run,
    read_scoring_requests,
    true_prob,
    validate_run,
    write_run,
    write_scoring_requests,
)

# 1/(1+exp(-2)) evaluated at 50 digits with mpmath:
# 0.88079707797788244405972914130239679520638429862897
TRUE_PROB_2_0 = 0.8807970779778824


def make_dataset(n_examples=3, n_candidates=3):
    examples = []
    for i in range(1, n_examples + 1):
        candidates = tuple(
            CandidateParagraph(f"{j:03d}", f"Paragraph {j} of case {i}.")
            for j in range(1, n_candidates + 1)
        )
        examples.append(
            QueryExample(f"{i:03d}", f"Fragment {i}.", candidates, frozenset({"001"}))
        )
    return Dataset("toy", tuple(examples))


class TestTrueProb:
    def test_symmetric_logits_give_half(self):
        assert true_prob(0.0, 0.0) == 0.5
        for x in (-50.0, -1.5, 0.25, 3.0, 700.0):
            assert true_prob(x, x) == 0.5

    def test_frozen_reference_value(self):
        assert true_prob(2.0, 0.0) == pytest.approx(TRUE_PROB_2_0, abs=1e-12)

    def test_complement_identity(self):
        rng = random.Random(21)
        for _ in range(10000):
            a = rng.uniform(-100, 100)
            b = rng.uniform(-100, 100)
            assert abs(true_prob(a, b) + true_prob(b, a) - 1.0) <= 1e-12

    def test_strictly_monotone(self):
        assert true_prob(1.0, 0.0) > true_prob(0.5, 0.0)
        assert true_prob(1.0, 0.5) > true_prob(1.0, 0.9)

    def test_result_in_open_interval(self):
        # in float64 the result saturates to exactly 1.0 once the logit gap
        # exceeds ~36 (1 + eps rounds to 1), so test the representable range
        rng = random.Random(8)
        for _ in range(2000):
            a = rng.uniform(-100, 100)
            b = a - rng.uniform(-36, 36)
            assert 0.0 < true_prob(a, b) < 1.0

    def test_non_finite_rejected(self):
        for bad in (float("nan"), float("inf"), float("-inf")):
            with pytest.raises(ValidationError):
                true_prob(bad, 0.0)
            with pytest.raises(ValidationError):
                true_prob(0.0, bad)


class TestScoringRequests:
    def test_one_line_per_pair(self, tmp_path):
        path = tmp_path / "requests.jsonl"
        count = write_scoring_requests(make_dataset(1, 3), path)
        assert count == 3
        lines = path.read_text("utf-8").strip().split("\n")
        assert len(lines) == 3
        first = json.loads(lines[0])
        assert first["example_id"] == "001"
        assert first["input_text"].startswith("Query: Fragment 1.")
        assert first["input_text"].endswith("Relevant:")

    def test_dataset_order_preserved(self, tmp_path):
        path = tmp_path / "requests.jsonl"
        write_scoring_requests(make_dataset(2, 2), path)
        keys = [
            (r["example_id"], r["candidate_id"])
            for r in map(json.loads, path.read_text("utf-8").strip().split("\n"))
        ]
        assert keys == [("001", "001"), ("001", "002"), ("002", "001"), ("002", "002")]

    def test_empty_dataset_rejected(self, tmp_path):
        with pytest.raises(ValidationError):
            write_scoring_requests(Dataset("empty", ()), tmp_path / "r.jsonl")

    def test_read_back(self, tmp_path):
        path = tmp_path / "requests.jsonl"
        write_scoring_requests(make_dataset(2, 2), path)
        requests = read_scoring_requests(path)
        assert len(requests) == 4
        assert all(isinstance(r, ScoringRequest) for r in requests)

    def test_request_must_end_with_marker(self):
        with pytest.raises(ValidationError, match="Relevant"):
            ScoringRequest("001", "001", "Query: q Document: d")


class TestRunIO:
    def test_write_read_round_trip(self, tmp_path):
        run = Run(
            tag="bm25",
            entries={
                "001": [ScoredCandidate("002", 0.25), ScoredCandidate("001", 0.5)],
                "002": [ScoredCandidate("001", 1.0)],
            },
        )
        path = tmp_path / "toy.run"
        write_run(run, path)
        assert read_run(path) == run

    def test_serialization_is_canonical(self, tmp_path):
        run = Run(tag="t", entries={"001": [ScoredCandidate("001", 0.123456789)]})
        a, b = tmp_path / "a.run", tmp_path / "b.run"
        write_run(run, a)
        write_run(run, b)
        assert a.read_bytes() == b.read_bytes()

    def test_line_format(self, tmp_path):
        run = Run(
            tag="bm25",
            entries={"007": [ScoredCandidate("010", 0.75), ScoredCandidate("003", 0.9)]},
        )
        path = tmp_path / "fmt.run"
        write_run(run, path)
        assert path.read_text("utf-8") == (
            "007 Q0 003 1 0.900000 bm25\n007 Q0 010 2 0.750000 bm25\n"
        )

    def test_rank_ties_break_by_candidate_id(self, tmp_path):
        run = Run(
            tag="t",
            entries={"001": [ScoredCandidate("b", 0.5), ScoredCandidate("a", 0.5)]},
        )
        path = tmp_path / "tie.run"
        write_run(run, path)
        lines = path.read_text("utf-8").strip().split("\n")
        assert lines[0].split()[2] == "a"

    def test_nan_score_names_line(self, tmp_path):
        path = tmp_path / "bad.run"
        path.write_text("001 Q0 001 1 0.5 t\n001 Q0 002 2 NaN t\n", "utf-8")
        with pytest.raises(ValidationError, match="line 2"):
            read_run(path)

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "bad.run"
        path.write_text("001 Q0 001 1 0.5\n", "utf-8")
        with pytest.raises(ValidationError, match="6 fields"):
            read_run(path)

    def test_duplicate_pair(self, tmp_path):
        path = tmp_path / "dup.run"
        path.write_text("001 Q0 001 1 0.5 t\n001 Q0 001 2 0.4 t\n", "utf-8")
        with pytest.raises(ValidationError, match="duplicate"):
            read_run(path)

    def test_scores_from_true_prob_stay_in_unit_interval(self, tmp_path):
        rng = random.Random(3)
        cands = [
            ScoredCandidate(f"{i:03d}", true_prob(rng.uniform(-9, 9), rng.uniform(-9, 9)))
            for i in range(20)
        ]
        run = Run(tag="neural", entries={"001": cands})
        path = tmp_path / "p.run"
        write_run(run, path)
        back = read_run(path)
        assert all(0.0 <= c.score <= 1.0 for c in back.entries["001"])

    def test_empty_entry_list_rejected(self):
        with pytest.raises(ValidationError, match="empty entry"):
            Run(tag="t", entries={"001": []})

    def test_tag_must_be_wordlike(self):
        with pytest.raises(ValidationError):
            Run(tag="has space", entries={})


class TestValidateRun:
    def test_exact_cover_is_clean(self):
        ds = make_dataset(3, 3)
        run = Run(
            tag="t",
            entries={
                ex.example_id: [ScoredCandidate(c, 0.5) for c in ex.candidate_ids]
                for ex in ds.examples
            },
        )
        assert validate_run(run, ds) == []

    def test_unknown_example_flagged(self):
        ds = make_dataset(1, 2)
        run = Run(
            tag="t",
            entries={
                "001": [ScoredCandidate("001", 0.5)],
                "999": [ScoredCandidate("001", 0.5)],
            },
        )
        findings = validate_run(run, ds)
        assert len(findings) == 1
        assert "999" in findings[0]

    def test_missing_examples_counted(self):
        ds = make_dataset(100, 2)
        entries = {
            ex.example_id: [ScoredCandidate("001", 0.5)]
            for ex in ds.examples[:97]
        }
        run = Run(tag="t", entries=entries)
        findings = validate_run(run, ds)
        assert len([f for f in findings if "missing" in f]) == 3

    def test_out_of_pool_candidate_flagged(self):
        ds = make_dataset(1, 2)
        run = Run(tag="t", entries={"001": [ScoredCandidate("777", 0.5)]})
        findings = validate_run(run, ds)
        assert len(findings) == 1 and "outside" in findings[0]

"""Scorer-agnostic run I/O, the scoring-request boundary, and the
true/false-logit probability transform.

A run holds per-example scored candidate lists from one scorer and travels as
the standard six-column retrieval line `example_id Q0 candidate_id rank score
tag` with scores printed to 6 decimal places. External scorers receive a
JSONL request file (example_id, candidate_id, input_text) and answer in run
format, so any model can participate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .bm25 import ScoredCandidate
from .corpus import Dataset
from .errors import ValidationError
from .textproc import render_t5_input


@dataclass(frozen=True)
class ScoringRequest:
    example_id: str
    candidate_id: str
    input_text: str

    def __post_init__(self):
        if not self.input_text.endswith("Relevant:"):
            raise ValidationError(
                f"request for ({self.example_id}, {self.candidate_id}) does not "
                "end with the 'Relevant:' marker"
            )


@dataclass
class Run:
    """Per-example scored candidates from one scorer.

    Entries are normalized at construction: within an example, candidates are
    sorted by descending score with ascending candidate_id as tie-break, which
    makes serialization canonical.
    """

    tag: str
    entries: dict[str, list[ScoredCandidate]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.tag or any(ch.isspace() for ch in self.tag):
            raise ValidationError(f"run tag {self.tag!r} must be non-empty, no spaces")
        for example_id, cands in self.entries.items():
            if not cands:
                raise ValidationError(f"example {example_id!r} has an empty entry list")
            ids = [c.candidate_id for c in cands]
            if len(set(ids)) != len(ids):
                raise ValidationError(
                    f"example {example_id!r} has duplicate candidates in run"
                )
            cands.sort(key=lambda c: (-c.score, c.candidate_id))

    def __len__(self) -> int:
        return len(self.entries)


def true_prob(logit_true: float, logit_false: float) -> float:
    """Softmax over exactly the two relevance logits; probability of "true".

    Computed in the numerically stable single-exponential form, so
    true_prob(a, b) + true_prob(b, a) == 1 holds to float precision.
    """
    if not (math.isfinite(logit_true) and math.isfinite(logit_false)):
        raise ValidationError(
            f"logits must be finite, got ({logit_true}, {logit_false})"
        )
    if logit_true >= logit_false:
        return 1.0 / (1.0 + math.exp(logit_false - logit_true))
    e = math.exp(logit_true - logit_false)
    return e / (1.0 + e)


def write_scoring_requests(dataset: Dataset, path, limit: int = 512) -> int:
    """Write one request line per (example, candidate) pair, in dataset order.

    Returns the number of requests written.
    """
    if not dataset.examples:
        raise ValidationError("cannot write requests for an empty dataset")
    path = Path(path)
    lines = []
    for ex in dataset.examples:
        for cand in ex.candidates:
            request = ScoringRequest(
                ex.example_id,
                cand.candidate_id,
                render_t5_input(ex.fragment_text, cand.text, limit=limit),
            )
            lines.append(
                json.dumps(
                    {
                        "example_id": request.example_id,
                        "candidate_id": request.candidate_id,
                        "input_text": request.input_text,
                    },
                    ensure_ascii=False,
                )
            )
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    tmp.replace(path)
    return len(lines)


def read_scoring_requests(path) -> list[ScoringRequest]:
    requests = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                request = ScoringRequest(
                    str(record["example_id"]),
                    str(record["candidate_id"]),
                    record["input_text"],
                )
            except (json.JSONDecodeError, KeyError, TypeError):
                raise ValidationError(f"line {lineno}: malformed request") from None
            key = (request.example_id, request.candidate_id)
            if key in seen:
                raise ValidationError(f"line {lineno}: duplicate request for {key}")
            seen.add(key)
            requests.append(request)
    return requests


def write_run(run: Run, path) -> None:
    """Serialize a run canonically (atomic write, byte-stable).

    Examples are ordered by id, candidates by rank; ranks start at 1 and are
    recomputed from the sorted order.
    """
    path = Path(path)
    lines = []
    for example_id in sorted(run.entries):
        for rank, cand in enumerate(run.entries[example_id], start=1):
            score = cand.score if cand.score != 0.0 else 0.0  # avoid "-0.000000"
            lines.append(
                f"{example_id} Q0 {cand.candidate_id} {rank} {score:.6f} {run.tag}"
            )
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    tmp.replace(path)


def read_run(path) -> Run:
    """Parse a six-column run file; errors name the offending line."""
    entries: dict[str, list[ScoredCandidate]] = {}
    seen: set[tuple[str, str]] = set()
    tag = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise ValidationError(
                    f"line {lineno}: expected 6 fields, got {len(parts)}"
                )
            example_id, _q0, candidate_id, _rank, score_text, line_tag = parts
            try:
                score = float(score_text)
            except ValueError:
                raise ValidationError(
                    f"line {lineno}: unparseable score {score_text!r}"
                ) from None
            if not math.isfinite(score):
                raise ValidationError(f"line {lineno}: non-finite score {score_text!r}")
            key = (example_id, candidate_id)
            if key in seen:
                raise ValidationError(f"line {lineno}: duplicate entry for {key}")
            seen.add(key)
            tag = tag or line_tag
            entries.setdefault(example_id, []).append(
                ScoredCandidate(candidate_id, score)
            )
    if tag is None:
        raise ValidationError(f"run file {path} is empty")
    return Run(tag=tag, entries=entries)


def validate_run(run: Run, dataset: Dataset) -> list[str]:
    """Cross-check a run against a dataset; returns findings, never raises."""
    findings = []
    known = {ex.example_id: set(ex.candidate_ids) for ex in dataset.examples}
    for example_id, cands in run.entries.items():
        pool = known.get(example_id)
        if pool is None:
            findings.append(f"unknown example {example_id!r} in run")
            continue
        for cand in cands:
            if cand.candidate_id not in pool:
                findings.append(
                    f"example {example_id!r}: candidate {cand.candidate_id!r} "
                    "outside the candidate pool"
                )
    for example_id in known:
        if example_id not in run.entries:
            findings.append(f"missing example {example_id!r} in run")
    return findings

"""From-scratch inverted index and BM25 scoring.

Collection statistics (document frequencies, average length) come from the
whole indexed collection, while scoring is restricted to each example's
candidate pool. The fragment is split into sentences, each sentence scores
every pool candidate, and a candidate keeps the maximum over sentences.

Default parameters k1 = 0.9 and b = 0.4 follow the reference toolkit the
pipeline reproduces; both are overridable.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import CandidateParagraph, QueryExample
from .errors import ValidationError
from .textproc import Analyzer, segment_sentences

logger = logging.getLogger(__name__)

DEFAULT_K1 = 0.9
DEFAULT_B = 0.4

INDEX_FORMAT_VERSION = 1


def passage_id(split_name: str, example_id: str, candidate_id: str) -> str:
    """Index-wide passage id for a candidate paragraph.

    Example ids repeat across splits, so the split name namespaces them.
    """
    return f"{split_name}/{example_id}/{candidate_id}"


def aux_passage_id(doc_id: str, window_index: int) -> str:
    return f"aux/{doc_id}/w{window_index:04d}"


@dataclass(frozen=True)
class ScoredCandidate:
    candidate_id: str
    score: float

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise ValidationError(
                f"candidate {self.candidate_id!r} has non-finite score"
            )


@dataclass
class Index:
    """Immutable-after-build inverted index.

    postings maps term -> {passage_id: term_frequency}; doc_lengths holds
    analyzed token counts. The analyzer fingerprint records exactly how the
    collection was tokenized.
    """

    postings: dict[str, dict[str, int]] = field(default_factory=dict)
    doc_lengths: dict[str, int] = field(default_factory=dict)
    passage_count: int = 0
    avgdl: float = 0.0
    analyzer_fingerprint: str = ""

    def df(self, term: str) -> int:
        plist = self.postings.get(term)
        return len(plist) if plist else 0

    def __contains__(self, pid: str) -> bool:
        return pid in self.doc_lengths


def build_index(passages: Iterable[tuple[str, str]], analyzer: Analyzer) -> Index:
    """Index (passage_id, text) pairs under the given analyzer."""
    index = Index(analyzer_fingerprint=analyzer.fingerprint())
    total_len = 0
    for pid, text in passages:
        if pid in index.doc_lengths:
            raise ValidationError(f"duplicate passage id {pid!r}")
        tokens = analyzer.analyze(text)
        index.doc_lengths[pid] = len(tokens)
        total_len += len(tokens)
        for tok in tokens:
            plist = index.postings.setdefault(tok, {})
            plist[pid] = plist.get(pid, 0) + 1
    index.passage_count = len(index.doc_lengths)
    if index.passage_count == 0:
        raise ValidationError("cannot build an index over an empty collection")
    index.avgdl = total_len / index.passage_count
    logger.info(
        "indexed %d passages, %d terms, avgdl %.2f",
        index.passage_count,
        len(index.postings),
        index.avgdl,
    )
    return index


def bm25_score(
    index: Index,
    query_tokens: Sequence[str],
    pid: str,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> float:
    """BM25 score of one passage for a tokenized query.

    idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)); each unique query term
    contributes idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl)).
    """
    if pid not in index.doc_lengths:
        raise ValidationError(f"passage {pid!r} not in index")
    dl = index.doc_lengths[pid]
    n = index.passage_count
    score = 0.0
    for term in dict.fromkeys(query_tokens):
        plist = index.postings.get(term)
        if not plist:
            continue
        tf = plist.get(pid)
        if not tf:
            continue
        df = len(plist)
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / index.avgdl))
    return score


def score_fragment(
    index: Index,
    analyzer: Analyzer,
    example: QueryExample,
    split_name: str,
    pool: Sequence[CandidateParagraph] | None = None,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
    abbreviations: frozenset[str] | None = None,
) -> list[ScoredCandidate]:
    """Score an example's candidate pool by per-sentence max pooling.

    Each fragment sentence is an independent query; a candidate's score is the
    maximum over sentences. Only pool candidates are scored, with collection
    statistics taken from the whole index.
    """
    if analyzer.fingerprint() != index.analyzer_fingerprint:
        raise ValidationError(
            "analyzer configuration does not match the index fingerprint"
        )
    if not example.fragment_text.strip():
        raise ValidationError(f"example {example.example_id!r} has a blank fragment")
    pool = example.candidates if pool is None else pool
    sentence_tokens = [
        analyzer.analyze(s.text)
        for s in segment_sentences(example.fragment_text, abbreviations)
    ]
    out = []
    for cand in pool:
        pid = passage_id(split_name, example.example_id, cand.candidate_id)
        if pid not in index.doc_lengths:
            raise ValidationError(
                f"candidate {cand.candidate_id!r} of example "
                f"{example.example_id!r} is not indexed"
            )
        best = 0.0
        for tokens in sentence_tokens:
            s = bm25_score(index, tokens, pid, k1=k1, b=b)
            if s > best:
                best = s
        out.append(ScoredCandidate(cand.candidate_id, best))
    return out


def normalize_run(
    entries: Sequence[ScoredCandidate], mode: str = "none"
) -> list[ScoredCandidate]:
    """Per-query score normalization.

    Mode "none" is the identity; "max" divides by the top score so the best
    candidate lands at 1.0. A non-positive top score degrades to the identity
    with a warning (nothing meaningful to scale by).
    """
    if mode == "none":
        return list(entries)
    if mode != "max":
        raise ValidationError(f"unknown normalization mode {mode!r}")
    if not entries:
        return []
    top = max(e.score for e in entries)
    if top <= 0.0:
        logger.warning("max-normalization skipped: top score %.4f is not positive", top)
        return list(entries)
    return [ScoredCandidate(e.candidate_id, e.score / top) for e in entries]


def save_index(index: Index, path) -> None:
    """Persist the index as versioned JSON with the analyzer fingerprint."""
    path = Path(path)
    payload = {
        "format_version": INDEX_FORMAT_VERSION,
        "analyzer_fingerprint": index.analyzer_fingerprint,
        "passage_count": index.passage_count,
        "avgdl": index.avgdl,
        "doc_lengths": index.doc_lengths,
        "postings": {
            term: sorted(plist.items()) for term, plist in index.postings.items()
        },
    }
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False, sort_keys=True)
        fh.write("\n")
    tmp.replace(path)


def load_index(path, analyzer: Analyzer | None = None) -> Index:
    """Load a persisted index; verifies the analyzer fingerprint when given."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != INDEX_FORMAT_VERSION:
        raise ValidationError(f"unsupported index format version {version!r}")
    if analyzer is not None and analyzer.fingerprint() != payload["analyzer_fingerprint"]:
        raise ValidationError(
            "index was built with a different analyzer configuration"
        )
    return Index(
        postings={
            term: dict(pairs) for term, pairs in payload["postings"].items()
        },
        doc_lengths=payload["doc_lengths"],
        passage_count=payload["passage_count"],
        avgdl=payload["avgdl"],
        analyzer_fingerprint=payload["analyzer_fingerprint"],
    )

"""Request parsing, subword truncation, batched scoring, run emission."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import torch

logger = logging.getLogger(__name__)

DEFAULT_MODEL = "castorini/monot5-large-msmarco-10k"

DOCUMENT_MARKER = " Document: "
SUFFIX_MARKER = " Relevant:"


class RequestError(ValueError):
    """A request file line violates the expected format."""


@dataclass
class AdapterConfig:
    model_id: str = DEFAULT_MODEL
    batch_size: int = 16
    device: str = "cpu"
    max_input_tokens: int = 512
    tag: str | None = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")
        if self.max_input_tokens < 8:
            raise ValueError("token limit too small to hold the template")

    def run_tag(self) -> str:
        if self.tag:
            return self.tag
        return self.model_id.rsplit("/", 1)[-1].replace(" ", "-")


@dataclass(frozen=True)
class Request:
    example_id: str
    candidate_id: str
    input_text: str


def read_requests(path) -> list[Request]:
    requests = []
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                request = Request(
                    str(record["example_id"]),
                    str(record["candidate_id"]),
                    record["input_text"],
                )
            except (json.JSONDecodeError, KeyError, TypeError):
                raise RequestError(f"line {lineno}: malformed request") from None
            if not request.input_text.endswith("Relevant:"):
                raise RequestError(
                    f"line {lineno}: input_text does not end with 'Relevant:'"
                )
            key = (request.example_id, request.candidate_id)
            if key in seen:
                raise RequestError(f"line {lineno}: duplicate request for {key}")
            seen.add(key)
            requests.append(request)
    return requests


class RelevanceScorer:
    """Scores rendered query/document prompts with a seq2seq checkpoint.

    The probability comes from a softmax restricted to the logits of the
    "true" and "false" tokens at the first decoder position. The tokenizer and
    model are injected, so tests can drive the batching machinery with stubs.
    """

    def __init__(self, tokenizer, model, config: AdapterConfig):
        self.tokenizer = tokenizer
        self.model = model
        self.config = config
        self.true_id = tokenizer.encode("true", add_special_tokens=False)[0]
        self.false_id = tokenizer.encode("false", add_special_tokens=False)[0]

    def _encode(self, input_text: str) -> list[int]:
        """Tokenize with the document portion clipped to the subword budget.

        The producer's whitespace budget is approximate; the model limit is
        enforced here, never touching the query or the "Relevant:" hint.
        """
        head, marker, _ = input_text.rpartition(SUFFIX_MARKER)
        if not marker:
            raise RequestError("input_text does not end with 'Relevant:'")
        query_part, marker, document = head.partition(DOCUMENT_MARKER)
        if not marker:
            raise RequestError("input_text has no 'Document:' marker")
        encode = self.tokenizer.encode
        prefix = encode(query_part + " Document:", add_special_tokens=False)
        suffix = encode("Relevant:", add_special_tokens=False) + [
            self.tokenizer.eos_token_id
        ]
        budget = self.config.max_input_tokens - len(prefix) - len(suffix)
        if budget < 0:
            raise RequestError(
                f"query occupies {len(prefix) + len(suffix)} subword tokens, "
                f"over the {self.config.max_input_tokens} limit"
            )
        document_ids = encode(document, add_special_tokens=False)[:budget]
        return prefix + document_ids + suffix

    @torch.no_grad()
    def score_texts(self, texts: list[str]) -> list[float]:
        scores: list[float] = []
        pad_id = self.tokenizer.pad_token_id
        for start in range(0, len(texts), self.config.batch_size):
            batch = [self._encode(t) for t in texts[start : start + self.config.batch_size]]
            width = max(len(ids) for ids in batch)
            input_ids = torch.full((len(batch), width), pad_id, dtype=torch.long)
            attention_mask = torch.zeros((len(batch), width), dtype=torch.long)
            for row, ids in enumerate(batch):
                input_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
                attention_mask[row, : len(ids)] = 1
            device = self.config.device
            decoder_input_ids = torch.full((len(batch), 1), pad_id, dtype=torch.long)
            output = self.model(
                input_ids=input_ids.to(device),
                attention_mask=attention_mask.to(device),
                decoder_input_ids=decoder_input_ids.to(device),
            )
            pair_logits = output.logits[:, 0, [self.true_id, self.false_id]].float()
            probs = torch.softmax(pair_logits, dim=-1)[:, 0]
            scores.extend(probs.cpu().tolist())
        return scores


def load_scorer(config: AdapterConfig) -> RelevanceScorer:
    """Load the checkpoint named by the config from the model hub or cache."""
    from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(config.model_id)
        model = AutoModelForSeq2SeqLM.from_pretrained(config.model_id)
    except Exception as exc:
        raise RuntimeError(f"cannot load model {config.model_id!r}: {exc}") from exc
    model.eval()
    model.to(config.device)
    return RelevanceScorer(tokenizer, model, config)


def write_run(scored: list[tuple[str, str, float]], tag: str, path) -> None:
    """Emit six-column run lines: example_id Q0 candidate_id rank score tag.

    Canonical ordering: examples by id, candidates by descending score with
    ascending candidate id as tie-break, ranks from 1, scores at 6 decimals.
    """
    by_example: dict[str, list[tuple[str, float]]] = {}
    for example_id, candidate_id, score in scored:
        by_example.setdefault(example_id, []).append((candidate_id, score))
    lines = []
    for example_id in sorted(by_example):
        candidates = sorted(by_example[example_id], key=lambda c: (-c[1], c[0]))
        for rank, (candidate_id, score) in enumerate(candidates, start=1):
            score = score if score != 0.0 else 0.0
            lines.append(f"{example_id} Q0 {candidate_id} {rank} {score:.6f} {tag}")
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    tmp.replace(path)


def score_requests(request_path, out_path, config: AdapterConfig,
                   scorer: RelevanceScorer | None = None) -> int:
    """Score every request and write the run file; returns the request count.

    An empty request file yields an empty run file. Pass a scorer to reuse
    loaded weights across shards; otherwise the configured checkpoint loads.
    """
    requests = read_requests(request_path)
    if not requests:
        Path(out_path).write_text("", encoding="utf-8")
        logger.info("no requests in %s; wrote empty run", request_path)
        return 0
    if scorer is None:
        scorer = load_scorer(config)
    try:
        scores = scorer.score_texts([r.input_text for r in requests])
    except torch.cuda.OutOfMemoryError as exc:
        raise RuntimeError(
            f"out of memory at batch size {config.batch_size}; "
            "retry with a smaller --batch-size"
        ) from exc
    write_run(
        [(r.example_id, r.candidate_id, s) for r, s in zip(requests, scores)],
        config.run_tag(),
        out_path,
    )
    logger.info("scored %d requests from %s", len(requests), request_path)
    return len(requests)

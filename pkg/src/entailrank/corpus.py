"""Dataset model and loaders for case-entailment data.

An example pairs a decision fragment with its candidate paragraph pool and,
on labeled splits, the gold set of entailing paragraph ids. The canonical
on-disk form is JSON Lines, one example per line; a directory-tree loader
converts the conventional competition layout into it. Datasets are immutable
after construction and safe for concurrent reads.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError
from .textproc import TokenCounter, whitespace_token_count

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CandidateParagraph:
    candidate_id: str
    text: str

    def __post_init__(self):
        if not self.candidate_id:
            raise ValidationError("candidate_id must be non-empty")
        if not self.text.strip():
            raise ValidationError(f"candidate {self.candidate_id!r} has empty text")


@dataclass(frozen=True)
class QueryExample:
    """A decision fragment with its candidate pool and optional gold labels.

    gold is tri-state: None means unlabeled test data, an empty set means
    labeled with zero positives.
    """

    example_id: str
    fragment_text: str
    candidates: tuple[CandidateParagraph, ...]
    gold: frozenset[str] | None = None

    def __post_init__(self):
        if not self.example_id:
            raise ValidationError("example_id must be non-empty")
        if not self.candidates:
            raise ValidationError(f"example {self.example_id!r} has no candidates")
        ids = [c.candidate_id for c in self.candidates]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValidationError(
                f"example {self.example_id!r} has duplicate candidate ids {dupes}"
            )
        if self.gold is not None:
            unknown = self.gold - set(ids)
            if unknown:
                raise ValidationError(
                    f"example {self.example_id!r}: gold ids {sorted(unknown)} "
                    "not in candidate pool"
                )

    @property
    def candidate_ids(self) -> list[str]:
        return [c.candidate_id for c in self.candidates]


@dataclass(frozen=True)
class Dataset:
    split_name: str
    examples: tuple[QueryExample, ...]
    aux_documents: tuple[tuple[str, str], ...] = field(default=())

    def __post_init__(self):
        ids = [ex.example_id for ex in self.examples]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValidationError(f"duplicate example ids {dupes}")

    @property
    def labeled(self) -> bool:
        return bool(self.examples) and all(ex.gold is not None for ex in self.examples)

    def __len__(self) -> int:
        return len(self.examples)

    def example(self, example_id: str) -> QueryExample:
        for ex in self.examples:
            if ex.example_id == example_id:
                return ex
        raise KeyError(example_id)


@dataclass(frozen=True)
class StatsReport:
    example_count: int
    avg_candidates: float
    avg_positives: float
    avg_fragment_tokens: float
    avg_candidate_tokens: float

    def to_dict(self) -> dict:
        return {
            "example_count": self.example_count,
            "avg_candidates": self.avg_candidates,
            "avg_positives": self.avg_positives,
            "avg_fragment_tokens": self.avg_fragment_tokens,
            "avg_candidate_tokens": self.avg_candidate_tokens,
        }


def _example_from_record(record: dict, where: str) -> QueryExample:
    try:
        example_id = record["example_id"]
        fragment = record["fragment"]
        raw_candidates = record["candidates"]
    except KeyError as exc:
        raise ValidationError(f"{where}: missing field {exc}") from None
    if not isinstance(raw_candidates, list):
        raise ValidationError(f"{where}: candidates must be a list")
    candidates = []
    for cand in raw_candidates:
        try:
            candidates.append(CandidateParagraph(cand["candidate_id"], cand["text"]))
        except (TypeError, KeyError):
            raise ValidationError(f"{where}: malformed candidate record") from None
    gold = frozenset(record["gold"]) if "gold" in record else None
    return QueryExample(str(example_id), fragment, tuple(candidates), gold)


def load_canonical(path) -> Dataset:
    """Read a JSON Lines dataset file into a validated Dataset."""
    path = Path(path)
    examples = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path.name}:{lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{where}: invalid JSON ({exc.msg})") from None
            example = _example_from_record(record, where)
            if example.example_id in seen:
                raise ValidationError(
                    f"{where}: duplicate example id {example.example_id!r}"
                )
            seen.add(example.example_id)
            examples.append(example)
    return Dataset(split_name=path.stem, examples=tuple(examples))


def write_canonical(dataset: Dataset, path) -> None:
    """Write a Dataset as canonical JSON Lines (atomic, byte-stable)."""
    path = Path(path)
    lines = []
    for ex in dataset.examples:
        record: dict = {
            "example_id": ex.example_id,
            "fragment": ex.fragment_text,
            "candidates": [
                {"candidate_id": c.candidate_id, "text": c.text} for c in ex.candidates
            ],
        }
        if ex.gold is not None:
            record["gold"] = sorted(ex.gold)
        lines.append(json.dumps(record, ensure_ascii=False))
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    tmp.replace(path)


def load_coliee_layout(root, split_name: str | None = None) -> Dataset:
    """Load the conventional directory layout into a Dataset.

    Expects <root>/<example_id>/entailed_fragment.txt plus
    <root>/<example_id>/paragraphs/<nnn>.txt, and optionally <root>/labels.json
    mapping example ids to lists of gold paragraph stems. Without a labels
    file every example is unlabeled (gold absent, not empty).
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root {root} is not a directory")

    labels = None
    labels_path = root / "labels.json"
    if labels_path.exists():
        with open(labels_path, encoding="utf-8") as fh:
            raw = json.load(fh)
        labels = {
            str(k): [str(v).removesuffix(".txt") for v in vals]
            for k, vals in raw.items()
        }

    example_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    known_ids = {p.name for p in example_dirs}
    if labels is not None:
        unknown = sorted(set(labels) - known_ids)
        if unknown:
            raise ValidationError(
                f"labels.json references unknown examples {unknown}"
            )

    examples = []
    for ex_dir in example_dirs:
        fragment_path = ex_dir / "entailed_fragment.txt"
        if not fragment_path.exists():
            raise ValidationError(f"example {ex_dir.name!r}: missing fragment file")
        # tree files carry trailing newlines that would leak into templates
        fragment = fragment_path.read_text("utf-8").strip()
        para_dir = ex_dir / "paragraphs"
        para_files = sorted(para_dir.glob("*.txt")) if para_dir.is_dir() else []
        if not para_files:
            raise ValidationError(f"example {ex_dir.name!r}: no candidate paragraphs")
        candidates = tuple(
            CandidateParagraph(p.stem, p.read_text("utf-8").strip()) for p in para_files
        )
        gold = frozenset(labels.get(ex_dir.name, [])) if labels is not None else None
        examples.append(QueryExample(ex_dir.name, fragment, candidates, gold))

    logger.info("loaded %d examples from %s", len(examples), root)
    return Dataset(split_name=split_name or root.name, examples=tuple(examples))


def split_train_dev(
    dataset: Dataset, ratio: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Deterministically split a labeled dataset by example.

    The first part holds round(ratio * N) examples; both parts keep the
    original example order and gold labels.
    """
    if not dataset.labeled:
        raise ValidationError("cannot split an unlabeled dataset")
    if not 0.0 < ratio < 1.0:
        raise ValidationError(f"split ratio must be in (0, 1), got {ratio}")
    ids = [ex.example_id for ex in dataset.examples]
    rng = random.Random(seed)
    rng.shuffle(ids)
    take = int(ratio * len(ids) + 0.5)
    chosen = set(ids[:take])
    train = tuple(ex for ex in dataset.examples if ex.example_id in chosen)
    dev = tuple(ex for ex in dataset.examples if ex.example_id not in chosen)
    return (
        Dataset(split_name=f"{dataset.split_name}-train", examples=train),
        Dataset(split_name=f"{dataset.split_name}-dev", examples=dev),
    )


def dataset_stats(
    dataset: Dataset, token_counter: TokenCounter = whitespace_token_count
) -> StatsReport:
    """Per-dataset averages; token counts use whitespace splitting by default."""
    if not dataset.examples:
        raise ValidationError("cannot compute statistics for an empty dataset")
    n = len(dataset.examples)
    total_candidates = sum(len(ex.candidates) for ex in dataset.examples)
    labeled = [ex for ex in dataset.examples if ex.gold is not None]
    avg_positives = (
        sum(len(ex.gold) for ex in labeled) / len(labeled) if labeled else 0.0
    )
    fragment_tokens = sum(token_counter(ex.fragment_text) for ex in dataset.examples)
    candidate_tokens = sum(
        token_counter(c.text) for ex in dataset.examples for c in ex.candidates
    )
    return StatsReport(
        example_count=n,
        avg_candidates=total_candidates / n,
        avg_positives=avg_positives,
        avg_fragment_tokens=fragment_tokens / n,
        avg_candidate_tokens=candidate_tokens / total_candidates,
    )


def load_aux_documents(path) -> list[tuple[str, str]]:
    """Read auxiliary long documents (JSONL with doc_id and text fields).

    These contribute collection statistics only and never carry labels.
    """
    path = Path(path)
    docs = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path.name}:{lineno}"
            try:
                record = json.loads(line)
                doc_id, text = str(record["doc_id"]), record["text"]
            except (json.JSONDecodeError, KeyError, TypeError):
                raise ValidationError(f"{where}: malformed aux document record") from None
            if doc_id in seen:
                raise ValidationError(f"{where}: duplicate doc_id {doc_id!r}")
            seen.add(doc_id)
            docs.append((doc_id, text))
    return docs

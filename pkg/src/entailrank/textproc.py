"""Text processing: sentence segmentation, the BM25 analyzer chain, window
segmentation of long documents, the seq2seq input template, and training-pair
augmentation utilities.

Tokens are plain normalized strings (lowercased, stopword-filtered, stemmed).
All operations are pure and deterministic.
"""

from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Iterable, Sequence

from .errors import ValidationError
from .stemmer import stem as porter_stem

_TERMINATORS = ".!?"
_CLOSERS = "\"')]»”’"
_OPENERS = "\"'([{«“‘"
_TOKEN_RE = re.compile(r"[0-9a-z]+")
_TOKEN_RE_CASED = re.compile(r"[0-9A-Za-z]+")


def _load_wordlist(name: str) -> frozenset[str]:
    text = resources.files("entailrank").joinpath(f"data/{name}").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def default_stopwords() -> frozenset[str]:
    """The 33-word English stopword list shipped with the package."""
    return _load_wordlist("stopwords.txt")


def default_abbreviations() -> frozenset[str]:
    """Abbreviation guard list for the sentence segmenter (legal forms included)."""
    return _load_wordlist("abbreviations.txt")


def load_wordlist_file(path) -> frozenset[str]:
    """Read a plain-text word list, one entry per line, for CLI overrides."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip() for line in fh if line.strip())


@dataclass(frozen=True)
class Sentence:
    """One sentence of a source text with its character span."""

    index: int
    text: str
    char_span: tuple[int, int]


@dataclass(frozen=True)
class ArtificialFragment:
    """A sliding-window slice of a base-case paragraph reusing the source labels."""

    source_example_id: str
    window_index: int
    text: str
    labels: frozenset[str]


class Analyzer:
    """Lexical analyzer: lowercase, alphanumeric split, stopword removal, stemming.

    The chain mirrors a standard English retrieval analyzer. Each stage can be
    switched off for diagnostics; the fingerprint covers the full configuration
    so indexes remember exactly how they were tokenized.
    """

    def __init__(
        self,
        stopwords: frozenset[str] | None = None,
        stem: bool = True,
        lowercase: bool = True,
    ):
        self.stopwords = default_stopwords() if stopwords is None else frozenset(stopwords)
        self.stem = stem
        self.lowercase = lowercase

    def analyze(self, text: str) -> list[str]:
        if self.lowercase:
            tokens = _TOKEN_RE.findall(text.lower())
        else:
            tokens = _TOKEN_RE_CASED.findall(text)
        out = []
        for tok in tokens:
            if tok in self.stopwords:
                continue
            if self.stem:
                tok = porter_stem(tok)
                if not tok:
                    continue
            out.append(tok)
        return out

    def fingerprint(self) -> str:
        """Stable hash of the analyzer configuration, embedded in indexes."""
        stop_digest = hashlib.sha256(
            "\n".join(sorted(self.stopwords)).encode("utf-8")
        ).hexdigest()
        config = (
            f"lowercase={int(self.lowercase)}|split=alnum|"
            f"stopwords={stop_digest}|stem={'porter' if self.stem else 'none'}"
        )
        return hashlib.sha256(config.encode("utf-8")).hexdigest()


def segment_sentences(
    text: str, abbreviations: frozenset[str] | None = None
) -> list[Sentence]:
    """Rule-based sentence splitter.

    A boundary is a terminator run (plus trailing closers) followed by
    whitespace and then an uppercase letter or digit, unless the word ending
    at the terminator is on the abbreviation guard list. Blank input yields
    an empty list; any other input yields at least one sentence.
    """
    guard = default_abbreviations() if abbreviations is None else frozenset(abbreviations)
    n = len(text)
    cuts = []
    i = 0
    while i < n:
        if text[i] not in _TERMINATORS:
            i += 1
            continue
        term_start = i
        j = i + 1
        while j < n and text[j] in _TERMINATORS:
            j += 1
        while j < n and text[j] in _CLOSERS:
            j += 1
        k = j
        while k < n and text[k].isspace():
            k += 1
        if k > j and k < n and (text[k].isupper() or text[k].isdigit()):
            w0 = term_start
            while w0 > 0 and not text[w0 - 1].isspace():
                w0 -= 1
            word = text[w0 : term_start + 1].lstrip(_OPENERS)
            if word not in guard:
                cuts.append(j)
        i = j

    sentences: list[Sentence] = []
    prev = 0
    for cut in cuts + [n]:
        seg = text[prev:cut]
        stripped = seg.strip()
        if stripped:
            start = prev + len(seg) - len(seg.lstrip())
            end = start + len(stripped)
            sentences.append(Sentence(len(sentences), text[start:end], (start, end)))
        prev = cut
    return sentences


def window_segments(
    sentences: Sequence[Sentence], window: int = 10, stride: int = 5
) -> list[str]:
    """Split a sentence list into overlapping passages of `window` sentences.

    Windows start at multiples of `stride`; the final window is clipped, and a
    window whose span is contained in the previously emitted one is dropped.
    """
    if window < 1:
        raise ValidationError(f"window must be >= 1, got {window}")
    if stride < 1 or stride > window:
        raise ValidationError(f"stride must be in [1, window], got {stride}")
    out: list[str] = []
    prev_end = -1
    for start in range(0, len(sentences), stride):
        end = min(start + window, len(sentences))
        if out and end <= prev_end:
            continue
        out.append(" ".join(s.text for s in sentences[start:end]))
        prev_end = end
    return out


def render_t5_input(query: str, document: str, limit: int = 512) -> str:
    """Render the relevance-prompt template, truncating only the document.

    The rendering is `Query: <q> Document: <d'> Relevant:` where d' is the
    document cut so the whole string stays within `limit` whitespace tokens.
    The query is never truncated; a limit too small to fit the scaffolding,
    the query, and one document token is an error.
    """
    scaffold = 3  # the tokens "Query:", "Document:", "Relevant:"
    query_len = len(query.split())
    budget = limit - scaffold - query_len
    if budget < 1:
        raise ValidationError(
            f"limit {limit} cannot hold the template plus a {query_len}-token query"
        )
    doc_tokens = document.split()
    doc = document if len(doc_tokens) <= budget else " ".join(doc_tokens[:budget])
    return f"Query: {query} Document: {doc} Relevant:"


def make_artificial_fragments(
    base_paragraph: str,
    fragment: str,
    gold: Iterable[str],
    source_example_id: str = "",
) -> list[ArtificialFragment]:
    """Slide a fragment-sized window over the base-case paragraph.

    Window length equals the fragment's whitespace-token count L, the stride is
    max(1, L // 2), the last window is clipped, and a clipped window contained
    in the previous one is dropped. Every output copies the gold label set.
    """
    frag_tokens = fragment.split()
    para_tokens = base_paragraph.split()
    if not frag_tokens:
        raise ValidationError("fragment is empty")
    if not para_tokens:
        raise ValidationError("base paragraph is empty")
    length = len(frag_tokens)
    stride = max(1, length // 2)
    labels = frozenset(gold)
    out: list[ArtificialFragment] = []
    prev_end = -1
    for start in range(0, len(para_tokens), stride):
        end = min(start + length, len(para_tokens))
        if out and end <= prev_end:
            continue
        out.append(
            ArtificialFragment(
                source_example_id,
                len(out),
                " ".join(para_tokens[start:end]),
                labels,
            )
        )
        prev_end = end
    return out


Pair = tuple[str, str, bool]


def balanced_sample(
    pairs: Sequence[Pair], n: int = 20000, seed: int = 13
) -> list[Pair]:
    """Draw n pairs without replacement, exactly half positive, half negative.

    Deterministic for a fixed seed. Raises with the available counts when the
    pool cannot supply n/2 of either label.
    """
    if n < 2 or n % 2:
        raise ValidationError(f"sample size must be a positive even number, got {n}")
    half = n // 2
    positives = [p for p in pairs if p[2]]
    negatives = [p for p in pairs if not p[2]]
    if len(positives) < half or len(negatives) < half:
        raise ValidationError(
            f"need {half} positives and {half} negatives, "
            f"pool has {len(positives)} and {len(negatives)}"
        )
    rng = random.Random(seed)
    sample = rng.sample(positives, half) + rng.sample(negatives, half)
    rng.shuffle(sample)
    return sample


def whitespace_token_count(text: str) -> int:
    return len(text.split())


TokenCounter = Callable[[str], int]

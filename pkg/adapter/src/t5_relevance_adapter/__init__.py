"""Sequence-to-sequence relevance scoring over request files.

Consumes the ranking pipeline's JSONL scoring requests verbatim (the template
is owned by the producer), re-applies subword-level truncation to the document
portion, batches the pairs through a seq2seq checkpoint, and writes standard
six-column run files with the probability of the "true" token as the score.
"""

from .adapter import AdapterConfig, RelevanceScorer, load_scorer, score_requests

__all__ = ["AdapterConfig", "RelevanceScorer", "load_scorer", "score_requests"]

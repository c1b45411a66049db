"""Entailment-ranking pipeline for legal case retrieval.

Lexical first-stage scoring over a from-scratch inverted index, a pluggable
external-scorer boundary, threshold/top-k answer selection tuned by exhaustive
grid search, selection-level ensembles, and micro-F1 evaluation.
"""

__version__ = "0.1.0"

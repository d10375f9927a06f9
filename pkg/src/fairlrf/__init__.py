"""Fairness-guided sparse low-rank factorization of dense classifiers."""

__version__ = "0.1.0"

"""Coreference-classification workbench.

Pairwise feature extraction over annotated business-news documents, a
first-match rule engine and a decision-tree learner for the coreferent /
not-coreferent decision, transitive-closure chain scoring, and a
leave-one-text-out evaluation harness.
"""

__version__ = "0.1.0"

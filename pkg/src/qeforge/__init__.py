"""qeforge: semi-synthetic parallel data toolkit for sentence-level MT QE.

Pipeline stages: usage-example ingestion, mock multi-engine translation,
BLEU consensus filtering, human ranking (HTTP annotation service),
lexicon-driven agreement-error injection, word-order perturbation batches,
mismatched-pair negatives, distribution-controlled sampling, and a native
baseline regressor for distribution-effect experiments.
"""

__version__ = "0.1.0"

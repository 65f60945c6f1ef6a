"""Correlation utilities and a native baseline quality-score regressor.

The regressor is a ridge linear model over five transparent features
(length ratio, glossary overlap with the source, bigram disfluency,
lexicon-detected agreement conflicts, punctuation mismatch). It exists to
make distribution effects observable on CPU: the features respond directly
to this toolkit's own perturbation operators, so training-set shape shows
up in test correlation and in prediction spread.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bleu import PUNCTUATION_MARKS, tokenize
from .errors import LengthMismatch, SingularSystem, ZeroVariance
from .morph import MorphLexicon, Gender, Number
from .records import SCORE_MAX, SCORE_MIN, ScoredSegment
from .sampling import DistributionSpec, random_sample, sample_by_spec, uniform_spec
from .seeds import rng_for

__all__ = [
    "FEATURE_NAMES",
    "NEURAL_REFERENCE",
    "FeatureVector",
    "FeatureExtractor",
    "LinearModel",
    "BaselineModel",
    "pearson",
    "fit_linear",
    "ExperimentResult",
    "run_distribution_experiment",
    "render_report",
]

# Reference setup and scores of the neural QE models this baseline stands in
# for. Documented constants only; nothing below computes with them.
NEURAL_REFERENCE = {
    "classification_head_dims": (512, 256, 64),
    "lora_rank": 8,
    "lora_alpha": 16,
    "lora_dropout": 0.1,
    "pearson_normal_500k": 0.65,
    "pearson_uniform_430k": 0.88,
    "pearson_random_1m": 0.92,
    "pearson_random_4m": 0.92,
}

FEATURE_NAMES = (
    "length_ratio",
    "source_overlap",
    "lm_disfluency",
    "agreement_mismatch_count",
    "punct_mismatch",
)

_BOS = "<s>"

# Glossary keeps the most frequent co-occurring target tokens per source token.
_GLOSSARY_TOP_K = 8


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Product-moment correlation; symmetric; raises on degenerate input."""
    if len(xs) != len(ys):
        raise LengthMismatch(f"{len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise LengthMismatch("need at least 2 points")
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    dev_x = [x - mean_x for x in xs]
    dev_y = [y - mean_y for y in ys]
    var_x = math.fsum(d * d for d in dev_x)
    var_y = math.fsum(d * d for d in dev_y)
    if var_x == 0.0 or var_y == 0.0:
        raise ZeroVariance("constant sequence")
    cov = math.fsum(a * b for a, b in zip(dev_x, dev_y))
    return cov / math.sqrt(var_x * var_y)


@dataclass(frozen=True, slots=True)
class FeatureVector:
    length_ratio: float
    source_overlap: float
    lm_disfluency: float
    agreement_mismatch_count: int
    punct_mismatch: int

    def as_list(self) -> list[float]:
        return [
            self.length_ratio,
            self.source_overlap,
            self.lm_disfluency,
            float(self.agreement_mismatch_count),
            float(self.punct_mismatch),
        ]


class FeatureExtractor:
    """Per-segment features from resources fitted on a training split.

    The bigram disfluency model and the bilingual glossary are both learned
    from the split's clean score-5 pairs only, so they stay blind to the
    perturbed and mismatched records they are meant to expose.
    """

    # Bigram ML weight; the rest backs off to the add-one unigram. A hard
    # add-one bigram would flatten seen/unseen contrast on small fits.
    _INTERPOLATION = 0.8

    def __init__(
        self,
        bigram_counts: dict[str, dict[str, int]],
        context_totals: dict[str, int],
        unigram_counts: dict[str, int],
        glossary: dict[str, tuple[str, ...]],
        lexicon: MorphLexicon | None = None,
    ) -> None:
        self._bigram_counts = bigram_counts
        self._context_totals = context_totals
        self._unigram_counts = unigram_counts
        self._unigram_total = sum(unigram_counts.values())
        self._vocab_size = len(unigram_counts) + 1  # + unseen-word mass
        self._glossary = glossary
        self._lexicon = lexicon

    @classmethod
    def fit(
        cls, train: Sequence[ScoredSegment], lexicon: MorphLexicon | None = None
    ) -> "FeatureExtractor":
        bigram_counts: dict[str, dict[str, int]] = {}
        context_totals: dict[str, int] = {}
        unigram_counts: dict[str, int] = {}
        cooccur: dict[str, Counter[str]] = {}
        for seg in train:
            if seg.score != 5:
                continue
            tgt = tokenize(seg.target)
            previous = _BOS
            for token in tgt:
                unigram_counts[token] = unigram_counts.get(token, 0) + 1
                bigram_counts.setdefault(previous, {})
                bigram_counts[previous][token] = bigram_counts[previous].get(token, 0) + 1
                context_totals[previous] = context_totals.get(previous, 0) + 1
                previous = token
            for src_token in set(tokenize(seg.source)):
                bucket = cooccur.setdefault(src_token, Counter())
                bucket.update(set(tgt))
        glossary = {
            src: tuple(
                token
                for token, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[
                    :_GLOSSARY_TOP_K
                ]
            )
            for src, counts in cooccur.items()
        }
        return cls(
            bigram_counts=bigram_counts,
            context_totals=context_totals,
            unigram_counts=unigram_counts,
            glossary=glossary,
            lexicon=lexicon,
        )

    def _log_prob(self, previous: str, token: str) -> float:
        unigram = (self._unigram_counts.get(token, 0) + 1.0) / (
            self._unigram_total + self._vocab_size
        )
        total = self._context_totals.get(previous, 0)
        if total:
            ml = self._bigram_counts[previous].get(token, 0) / total
            return math.log(self._INTERPOLATION * ml + (1.0 - self._INTERPOLATION) * unigram)
        return math.log(unigram)

    def features(self, seg: ScoredSegment) -> FeatureVector:
        src = tokenize(seg.source)
        tgt = tokenize(seg.target)
        if not src or not tgt:
            raise ValueError(f"{seg.id}: empty tokenization")

        image: set[str] = set()
        for token in src:
            image.update(self._glossary.get(token, ()))
        overlap = sum(1 for token in tgt if token in image) / len(tgt)

        nll = 0.0
        previous = _BOS
        for token in tgt:
            nll -= self._log_prob(previous, token)
            previous = token
        disfluency = nll / len(tgt)

        # Concord check over the inflected words only: every consecutive
        # pair of lexicon tokens must agree in gender and number, whatever
        # sits between them. Reordering agreeing words never conflicts.
        conflicts = 0
        if self._lexicon is not None:
            inflected = [e for e in (self._lexicon.get(t) for t in tgt) if e is not None]
            for entry_l, entry_r in zip(inflected, inflected[1:]):
                genders = {entry_l.gender, entry_r.gender}
                numbers = {entry_l.number, entry_r.number}
                if (Gender.NONE not in genders and len(genders) == 2) or (
                    Number.NONE not in numbers and len(numbers) == 2
                ):
                    conflicts += 1

        punct_src = sum(1 for token in src if token in PUNCTUATION_MARKS)
        punct_tgt = sum(1 for token in tgt if token in PUNCTUATION_MARKS)

        return FeatureVector(
            length_ratio=len(tgt) / len(src),
            source_overlap=overlap,
            lm_disfluency=disfluency,
            agreement_mismatch_count=conflicts,
            punct_mismatch=abs(punct_src - punct_tgt),
        )

    def matrix(self, segs: Sequence[ScoredSegment]) -> list[list[float]]:
        return [self.features(seg).as_list() for seg in segs]

    def to_json(self) -> dict:
        return {
            "bigram_counts": self._bigram_counts,
            "context_totals": self._context_totals,
            "unigram_counts": self._unigram_counts,
            "glossary": {k: list(v) for k, v in self._glossary.items()},
        }

    @classmethod
    def from_json(cls, doc: dict, lexicon: MorphLexicon | None = None) -> "FeatureExtractor":
        return cls(
            bigram_counts=doc["bigram_counts"],
            context_totals=doc["context_totals"],
            unigram_counts=doc["unigram_counts"],
            glossary={k: tuple(v) for k, v in doc["glossary"].items()},
            lexicon=lexicon,
        )


@dataclass(frozen=True, slots=True)
class LinearModel:
    """Ridge regression weights; first weight is the intercept."""

    weights: tuple[float, ...]
    ridge_lambda: float

    def predict_row(self, features: Sequence[float]) -> float:
        if len(features) + 1 != len(self.weights):
            raise LengthMismatch(
                f"{len(features)} features vs {len(self.weights) - 1} weights"
            )
        return self.weights[0] + math.fsum(
            w * x for w, x in zip(self.weights[1:], features)
        )


def fit_linear(
    features: Sequence[Sequence[float]],
    scores: Sequence[float],
    ridge_lambda: float = 0.0,
) -> LinearModel:
    """Solve the ridge normal equations (intercept unpenalized).

    With ridge_lambda = 0 a rank-deficient design raises SingularSystem;
    any positive lambda makes the system positive definite.
    """
    if ridge_lambda < 0:
        raise ValueError("ridge_lambda must be >= 0")
    rows = len(features)
    if rows == 0:
        raise ValueError("no training rows")
    n_features = len(features[0])
    if rows != len(scores):
        raise LengthMismatch(f"{rows} rows vs {len(scores)} scores")
    if rows < n_features + 1:
        raise ValueError(f"need >= {n_features + 1} rows, got {rows}")

    design = np.hstack([np.ones((rows, 1)), np.asarray(features, dtype=np.float64)])
    target = np.asarray(scores, dtype=np.float64)
    gram = design.T @ design
    penalty = np.eye(n_features + 1)
    penalty[0, 0] = 0.0
    system = gram + ridge_lambda * penalty
    rhs = design.T @ target

    if ridge_lambda == 0.0 and np.linalg.matrix_rank(system) < n_features + 1:
        raise SingularSystem("design matrix is rank-deficient and lambda is 0")
    solution = np.linalg.solve(system, rhs)
    residual = np.linalg.norm(system @ solution - rhs)
    scale = max(np.linalg.norm(rhs), 1.0)
    if residual > 1e-8 * scale:
        raise SingularSystem(f"relative residual {residual / scale:.3e} exceeds 1e-8")
    return LinearModel(weights=tuple(float(w) for w in solution), ridge_lambda=ridge_lambda)


def clamp_prediction(value: float) -> float:
    return min(float(SCORE_MAX), max(float(SCORE_MIN), value))


@dataclass(slots=True)
class BaselineModel:
    """Fitted extractor + linear weights; the unit the CLI saves and loads."""

    extractor: FeatureExtractor
    model: LinearModel

    @classmethod
    def train(
        cls,
        train: Sequence[ScoredSegment],
        ridge_lambda: float = 1.0,
        lexicon: MorphLexicon | None = None,
    ) -> "BaselineModel":
        extractor = FeatureExtractor.fit(train, lexicon)
        matrix = extractor.matrix(train)
        scores = [float(seg.score) for seg in train]  # type: ignore[arg-type]
        return cls(extractor=extractor, model=fit_linear(matrix, scores, ridge_lambda))

    def predict(self, segs: Sequence[ScoredSegment]) -> list[float]:
        return [
            clamp_prediction(self.model.predict_row(self.extractor.features(seg).as_list()))
            for seg in segs
        ]

    def save(self, path: str | Path) -> None:
        doc = {
            "feature_names": list(FEATURE_NAMES),
            "weights": list(self.model.weights),
            "ridge_lambda": self.model.ridge_lambda,
            "extractor": self.extractor.to_json(),
        }
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, ensure_ascii=False, sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path, lexicon: MorphLexicon | None = None) -> "BaselineModel":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(
            extractor=FeatureExtractor.from_json(doc["extractor"], lexicon),
            model=LinearModel(
                weights=tuple(doc["weights"]), ridge_lambda=doc["ridge_lambda"]
            ),
        )


@dataclass(frozen=True, slots=True)
class ExperimentResult:
    spec_name: str
    train_size: int
    test_size: int
    test_pearson: float
    mean_prediction: float
    prediction_variance: float


def run_distribution_experiment(
    pool: Sequence[ScoredSegment],
    specs: Sequence[tuple[str, DistributionSpec | None]],
    train_size: int,
    test_size: int,
    seed: int,
    lexicon: MorphLexicon | None = None,
    ridge_lambda: float = 1.0,
) -> list[ExperimentResult]:
    """Train one baseline per spec and score them on a shared test set.

    The test set is uniform per class and drawn first, so every training
    sample is disjoint from it. A spec of None means plain random sampling
    (pool-proportional). Fully deterministic given (pool, parameters, seed).
    """
    test = sample_by_spec(pool, uniform_spec(), test_size, rng_for(seed, "experiment-test"))
    test_ids = {seg.id for seg in test}
    remaining = [seg for seg in pool if seg.id not in test_ids]
    test_scores = [float(seg.score) for seg in test]  # type: ignore[arg-type]

    results = []
    for name, spec in specs:
        rng = rng_for(seed, "experiment-train", name)
        if spec is None:
            train = random_sample(remaining, train_size, rng)
        else:
            train = sample_by_spec(remaining, spec, train_size, rng)
        baseline = BaselineModel.train(train, ridge_lambda=ridge_lambda, lexicon=lexicon)
        predictions = baseline.predict(test)
        n = len(predictions)
        mean_pred = math.fsum(predictions) / n
        variance = math.fsum((p - mean_pred) ** 2 for p in predictions) / n
        results.append(
            ExperimentResult(
                spec_name=name,
                train_size=len(train),
                test_size=len(test),
                test_pearson=pearson(predictions, test_scores),
                mean_prediction=mean_pred,
                prediction_variance=variance,
            )
        )
    return results


def render_report(results: Sequence[ExperimentResult]) -> str:
    """Fixed-width text table, one row per spec; deterministic formatting."""
    header = f"{'spec':<12} {'train':>7} {'test':>6} {'pearson':>9} {'mean_pred':>10} {'pred_var':>9}"
    lines = [header, "-" * len(header)]
    for r in results:
        lines.append(
            f"{r.spec_name:<12} {r.train_size:>7} {r.test_size:>6} "
            f"{r.test_pearson:>9.4f} {r.mean_prediction:>10.4f} {r.prediction_variance:>9.4f}"
        )
    return "\n".join(lines) + "\n"


def report_to_json(results: Sequence[ExperimentResult]) -> str:
    docs = [
        {
            "spec_name": r.spec_name,
            "train_size": r.train_size,
            "test_size": r.test_size,
            "test_pearson": r.test_pearson,
            "mean_prediction": r.mean_prediction,
            "prediction_variance": r.prediction_variance,
        }
        for r in results
    ]
    return json.dumps(docs, ensure_ascii=False, sort_keys=True, indent=1) + "\n"

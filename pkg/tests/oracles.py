"""Independent brute-force oracles used to pin expected values.

These deliberately share no code with the package: a regex tokenizer,
list.count()-based n-gram enumeration, Fraction arithmetic, and naive
Gaussian elimination. They exist so the main implementations are checked
against a second derivation; slow is fine here.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

_CHUNK = re.compile(r"^([.,;:!?\"']*)(.*?)([.,;:!?\"']*)$")


def oracle_tokenize(text: str, punct_split: bool = True) -> list[str]:
    tokens: list[str] = []
    for chunk in text.split():
        if not punct_split:
            tokens.append(chunk)
            continue
        match = _CHUNK.match(chunk)
        assert match is not None
        leading, core, trailing = match.groups()
        tokens.extend(leading)
        if core:
            tokens.append(core)
        tokens.extend(trailing)
    return tokens


def _ngrams(tokens: list[str], order: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1)]


def oracle_bleu(
    hypothesis: str,
    reference: str,
    max_order: int = 4,
    epsilon: Fraction = Fraction(1, 10),
    punct_split: bool = True,
) -> float:
    """Direct-definition sentence BLEU with exact rational precisions."""
    hyp = oracle_tokenize(hypothesis, punct_split)
    ref = oracle_tokenize(reference, punct_split)
    assert hyp and ref
    precisions: list[Fraction] = []
    for order in range(1, max_order + 1):
        hyp_grams = _ngrams(hyp, order)
        if not hyp_grams:
            break
        ref_grams = _ngrams(ref, order)
        matched = 0
        for gram in sorted(set(hyp_grams)):
            matched += min(hyp_grams.count(gram), ref_grams.count(gram))
        numerator = Fraction(matched) if matched > 0 else epsilon
        precisions.append(numerator / len(hyp_grams))
    geo_mean = math.exp(sum(math.log(float(p)) for p in precisions) / len(precisions))
    if len(hyp) < len(ref):
        geo_mean *= math.exp(1.0 - len(ref) / len(hyp))
    return geo_mean


def oracle_symmetric_agreement(a: str, b: str, **kwargs) -> float:
    return (oracle_bleu(a, b, **kwargs) + oracle_bleu(b, a, **kwargs)) / 2.0


def oracle_pearson(xs: list[float], ys: list[float]) -> float:
    """Product-moment correlation straight from the definition."""
    n = len(xs)
    assert n == len(ys) and n >= 2
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    cov = 0.0
    var_x = 0.0
    var_y = 0.0
    for x, y in zip(xs, ys):
        cov += (x - mean_x) * (y - mean_y)
        var_x += (x - mean_x) ** 2
        var_y += (y - mean_y) ** 2
    return cov / math.sqrt(var_x * var_y)


def oracle_solve(matrix: list[list[float]], rhs: list[float]) -> list[float]:
    """Gaussian elimination with partial pivoting, no numpy."""
    n = len(matrix)
    aug = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(aug[r][col]))
        if abs(aug[pivot][col]) < 1e-12:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        for row in range(col + 1, n):
            factor = aug[row][col] / aug[col][col]
            for k in range(col, n + 1):
                aug[row][k] -= factor * aug[col][k]
    solution = [0.0] * n
    for row in range(n - 1, -1, -1):
        acc = aug[row][n] - sum(aug[row][k] * solution[k] for k in range(row + 1, n))
        solution[row] = acc / aug[row][row]
    return solution

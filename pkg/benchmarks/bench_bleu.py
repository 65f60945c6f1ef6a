#!/usr/bin/env python3
"""Benchmark the compiled BLEU kernel against the pure-Python fallback.

The agreement filter computes six directed BLEU scores per candidate set,
so n-gram counting dominates large filtering runs; this script measures
both backends on the same seeded sentence pairs and reports the speedup.

Usage: python benchmarks/bench_bleu.py [--pairs 20000] [--max-len 25]
"""

from __future__ import annotations

import argparse
import random
import time

import qeforge.bleu as bleu_mod
from qeforge.bleu import BleuConfig, available_backends, bleu_from_tokens


def make_pairs(count: int, max_len: int, seed: int) -> list[tuple[list[str], list[str]]]:
    rng = random.Random(seed)
    vocab = [f"w{i}" for i in range(300)] + [",", "."]
    pairs = []
    for _ in range(count):
        base = [rng.choice(vocab) for _ in range(rng.randint(4, max_len))]
        variant = list(base)
        while rng.random() < 0.4:
            variant[rng.randrange(len(variant))] = rng.choice(vocab)
        pairs.append((base, variant))
    return pairs


def run_backend(name: str, pairs, cfg: BleuConfig) -> tuple[float, float]:
    bleu_mod._backend = available_backends()[name]
    checksum = 0.0
    start = time.perf_counter()
    for hyp, ref in pairs:
        checksum += bleu_from_tokens(hyp, ref, cfg)
    elapsed = time.perf_counter() - start
    return elapsed, checksum


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=20_000)
    parser.add_argument("--max-len", type=int, default=25)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    backends = available_backends()
    pairs = make_pairs(args.pairs, args.max_len, args.seed)
    cfg = BleuConfig()

    # Pairs are pre-tokenized: the kernels under test count n-grams.
    print(f"{args.pairs} sentence pairs, max length {args.max_len}, orders 1-4\n")
    results = {}
    for name in sorted(backends):
        elapsed, checksum = run_backend(name, pairs, cfg)
        results[name] = (elapsed, checksum)
        rate = args.pairs / elapsed
        print(f"  {name:<8} {elapsed:8.3f} s   {rate:10.0f} pairs/s   checksum {checksum:.6f}")

    if len(results) == 2:
        pure_time = results["pure"][0]
        fast_time = results["cython"][0]
        assert abs(results["pure"][1] - results["cython"][1]) < 1e-6, "backends disagree"
        print(f"\n  speedup: {pure_time / fast_time:.2f}x (checksums agree)")
    else:
        print("\n  compiled backend not built; only the pure path was measured")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

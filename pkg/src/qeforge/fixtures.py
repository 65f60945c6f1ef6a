"""Deterministic demo corpus for tests and the one-command pipeline.

Generates a seeded English-like source corpus and a pseudo target language
whose words inflect for gender and number via suffixes ('' / 'im' masculine
singular/plural, 'a' / 'ot' feminine), so the toy lexicon, the agreement
injector, and the feature extractor all have real structure to work with.

Some base translations carry deliberate agreement flaws shared by every
mock engine (they pass the consensus filter, as systematic errors do); the
synthetic annotator scores those segments 5 minus the flaw count, which
gives the ranked classes genuine textual signal.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from .ingest import MockTranslator, Transform, TranslatorId
from .morph import Gender, MorphEntry, MorphLexicon, Number, write_lexicon
from .seeds import derive_seed, rng_for

__all__ = [
    "FIXTURE_ENGINES",
    "FixtureInputs",
    "fixture_client",
    "generate_fixture",
    "flaw_count",
]

FIXTURE_ENGINES = (
    TranslatorId(priority=0, name="engine_a"),
    TranslatorId(priority=1, name="engine_b"),
    TranslatorId(priority=2, name="engine_c"),
)

# Per-word probability that an engine uses its own wording instead of the
# shared base translation; engine_a is the conservative reference engine.
_ENGINE_DIVERGENCE = {"engine_a": 0.0, "engine_b": 0.035, "engine_c": 0.10}

# Sentence-level flaw counts for the shared base translation.
_FLAW_WEIGHTS = ((0, 0.55), (1, 0.30), (2, 0.15))

_CONTENT_WORDS = (
    "teacher", "garden", "letter", "window", "market", "singer", "bridge",
    "flower", "doctor", "kitchen", "mirror", "farmer", "village", "painter",
    "student", "forest", "dinner", "writer", "mountain", "library", "sailor",
    "meadow", "lantern", "baker", "harbor", "orchard", "tailor", "valley",
    "candle", "dancer", "river", "basket", "hunter", "castle", "driver",
    "needle", "keeper", "temple", "runner", "anchor", "helper", "shadow",
    "corner", "weaver", "island", "butter", "miller", "stable", "potter",
)

_FUNCTION_WORDS = (
    "the", "a", "near", "with", "under", "beside", "from", "into", "and",
    "over", "around", "behind", "toward", "without", "before", "after",
)

_SUFFIXES = {
    (Gender.MASCULINE, Number.SINGULAR): "",
    (Gender.MASCULINE, Number.PLURAL): "im",
    (Gender.FEMININE, Number.SINGULAR): "a",
    (Gender.FEMININE, Number.PLURAL): "ot",
}

_STEM_CONSONANTS = "bdgklmnprstvz"
_STEM_VOWELS = "aeiou"


def _stem(seed: int, word: str) -> str:
    value = derive_seed(seed, "stem", word)
    out = []
    for _ in range(2):
        out.append(_STEM_CONSONANTS[value % 13])
        value //= 13
        out.append(_STEM_VOWELS[value % 5])
        value //= 5
    out.append(_STEM_CONSONANTS[value % 13])
    return "".join(out)


def _sentence_features(seed: int, sentence: str) -> tuple[Gender, Number]:
    """Agreement features shared by every content word of one sentence.

    The pseudo language has strict concord: a correct translation inflects
    all content words alike, so a flipped suffix is a detectable violation.
    """
    value = derive_seed(seed, "concord", sentence)
    gender = Gender.MASCULINE if value % 2 == 0 else Gender.FEMININE
    number = Number.SINGULAR if (value >> 1) % 2 == 0 else Number.PLURAL
    return gender, number


def _content_words() -> tuple[str, ...]:
    return _CONTENT_WORDS


def build_lexicon(seed: int) -> MorphLexicon:
    """Toy lexicon over the pseudo language: four suffix forms per stem."""
    entries = []
    for word in _content_words():
        stem = _stem(seed, word)
        forms = {feats: stem + suffix for feats, suffix in _SUFFIXES.items()}
        for feats, surface in forms.items():
            entries.append(
                MorphEntry(surface=surface, gender=feats[0], number=feats[1], variants=forms)
            )
    return MorphLexicon(entries)


def _translate_word(seed: int, word: str, feats: tuple[Gender, Number]) -> str:
    """Base mapping for one source token, preserving trailing punctuation."""
    core = word.rstrip(".,!?;:")
    tail = word[len(core):]
    if not core:
        return word
    if core in _FUNCTION_WORDS:
        return _stem(seed, "func:" + core) + tail
    return _stem(seed, core) + _SUFFIXES[feats] + tail


def base_translation(seed: int, sentence: str) -> list[str]:
    """Flawless translation of a source sentence, concord-consistent."""
    feats = _sentence_features(seed, sentence)
    return [_translate_word(seed, tok, feats) for tok in sentence.split()]


def flaw_count(seed: int, sentence: str) -> int:
    """Deliberate agreement-flaw count of this sentence's base translation."""
    roll = derive_seed(seed, "flaws", sentence) / 2**64
    acc = 0.0
    for count, weight in _FLAW_WEIGHTS:
        acc += weight
        if roll < acc:
            return count
    return _FLAW_WEIGHTS[-1][0]


def _apply_flaws(seed: int, sentence: str, tokens: list[str], lex: MorphLexicon) -> list[str]:
    flaws = flaw_count(seed, sentence)
    if flaws == 0:
        return tokens
    sites = [i for i, tok in enumerate(tokens) if lex.get(tok) is not None]
    if not sites:
        return tokens
    rng = random.Random(derive_seed(seed, "flaw-sites", sentence))
    out = list(tokens)
    for pos in rng.sample(sites, min(flaws, len(sites))):
        entry = lex.get(out[pos])
        assert entry is not None
        flips = entry.single_feature_flips()
        out[pos] = rng.choice(flips)[1]
    return out


def _engine_transform(seed: int, engine: str, lex: MorphLexicon) -> Transform:
    divergence = _ENGINE_DIVERGENCE.get(engine, 0.05)

    def transform(tokens: list[str]) -> list[str]:
        sentence = " ".join(tokens)
        base = base_translation(seed, sentence)
        base = _apply_flaws(seed, sentence, base, lex)
        if divergence == 0.0:
            return base
        out = []
        for src_tok, tgt_tok in zip(tokens, base):
            roll = derive_seed(seed, "diverge", engine, src_tok) / 2**64
            if roll < divergence:
                core = tgt_tok.rstrip(".,!?;:")
                tail = tgt_tok[len(core):]
                out.append(_stem(seed, f"alt:{engine}:{src_tok}") + tail)
            else:
                out.append(tgt_tok)
        return out

    return transform


def fixture_client(seed: int) -> MockTranslator:
    """Three-engine deterministic mock over the pseudo language."""
    lex = build_lexicon(seed)
    return MockTranslator(
        per_engine={
            tid.name: _engine_transform(seed, tid.name, lex) for tid in FIXTURE_ENGINES
        }
    )


def _successor_graph(seed: int) -> dict[str, tuple[str, str]]:
    """Sparse word-succession graph: two followers per word.

    Sentences are walks on this graph, so bigrams repeat across the corpus
    the way natural collocations do; that is what lets a bigram model
    trained on clean data flag reordered ones.
    """
    vocab = _content_words() + _FUNCTION_WORDS
    graph: dict[str, tuple[str, str]] = {}
    for word in vocab:
        value = derive_seed(seed, "graph", word)
        first = vocab[value % len(vocab)]
        second = vocab[(value // len(vocab)) % len(vocab)]
        if second == first:
            second = vocab[(value // len(vocab) + 1) % len(vocab)]
        graph[word] = (first, second)
    return graph


def _make_sentence(rng: random.Random, graph: dict[str, tuple[str, str]]) -> str:
    vocab = _content_words() + _FUNCTION_WORDS
    length = rng.randint(6, 11)
    word = rng.choice(vocab)
    words = [word]
    for _ in range(length - 1):
        word = rng.choice(graph[word])
        words.append(word)
    words[-1] += "."
    return " ".join(words)


@dataclass(frozen=True, slots=True)
class FixtureInputs:
    """Paths of everything the fixture pipeline consumes."""

    sources: Path
    professional: Path
    lexicon: Path
    scores: Path
    usage_examples: Path


def generate_fixture(
    out_dir: str | Path,
    seed: int,
    sentences: int = 300,
    professional: int = 300,
) -> FixtureInputs:
    """Write the seeded fixture inputs into ``out_dir``.

    sources.txt      generated sentences, one per line (consensus stage input)
    professional.tsv clean source/target pairs that enter with score 5
    lexicon.tsv      the toy morphological lexicon
    scores.tsv       synthetic annotator: segment id -> 5 minus flaw count
    usage_examples.tsv  headword/pos/example rows for the prompt builder
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    graph = _successor_graph(seed)
    lex = build_lexicon(seed)

    rng = rng_for(seed, "fixture-sentences")
    generated = [_make_sentence(rng, graph) for _ in range(sentences)]
    sources_path = out / "sources.txt"
    sources_path.write_text("\n".join(generated) + "\n", encoding="utf-8")

    scores_path = out / "scores.tsv"
    with open(scores_path, "w", encoding="utf-8", newline="\n") as fh:
        for i, sentence in enumerate(generated):
            fh.write(f"gen{i:06d}\t{5 - flaw_count(seed, sentence)}\n")

    prof_rng = rng_for(seed, "fixture-professional")
    prof_path = out / "professional.tsv"
    with open(prof_path, "w", encoding="utf-8", newline="\n") as fh:
        for _ in range(professional):
            sentence = _make_sentence(prof_rng, graph)
            target = " ".join(base_translation(seed, sentence))
            fh.write(f"{sentence}\t{target}\n")

    lexicon_path = out / "lexicon.tsv"
    write_lexicon(lexicon_path, lex)

    usage_path = out / "usage_examples.tsv"
    with open(usage_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("carnation\tnoun\tAll the men wore carnations in their buttonholes.\n")
        fh.write("harbor\tnoun\tThe fishing boats returned to the harbor before the storm.\n")
        fh.write("weave\tverb\tShe learned to weave baskets from river reeds.\n")

    return FixtureInputs(
        sources=sources_path,
        professional=prof_path,
        lexicon=lexicon_path,
        scores=scores_path,
        usage_examples=usage_path,
    )

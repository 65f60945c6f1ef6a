from __future__ import annotations

import json

from qeforge.cli import main
from qeforge.records import Origin, read_dataset, read_manifest

from conftest import make_segment
from qeforge.records import write_dataset


def run(args: list[str]) -> int:
    return main(args)


def test_bleu_subcommand(capsys):
    assert run(["bleu", "--hyp", "a b c e", "--ref", "a b c d"]) == 0
    out = capsys.readouterr().out.strip()
    assert out == "0.397635"


def test_prompt_subcommand(capsys):
    code = run(
        [
            "prompt",
            "--headword", "carnation",
            "--pos", "noun",
            "--example", "All the men wore carnations in their buttonholes.",
            "--min-words", "20",
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert '"carnation"' in out
    assert "at least 20 words" in out


def test_ingest_filter_chain(tmp_path, capsys):
    pairs = tmp_path / "pairs.tsv"
    pairs.write_text("hello there\tshalom sham\nbye now\tlehit akhshav\n", encoding="utf-8")
    out = tmp_path / "prof.tsv"
    assert run(["ingest", "--pairs", str(pairs), "--out", str(out)]) == 0
    records = read_dataset(out)
    assert len(records) == 2
    assert all(seg.score == 5 for seg in records)


def test_translate_filter_pipeline_stages(tmp_path):
    sources = tmp_path / "sources.txt"
    sources.write_text("the teacher near the garden\nthe farmer under the bridge\n", encoding="utf-8")
    candidates = tmp_path / "candidates.jsonl"
    assert run(["--seed", "7", "translate-mock", "--sources", str(sources), "--out", str(candidates)]) == 0
    lines = candidates.read_text().strip().split("\n")
    assert len(lines) == 2
    doc = json.loads(lines[0])
    assert len(doc["translations"]) == 3

    filtered = tmp_path / "filtered.tsv"
    assert run(["filter", "--candidates", str(candidates), "--out", str(filtered)]) == 0
    kept = read_dataset(filtered)
    for seg in kept:
        assert seg.origin is Origin.CONSENSUS_FILTERED
        assert seg.score is None
        assert seg.agreement is not None and seg.agreement >= 0.85


def test_sample_manifest_written(tmp_path):
    pool = []
    for score in range(6):
        for i in range(40):
            origin = Origin.MISMATCH if score == 0 else Origin.HUMAN_RANKED
            pool.append(
                make_segment(
                    f"s{score}x{i:03d}",
                    source=f"src {score} {i}",
                    target=f"tgt {score} {i}",
                    score=score,
                    origin=origin,
                )
            )
    pool_path = tmp_path / "pool.tsv"
    write_dataset(pool_path, pool)
    out = tmp_path / "sampled.tsv"
    assert run(
        ["--seed", "3", "sample", "--in", str(pool_path), "--spec", "uniform",
         "--size", "60", "--out", str(out)]
    ) == 0
    sampled = read_dataset(out)
    assert len(sampled) == 60
    manifest = read_manifest(tmp_path / "sampled.tsv.manifest")
    assert manifest.total == 60
    assert all(manifest.counts_per_score[s] == 10 for s in range(6))
    assert manifest.stage_log[-1][0] == "sample"


def test_seed_env_fallback(tmp_path, monkeypatch):
    sources = tmp_path / "s.txt"
    sources.write_text("the singer beside the river\n", encoding="utf-8")
    out_a = tmp_path / "a.jsonl"
    out_b = tmp_path / "b.jsonl"
    out_c = tmp_path / "c.jsonl"
    monkeypatch.setenv("QEFORGE_SEED", "123")
    run(["translate-mock", "--sources", str(sources), "--out", str(out_a)])
    run(["--seed", "123", "translate-mock", "--sources", str(sources), "--out", str(out_b)])
    monkeypatch.setenv("QEFORGE_SEED", "124")
    run(["translate-mock", "--sources", str(sources), "--out", str(out_c)])
    assert out_a.read_bytes() == out_b.read_bytes()
    assert out_a.read_bytes() != out_c.read_bytes()


def test_config_file_seed(tmp_path):
    config = tmp_path / "qeforge.conf"
    config.write_text("# pipeline config\nseed = 55\n", encoding="utf-8")
    sources = tmp_path / "s.txt"
    sources.write_text("the baker around the market\n", encoding="utf-8")
    out_a = tmp_path / "a.jsonl"
    out_b = tmp_path / "b.jsonl"
    run(["--config", str(config), "translate-mock", "--sources", str(sources), "--out", str(out_a)])
    run(["--seed", "55", "translate-mock", "--sources", str(sources), "--out", str(out_b)])
    assert out_a.read_bytes() == out_b.read_bytes()


def test_invalid_threshold_fails_loudly(tmp_path, capsys):
    assert run(["pipeline", "--fixture", "5", "--threshold", "1.01", "--out", str(tmp_path / "x")]) == 1
    err = capsys.readouterr().err
    assert "pipeline" in err
    assert "threshold" in err


def test_augment_stages_and_manifest(tmp_path):
    base = [
        make_segment(f"p{i:02d}", source=f"plain source {i}", target="yeled katan gadol mora")
        for i in range(10)
    ]
    base_path = tmp_path / "base.tsv"
    write_dataset(base_path, base)
    lexicon = tmp_path / "lexicon.tsv"
    lexicon.write_text(
        "yeled\tmasculine\tsingular\tfeminine.singular=yalda\tmasculine.plural=yeladim\n"
        "katan\tmasculine\tsingular\tfeminine.singular=ktana\tmasculine.plural=ktanim\n"
        "gadol\tmasculine\tsingular\tfeminine.singular=gdola\tmasculine.plural=gdolim\n"
        "mora\tfeminine\tsingular\tfeminine.plural=morot\tmasculine.singular=moreh\n",
        encoding="utf-8",
    )
    morph_out = tmp_path / "morph.tsv"
    assert run(
        ["--seed", "9", "augment-morph", "--in", str(base_path), "--lexicon", str(lexicon),
         "--plan", "1:10,2:10", "--out", str(morph_out)]
    ) == 0
    assert len(read_dataset(morph_out)) == 30

    order_out = tmp_path / "order.tsv"
    assert run(
        ["--seed", "9", "augment-order", "--in", str(morph_out), "--batch", "20",
         "--out", str(order_out)]
    ) == 0
    ordered = read_dataset(order_out)
    assert len(ordered) > 30

    neg_out = tmp_path / "neg.tsv"
    assert run(
        ["--seed", "9", "augment-negatives", "--in", str(order_out), "--count", "30",
         "--out", str(neg_out)]
    ) == 0
    negs = [seg for seg in read_dataset(neg_out) if seg.score == 0]
    assert len(negs) == 30

    manifest_out = tmp_path / "neg.tsv.manifest"
    assert run(["manifest", "--in", str(neg_out)]) == 0
    manifest = read_manifest(manifest_out)
    assert manifest.total == len(read_dataset(neg_out))


def test_train_and_evaluate_cycle(tmp_path, capsys):
    rows = []
    for i in range(120):
        score = i % 6
        src = f"w{i % 7} w{(i + 1) % 7} w{(i + 2) % 7}"
        if score == 0:
            tgt = f"zzz{i} yyy{i} xxx{i}"
            origin = Origin.MISMATCH
        else:
            tgt = f"xw{i % 7} xw{(i + 1) % 7} xw{(i + 2) % 7}"
            if score < 5:
                tgt = tgt + " junk" * (5 - score)
            origin = Origin.PROFESSIONAL if score == 5 else Origin.HUMAN_RANKED
        rows.append(make_segment(f"d{i:03d}", source=src, target=tgt, score=score, origin=origin))
    train_path = tmp_path / "train.tsv"
    write_dataset(train_path, rows)
    model_path = tmp_path / "model.json"
    assert run(["train-baseline", "--train", str(train_path), "--out", str(model_path)]) == 0
    assert run(["evaluate", "--model", str(model_path), "--test", str(train_path)]) == 0
    out = capsys.readouterr().out
    assert "pearson" in out

    features_path = tmp_path / "features.tsv"
    assert run(["features", "--in", str(train_path), "--out", str(features_path)]) == 0
    header = features_path.read_text().split("\n")[0]
    assert header.split("\t")[1] == "length_ratio"


def test_backend_subcommand(capsys):
    assert run(["backend"]) == 0
    assert capsys.readouterr().out.strip() in ("pure", "cython")


def test_pipeline_failure_names_stage_and_removes_outputs(tmp_path, capsys):
    out_dir = tmp_path / "run"
    # a 3-sentence fixture cannot cover the normal-spec sample quotas
    assert run(["--seed", "42", "pipeline", "--fixture", "3", "--out", str(out_dir)]) == 1
    err = capsys.readouterr().err
    assert "stage sample failed" in err
    assert not (out_dir / "pool.tsv").exists()
    assert not (out_dir / "dataset.tsv").exists()
    assert not any((out_dir / "work").iterdir())

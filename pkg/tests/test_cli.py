"""End-to-end CLI runs on miniature corpora."""

import hashlib
import json
import os

import numpy as np
import pytest

from kspaceqa import artifacts as art
from kspaceqa import data_io as io
from kspaceqa.cli import main
from kspaceqa.models import Model
from kspaceqa.numerics import dft2


def run(args):
    return main([str(a) for a in args])


def synth_args(out, phantoms=3, frames=2, size=24, seed=5, extra=()):
    return ["synth", "--phantoms", phantoms, "--frames", frames,
            "--size", size, "--seed", seed, "--out", out, *extra]


def file_hash(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    """One shared synth + train pair used by the checkpoint-based tests."""
    root = tmp_path_factory.mktemp("tiny")
    data = root / "data"
    assert run(synth_args(data)) == 0
    out = root / "run"
    assert run(["train", "--manifest", data / "manifest.jsonl",
                "--domain", "spatial", "--mode", "supervised",
                "--epochs", 2, "--batch-size", 16, "--seed", 3,
                "--conv-channels", "2,2,4,4", "--out", out]) == 0
    return data, out


def test_synth_counts_and_histogram(tmp_path, capsys):
    out = tmp_path / "ds"
    assert run(synth_args(out, phantoms=2, frames=2)) == 0
    printed = capsys.readouterr().out
    records = io.read_manifest(out / "manifest.jsonl")
    assert len(records) == 2 * 2 * 5      # phantoms x frames x classes
    counts = {c: 0 for c in range(5)}
    for r in records:
        counts[r.class_id] += 1
    for c, name in enumerate(art.CLASS_NAMES):
        assert f"class {name}: {counts[c]}" in printed
    assert (out / "config.json").exists()
    assert (out / "images").is_dir()


def test_synth_single_frame_skips_cardiac(tmp_path):
    out = tmp_path / "ds1"
    assert run(synth_args(out, phantoms=2, frames=1)) == 0
    records = io.read_manifest(out / "manifest.jsonl")
    assert len(records) == 2 * 4          # clean + 3 artifact classes
    assert all(r.class_id != art.CARDIAC for r in records)


def test_synth_reproducible_manifest_hash(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(synth_args(a)) == 0
    assert run(synth_args(b)) == 0
    assert file_hash(a / "manifest.jsonl") == file_hash(b / "manifest.jsonl")
    for name in sorted(os.listdir(a / "images"))[:5]:
        assert file_hash(a / "images" / name) == file_hash(b / "images" / name)


def test_synth_without_input_fails(tmp_path):
    assert run(["synth", "--out", tmp_path / "x"]) == 1


def test_corrupt_clean_is_copy(tmp_path):
    src = tmp_path / "img.kqi"
    rng = np.random.default_rng(0)
    io.save_raw(src, rng.random((16, 16)).astype(np.float32))
    dst = tmp_path / "out.kqi"
    assert run(["corrupt", "--input", src, "--class", "clean",
                "--seed", 1, "--out", dst]) == 0
    assert np.array_equal(io.load_raw(src), io.load_raw(dst))
    assert (tmp_path / "out.kqi.config.json").exists()


def test_corrupt_matches_library(tmp_path, capsys):
    src = tmp_path / "img.kqi"
    rng = np.random.default_rng(1)
    img = rng.random((16, 16)).astype(np.float32)
    io.save_raw(src, img)
    dst = tmp_path / "alias.kqi"
    assert run(["corrupt", "--input", src, "--class", "aliasing",
                "--params", '{"factor": 2, "axis": "rows"}',
                "--seed", 7, "--out", dst]) == 0
    record = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert record["class_id"] == art.ALIASING
    lib = art.corrupt_aliasing(img.astype(np.float64),
                               art.AliasingParams(2, "rows"))
    assert np.array_equal(io.load_raw(dst), lib.astype(np.float32))


def test_corrupt_deterministic(tmp_path):
    src = tmp_path / "img.kqi"
    io.save_raw(src, np.random.default_rng(2).random((16, 16)))
    o1, o2 = tmp_path / "g1.kqi", tmp_path / "g2.kqi"
    for o in (o1, o2):
        assert run(["corrupt", "--input", src, "--class", "gibbs",
                    "--seed", 9, "--out", o]) == 0
    assert file_hash(o1) == file_hash(o2)


def test_corrupt_cardiac_from_directory(tmp_path):
    seq_dir = tmp_path / "seq"
    seq_dir.mkdir()
    rng = np.random.default_rng(3)
    for t in range(3):
        io.save_raw(seq_dir / f"frame{t}.kqi", rng.random((16, 16)))
    dst = tmp_path / "card.kqi"
    assert run(["corrupt", "--input", seq_dir, "--class", "cardiac",
                "--frame", 1, "--seed", 4, "--out", dst]) == 0
    assert io.load_raw(dst).shape == (16, 16)


def test_corrupt_bad_class_fails(tmp_path):
    src = tmp_path / "img.kqi"
    io.save_raw(src, np.zeros((8, 8), np.float32))
    assert run(["corrupt", "--input", src, "--class", "speckle",
                "--out", tmp_path / "x.kqi"]) == 1


def test_train_outputs(tiny_run):
    data, out = tiny_run
    assert (out / "checkpoint.kqc").exists()
    assert (out / "config.json").exists()
    assert (out / "report.json").exists()
    history = [json.loads(l) for l in open(out / "history.jsonl")]
    assert len(history) == 2
    assert {"epoch", "label_loss", "epoch_seconds", "val_accuracy"} \
        <= set(history[0])
    # manifest snapshot has split tags, and split is by source image
    records = io.read_manifest(out / "manifest.jsonl")
    groups = {}
    for r in records:
        g = r.sample_id.rsplit("/", 1)[0]
        groups.setdefault(g, set()).add(r.split)
    assert all(len(s) == 1 for s in groups.values())
    assert {"train", "test"} == {next(iter(s)) for s in groups.values()
                                 } | {"train", "test"}


def test_train_weak_split_exactly_25_percent(tmp_path):
    data = tmp_path / "data"
    assert run(synth_args(data, phantoms=4, frames=2)) == 0   # 8 groups
    out = tmp_path / "weak"
    assert run(["train", "--manifest", data / "manifest.jsonl",
                "--mode", "weak", "--epochs", 1, "--batch-size", 16,
                "--conv-channels", "2,2,4,4", "--seed", 0,
                "--out", out]) == 0
    records = io.read_manifest(out / "manifest.jsonl")
    train_groups = {r.sample_id.rsplit("/", 1)[0]
                    for r in records if r.split == "train"}
    all_groups = {r.sample_id.rsplit("/", 1)[0] for r in records}
    assert len(train_groups) == round(0.25 * len(all_groups))


def test_train_dann_without_target_fails(tmp_path):
    data = tmp_path / "data"
    assert run(synth_args(data)) == 0
    rc = run(["train", "--manifest", data / "manifest.jsonl",
              "--mode", "dann", "--epochs", 1, "--out", tmp_path / "x"])
    assert rc == 1


def test_eval_matches_training_report(tiny_run, tmp_path, capsys):
    data, out = tiny_run
    eval_out = tmp_path / "eval"
    assert run(["eval", "--checkpoint", out / "checkpoint.kqc",
                "--manifest", out / "manifest.jsonl",
                "--split", "test", "--out", eval_out]) == 0
    with open(eval_out / "report.json") as f:
        eval_report = json.load(f)
    with open(out / "report.json") as f:
        train_report = json.load(f)
    assert eval_report["accuracy"] == pytest.approx(train_report["accuracy"])


def test_eval_split_without_tags_fails(tiny_run, tmp_path):
    data, out = tiny_run
    rc = run(["eval", "--checkpoint", out / "checkpoint.kqc",
              "--manifest", data / "manifest.jsonl", "--split", "test"])
    assert rc == 1


def test_predict_image_and_kspace_agree(tiny_run, tmp_path, capsys):
    data, out = tiny_run
    records = io.read_manifest(data / "manifest.jsonl")
    img_path = data / records[0].image
    assert run(["predict", "--checkpoint", out / "checkpoint.kqc",
                "--input", img_path]) == 0
    verdict_img = json.loads(
        capsys.readouterr().out.strip().splitlines()[-1])

    from kspaceqa.data_io import minmax_normalize, resize_bilinear
    img = io.load_image(img_path)
    k_path = tmp_path / "sample.kqk"
    # raw k-space must be at the model's acquisition size (90x90 default)
    k = dft2(minmax_normalize(resize_bilinear(img, 90, 90)))
    io.save_kspace(k_path, k.astype(np.complex64))
    model = Model.load(out / "checkpoint.kqc")
    assert model.domain == "spatial"
    # k-space prediction needs the frequency model; train a tiny one
    fout = tmp_path / "freq"
    assert run(["train", "--manifest", data / "manifest.jsonl",
                "--domain", "frequency", "--epochs", 1, "--batch-size", 16,
                "--crop", "12,12", "--seed", 0, "--out", fout]) == 0
    assert run(["predict", "--checkpoint", fout / "checkpoint.kqc",
                "--input", img_path]) == 0
    v_img = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert run(["predict", "--checkpoint", fout / "checkpoint.kqc",
                "--input", k_path]) == 0
    v_k = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert v_img["verdict"] == v_k["verdict"]
    np.testing.assert_allclose(v_img["probabilities"], v_k["probabilities"],
                               atol=1e-6)


def test_predict_missing_file_fails(tiny_run, tmp_path):
    data, out = tiny_run
    assert run(["predict", "--checkpoint", out / "checkpoint.kqc",
                "--input", tmp_path / "nope.kqi"]) == 1


def test_train_reproducible_checkpoints(tmp_path):
    data = tmp_path / "data"
    assert run(synth_args(data)) == 0
    hashes = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert run(["train", "--manifest", data / "manifest.jsonl",
                    "--epochs", 1, "--batch-size", 16, "--seed", 11,
                    "--conv-channels", "2,2,4,4", "--out", out]) == 0
        hashes.append(file_hash(out / "checkpoint.kqc"))
    assert hashes[0] == hashes[1]


def test_bench_runs_and_reports_ratio(tmp_path, capsys):
    data = tmp_path / "data"
    assert run(synth_args(data, phantoms=3, frames=2)) == 0
    out = tmp_path / "bench"
    assert run(["bench", "--manifest", data / "manifest.jsonl",
                "--epochs", 1, "--repeats", 1, "--batch-size", 16,
                "--conv-channels", "2,2,4,4", "--crop", "12,12",
                "--sweep", "8,16", "--out", out]) == 0
    with open(out / "bench.json") as f:
        summary = json.load(f)
    assert "speedup_train" in summary and summary["speedup_train"] > 0
    assert (out / "bench_epochs.csv").exists()
    sweep = open(out / "bench_sweep.csv").read().splitlines()
    assert sweep[0] == "domain,n_samples,train_seconds,accuracy"
    assert len(sweep) == 1 + 2 * 2     # two domains x two sample counts
    assert "speed-up ratio" in capsys.readouterr().out


def test_cli_plumbing_equals_library_metrics(tiny_run):
    # report fields equal a direct metrics-module evaluation
    from kspaceqa.cli import load_dataset
    from kspaceqa.training import evaluate
    data, out = tiny_run
    model = Model.load(out / "checkpoint.kqc")
    ds, records = load_dataset(str(out / "manifest.jsonl"))
    test_idx = np.array([i for i, r in enumerate(records)
                         if r.split == "test"])
    report = evaluate(model, ds, test_idx)
    with open(out / "report.json") as f:
        saved = json.load(f)
    assert saved["accuracy"] == report.accuracy
    assert saved["f_measure_micro"] == report.f_measure_micro

"""Command-line surface: corrupt | synth | train | eval | predict | bench.

Every command takes ``--config FILE`` (JSON, documented in the README)
plus flag overrides, and persists the fully resolved configuration next
to its outputs so any run can be reproduced from (config, seed).
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import artifacts, data_io, metrics, phantom
from .artifacts import CLASS_NAMES, SeverityRecord
from .models import (FrequencyModelConfig, Model, SpatialModelConfig,
                     build_frequency_model, build_spatial_model, predict)
from .training import (ArrayDataset, TrainConfig, cross_validate,
                       dataset_from_samples, evaluate, split_by_group,
                       train_dann, train_supervised)

_THREAD_LIMIT = None   # keeps a threadpoolctl handle alive for the process


def _apply_workers(n):
    global _THREAD_LIMIT
    if n is None:
        return
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return
    _THREAD_LIMIT = threadpool_limits(limits=int(n))


def _load_config(path):
    if path is None:
        return {}
    with open(path) as f:
        cfg = json.load(f)
    if not isinstance(cfg, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return cfg


def _resolve(args, file_cfg, key, default):
    """Flag (if given) beats config file beats default."""
    v = getattr(args, key, None)
    if v is not None:
        return v
    return file_cfg.get(key, default)


def _write_config(out_dir, resolved):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "config.json"), "w") as f:
        json.dump(resolved, f, indent=2, sort_keys=True)
        f.write("\n")


def _parse_ints(text):
    return tuple(int(t) for t in str(text).replace(" ", "").split(",") if t)


# ---------------------------------------------------------------- corrupt --

def _severity_from_args(class_id, params_json, seed, shape):
    if params_json:
        params = json.loads(params_json)
        return SeverityRecord.from_dict(
            {"class_id": class_id, "params": params or None, "rng_seed": seed})
    return artifacts.sample_severity(class_id, seed, shape=shape)


def cmd_corrupt(args):
    file_cfg = _load_config(args.config)
    seed = int(_resolve(args, file_cfg, "seed", 0))
    class_name = _resolve(args, file_cfg, "artifact_class", None)
    if class_name not in CLASS_NAMES:
        raise ValueError(f"--class must be one of {CLASS_NAMES}")
    class_id = CLASS_NAMES.index(class_name)
    frame_idx = int(_resolve(args, file_cfg, "frame", 0))

    if os.path.isdir(args.input):
        names = sorted(os.listdir(args.input))
        seq = [data_io.load_image(os.path.join(args.input, n)) for n in names]
        if not seq:
            raise ValueError(f"{args.input}: no frames found")
    else:
        seq = [data_io.load_image(args.input)]
    if not 0 <= frame_idx < len(seq):
        raise ValueError(f"--frame {frame_idx} out of range")

    record = _severity_from_args(class_id, args.params, seed,
                                 seq[frame_idx].shape)
    out_img = artifacts.apply_severity(seq, frame_idx, record)
    data_io.save_image(args.out, out_img)
    resolved = {"command": "corrupt", "input": args.input, "out": args.out,
                "artifact_class": class_name, "frame": frame_idx,
                "seed": seed, "severity": record.to_dict()}
    with open(args.out + ".config.json", "w") as f:
        json.dump(resolved, f, indent=2, sort_keys=True)
        f.write("\n")
    print(json.dumps(record.to_dict()))
    return 0


# ------------------------------------------------------------------ synth --

def _augment_sequence(seq, ops, seed):
    # identical draws per frame keep a cine sequence temporally coherent
    return [data_io.augment(f, ops, seed) for f in seq]


def _sample_file_name(sample_id):
    return sample_id.replace("/", "_") + data_io.RAW_EXT


def cmd_synth(args):
    file_cfg = _load_config(args.config)
    seed = int(_resolve(args, file_cfg, "seed", 0))
    n_phantoms = _resolve(args, file_cfg, "phantoms", None)
    frames = int(_resolve(args, file_cfg, "frames", 4))
    size = int(_resolve(args, file_cfg, "size", 90))
    noise = float(_resolve(args, file_cfg, "noise_sigma", 0.01))
    invert = bool(_resolve(args, file_cfg, "invert", False))
    n_augment = int(_resolve(args, file_cfg, "augment", 0))
    out_dir = args.out

    if args.corpus:
        seq_dirs = sorted(
            d for d in os.listdir(args.corpus)
            if os.path.isdir(os.path.join(args.corpus, d)))
        sequences = []
        for d in seq_dirs:
            full = os.path.join(args.corpus, d)
            frames_files = sorted(os.listdir(full))
            sequences.append([data_io.load_image(os.path.join(full, n))
                              for n in frames_files])
        if not sequences:
            raise ValueError(f"{args.corpus}: no sequence directories found")
    else:
        if not n_phantoms:
            raise ValueError("need --phantoms N or a corpus directory")
        sequences = phantom.make_corpus(
            int(n_phantoms), master_seed=seed, size=size, frames=frames,
            noise_sigma=noise, invert=invert)

    if n_augment > 0:
        ops = data_io.AugmentOps(
            hflip=bool(_resolve(args, file_cfg, "augment_hflip", True)),
            vflip=bool(_resolve(args, file_cfg, "augment_vflip", True)),
            rotate_deg=float(_resolve(args, file_cfg, "augment_rotate", 15.0)),
            brightness=float(
                _resolve(args, file_cfg, "augment_brightness", 0.1)))
        extra = []
        for i, seq in enumerate(sequences):
            for v in range(n_augment):
                aug_seed = int(np.random.SeedSequence(
                    (seed, "augment", i, v)).generate_state(1)[0])
                extra.append(_augment_sequence(seq, ops, aug_seed))
        sequences = sequences + extra

    samples, counts = artifacts.build_dataset(sequences, master_seed=seed)
    img_dir = os.path.join(out_dir, "images")
    os.makedirs(img_dir, exist_ok=True)
    records = []
    for s in samples:
        rel = os.path.join("images", _sample_file_name(s.sample_id))
        data_io.save_raw(os.path.join(out_dir, rel), s.image)
        records.append(data_io.ManifestRecord(
            sample_id=s.sample_id, image=rel, class_id=s.class_id,
            severity=s.severity, rng_seed=s.severity.rng_seed,
            domain=s.domain, split=""))
    data_io.write_manifest(os.path.join(out_dir, "manifest.jsonl"), records)
    resolved = {"command": "synth", "seed": seed, "phantoms": n_phantoms,
                "corpus": args.corpus, "frames": frames, "size": size,
                "noise_sigma": noise, "invert": invert, "augment": n_augment,
                "out": out_dir}
    _write_config(out_dir, resolved)
    total = sum(counts.values())
    print(f"wrote {total} samples to {out_dir}")
    for c, name in enumerate(CLASS_NAMES):
        print(f"  class {name}: {counts[c]}")
    return 0


# ------------------------------------------------------------------ train --

def _group_of(sample_id):
    return sample_id.rsplit("/", 1)[0]


def load_dataset(manifest_path):
    """Manifest -> (ArrayDataset, records); groups come from sample ids."""
    records, images = data_io.load_manifest_images(manifest_path)
    if not records:
        raise ValueError(f"{manifest_path}: empty manifest")
    samples = [artifacts.LabeledSample(
        image=img, class_id=r.class_id, severity=r.severity,
        source_id=_group_of(r.sample_id), domain=r.domain,
        sample_id=r.sample_id) for r, img in zip(records, images)]
    return dataset_from_samples(samples), records


def _model_builder(domain, args, file_cfg, seed, with_domain_head=False):
    if domain == "spatial":
        kwargs = {"seed": seed, "with_domain_head": with_domain_head}
        channels = _resolve(args, file_cfg, "conv_channels", None)
        if channels:
            kwargs["conv_channels"] = _parse_ints(channels) \
                if not isinstance(channels, (list, tuple)) else tuple(channels)
        kernel = _resolve(args, file_cfg, "kernel", None)
        if kernel:
            kwargs["kernel"] = int(kernel)
        return build_spatial_model(SpatialModelConfig(**kwargs))
    kwargs = {"seed": seed}
    crop = _resolve(args, file_cfg, "crop_hw", None)
    if crop:
        kwargs["crop_hw"] = _parse_ints(crop) \
            if not isinstance(crop, (list, tuple)) else tuple(crop)
    return build_frequency_model(FrequencyModelConfig(**kwargs))


def _report_rows(report):
    zero = lambda v: (v, 0.0)
    return {
        "accuracy": zero(report.accuracy),
        "precision": zero(report.precision_micro),
        "recall": zero(report.recall_micro),
        "f_measure": zero(report.f_measure_micro),
        "auc": zero(report.auc_macro) if report.auc_macro is not None else None,
    }


def _write_history(path, history):
    with open(path, "w") as f:
        for rec in history.to_records():
            f.write(json.dumps(rec))
            f.write("\n")


def cmd_train(args):
    file_cfg = _load_config(args.config)
    seed = int(_resolve(args, file_cfg, "seed", 0))
    domain = _resolve(args, file_cfg, "domain", "spatial")
    mode = _resolve(args, file_cfg, "mode", "supervised")
    if domain not in ("spatial", "frequency"):
        raise ValueError("--domain must be spatial or frequency")
    target_path = _resolve(args, file_cfg, "target", None)
    if mode == "dann":
        if not target_path:
            raise ValueError(
                "usage: --mode dann requires --target MANIFEST "
                "(unlabeled target domain)")
        if domain != "spatial":
            raise ValueError("domain adaptation runs on the spatial model")
    default_fraction = {"supervised": 0.75, "weak": 0.25, "dann": 0.75}[mode]
    fraction = float(_resolve(args, file_cfg, "train_fraction",
                              default_fraction))
    cfg = TrainConfig(
        epochs=int(_resolve(args, file_cfg, "epochs", 25)),
        batch_size=int(_resolve(args, file_cfg, "batch_size", 128)),
        lr=float(_resolve(args, file_cfg, "lr", 1e-3)),
        train_fraction=fraction, seed=seed, mode=mode)
    _apply_workers(_resolve(args, file_cfg, "workers", None))

    dataset, records = load_dataset(args.manifest)
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)

    cv_k = _resolve(args, file_cfg, "cv", None)
    if cv_k:
        builder = lambda s: _model_builder(domain, args, file_cfg, s)
        reports, agg = cross_validate(dataset, cfg, int(cv_k), builder)
        rows = [(f"{domain}/{mode} {int(cv_k)}-fold", {
            "accuracy": agg["accuracy"],
            "precision": agg["precision_micro"],
            "recall": agg["recall_micro"],
            "f_measure": agg["f_measure_micro"],
            "auc": agg.get("auc_macro"),
        })]
        table = metrics.format_mean_std_table(rows)
        print(table)
        with open(os.path.join(out_dir, "report.json"), "w") as f:
            json.dump({"aggregate": {k: list(v) for k, v in agg.items()},
                       "folds": [r.to_dict() for r in reports]}, f, indent=2)
        resolved = {"command": "train", "manifest": args.manifest,
                    "domain": domain, "mode": mode, "cv": int(cv_k),
                    "seed": seed, "epochs": cfg.epochs,
                    "batch_size": cfg.batch_size, "lr": cfg.lr,
                    "train_fraction": cfg.train_fraction, "out": out_dir}
        _write_config(out_dir, resolved)
        return 0

    split = split_by_group(dataset, cfg.train_fraction, cfg.seed)
    model = _model_builder(domain, args, file_cfg, seed,
                           with_domain_head=(mode == "dann"))
    if mode == "dann":
        target_ds, _ = load_dataset(target_path)
        model, history = train_dann(model, dataset, target_ds, cfg,
                                    source_split=split)
    else:
        model, history = train_supervised(model, dataset, cfg, split=split)

    report = evaluate(model, dataset, split[1])
    ckpt = os.path.join(out_dir, "checkpoint.kqc")
    model.save(ckpt)
    _write_history(os.path.join(out_dir, "history.jsonl"), history)
    with open(os.path.join(out_dir, "report.json"), "w") as f:
        json.dump(report.to_dict(), f, indent=2)

    # manifest snapshot with resolved split tags; image paths are
    # rewritten relative to the snapshot so it stays loadable from out_dir
    manifest_root = os.path.dirname(os.path.abspath(args.manifest))
    train_ids = set(dataset.groups[split[0]])
    tagged = [data_io.ManifestRecord(
        sample_id=r.sample_id,
        image=os.path.relpath(os.path.join(manifest_root, r.image),
                              os.path.abspath(out_dir)),
        class_id=r.class_id,
        severity=r.severity, rng_seed=r.rng_seed, domain=r.domain,
        split="train" if _group_of(r.sample_id) in train_ids else "test")
        for r in records]
    data_io.write_manifest(os.path.join(out_dir, "manifest.jsonl"), tagged)

    resolved = {"command": "train", "manifest": args.manifest,
                "domain": domain, "mode": mode, "target": target_path,
                "seed": seed, "epochs": cfg.epochs,
                "batch_size": cfg.batch_size, "lr": cfg.lr,
                "train_fraction": cfg.train_fraction,
                "parameters": model.n_parameters(), "out": out_dir}
    _write_config(out_dir, resolved)
    print(metrics.format_mean_std_table(
        [(f"{domain}/{mode} held-out", _report_rows(report))]))
    print(f"checkpoint: {ckpt}")
    return 0


# ------------------------------------------------------------------- eval --

def cmd_eval(args):
    model = Model.load(args.checkpoint)
    dataset, records = load_dataset(args.manifest)
    if args.split != "all":
        idx = np.array([i for i, r in enumerate(records)
                        if r.split == args.split])
        if idx.size == 0:
            raise ValueError(
                f"manifest has no records tagged split={args.split!r}")
    else:
        idx = np.arange(len(dataset))
    report = evaluate(model, dataset, idx)
    print(metrics.format_mean_std_table(
        [(f"{model.domain} eval[{args.split}]", _report_rows(report))]))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.json"), "w") as f:
            json.dump(report.to_dict(), f, indent=2)
        _write_config(args.out, {
            "command": "eval", "checkpoint": args.checkpoint,
            "manifest": args.manifest, "split": args.split, "out": args.out})
    return 0


# ---------------------------------------------------------------- predict --

def cmd_predict(args):
    model = Model.load(args.checkpoint)
    if args.input.endswith(data_io.KSPACE_EXT):
        x = data_io.load_kspace(args.input)
    else:
        x = data_io.load_image(args.input)
    probs = predict(model, x)
    verdict = int(np.argmax(probs))
    record = {"input": args.input, "verdict": CLASS_NAMES[verdict],
              "class_id": verdict,
              "probabilities": [float(p) for p in probs]}
    print(f"verdict: {CLASS_NAMES[verdict]} (p={probs[verdict]:.3f})")
    print(json.dumps(record))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "prediction.json"), "w") as f:
            json.dump(record, f, indent=2)
        _write_config(args.out, {
            "command": "predict", "checkpoint": args.checkpoint,
            "input": args.input, "out": args.out})
    return 0


# ------------------------------------------------------------------ bench --

def bench_models(dataset, builders, cfg, repeats=3, split=None):
    """Time identical training/inference for each named model builder.

    Returns {name: {"epoch_seconds": per-repeat lists, "test_seconds":
    [...], "accuracy": [...]}}. Timing covers the optimization loop only
    (dataset I/O and preparation are outside the clock).
    """
    split = (split if split is not None else
             split_by_group(dataset, cfg.train_fraction, cfg.seed))
    results = {}
    for name, builder in builders.items():
        entry = {"epoch_seconds": [], "test_seconds": [], "accuracy": []}
        for rep in range(repeats):
            model = builder(cfg.seed + rep)
            model, history = train_supervised(model, dataset, cfg, split=split)
            test_imgs = dataset.images[split[1]]
            t0 = time.perf_counter()
            scores = model.predict_proba(test_imgs)
            entry["test_seconds"].append(time.perf_counter() - t0)
            entry["accuracy"].append(
                float((scores.argmax(axis=1)
                       == dataset.labels[split[1]]).mean()))
            entry["epoch_seconds"].append(history.epoch_seconds)
        results[name] = entry
    return results


def _epoch_stats(entry):
    flat = np.concatenate([np.asarray(e) for e in entry["epoch_seconds"]])
    return {"median": float(np.median(flat)), "mean": float(flat.mean()),
            "std": float(flat.std())}


def cmd_bench(args):
    file_cfg = _load_config(args.config)
    seed = int(_resolve(args, file_cfg, "seed", 0))
    cfg = TrainConfig(
        epochs=int(_resolve(args, file_cfg, "epochs", 3)),
        batch_size=int(_resolve(args, file_cfg, "batch_size", 128)),
        lr=float(_resolve(args, file_cfg, "lr", 1e-3)),
        train_fraction=float(_resolve(args, file_cfg, "train_fraction", 0.75)),
        seed=seed)
    repeats = int(_resolve(args, file_cfg, "repeats", 3))
    _apply_workers(_resolve(args, file_cfg, "workers", None))
    dataset, _ = load_dataset(args.manifest)
    builders = {
        "spatial": lambda s: _model_builder("spatial", args, file_cfg, s),
        "frequency": lambda s: _model_builder("frequency", args, file_cfg, s),
    }
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    results = bench_models(dataset, builders, cfg, repeats=repeats)

    stats = {name: _epoch_stats(entry) for name, entry in results.items()}
    test_med = {name: float(np.median(entry["test_seconds"]))
                for name, entry in results.items()}
    train_ratio = stats["spatial"]["median"] / stats["frequency"]["median"]
    test_ratio = test_med["spatial"] / max(test_med["frequency"], 1e-12)
    summary = {
        "epochs": cfg.epochs, "repeats": repeats,
        "per_epoch_seconds": stats,
        "test_seconds_median": test_med,
        "accuracy_mean": {n: float(np.mean(e["accuracy"]))
                          for n, e in results.items()},
        "speedup_train": train_ratio,
        "speedup_test": test_ratio,
    }
    with open(os.path.join(out_dir, "bench.json"), "w") as f:
        json.dump(summary, f, indent=2)
    with open(os.path.join(out_dir, "bench_epochs.csv"), "w") as f:
        f.write("domain,repeat,epoch,seconds\n")
        for name, entry in results.items():
            for rep, epochs in enumerate(entry["epoch_seconds"]):
                for e, sec in enumerate(epochs):
                    f.write(f"{name},{rep},{e},{sec:.6f}\n")

    sweep = _resolve(args, file_cfg, "sweep", None)
    if sweep:
        counts = _parse_ints(sweep) if not isinstance(sweep, (list, tuple)) \
            else tuple(int(c) for c in sweep)
        split = split_by_group(dataset, cfg.train_fraction, cfg.seed)
        rng = np.random.default_rng(cfg.seed)
        order = rng.permutation(len(split[0]))
        with open(os.path.join(out_dir, "bench_sweep.csv"), "w") as f:
            f.write("domain,n_samples,train_seconds,accuracy\n")
            for name, builder in builders.items():
                for m in counts:
                    m = min(m, len(order))
                    sub = (split[0][order[:m]], split[1])
                    model = builder(cfg.seed)
                    model, history = train_supervised(
                        model, dataset, cfg, split=sub)
                    total = float(np.sum(history.epoch_seconds))
                    acc = history.val_accuracy[-1]
                    f.write(f"{name},{m},{total:.6f},{acc:.6f}\n")

    for name, s in stats.items():
        print(f"{name}: per-epoch median {s['median']:.3f}s "
              f"(mean {s['mean']:.3f} +/- {s['std']:.3f}), "
              f"test {test_med[name]:.3f}s, "
              f"accuracy {summary['accuracy_mean'][name]:.3f}")
    print(f"speed-up ratio (train, spatial/frequency): {train_ratio:.3f}")
    print(f"speed-up ratio (test, spatial/frequency): {test_ratio:.3f}")
    _write_config(out_dir, {
        "command": "bench", "manifest": args.manifest, "seed": seed,
        "epochs": cfg.epochs, "batch_size": cfg.batch_size, "lr": cfg.lr,
        "train_fraction": cfg.train_fraction, "repeats": repeats,
        "sweep": list(sweep) if isinstance(sweep, (list, tuple)) else sweep,
        "out": out_dir})
    return 0


# ------------------------------------------------------------------- main --

def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--seed", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kspaceqa",
        description="k-space artifact synthesis and image-quality models")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("corrupt", help="corrupt one image (or cine frame)")
    _add_common(p)
    p.add_argument("--input", required=True,
                   help="image file, or a directory of frames for cardiac")
    p.add_argument("--class", dest="artifact_class", default=None,
                   help=f"one of {', '.join(CLASS_NAMES)}")
    p.add_argument("--frame", type=int, default=None,
                   help="frame index when --input is a directory")
    p.add_argument("--params", default=None,
                   help="JSON severity parameters (else drawn from --seed)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("synth", help="build a labeled dataset")
    _add_common(p)
    p.add_argument("--corpus", default=None,
                   help="directory of sequence subdirectories to corrupt")
    p.add_argument("--phantoms", type=int, default=None,
                   help="number of procedural phantom sequences")
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float,
                   default=None)
    p.add_argument("--invert", action="store_const", const=True, default=None)
    p.add_argument("--augment", type=int, default=None,
                   help="augmented variants per sequence")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a classifier from a manifest")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--domain", choices=["spatial", "frequency"], default=None)
    p.add_argument("--mode", choices=["supervised", "weak", "dann"],
                   default=None)
    p.add_argument("--target", default=None,
                   help="target-domain manifest for --mode dann")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--train-fraction", dest="train_fraction", type=float,
                   default=None)
    p.add_argument("--cv", type=int, default=None,
                   help="run k-fold cross-validation instead of one split")
    p.add_argument("--conv-channels", dest="conv_channels", default=None)
    p.add_argument("--kernel", type=int, default=None)
    p.add_argument("--crop", dest="crop_hw", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a manifest")
    _add_common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", choices=["all", "train", "test"], default="all")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="classify one image or raw k-space")
    _add_common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True,
                   help=f"image, or raw k-space ({data_io.KSPACE_EXT})")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("bench", help="spatial vs frequency timing comparison")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--train-fraction", dest="train_fraction", type=float,
                   default=None)
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--sweep", default=None,
                   help="comma list of training sample counts")
    p.add_argument("--conv-channels", dest="conv_channels", default=None)
    p.add_argument("--kernel", type=int, default=None)
    p.add_argument("--crop", dest="crop_hw", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: split, train, evaluate, predict, visualize, dump-kernels.
Every command reads the same TOML config; --desk-scale switches to the
fast preset and --threads bounds internal parallelism (results do not
depend on the worker count). Outputs are written atomically. Exit codes:
0 success, 1 usage/config error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import model as dbmodel
from .boost import RoundRecord
from .config import ConfigError, RunConfig, apply_desk_scale, config_echo_toml, load_config
from .errors import ConfigMismatchError, DeepBoostError
from .gabor import dump_kernels_pgm
from .imageio import load_canonical, manifest_text, read_manifest, scan_dataset, split_dataset
from .model_io import atomic_write_bytes, load_model, save_model
from .visualize import render_layer_svg

log = logging.getLogger("deepboost")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse's own failures to exit code 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="deepboost", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="TOML run configuration")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--desk-scale", action="store_true",
                        help="stride 4 and 100/80/50 rounds for fast runs")

    sp = sub.add_parser("split", help="write train/test manifest files")
    common(sp)

    sp = sub.add_parser("train", help="train the one-vs-all model from a manifest")
    common(sp)
    sp.add_argument("--manifest", help="split manifest (default: <output_dir>/split_00.tsv)")

    sp = sub.add_parser("evaluate", help="per-class rates, confusion matrix, per-layer rates")
    common(sp)
    sp.add_argument("--manifest")
    sp.add_argument("--model", help="model file (default: <output_dir>/model.dbm)")

    sp = sub.add_parser("predict", help="classify images with a trained model")
    common(sp)
    sp.add_argument("--model")
    sp.add_argument("images", nargs="+", help="image files to classify")

    sp = sub.add_parser("visualize", help="export a layer's features as SVG")
    common(sp)
    sp.add_argument("--model")
    sp.add_argument("--layer", type=int, required=True)
    sp.add_argument("--class", dest="class_name",
                    help="class to visualize (required for multiclass files)")

    sp = sub.add_parser("dump-kernels", help="write filter-bank kernels as PGM images")
    common(sp)
    return p


def main(argv=None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=os.environ.get("DEEPBOOST_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args = _build_parser().parse_args(argv)
        cfg = load_config(args.config)
        if args.desk_scale:
            cfg = apply_desk_scale(cfg)
        if args.threads < 1:
            raise _UsageError("--threads must be >= 1")
        cfg.threads = args.threads
        return _COMMANDS[args.command](cfg, args)
    except (_UsageError, ConfigError) as exc:
        print(f"deepboost: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DeepBoostError, FileNotFoundError) as exc:
        print(f"deepboost: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        log.exception("internal error")
        print(f"deepboost: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def _atomic_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def _manifest_path(cfg: RunConfig, args) -> Path:
    if getattr(args, "manifest", None):
        return Path(args.manifest)
    return cfg.output_dir / "split_00.tsv"


def _model_path(cfg: RunConfig, args) -> Path:
    if getattr(args, "model", None):
        return Path(args.model)
    return cfg.output_dir / "model.dbm"


def cmd_split(cfg: RunConfig, args) -> int:
    ds = scan_dataset(cfg.dataset_root)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    for r in range(cfg.split.repeats):
        train, test = split_dataset(ds, cfg.split, repeat_index=r)
        out = cfg.output_dir / f"split_{r:02d}.tsv"
        _atomic_text(out, manifest_text(train, test))
        log.info("wrote %s (%d train / %d test)", out, len(train), len(test))
    print(f"wrote {cfg.split.repeats} manifests to {cfg.output_dir}")
    return EXIT_OK


def cmd_train(cfg: RunConfig, args) -> int:
    ds = scan_dataset(cfg.dataset_root)
    train, _ = read_manifest(_manifest_path(cfg, args), ds)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)

    records: dict[str, list[RoundRecord]] = {name: [] for name in train.class_names}

    def make_logger(name: str):
        return records[name].append

    t0 = time.perf_counter()
    features, labels = dbmodel.dataset_features(train, cfg.train, cfg.threads)
    log.info("extracted %d feature rows in %.1fs", features.shape[0], time.perf_counter() - t0)

    def train_one(k: int) -> dbmodel.DeepBoostModel:
        tk = time.perf_counter()
        binary = dbmodel.train_binary(
            train, k, cfg.train,
            on_round=make_logger(train.class_names[k]), features=features, labels=labels,
        )
        log.info("trained class %s in %.1fs", train.class_names[k], time.perf_counter() - tk)
        return binary

    ks = range(len(train.class_names))
    if cfg.threads > 1:
        # per-class trainings are pure functions of (features, labels), so
        # running them concurrently cannot change their results
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            binaries = list(pool.map(train_one, ks))
    else:
        binaries = [train_one(k) for k in ks]
    mc = dbmodel.MulticlassModel(class_names=list(train.class_names), binaries=binaries)

    model_path = cfg.output_dir / "model.dbm"
    save_model(mc, model_path)
    _atomic_text(cfg.output_dir / "config_echo.toml", config_echo_toml(cfg))

    lines = ["#class\tlayer\tround\tdim\tdelta\ta\tb\tweighted_sse\ttrain_error"
             "\texp_loss\tweight_sum\tweight_min"]
    for name in train.class_names:
        for r in records[name]:
            lines.append(
                f"{name}\t{r.layer}\t{r.round_index}\t{r.dim}\t{r.delta!r}\t{r.a!r}"
                f"\t{r.b!r}\t{r.weighted_sse!r}\t{r.train_error!r}\t{r.exp_loss!r}"
                f"\t{r.weight_sum!r}\t{r.weight_min!r}"
            )
    _atomic_text(cfg.output_dir / "train_log.tsv", "\n".join(lines) + "\n")
    print(f"wrote {model_path}")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig, args) -> int:
    ds = scan_dataset(cfg.dataset_root)
    _, test = read_manifest(_manifest_path(cfg, args), ds)
    mc = load_model(_model_path(cfg, args))
    if not isinstance(mc, dbmodel.MulticlassModel):
        raise DeepBoostError("evaluate needs a multiclass model file")
    if mc.class_names != ds.class_names:
        raise ConfigMismatchError(
            f"model classes {mc.class_names} do not match dataset classes {ds.class_names}"
        )

    t0 = time.perf_counter()
    features, labels = dbmodel.dataset_features(test, mc.config, cfg.threads)
    t_extract = time.perf_counter() - t0

    t0 = time.perf_counter()
    k = len(mc.class_names)
    layer_count = mc.binaries[0].layer_count
    # scores[k][l] is an (N,) vector of class-k layer-l scores
    from .boost import strong_scores

    all_scores = np.empty((k, layer_count, features.shape[0]))
    for ki, binary in enumerate(mc.binaries):
        mats = dbmodel.forward_matrix(binary, features)
        for li, (layer, mat) in enumerate(zip(binary.layers, mats)):
            all_scores[ki, li] = strong_scores(layer.classifier, mat)
    t_score = time.perf_counter() - t0

    counts = np.bincount(labels, minlength=k)
    per_layer_mean = []
    for li in range(layer_count):
        pred = np.argmax(all_scores[:, li, :], axis=0)
        rates = [float(np.mean(pred[labels == c] == c)) for c in range(k)]
        per_layer_mean.append(float(np.mean(rates)))

    top_pred = np.argmax(all_scores[:, -1, :], axis=0)
    confusion = np.zeros((k, k), dtype=int)
    for true, pred in zip(labels, top_pred):
        confusion[true, pred] += 1
    per_class = {
        mc.class_names[c]: float(np.mean(top_pred[labels == c] == c)) for c in range(k)
    }
    mean_rate = float(np.mean(list(per_class.values())))

    report = {
        "class_names": mc.class_names,
        "test_counts": {mc.class_names[c]: int(counts[c]) for c in range(k)},
        "per_class_rate": per_class,
        "mean_rate": mean_rate,
        "confusion": confusion.tolist(),
        "per_layer_mean_rate": per_layer_mean,
        "timings_sec": {"extract": t_extract, "score": t_score},
    }
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    _atomic_text(cfg.output_dir / "eval_report.json", json.dumps(report, indent=2) + "\n")
    _atomic_text(cfg.output_dir / "eval_report.txt", _human_report(report))
    print(f"mean classification rate: {mean_rate:.4f}")
    return EXIT_OK


def _human_report(report: dict) -> str:
    names = report["class_names"]
    width = max(len(n) for n in names) + 2
    lines = ["per-class classification rates", "-" * 32]
    for n in names:
        lines.append(f"{n:<{width}}{report['per_class_rate'][n]:.4f}")
    lines.append(f"{'MEAN':<{width}}{report['mean_rate']:.4f}")
    lines.append("")
    lines.append("per-layer mean rates: "
                 + ", ".join(f"L{i+1}={r:.4f}" for i, r in enumerate(report["per_layer_mean_rate"])))
    lines.append("")
    lines.append("confusion matrix (rows = true class)")
    header = " " * width + " ".join(f"{n[:6]:>7}" for n in names)
    lines.append(header)
    for n, row in zip(names, report["confusion"]):
        lines.append(f"{n:<{width}}" + " ".join(f"{v:>7}" for v in row))
    t = report["timings_sec"]
    lines.append("")
    lines.append(f"timings: extract {t['extract']:.2f}s, score {t['score']:.2f}s")
    return "\n".join(lines) + "\n"


def cmd_predict(cfg: RunConfig, args) -> int:
    mc = load_model(_model_path(cfg, args))
    if not isinstance(mc, dbmodel.MulticlassModel):
        raise DeepBoostError("predict needs a multiclass model file")
    failures = 0
    for path in args.images:
        try:
            img = load_canonical(path)
            idx, scores = dbmodel.predict(mc, img)
        except (DeepBoostError, FileNotFoundError, OSError) as exc:
            failures += 1
            print(f"deepboost: {path}: {exc}", file=sys.stderr)
            continue
        joined = ",".join(repr(s) for s in scores)
        print(f"{path}\t{mc.class_names[idx]}\t{joined}")
    return EXIT_DATA if failures else EXIT_OK


def cmd_visualize(cfg: RunConfig, args) -> int:
    loaded = load_model(_model_path(cfg, args))
    if isinstance(loaded, dbmodel.MulticlassModel):
        if not args.class_name:
            raise _UsageError("--class is required for a multiclass model file")
        if args.class_name not in loaded.class_names:
            raise DeepBoostError(f"model has no class {args.class_name!r}")
        binary = loaded.binaries[loaded.class_names.index(args.class_name)]
        tag = f"_{args.class_name}"
    else:
        binary = loaded
        tag = f"_{binary.positive_class}"
    svg = render_layer_svg(binary, args.layer)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    out = cfg.output_dir / f"layer{args.layer}{tag}.svg"
    _atomic_text(out, svg)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_dump_kernels(cfg: RunConfig, args) -> int:
    bank = dbmodel.bank_for(cfg.train)
    out_dir = cfg.output_dir / "kernels"
    written = dump_kernels_pgm(bank, out_dir)
    print(f"wrote {len(written)} kernels to {out_dir}")
    return EXIT_OK


_COMMANDS = {
    "split": cmd_split,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "visualize": cmd_visualize,
    "dump-kernels": cmd_dump_kernels,
}


if __name__ == "__main__":
    sys.exit(main())

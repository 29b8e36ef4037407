#!/usr/bin/env python3
"""Full-scale harness for user-supplied datasets (not part of CI).

Runs the paper-scale configuration (stride 1, rounds 1000/800/500) over a
directory-per-class dataset, averaged over repeated random splits, and
reports the mean per-class classification rate. Expect hours per class at
this scale. Reported rates carry a +-3 percentage-point advisory band:
desk hardware, dataset curation, and unspecified preprocessing details all
move the numbers, so treat comparisons outside that band only as signal.
"""

import argparse
import time
from pathlib import Path

import numpy as np

from deepboost.boost import strong_scores
from deepboost.config import TrainConfig
from deepboost.imageio import SplitSpec, scan_dataset, split_dataset
from deepboost.model import dataset_features, forward_matrix, train_binary


def run_split(ds, spec, repeat, cfg, threads):
    train, test = split_dataset(ds, spec, repeat_index=repeat)
    xtr, ytr = dataset_features(train, cfg, threads)
    xte, yte = dataset_features(test, cfg, threads)
    k = len(ds.class_names)
    top = np.empty((k, xte.shape[0]))
    for ki in range(k):
        binary = train_binary(train, ki, cfg, features=xtr, labels=ytr)
        top[ki] = strong_scores(binary.layers[-1].classifier, forward_matrix(binary, xte)[-1])
    pred = np.argmax(top, axis=0)
    return [float(np.mean(pred[yte == c] == c)) for c in range(k)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("dataset_root", type=Path)
    ap.add_argument("--train-per-class", type=int, default=60)
    ap.add_argument("--repeats", type=int, default=10)
    ap.add_argument("--rounds", type=int, nargs="+", default=[1000, 800, 500])
    ap.add_argument("--stride", type=int, default=1)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--threads", type=int, default=4)
    args = ap.parse_args()

    ds = scan_dataset(args.dataset_root)
    print(f"{len(ds.class_names)} classes, {len(ds)} images")
    spec = SplitSpec(train_per_class=args.train_per_class, seed=args.seed, repeats=args.repeats)
    cfg = TrainConfig(stride=args.stride, rounds=tuple(args.rounds), seed=args.seed)

    all_rates = []
    for r in range(args.repeats):
        t0 = time.time()
        rates = run_split(ds, spec, r, cfg, args.threads)
        all_rates.append(rates)
        print(f"split {r}: mean rate {np.mean(rates):.4f} ({time.time() - t0:.0f}s)")

    rates = np.array(all_rates)
    mean, std = rates.mean(), rates.mean(axis=1).std()
    print()
    for c, name in enumerate(ds.class_names):
        print(f"  {name:<20} {rates[:, c].mean():.4f}")
    print(f"mean rate over {args.repeats} splits: {mean:.4f} +- {std:.4f}")
    print("advisory: compare against published numbers only beyond a +-3pp band")


if __name__ == "__main__":
    main()

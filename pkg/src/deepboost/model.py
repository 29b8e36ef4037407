"""Layered training and evaluation: stacks selection + composition stages
into a deep model, and wraps K of those into a one-against-all classifier.

Each layer trains a strong classifier on its candidate features, turns the
distinct selected features into spatially constrained pairs, and feeds the
pair responses to the next layer as its candidates. The final decision of
a binary model is the top layer's strong score; per-layer scores stay
available for analysis. Multiclass prediction is the argmax of the K
binary scores.

Training is deterministic given (data, config, seed); the per-class seeds
are derived from the class names so the result does not depend on class
enumeration order or on how many worker threads run.
"""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

log = logging.getLogger("deepboost.model")

from .boost import (
    OnRound,
    StrongClassifier,
    selected_features,
    strong_scores,
    train_strong,
)
from .compose import (
    CompositeFeature,
    CompositionConfig,
    FeatureDescriptor,
    PrimitiveLattice,
    composite_responses,
    midpoint_position,
    pair_candidates,
    rank_and_cap,
)
from .config import TrainConfig
from .errors import ConfigMismatchError, LayerOutOfRangeError, TooFewFeaturesError
from .gabor import FilterBank, ResponseMap, build_filter_bank, extract_responses
from .imageio import CANONICAL_SIZE, LabeledDataset, load_canonical
from .rng import derive_seed

_BANKS: dict[tuple, FilterBank] = {}


def bank_for(cfg: TrainConfig) -> FilterBank:
    """Deterministic filter bank for a config, cached per process."""
    key = (cfg.support, cfg.sigma, cfg.wavelength, cfg.orientations)
    bank = _BANKS.get(key)
    if bank is None:
        bank = _BANKS[key] = build_filter_bank(*key)
    return bank


@dataclasses.dataclass
class LayerModel:
    """One selection + composition stage."""

    candidates: PrimitiveLattice | list[FeatureDescriptor]
    classifier: StrongClassifier
    composites_out: list[tuple[int, int, float, float]]  # (s, t, beta_s, beta_t)


@dataclasses.dataclass
class DeepBoostModel:
    layers: list[LayerModel]
    config: TrainConfig
    positive_class: str
    seed: int

    @property
    def layer_count(self) -> int:
        return len(self.layers)

    def feature_pool(self):
        """Iterate the accumulated pool: every candidate descriptor of every layer."""
        for layer in self.layers:
            yield from (layer.candidates[d] for d in range(len(layer.candidates)))


@dataclasses.dataclass
class MulticlassModel:
    class_names: list[str]
    binaries: list[DeepBoostModel]

    def __post_init__(self):
        if len(self.class_names) != len(self.binaries):
            raise ValueError("one binary model per class required")
        configs = {dataclasses.asdict(b.config, dict_factory=tuple_safe) for b in self.binaries}
        if len(configs) > 1:
            raise ConfigMismatchError("binaries do not share a preprocessing config")

    @property
    def config(self) -> TrainConfig:
        return self.binaries[0].config


def tuple_safe(items):
    return tuple((k, tuple(v) if isinstance(v, list) else v) for k, v in items)


# --- feature extraction -------------------------------------------------------


def image_features(img: np.ndarray, cfg: TrainConfig) -> ResponseMap:
    img = np.asarray(img, dtype=np.float64)
    if img.shape != (CANONICAL_SIZE, CANONICAL_SIZE):
        raise ConfigMismatchError(f"expected a {CANONICAL_SIZE}x{CANONICAL_SIZE} image")
    if not np.all(np.isfinite(img)):
        raise ConfigMismatchError("image contains non-finite values")
    return extract_responses(img, bank_for(cfg), cfg.stride)


def dataset_features(
    ds: LabeledDataset, cfg: TrainConfig, threads: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Layer-1 feature matrix and label vector for a dataset.

    Rows follow ds.items order. Extraction is pure per item, so worker
    count cannot change the values.
    """
    paths = [ds.root / rel for rel, _ in ds.items]
    labels = np.array([c for _, c in ds.items], dtype=np.intp)

    def one(path):
        return image_features(load_canonical(path), cfg).feature_vector()

    if threads > 1:
        bank_for(cfg)  # build once before sharing across workers
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, paths))
    else:
        rows = [one(p) for p in paths]
    return np.array(rows), labels


def primitive_lattice(cfg: TrainConfig) -> PrimitiveLattice:
    return PrimitiveLattice(CANONICAL_SIZE, cfg.stride, cfg.orientations)


# --- training -------------------------------------------------------------


def train_layers(
    features: np.ndarray,
    y: np.ndarray,
    cfg: TrainConfig,
    on_round: Optional[OnRound] = None,
) -> list[LayerModel]:
    """Algorithm core: per layer, boost, pair the selected features, and
    hand the composite responses to the next layer."""
    layers: list[LayerModel] = []
    candidates: PrimitiveLattice | list[FeatureDescriptor] = primitive_lattice(cfg)
    x = features
    for l in range(1, cfg.layer_count + 1):
        sc = train_strong(
            x, y, cfg.rounds[l - 1], cfg.quantile_count, layer_index=l, on_round=on_round
        )
        composites: list[tuple[int, int, float, float]] = []
        next_candidates: list[FeatureDescriptor] = []
        if l < cfg.layer_count:
            dims, errs = selected_features(sc)
            descs = [candidates[d] for d in dims]
            combos = rank_and_cap(pair_candidates(descs, cfg.composition), errs, cfg.composition)
            if not combos:
                raise TooFewFeaturesError(
                    f"layer {l}: no spatially admissible feature pairs; "
                    "widen the composition neighborhood or raise the round count"
                )
            for si, ti, bs, bt in combos:
                s, t = dims[si], dims[ti]
                composites.append((s, t, bs, bt))
                next_candidates.append(
                    FeatureDescriptor(
                        layer=l + 1,
                        provenance=CompositeFeature(s=s, t=t, beta_s=bs, beta_t=bt),
                        position=midpoint_position(descs[si].position, descs[ti].position),
                    )
                )
            x = composite_responses(x, composites)
            log.info(
                "layer %d: %d distinct features selected, %d composites generated",
                l, len(dims), len(composites),
            )
        layers.append(LayerModel(candidates=candidates, classifier=sc, composites_out=composites))
        candidates = next_candidates
    return layers


def train_binary(
    train: LabeledDataset,
    positive_class: int,
    cfg: TrainConfig,
    threads: int = 1,
    on_round: Optional[OnRound] = None,
    features: Optional[np.ndarray] = None,
    labels: Optional[np.ndarray] = None,
) -> DeepBoostModel:
    """One-vs-all binary model for a single class.

    `features`/`labels` may be passed in to reuse a matrix already
    extracted for the same dataset (as train_multiclass does).
    """
    if features is None or labels is None:
        features, labels = dataset_features(train, cfg, threads)
    y = np.where(labels == positive_class, 1.0, -1.0)
    name = train.class_names[positive_class]
    return DeepBoostModel(
        layers=train_layers(features, y, cfg, on_round),
        config=cfg,
        positive_class=name,
        seed=derive_seed(cfg.seed, name),
    )


def train_multiclass(
    train: LabeledDataset,
    cfg: TrainConfig,
    threads: int = 1,
    on_round: Optional[OnRound] = None,
) -> MulticlassModel:
    """K independent one-vs-all binaries over a shared feature matrix."""
    if len(train.class_names) < 2:
        raise ValueError("multiclass training needs at least two classes")
    features, labels = dataset_features(train, cfg, threads)

    def one(k: int) -> DeepBoostModel:
        return train_binary(train, k, cfg, on_round=on_round, features=features, labels=labels)

    ks = range(len(train.class_names))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            binaries = list(pool.map(one, ks))
    else:
        binaries = [one(k) for k in ks]
    return MulticlassModel(class_names=list(train.class_names), binaries=binaries)


# --- forward evaluation ----------------------------------------------------


def forward_matrix(model: DeepBoostModel, features: np.ndarray) -> list[np.ndarray]:
    """Per-layer feature matrices for a batch of layer-1 vectors."""
    mats = [np.asarray(features, dtype=np.float64)]
    for layer in model.layers[:-1]:
        mats.append(composite_responses(mats[-1], layer.composites_out))
    return mats


def forward_features(model: DeepBoostModel, rmap: ResponseMap) -> list[np.ndarray]:
    """Per-layer feature vectors for one image's response map."""
    _check_rmap(model, rmap)
    return [m[0] for m in forward_matrix(model, rmap.feature_vector()[None, :])]


def forward_features_lazy(model: DeepBoostModel, rmap: ResponseMap) -> list[dict[int, float]]:
    """Materialize only the dimensions reachable from stumps or composites.

    Values agree with forward_features on every materialized index; this is
    the cheap path when only a few of a layer's candidates are referenced.
    """
    _check_rmap(model, rmap)
    # reachability, top down: a layer's stump dims plus the parents of every
    # composite the layer above actually consumes
    needed: list[set[int]] = [set() for _ in model.layers]
    for l, layer in enumerate(model.layers):
        needed[l].update(s.d for s in layer.classifier.stumps)
    for l in range(len(model.layers) - 2, -1, -1):
        comp = model.layers[l].composites_out
        for j in needed[l + 1]:
            s, t, _, _ = comp[j]
            needed[l].update((s, t))

    vec1 = rmap.feature_vector()
    out: list[dict[int, float]] = [{d: float(vec1[d]) for d in sorted(needed[0])}]
    for l in range(1, len(model.layers)):
        comp = model.layers[l - 1].composites_out
        prev = out[l - 1]
        vals = {}
        for j in sorted(needed[l]):
            s, t, bs, bt = comp[j]
            vals[j] = bs * prev[s] + bt * prev[t]
        out.append(vals)
    return out


def _check_rmap(model: DeepBoostModel, rmap: ResponseMap) -> None:
    cfg = model.config
    lattice = primitive_lattice(cfg)
    expected = (cfg.orientations, lattice.grid_rows, lattice.grid_cols)
    if rmap.responses.shape != expected or rmap.stride != cfg.stride:
        raise ConfigMismatchError(
            f"response map {rmap.responses.shape} @stride {rmap.stride} does not match "
            f"model grid {expected} @stride {cfg.stride}"
        )


def layer_scores(model: DeepBoostModel, rmap: ResponseMap) -> list[float]:
    """Strong score of every layer for one image."""
    vecs = forward_features(model, rmap)
    return [
        float(strong_scores(layer.classifier, vec[None, :])[0])
        for layer, vec in zip(model.layers, vecs)
    ]


def score(model: DeepBoostModel, img: np.ndarray) -> float:
    """Top-layer strong score of one canonical image."""
    return layer_scores(model, image_features(img, model.config))[-1]


def score_at_layer(model: DeepBoostModel, img: np.ndarray, layer: int) -> float:
    """Strong score of layer `layer` (1-based) for one canonical image."""
    if not 1 <= layer <= model.layer_count:
        raise LayerOutOfRangeError(f"layer {layer} outside 1..{model.layer_count}")
    return layer_scores(model, image_features(img, model.config))[layer - 1]


def predict(mc: MulticlassModel, img: np.ndarray) -> tuple[int, list[float]]:
    """argmax of the K binary scores; ties go to the lowest class index."""
    rmap = image_features(img, mc.config)
    scores = [layer_scores(b, rmap)[-1] for b in mc.binaries]
    return int(np.argmax(scores)), scores

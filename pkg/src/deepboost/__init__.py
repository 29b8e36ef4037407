"""Deep boosting: layered Gabor feature mining for image classification."""

from .boost import (
    StrongClassifier,
    classify,
    reweight,
    strong_score,
    strong_scores,
    train_strong,
)
from .compose import (
    CompositeFeature,
    CompositionConfig,
    FeatureDescriptor,
    PrimitiveFeature,
    PrimitiveLattice,
    composite_responses,
    feature_position,
    pair_candidates,
    rank_and_cap,
)
from .config import RunConfig, TrainConfig, apply_desk_scale, load_config
from .gabor import (
    FilterBank,
    GaborIndex,
    ResponseMap,
    build_filter_bank,
    energy_map,
    extract_responses,
    normalize_responses,
)
from .imageio import (
    LabeledDataset,
    RawImage,
    SplitSpec,
    load_canonical,
    load_image,
    resize_to_canonical,
    scan_dataset,
    split_dataset,
    to_grayscale,
)
from .model import (
    DeepBoostModel,
    LayerModel,
    MulticlassModel,
    forward_features,
    predict,
    score,
    score_at_layer,
    train_binary,
    train_multiclass,
)
from .model_io import export_text, load_model, save_model
from .weaklearner import (
    SigmoidStump,
    StumpFitResult,
    fit_ab,
    fit_stump_for_dim,
    quantile_candidates,
    select_stump,
    sigmoid,
    stump_apply,
)

__version__ = "0.1.0"

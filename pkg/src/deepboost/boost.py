"""Per-layer gentle boosting: iterate stump selection, multiplicative
reweighting, and score accumulation into an additive strong classifier.

Weights start uniform at every layer, are updated as w <- w * exp(-y * f)
with the exponent clamped to +-30 as an overflow guard, and renormalized
to sum 1 after every round. The strong score is the plain sum of the
selected stumps; its sign (with sign(0) = +1) is the binary decision.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatchError, SingleClassInputError
from .weaklearner import SigmoidStump, select_stump, sigmoid

#: reweighting exponent clamp; inactive while |f| stays moderate
REWEIGHT_CLAMP = 30.0


@dataclasses.dataclass
class StrongClassifier:
    """Ordered stumps of one layer plus their recorded training errors."""

    stumps: list[SigmoidStump]
    stump_train_errors: list[float]
    layer_index: int = 1

    def __post_init__(self):
        if len(self.stumps) != len(self.stump_train_errors):
            raise ValueError("stumps and recorded errors must have equal length")
        self._packed = None

    def _pack(self):
        # column-wise views over the stump parameters, built on first use
        if self._packed is None:
            self._packed = (
                np.array([s.d for s in self.stumps], dtype=np.intp),
                np.array([s.delta for s in self.stumps]),
                np.array([s.a for s in self.stumps]),
                np.array([s.b for s in self.stumps]),
            )
        return self._packed


@dataclasses.dataclass(frozen=True)
class RoundRecord:
    """Telemetry for one boosting round."""

    layer: int
    round_index: int
    dim: int
    delta: float
    a: float
    b: float
    weighted_sse: float
    train_error: float
    exp_loss: float
    weight_sum: float
    weight_min: float


OnRound = Callable[[RoundRecord], None]


def reweight(w: np.ndarray, y: np.ndarray, f_values: np.ndarray) -> np.ndarray:
    """Multiplicative weight update followed by renormalization."""
    exponent = np.clip(-y * f_values, -REWEIGHT_CLAMP, REWEIGHT_CLAMP)
    updated = w * np.exp(exponent)
    return updated / updated.sum()


def train_strong(
    features: np.ndarray,
    y: np.ndarray,
    rounds: int,
    quantile_count: int = 16,
    layer_index: int = 1,
    on_round: Optional[OnRound] = None,
) -> StrongClassifier:
    """Run `rounds` boosting iterations over the feature matrix.

    Dimensions may be selected repeatedly; each round's stump is fitted
    under the weights of that round, so repeats are distinct regressions.
    """
    features = np.asarray(features, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = features.shape[0]
    if not (np.any(y > 0) and np.any(y < 0)):
        raise SingleClassInputError("training labels must contain both classes")

    w = np.full(n, 1.0 / n)
    scores = np.zeros(n)
    stumps: list[SigmoidStump] = []
    errors: list[float] = []
    for m in range(rounds):
        fit = select_stump(features, w, y, quantile_count)
        s = fit.stump
        f = s.a * sigmoid(features[:, s.d] - s.delta) + s.b
        w = reweight(w, y, f)
        scores += f
        stumps.append(s)
        errors.append(fit.train_error)
        if on_round is not None:
            exp_loss = float(np.mean(np.exp(np.clip(-y * scores, None, 700.0))))
            on_round(
                RoundRecord(
                    layer=layer_index,
                    round_index=m,
                    dim=s.d,
                    delta=s.delta,
                    a=s.a,
                    b=s.b,
                    weighted_sse=fit.weighted_sse,
                    train_error=fit.train_error,
                    exp_loss=exp_loss,
                    weight_sum=float(w.sum()),
                    weight_min=float(w.min()),
                )
            )
    return StrongClassifier(stumps=stumps, stump_train_errors=errors, layer_index=layer_index)


def strong_score(sc: StrongClassifier, x: np.ndarray) -> float:
    """Additive score F(x) = sum of stump responses; 0 for an empty list."""
    return float(strong_scores(sc, np.asarray(x, dtype=np.float64)[None, :])[0])


def strong_scores(sc: StrongClassifier, features: np.ndarray) -> np.ndarray:
    """Vectorized strong scores for a batch of feature vectors."""
    features = np.asarray(features, dtype=np.float64)
    if not sc.stumps:
        return np.zeros(features.shape[0])
    dims, deltas, a, b = sc._pack()
    if features.shape[1] <= dims.max():
        raise DimensionMismatchError(
            f"classifier references dimension {int(dims.max())}, "
            f"input has {features.shape[1]}"
        )
    return np.sum(a * sigmoid(features[:, dims] - deltas) + b, axis=1)


def classify(sc: StrongClassifier, x: np.ndarray) -> int:
    """sign(F(x)) with the documented sign(0) = +1 convention."""
    return 1 if strong_score(sc, x) >= 0 else -1


def selected_features(sc: StrongClassifier) -> tuple[list[int], list[float]]:
    """Distinct selected dimensions (ascending) with their best recorded error."""
    best: dict[int, float] = {}
    for stump, err in zip(sc.stumps, sc.stump_train_errors):
        if stump.d not in best or err < best[stump.d]:
            best[stump.d] = err
    dims = sorted(best)
    return dims, [best[d] for d in dims]

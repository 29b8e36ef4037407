"""Sigmoid regression stumps fitted by weighted least squares.

A stump regresses the labels onto z = sigmoid(x^d - delta) for one feature
dimension d; (a, b) have the closed form of the weighted normal equations.
Selection searches every dimension with per-dimension weighted-quantile
threshold candidates and keeps the stump with the smallest weighted SSE.

Tie-breaking is fixed (lowest dimension, then lowest threshold) so the
search result does not depend on evaluation order.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .errors import (
    DegenerateWeightsError,
    DimensionOutOfRangeError,
    EmptyFeatureMatrixError,
)

#: variance below this fits the constant predictor (a = 0)
VAR_EPSILON = 1e-12

#: sigmoid inputs are clamped to this magnitude before exponentiation
SIGMOID_CLAMP = 500.0

#: columns searched per block in select_stump (memory/throughput trade-off)
_BLOCK_ELEMS = 4_000_000


def sigmoid(x):
    """Logistic function 1 / (1 + e^-x), input clamped to +-500."""
    x = np.clip(x, -SIGMOID_CLAMP, SIGMOID_CLAMP)
    return 1.0 / (1.0 + np.exp(-x))


@dataclasses.dataclass(frozen=True)
class SigmoidStump:
    """Weak classifier f(x) = a * sigmoid(x^d - delta) + b."""

    d: int
    delta: float
    a: float
    b: float


@dataclasses.dataclass(frozen=True)
class StumpFitResult:
    stump: SigmoidStump
    weighted_sse: float
    train_error: float


def _check_weights(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.size == 0 or not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise DegenerateWeightsError("weights must be finite and strictly positive")
    return w


def fit_ab(z: np.ndarray, w: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Weighted least-squares line fit of y onto z.

    Returns (a, b, weighted_sse). Falls back to the constant predictor
    (a=0, b=weighted mean of y) when z has (numerically) zero variance.
    """
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = _check_weights(w)
    zbar = float(w @ z)
    ybar = float(w @ y)
    zc = z - zbar
    var = float(w @ (zc * zc))
    if var < VAR_EPSILON:
        a, b = 0.0, ybar
    else:
        cov = float(w @ (zc * (y - ybar)))
        a = cov / var
        b = ybar - a * zbar
    resid = a * z + b - y
    sse = float(w @ (resid * resid))
    return a, b, sse


def quantile_candidates(column: np.ndarray, w: np.ndarray, count: int) -> np.ndarray:
    """Deduplicated weighted-order quantiles of a feature column.

    Levels are the `count` midpoints (j + 0.5)/count of the cumulative
    weight; the candidate at each level is the smallest column value whose
    cumulative weight reaches it.
    """
    column = np.asarray(column, dtype=np.float64)
    w = _check_weights(w)
    order = np.argsort(column, kind="stable")
    cumw = np.cumsum(w[order])
    levels = (np.arange(count) + 0.5) / count * cumw[-1]
    idx = np.minimum(np.searchsorted(cumw, levels, side="left"), column.size - 1)
    return np.unique(column[order][idx])


def _sign_error(f: np.ndarray, y: np.ndarray) -> float:
    """Unweighted 0/1 error of sign(f) with the sign(0) = +1 convention."""
    pred = np.where(f >= 0, 1.0, -1.0)
    return float(np.mean(pred != y))


def fit_stump_for_dim(
    column: np.ndarray,
    w: np.ndarray,
    y: np.ndarray,
    delta_candidates: np.ndarray,
    d: int = 0,
) -> StumpFitResult:
    """Best stump on a single column over the given threshold candidates.

    SSE ties are broken by the smaller threshold.
    """
    deltas = np.sort(np.asarray(delta_candidates, dtype=np.float64))
    if deltas.size == 0:
        raise ValueError("delta_candidates must be non-empty")
    column = np.asarray(column, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    best = None
    for delta in deltas:
        a, b, sse = fit_ab(sigmoid(column - delta), w, y)
        if best is None or sse < best[0]:
            best = (sse, float(delta), a, b)
    sse, delta, a, b = best
    stump = SigmoidStump(d=d, delta=delta, a=a, b=b)
    err = _sign_error(a * sigmoid(column - delta) + b, y)
    return StumpFitResult(stump=stump, weighted_sse=sse, train_error=err)


def select_stump(
    features: np.ndarray, w: np.ndarray, y: np.ndarray, quantile_count: int = 16
) -> StumpFitResult:
    """Search every dimension for the minimum weighted-SSE stump.

    Per-dimension threshold candidates are the weighted quantiles of that
    column under the current weights. Ties across dimensions go to the
    smallest dimension index; within a dimension to the smallest threshold.
    The search is blocked over columns but results are independent of the
    blocking.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] == 0:
        raise EmptyFeatureMatrixError("feature matrix must be 2-D with at least one column")
    w = _check_weights(w)
    y = np.asarray(y, dtype=np.float64)
    n, dim_count = features.shape
    q = quantile_count

    ybar = float(w @ y)
    yc = y - ybar
    wyc = w * yc
    const_sse = float(w @ (yc * yc))
    levels = (np.arange(q) + 0.5) / q

    block = max(1, _BLOCK_ELEMS // (n * q))
    best = None  # (sse, d, delta, a, b)
    for lo in range(0, dim_count, block):
        cols = features[:, lo : lo + block]
        c = cols.shape[1]

        order = np.argsort(cols, axis=0, kind="stable")
        sorted_vals = np.take_along_axis(cols, order, axis=0)
        cumw = np.cumsum(w[order], axis=0)
        lidx = np.minimum(
            np.sum(cumw[:, :, None] < cumw[-1, :, None] * levels[None, None, :], axis=0),
            n - 1,
        )
        deltas = sorted_vals[lidx, np.arange(c)[:, None]]  # (c, q), ascending in q

        z = sigmoid(cols[:, :, None] - deltas[None, :, :])  # (n, c, q)
        flat = z.reshape(n, c * q)
        zbar = (w @ flat).reshape(c, q)
        zc = z - zbar[None, :, :]
        var = (w @ (zc * zc).reshape(n, c * q)).reshape(c, q)
        cov = (wyc @ zc.reshape(n, c * q)).reshape(c, q)
        safe = var >= VAR_EPSILON
        a = np.where(safe, cov / np.where(safe, var, 1.0), 0.0)
        b = ybar - a * zbar
        resid = a[None, :, :] * z + b[None, :, :] - y[:, None, None]
        sse = (w @ (resid * resid).reshape(n, c * q)).reshape(c, q)

        qi = np.argmin(sse, axis=1)  # first minimum = smallest delta
        col_sse = sse[np.arange(c), qi]
        ci = int(np.argmin(col_sse))  # first minimum = smallest dimension
        cand = (
            float(col_sse[ci]),
            lo + ci,
            float(deltas[ci, qi[ci]]),
            float(a[ci, qi[ci]]),
            float(b[ci, qi[ci]]),
        )
        if best is None or cand[0] < best[0]:
            best = cand

    sse, d, delta, a_fit, b_fit = best
    sse = min(sse, const_sse)  # guard: constant fit is always in the span
    stump = SigmoidStump(d=d, delta=delta, a=a_fit, b=b_fit)
    err = _sign_error(a_fit * sigmoid(features[:, d] - delta) + b_fit, y)
    return StumpFitResult(stump=stump, weighted_sse=sse, train_error=err)


def stump_apply(stump: SigmoidStump, x: np.ndarray) -> float:
    """Evaluate a stump on one feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if stump.d >= x.shape[-1]:
        raise DimensionOutOfRangeError(
            f"stump dimension {stump.d} out of range for vector of length {x.shape[-1]}"
        )
    return float(stump.a * sigmoid(x[..., stump.d] - stump.delta) + stump.b)

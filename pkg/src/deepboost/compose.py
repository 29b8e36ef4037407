"""Pairwise feature composition under spatial constraints.

Selected features of one layer are combined in pairs whose lattice
positions fall into nearby cells of a fixed grid; each admissible pair
becomes a candidate feature of the next layer with value
beta_s * x^s + beta_t * x^t. Combination weights are proportional to the
parents' accuracies (1 - train error) and sum to one, so composite
responses are convex combinations of their parents.
"""

from __future__ import annotations

import dataclasses
import warnings

import numpy as np

from .errors import (
    IndexOutOfRangeError,
    MissingErrorRecordError,
    TooFewFeaturesError,
)
from .gabor import GaborIndex


@dataclasses.dataclass(frozen=True)
class PrimitiveFeature:
    gabor: GaborIndex


@dataclasses.dataclass(frozen=True)
class CompositeFeature:
    """Convex pair combination; s and t index the lower layer's candidates."""

    s: int
    t: int
    beta_s: float
    beta_t: float


@dataclasses.dataclass(frozen=True)
class FeatureDescriptor:
    layer: int
    provenance: PrimitiveFeature | CompositeFeature
    position: tuple[int, int]  # (row, col) on the canonical lattice


class PrimitiveLattice:
    """Virtual descriptor list for layer 1: every retained (alpha, row, col).

    Dimension d enumerates the C-order flattening of the (orientations,
    rows, cols) response grid, matching ResponseMap.feature_vector().
    """

    def __init__(self, image_size: int, stride: int, orientations: int):
        self.image_size = image_size
        self.stride = stride
        self.orientations = orientations
        self.grid_rows = (image_size + stride - 1) // stride
        self.grid_cols = self.grid_rows

    def __len__(self) -> int:
        return self.orientations * self.grid_rows * self.grid_cols

    def __getitem__(self, d: int) -> FeatureDescriptor:
        if not 0 <= d < len(self):
            raise IndexError(d)
        per_orientation = self.grid_rows * self.grid_cols
        alpha, rem = divmod(d, per_orientation)
        ih, iw = divmod(rem, self.grid_cols)
        h, w = ih * self.stride, iw * self.stride
        return FeatureDescriptor(
            layer=1,
            provenance=PrimitiveFeature(GaborIndex(w=w, h=h, alpha=alpha)),
            position=(h, w),
        )


@dataclasses.dataclass
class CompositionConfig:
    cell_size: int = 12
    neighborhood: int = 1  # Chebyshev radius in cells; 1 = 3x3 block
    max_composites: int = 8000

    def __post_init__(self):
        if self.cell_size < 1:
            raise ValueError("cell_size must be >= 1")
        if self.max_composites < 1:
            raise ValueError("max_composites must be >= 1")
        if 120 % self.cell_size != 0:
            warnings.warn(
                f"cell_size {self.cell_size} does not divide the 120-pixel lattice; "
                "edge cells will be ragged",
                stacklevel=2,
            )


def feature_position(fd: FeatureDescriptor) -> tuple[int, int]:
    """Lattice position of a feature: own position for primitives, stored
    parent midpoint (rounded half-down per coordinate) for composites."""
    return fd.position


def midpoint_position(p: tuple[int, int], q: tuple[int, int]) -> tuple[int, int]:
    # integer midpoint; .5 fractions round down, e.g. (0,0)+(0,3) -> (0,1)
    return ((p[0] + q[0]) // 2, (p[1] + q[1]) // 2)


def pair_candidates(
    selected: list[FeatureDescriptor], cfg: CompositionConfig
) -> list[tuple[int, int]]:
    """All index pairs (s < t) whose cells lie within the neighborhood.

    Output is in ascending (s, t) order, so the pair set is a deterministic
    function of the input sequence.
    """
    if len(selected) < 2:
        raise TooFewFeaturesError("need at least two selected features to compose")
    pos = np.array([feature_position(fd) for fd in selected])
    cells = pos // cfg.cell_size
    cheb = np.maximum(
        np.abs(cells[:, None, 0] - cells[None, :, 0]),
        np.abs(cells[:, None, 1] - cells[None, :, 1]),
    )
    s_idx, t_idx = np.nonzero(np.triu(cheb <= cfg.neighborhood, k=1))
    return list(zip(s_idx.tolist(), t_idx.tolist()))


def rank_and_cap(
    pairs: list[tuple[int, int]],
    errors: list[float],
    cfg: CompositionConfig,
) -> list[tuple[int, int, float, float]]:
    """Attach accuracy-proportional weights and keep the best pairs.

    beta_k = (1 - err_k) / ((1 - err_s) + (1 - err_t)); pairs are ranked by
    ascending error sum (ties by ascending (s, t)) and truncated to the
    configured budget. A pair whose parents both have error 1 carries no
    accuracy mass and is dropped.
    """
    ranked = []
    for s, t in pairs:
        if s >= len(errors) or t >= len(errors):
            raise MissingErrorRecordError(f"no training error recorded for pair ({s}, {t})")
        es, et = errors[s], errors[t]
        if not (0.0 <= es <= 1.0 and 0.0 <= et <= 1.0):
            raise MissingErrorRecordError(f"train error out of [0,1] for pair ({s}, {t})")
        denom = (1.0 - es) + (1.0 - et)
        if denom <= 0.0:
            continue  # degenerate pair
        ranked.append((es + et, s, t, (1.0 - es) / denom, (1.0 - et) / denom))
    ranked.sort(key=lambda r: (r[0], r[1], r[2]))
    return [(s, t, bs, bt) for _, s, t, bs, bt in ranked[: cfg.max_composites]]


def composite_responses(
    lower: np.ndarray, composites: list[tuple[int, int, float, float]]
) -> np.ndarray:
    """Next-layer response matrix: column j = beta_s * col_s + beta_t * col_t."""
    lower = np.asarray(lower, dtype=np.float64)
    if lower.ndim != 2:
        raise ValueError("lower responses must be an N x D matrix")
    d = lower.shape[1]
    if not composites:
        return np.zeros((lower.shape[0], 0))
    s_idx = np.array([c[0] for c in composites], dtype=np.intp)
    t_idx = np.array([c[1] for c in composites], dtype=np.intp)
    if s_idx.min() < 0 or t_idx.min() < 0 or s_idx.max() >= d or t_idx.max() >= d:
        raise IndexOutOfRangeError("composite parent index outside the lower layer")
    beta_s = np.array([c[2] for c in composites])
    beta_t = np.array([c[3] for c in composites])
    return lower[:, s_idx] * beta_s + lower[:, t_idx] * beta_t

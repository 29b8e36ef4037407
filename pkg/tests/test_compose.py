import numpy as np
import pytest
from hypothesis import given, strategies as st

from deepboost.compose import (
    CompositeFeature,
    CompositionConfig,
    FeatureDescriptor,
    PrimitiveFeature,
    PrimitiveLattice,
    composite_responses,
    feature_position,
    midpoint_position,
    pair_candidates,
    rank_and_cap,
)
from deepboost.errors import (
    IndexOutOfRangeError,
    MissingErrorRecordError,
    TooFewFeaturesError,
)
from deepboost.gabor import GaborIndex


def prim(h, w, alpha=0, layer=1):
    return FeatureDescriptor(
        layer=layer, provenance=PrimitiveFeature(GaborIndex(w=w, h=h, alpha=alpha)), position=(h, w)
    )


class TestFeaturePosition:
    def test_primitive_identity(self):
        assert feature_position(prim(10, 20)) == (10, 20)

    def test_composite_midpoint(self):
        assert midpoint_position((0, 0), (10, 10)) == (5, 5)

    def test_midpoint_half_rounds_down(self):
        assert midpoint_position((0, 0), (0, 3)) == (0, 1)

    def test_composite_uses_stored_position(self):
        fd = FeatureDescriptor(
            layer=2,
            provenance=CompositeFeature(s=0, t=1, beta_s=0.5, beta_t=0.5),
            position=midpoint_position((0, 0), (0, 3)),
        )
        assert feature_position(fd) == (0, 1)


class TestPairCandidates:
    def test_same_cell_pairs(self):
        cfg = CompositionConfig(cell_size=12, neighborhood=1)
        assert pair_candidates([prim(3, 3), prim(5, 5)], cfg) == [(0, 1)]

    def test_far_corners_excluded(self):
        cfg = CompositionConfig(cell_size=12, neighborhood=1)
        assert pair_candidates([prim(0, 0), prim(119, 119)], cfg) == []

    def test_complete_graph_in_one_cell(self):
        cfg = CompositionConfig(cell_size=12, neighborhood=1)
        k = 6
        feats = [prim(1, i) for i in range(k)]
        assert len(pair_candidates(feats, cfg)) == k * (k - 1) // 2

    def test_neighbor_cells_within_radius(self):
        cfg = CompositionConfig(cell_size=12, neighborhood=1)
        # cells (0,0) and (1,1): Chebyshev distance 1 -> paired
        assert pair_candidates([prim(5, 5), prim(13, 13)], cfg) == [(0, 1)]
        # cells (0,0) and (2,2): distance 2 -> excluded
        assert pair_candidates([prim(5, 5), prim(25, 25)], cfg) == []

    def test_too_few(self):
        with pytest.raises(TooFewFeaturesError):
            pair_candidates([prim(0, 0)], CompositionConfig())

    def test_permutation_symmetry(self, rng):
        cfg = CompositionConfig(cell_size=12, neighborhood=1)
        feats = [prim(int(r), int(c)) for r, c in rng.integers(0, 120, size=(12, 2))]
        base = set(pair_candidates(feats, cfg))
        perm = rng.permutation(len(feats))
        permuted = pair_candidates([feats[i] for i in perm], cfg)
        mapped = {tuple(sorted((int(perm[s]), int(perm[t])))) for s, t in permuted}
        assert mapped == base


class TestRankAndCap:
    def test_equal_errors_give_half(self):
        out = rank_and_cap([(0, 1)], [0.3, 0.3], CompositionConfig())
        (_, _, bs, bt), = out
        assert bs == bt == 0.5

    def test_accuracy_proportional(self):
        # beta_s = (1-0.2) / ((1-0.2) + (1-0.4)) = 0.8 / 1.4
        (_, _, bs, bt), = rank_and_cap([(0, 1)], [0.2, 0.4], CompositionConfig())
        assert bs == pytest.approx(0.8 / 1.4, abs=1e-12)
        assert bt == pytest.approx(0.6 / 1.4, abs=1e-12)

    def test_cap_keeps_smallest_error_sums(self):
        errors = [0.0, 0.1, 0.2, 0.3, 0.4]
        pairs = [(s, t) for s in range(5) for t in range(s + 1, 5)]
        out = rank_and_cap(pairs, errors, CompositionConfig(max_composites=4))
        assert [(s, t) for s, t, _, _ in out] == [(0, 1), (0, 2), (0, 3), (1, 2)]

    def test_degenerate_pair_dropped(self):
        out = rank_and_cap([(0, 1), (0, 2)], [1.0, 1.0, 0.5], CompositionConfig())
        assert [(s, t) for s, t, _, _ in out] == [(0, 2)]

    def test_missing_error_record(self):
        with pytest.raises(MissingErrorRecordError):
            rank_and_cap([(0, 3)], [0.1, 0.2], CompositionConfig())

    def test_beta_sums_to_one(self, rng):
        errors = rng.uniform(0, 0.9, size=10).tolist()
        pairs = [(s, t) for s in range(10) for t in range(s + 1, 10)]
        for _, _, bs, bt in rank_and_cap(pairs, errors, CompositionConfig()):
            assert bs > 0 and bt > 0
            assert bs + bt == pytest.approx(1.0, abs=1e-12)


class TestCompositeResponses:
    def test_identical_parents_fixed_point(self, rng):
        lower = rng.random((6, 3))
        lower[:, 2] = lower[:, 1]
        out = composite_responses(lower, [(1, 2, 0.5, 0.5)])
        np.testing.assert_array_equal(out[:, 0], lower[:, 1])

    def test_linearity_in_scale(self, rng):
        lower = rng.random((5, 4))
        comps = [(0, 3, 0.25, 0.75), (1, 2, 0.6, 0.4)]
        a = composite_responses(lower * 3.0, comps)
        b = composite_responses(lower, comps) * 3.0
        np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_matches_naive_loop(self, rng):
        lower = rng.random((5, 4))
        comps = [(0, 1, 0.3, 0.7), (2, 3, 0.5, 0.5), (0, 3, 0.9, 0.1)]
        out = composite_responses(lower, comps)
        for i in range(5):
            for j, (s, t, bs, bt) in enumerate(comps):
                assert out[i, j] == bs * lower[i, s] + bt * lower[i, t]

    def test_index_out_of_range(self, rng):
        with pytest.raises(IndexOutOfRangeError):
            composite_responses(rng.random((3, 2)), [(0, 2, 0.5, 0.5)])

    def test_empty_composites(self, rng):
        out = composite_responses(rng.random((3, 2)), [])
        assert out.shape == (3, 0)

    @given(st.integers(0, 2**32 - 1))
    def test_convexity_bounds(self, seed):
        rng = np.random.default_rng(seed)
        lower = rng.random((8, 5))
        errors = rng.uniform(0.0, 0.95, size=5).tolist()
        pairs = [(s, t) for s in range(5) for t in range(s + 1, 5)]
        comps = rank_and_cap(pairs, errors, CompositionConfig())
        out = composite_responses(lower, comps)
        for j, (s, t, _, _) in enumerate(comps):
            lo = np.minimum(lower[:, s], lower[:, t])
            hi = np.maximum(lower[:, s], lower[:, t])
            assert np.all(out[:, j] >= lo - 1e-15)
            assert np.all(out[:, j] <= hi + 1e-15)

    def test_nonnegative_closure(self, rng):
        lower = np.abs(rng.normal(size=(7, 4)))
        comps = [(0, 1, 0.4, 0.6), (2, 3, 0.8, 0.2)]
        assert composite_responses(lower, comps).min() >= 0.0


class TestPrimitiveLattice:
    def test_length(self):
        lat = PrimitiveLattice(120, 4, 8)
        assert len(lat) == 8 * 30 * 30

    def test_full_lattice_feature_count(self):
        # one scale, eight orientations, every pixel: 120*120*1*8 features
        assert len(PrimitiveLattice(120, 1, 8)) == 115200

    def test_descriptor_round_trip(self):
        lat = PrimitiveLattice(120, 4, 8)
        fd = lat[0]
        assert fd.position == (0, 0)
        assert fd.provenance.gabor.alpha == 0
        d = 2 * 900 + 7 * 30 + 11  # alpha=2, row 7, col 11 on the stride-4 grid
        fd = lat[d]
        assert fd.provenance.gabor == GaborIndex(w=44, h=28, alpha=2)
        assert fd.position == (28, 44)

    def test_matches_response_vector_layout(self, rng):
        from deepboost.gabor import build_filter_bank, extract_responses

        bank = build_filter_bank(support=9, sigma=3.0, wavelength=5.0, orientations=4)
        rmap = extract_responses(rng.random((120, 120)), bank, stride=8)
        lat = PrimitiveLattice(120, 8, 4)
        vec = rmap.feature_vector()
        assert len(lat) == vec.size
        d = 3 * 15 * 15 + 4 * 15 + 9
        fd = lat[d]
        g = fd.provenance.gabor
        assert vec[d] == rmap.responses[g.alpha, g.h // 8, g.w // 8]

    def test_cell_size_warning(self):
        with pytest.warns(UserWarning):
            CompositionConfig(cell_size=7)

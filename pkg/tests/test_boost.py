import numpy as np
import pytest

from deepboost.boost import (
    StrongClassifier,
    classify,
    reweight,
    selected_features,
    strong_score,
    strong_scores,
    train_strong,
)
from deepboost.errors import DimensionMismatchError, SingleClassInputError
from deepboost.weaklearner import SigmoidStump, select_stump, sigmoid, stump_apply


def separable_problem(rng, n=20, margin=10.0, noise_dims=3):
    y = np.array([-1.0, 1.0] * (n // 2))
    features = rng.normal(size=(n, 1 + noise_dims))
    features[:, 0] = np.where(y > 0, margin, 0.0) + rng.normal(scale=0.3, size=n)
    return features, y


class TestReweight:
    def test_zero_scores_keep_weights(self):
        w = np.array([0.25, 0.25, 0.5])
        y = np.array([1.0, -1.0, 1.0])
        out = reweight(w, y, np.zeros(3))
        np.testing.assert_allclose(out, w, atol=1e-15)

    def test_two_sample_arithmetic(self):
        out = reweight(np.array([0.5, 0.5]), np.array([1.0, -1.0]), np.array([1.0, 1.0]))
        expected = np.array([np.exp(-1), np.exp(1)])
        expected /= expected.sum()
        np.testing.assert_allclose(out, expected, atol=1e-12)
        assert out[0] == pytest.approx(0.1192, abs=1e-4)
        assert out[1] == pytest.approx(0.8808, abs=1e-4)

    def test_misclassified_weight_grows_relative(self, rng):
        w = np.full(4, 0.25)
        y = np.array([1.0, 1.0, -1.0, -1.0])
        f = np.array([0.5, -0.5, -0.5, 0.5])  # samples 1 and 3 misclassified
        out = reweight(w, y, f)
        assert out[1] > out[0]
        assert out[3] > out[2]

    def test_clamp_prevents_overflow(self):
        w = np.array([0.5, 0.5])
        out = reweight(w, np.array([1.0, -1.0]), np.array([-1e6, -1e6]))
        assert np.all(np.isfinite(out))
        assert out.sum() == pytest.approx(1.0, abs=1e-12)

    def test_valid_after_many_rounds(self, rng):
        w = np.full(50, 0.02)
        y = np.where(rng.random(50) < 0.5, -1.0, 1.0)
        for _ in range(200):
            w = reweight(w, y, rng.normal(size=50))
            assert np.all(w > 0)
            assert abs(w.sum() - 1.0) <= 1e-9


class TestTrainStrong:
    def test_separable_reaches_zero_error(self, rng):
        features, y = separable_problem(rng)
        sc = train_strong(features, y, rounds=5)
        scores = strong_scores(sc, features)
        pred = np.where(scores >= 0, 1.0, -1.0)
        assert np.mean(pred != y) == 0.0

    def test_single_round_equals_select_stump(self, rng):
        features, y = separable_problem(rng, n=16)
        sc = train_strong(features, y, rounds=1)
        ref = select_stump(features, np.full(16, 1 / 16), y, 16)
        assert sc.stumps == [ref.stump]
        assert sc.stump_train_errors == [ref.train_error]

    def test_single_class_rejected(self, rng):
        features = rng.normal(size=(10, 2))
        with pytest.raises(SingleClassInputError):
            train_strong(features, np.ones(10), rounds=1)

    def test_round_records(self, rng):
        features, y = separable_problem(rng)
        records = []
        train_strong(features, y, rounds=4, layer_index=2, on_round=records.append)
        assert [r.round_index for r in records] == [0, 1, 2, 3]
        assert all(r.layer == 2 for r in records)
        for r in records:
            assert r.weight_sum == pytest.approx(1.0, abs=1e-9)
            assert r.weight_min > 0
        # exponential loss is non-increasing on an easy problem
        assert records[-1].exp_loss <= records[0].exp_loss + 1e-12

    def test_deterministic(self, rng):
        features, y = separable_problem(rng, n=30)
        a = train_strong(features, y, rounds=6)
        b = train_strong(features, y, rounds=6)
        assert a.stumps == b.stumps
        assert a.stump_train_errors == b.stump_train_errors


class TestStrongScore:
    def test_empty_classifier_scores_zero(self):
        sc = StrongClassifier(stumps=[], stump_train_errors=[])
        assert strong_score(sc, np.zeros(4)) == 0.0

    def test_single_stump(self):
        s = SigmoidStump(d=1, delta=0.5, a=2.0, b=-0.25)
        sc = StrongClassifier(stumps=[s], stump_train_errors=[0.0])
        x = np.array([9.0, 1.3])
        assert strong_score(sc, x) == pytest.approx(stump_apply(s, x), abs=1e-12)

    def test_two_stumps_sum(self):
        s1 = SigmoidStump(d=0, delta=0.0, a=2.0, b=-1.0)
        s2 = SigmoidStump(d=1, delta=1.0, a=-0.5, b=0.25)
        sc = StrongClassifier(stumps=[s1, s2], stump_train_errors=[0.1, 0.2])
        x = np.array([np.log(3), 1.0])
        manual = (2.0 * sigmoid(np.log(3)) - 1.0) + (-0.5 * 0.5 + 0.25)
        assert strong_score(sc, x) == pytest.approx(manual, abs=1e-12)

    def test_dimension_mismatch(self):
        sc = StrongClassifier(
            stumps=[SigmoidStump(d=7, delta=0.0, a=1.0, b=0.0)], stump_train_errors=[0.0]
        )
        with pytest.raises(DimensionMismatchError):
            strong_score(sc, np.zeros(5))


class TestClassify:
    @pytest.mark.parametrize("b,expected", [(3.2, 1), (-0.1, -1), (0.0, 1)])
    def test_sign_convention(self, b, expected):
        sc = StrongClassifier(
            stumps=[SigmoidStump(d=0, delta=0.0, a=0.0, b=b)], stump_train_errors=[0.0]
        )
        assert classify(sc, np.zeros(1)) == expected


class TestSelectedFeatures:
    def test_distinct_dims_with_best_error(self):
        stumps = [
            SigmoidStump(d=4, delta=0.0, a=1.0, b=0.0),
            SigmoidStump(d=1, delta=0.0, a=1.0, b=0.0),
            SigmoidStump(d=4, delta=1.0, a=1.0, b=0.0),
        ]
        sc = StrongClassifier(stumps=stumps, stump_train_errors=[0.3, 0.2, 0.1])
        dims, errs = selected_features(sc)
        assert dims == [1, 4]
        assert errs == [0.2, 0.1]

"""Boosted-tree training, prediction, serialization and determinism."""

import json
import math

import numpy as np
import pytest

from alphaforge.errors import CorruptModelFile, EmptyDataset, SchemaVersionMismatch, SingleClassDataset
from alphaforge.features import FeatureScaler
from alphaforge.gbdt import GradientBoostedClassifier, ModelBundle, TreeNode
from helpers import make_constant_model, oracle_predict_proba


def separable_data(n=500, margin=0.2, noise=0.0, seed=0):
    """Label = 1[x3 > 0] with a dead zone around 0; optional label flips."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 10))
    X[:, 3] = np.where(X[:, 3] >= 0, X[:, 3] + margin, X[:, 3] - margin)
    y = (X[:, 3] > 0).astype(np.int64)
    if noise > 0:
        flips = rng.random(n) < noise
        y = np.where(flips, 1 - y, y)
    return X, y


def fitted_scaler():
    rng = np.random.default_rng(99)
    return FeatureScaler().fit(rng.normal(size=(20, 10)))


class TestTraining:
    def test_separable_data_perfect_within_ten_rounds(self):
        X, y = separable_data(n=500)
        clf = GradientBoostedClassifier(n_estimators=10).fit(X, y)
        assert (clf.predict(X) == y).mean() == 1.0

    def test_minimal_two_row_split(self):
        X = np.zeros((2, 10))
        X[0, 3] = -1.0
        X[1, 3] = 1.0
        y = np.array([0, 1])
        clf = GradientBoostedClassifier(n_estimators=1, max_depth=1, min_child_weight=0.0).fit(X, y)
        root = clf.trees_[0]
        assert not root.is_leaf
        assert root.feature == 3
        assert root.left.is_leaf and root.right.is_leaf
        assert root.left.weight < 0 < root.right.weight  # each leaf pure, pushed toward its class

    def test_monotone_training_loss(self):
        for seed in (0, 1, 2):
            rng = np.random.default_rng(seed)
            X = rng.normal(size=(300, 10))
            y = (rng.random(300) < 0.5).astype(np.int64)
            clf = GradientBoostedClassifier(n_estimators=50).fit(X, y)
            losses = clf.train_loss_history_
            assert len(losses) == 51
            assert all(losses[i + 1] <= losses[i] + 1e-12 for i in range(len(losses) - 1))

    def test_depth_and_leaf_bounds(self):
        X, y = separable_data(n=400, seed=3)
        clf = GradientBoostedClassifier(n_estimators=20, max_depth=4).fit(X, y)
        for tree in clf.trees_:
            assert tree.max_depth() <= 4
            assert tree.leaf_count() <= 2 ** 4

    def test_single_class_rejected(self):
        X = np.random.default_rng(0).normal(size=(20, 10))
        with pytest.raises(SingleClassDataset):
            GradientBoostedClassifier().fit(X, np.ones(20))

    def test_empty_rejected(self):
        with pytest.raises(EmptyDataset):
            GradientBoostedClassifier().fit(np.zeros((0, 10)), np.zeros(0))

    def test_deterministic_training(self):
        X, y = separable_data(n=300, noise=0.1, seed=5)
        m1 = ModelBundle(GradientBoostedClassifier(n_estimators=30).fit(X, y), fitted_scaler())
        m2 = ModelBundle(GradientBoostedClassifier(n_estimators=30).fit(X, y), fitted_scaler())
        assert json.dumps(m1.to_dict()) == json.dumps(m2.to_dict())

    def test_tie_break_prefers_lowest_feature_index(self):
        # features 2 and 7 are identical copies; every split gain ties, index 2 must win
        rng = np.random.default_rng(8)
        X = np.zeros((100, 10))
        col = rng.normal(size=100)
        X[:, 2] = col
        X[:, 7] = col
        y = (col > 0).astype(np.int64)
        clf = GradientBoostedClassifier(n_estimators=3, max_depth=2).fit(X, y)
        for tree in clf.trees_:
            stack = [tree]
            while stack:
                node = stack.pop()
                if not node.is_leaf:
                    assert node.feature == 2
                    stack.extend([node.left, node.right])


class TestEstimatorApi:
    def test_get_params_and_clone_compose_with_sklearn(self):
        from sklearn.base import clone
        clf = GradientBoostedClassifier(n_estimators=17, max_depth=3, learning_rate=0.2)
        params = clf.get_params()
        assert params["n_estimators"] == 17
        assert params["decision_threshold"] == 0.5
        cloned = clone(clf)
        assert cloned.get_params() == params
        clf.set_params(max_depth=5)
        assert clf.max_depth == 5

    def test_score_is_accuracy(self):
        X, y = separable_data(n=200, seed=31)
        clf = GradientBoostedClassifier(n_estimators=5).fit(X, y)
        assert clf.score(X, y) == (clf.predict(X) == y).mean()

    def test_scaler_is_sklearn_transformer(self):
        from sklearn.base import clone
        scaler = fitted_scaler()
        assert clone(scaler).get_params() == {}
        rng = np.random.default_rng(37)
        X = rng.normal(size=(8, 10))
        assert np.allclose(scaler.fit_transform(X).mean(axis=0), 0.0, atol=1e-12)


class TestPrediction:
    def test_zero_tree_model_is_base_rate(self):
        bundle = make_constant_model(0.5)
        proba = bundle.classifier.predict_proba(np.random.default_rng(1).normal(size=(5, 10)))
        assert np.allclose(proba[:, 1], 0.5)

    def test_single_leaf_closed_form(self):
        clf = GradientBoostedClassifier(learning_rate=1.0)
        clf.classes_ = np.array([0, 1])
        clf.base_score_logit_ = 0.0
        clf.trees_ = [TreeNode(weight=0.37)]
        proba = clf.predict_proba(np.zeros((1, 10)))[0, 1]
        assert proba == pytest.approx(1.0 / (1.0 + math.exp(-0.37)), abs=1e-15)

    def test_probability_in_open_interval_and_matches_tree_walk_oracle(self):
        X, y = separable_data(n=400, noise=0.05, seed=7)
        clf = GradientBoostedClassifier(n_estimators=40).fit(X, y)
        payload = ModelBundle(clf, fitted_scaler()).to_dict()
        rng = np.random.default_rng(11)
        pts = rng.normal(size=(200, 10))
        proba = clf.predict_proba(pts)[:, 1]
        assert ((proba > 0) & (proba < 1)).all()
        for i in range(200):
            assert proba[i] == pytest.approx(oracle_predict_proba(payload, pts[i]), abs=1e-12)

    def test_threshold_boundary(self):
        bundle = make_constant_model(0.5)
        x = np.zeros((1, 10))
        assert bundle.classifier.predict(x)[0] == 1  # exactly at 0.5 classifies positive
        assert make_constant_model(0.49).classifier.predict(x)[0] == 0

    def test_predict_agrees_with_thresholding_oracle(self):
        X, y = separable_data(n=300, noise=0.2, seed=13)
        clf = GradientBoostedClassifier(n_estimators=25, decision_threshold=0.5).fit(X, y)
        rng = np.random.default_rng(17)
        pts = rng.normal(size=(1000, 10))
        proba = clf.predict_proba(pts)[:, 1]
        assert np.array_equal(clf.predict(pts), (proba >= 0.5).astype(np.int64))


class TestSerialization:
    def test_roundtrip_bit_identical_predictions(self, tmp_path):
        X, y = separable_data(n=300, noise=0.1, seed=19)
        bundle = ModelBundle(GradientBoostedClassifier(n_estimators=30).fit(X, y), fitted_scaler())
        path = tmp_path / "model.json"
        bundle.save(path)
        loaded = ModelBundle.load(path)
        rng = np.random.default_rng(23)
        pts = rng.normal(size=(100, 10))
        p1 = bundle.classifier.predict_proba(pts)
        p2 = loaded.classifier.predict_proba(pts)
        assert np.array_equal(p1, p2)
        assert np.array_equal(bundle.scaler.mean_, loaded.scaler.mean_)

    def test_truncated_file_is_corrupt(self, tmp_path):
        X, y = separable_data(n=100, seed=29)
        bundle = ModelBundle(GradientBoostedClassifier(n_estimators=5).fit(X, y), fitted_scaler())
        path = tmp_path / "model.json"
        bundle.save(path)
        raw = path.read_text()
        path.write_text(raw[: len(raw) // 2])
        with pytest.raises(CorruptModelFile):
            ModelBundle.load(path)

    def test_schema_version_mismatch(self, tmp_path):
        bundle = make_constant_model(0.6)
        payload = bundle.to_dict()
        payload["schema_version"] = 99
        path = tmp_path / "model.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(SchemaVersionMismatch):
            ModelBundle.load(path)

    def test_empty_ensemble_roundtrips_to_base_rate(self, tmp_path):
        bundle = make_constant_model(0.73)
        path = tmp_path / "model.json"
        bundle.save(path)
        loaded = ModelBundle.load(path)
        proba = loaded.classifier.predict_proba(np.zeros((3, 10)))[:, 1]
        assert np.allclose(proba, 0.73, atol=1e-12)

    def test_missing_key_is_corrupt(self, tmp_path):
        payload = make_constant_model(0.5).to_dict()
        del payload["trees"]
        path = tmp_path / "model.json"
        path.write_text(json.dumps(payload))
        with pytest.raises(CorruptModelFile):
            ModelBundle.load(path)

"""Gradient-boosted decision trees for binary direction classification.

Second-order (Newton) boosting on logistic loss with L2 leaf regularization:
per round, gradients g_i = p_i - y_i and hessians h_i = p_i (1 - p_i); exact
greedy split search over midpoints between consecutive distinct sorted feature
values, maximizing

    gain = 1/2 * (G_L^2 / (H_L + lambda) + G_R^2 / (H_R + lambda)
                  - (G_L + G_R)^2 / (H_L + H_R + lambda))

with leaf weight -G / (H + lambda). Leaf weights are stored unshrunk; the
learning rate is applied when margins are accumulated:
margin(x) = base_score_logit + lr * sum_t tree_t(x).

Training is exact and fully deterministic: ties in gain break toward the
lowest feature index, then the lowest split value. The `seed` parameter exists
for interface stability only; no randomness is consumed. No subsampling, no
early stopping.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import (
    CorruptModelFile,
    EmptyDataset,
    InvariantViolation,
    SchemaVersionMismatch,
    SingleClassDataset,
)
from .features import FEATURE_NAMES, FeatureScaler, check_feature_matrix

logger = logging.getLogger(__name__)

MODEL_SCHEMA_VERSION = 1


class TreeNode:
    """Either an internal split (feature, threshold, children) or a leaf (weight)."""

    __slots__ = ("feature", "threshold", "left", "right", "weight", "default_left")

    def __init__(self, *, feature=None, threshold=None, left=None, right=None,
                 weight=None, default_left=True):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.weight = weight
        self.default_left = default_left

    @property
    def is_leaf(self) -> bool:
        return self.weight is not None

    def evaluate(self, x) -> float:
        node = self
        while node.weight is None:
            node = node.left if x[node.feature] < node.threshold else node.right
        return node.weight

    def max_depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.max_depth(), self.right.max_depth())

    def leaf_count(self) -> int:
        if self.is_leaf:
            return 1
        return self.left.leaf_count() + self.right.leaf_count()

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"w": self.weight}
        return {
            "f": self.feature,
            "v": self.threshold,
            "d": "left" if self.default_left else "right",
            "l": self.left.to_dict(),
            "r": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "TreeNode":
        if "w" in payload:
            return cls(weight=float(payload["w"]))
        try:
            return cls(
                feature=int(payload["f"]),
                threshold=float(payload["v"]),
                default_left=payload.get("d", "left") == "left",
                left=cls.from_dict(payload["l"]),
                right=cls.from_dict(payload["r"]),
            )
        except KeyError as exc:
            raise CorruptModelFile(f"tree node missing key {exc}") from exc


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def _logistic_loss(margins: np.ndarray, y: np.ndarray) -> float:
    # log(1 + exp(m)) - y*m, numerically stable
    return float(np.mean(np.logaddexp(0.0, margins) - y * margins))


class GradientBoostedClassifier(ClassifierMixin, BaseEstimator):
    """Binary direction classifier (defaults: 200 trees, depth 6, learning rate 0.05)."""

    def __init__(self, n_estimators=200, max_depth=6, learning_rate=0.05,
                 l2_lambda=1.0, min_child_weight=1.0, decision_threshold=0.5, seed=0):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.l2_lambda = l2_lambda
        self.min_child_weight = min_child_weight
        self.decision_threshold = decision_threshold
        self.seed = seed

    def _validate_hyperparams(self) -> None:
        if self.n_estimators < 1:
            raise InvariantViolation(f"n_estimators={self.n_estimators} must be >= 1")
        if self.max_depth < 1:
            raise InvariantViolation(f"max_depth={self.max_depth} must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise InvariantViolation(f"learning_rate={self.learning_rate} must be in (0, 1]")
        if self.l2_lambda < 0.0:
            raise InvariantViolation(f"l2_lambda={self.l2_lambda} must be >= 0")
        if not 0.0 < self.decision_threshold < 1.0:
            raise InvariantViolation(f"decision_threshold={self.decision_threshold} must be in (0, 1)")

    def fit(self, X, y) -> "GradientBoostedClassifier":
        self._validate_hyperparams()
        X = check_feature_matrix(X)
        y = np.asarray(y, dtype=np.float64).ravel()
        if X.shape[0] == 0:
            raise EmptyDataset("cannot fit on an empty dataset")
        if X.shape[0] != y.shape[0]:
            raise InvariantViolation(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        if not set(np.unique(y)) <= {0.0, 1.0}:
            raise InvariantViolation("labels must be 0/1")
        pos_rate = float(y.mean())
        if pos_rate == 0.0 or pos_rate == 1.0:
            raise SingleClassDataset(f"training labels are single-class (positive rate {pos_rate})")

        self.classes_ = np.array([0, 1])
        self.base_score_logit_ = float(np.log(pos_rate / (1.0 - pos_rate)))
        self.trees_: list[TreeNode] = []
        self.train_loss_history_: list[float] = []

        margins = np.full(X.shape[0], self.base_score_logit_)
        self.train_loss_history_.append(_logistic_loss(margins, y))
        for _ in range(self.n_estimators):
            p = _sigmoid(margins)
            g = p - y
            h = p * (1.0 - p)
            root = self._build_tree(X, g, h, margins)
            self.trees_.append(root)
            self.train_loss_history_.append(_logistic_loss(margins, y))
        return self

    def _build_tree(self, X: np.ndarray, g: np.ndarray, h: np.ndarray,
                    margins: np.ndarray) -> TreeNode:
        """Grow one tree and fold its shrunken leaf values into `margins` in place."""

        def make_leaf(idx: np.ndarray) -> TreeNode:
            weight = -g[idx].sum() / (h[idx].sum() + self.l2_lambda)
            margins[idx] += self.learning_rate * weight
            return TreeNode(weight=float(weight))

        def grow(idx: np.ndarray, depth: int) -> TreeNode:
            if depth >= self.max_depth or idx.size < 2:
                return make_leaf(idx)
            split = self._best_split(X, g, h, idx)
            if split is None:
                return make_leaf(idx)
            feature, threshold = split
            left_mask = X[idx, feature] < threshold
            if not left_mask.any() or left_mask.all():  # midpoint degenerated to an endpoint
                return make_leaf(idx)
            node = TreeNode(feature=feature, threshold=threshold)
            node.left = grow(idx[left_mask], depth + 1)
            node.right = grow(idx[~left_mask], depth + 1)
            return node

        return grow(np.arange(X.shape[0]), 0)

    def _best_split(self, X, g, h, idx) -> tuple[int, float] | None:
        """Highest-gain (feature, midpoint threshold), or None when no candidate has gain > 0.

        Features are scanned in ascending index order and candidates in ascending
        value order; only strictly greater gain displaces the incumbent, which
        implements the documented tie-breaking.
        """
        g_node = g[idx]
        h_node = h[idx]
        G = g_node.sum()
        H = h_node.sum()
        parent_term = G * G / (H + self.l2_lambda)
        best_gain = 0.0
        best: tuple[int, float] | None = None
        for feature in range(X.shape[1]):
            vals = X[idx, feature]
            order = np.argsort(vals, kind="stable")
            v = vals[order]
            candidate = v[:-1] != v[1:]
            if not candidate.any():
                continue
            Gl = np.cumsum(g_node[order])[:-1]
            Hl = np.cumsum(h_node[order])[:-1]
            Gr = G - Gl
            Hr = H - Hl
            gains = 0.5 * (
                Gl * Gl / (Hl + self.l2_lambda)
                + Gr * Gr / (Hr + self.l2_lambda)
                - parent_term
            )
            feasible = candidate & (Hl >= self.min_child_weight) & (Hr >= self.min_child_weight)
            gains = np.where(feasible, gains, -np.inf)
            k = int(np.argmax(gains))  # first max -> lowest split value
            if gains[k] > best_gain:
                best_gain = float(gains[k])
                best = (feature, float((v[k] + v[k + 1]) / 2.0))
        return best

    def decision_function(self, X) -> np.ndarray:
        X = check_feature_matrix(X)
        margins = np.full(X.shape[0], self.base_score_logit_)
        for i in range(X.shape[0]):
            row = X[i]
            acc = 0.0
            for tree in self.trees_:
                acc += tree.evaluate(row)
            margins[i] += self.learning_rate * acc
        return margins

    def predict_proba(self, X) -> np.ndarray:
        p1 = _sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X) -> np.ndarray:
        # boundary rule: probability exactly at the threshold classifies as 1
        return (self.predict_proba(X)[:, 1] >= self.decision_threshold).astype(np.int64)


@dataclass
class ModelBundle:
    """Trained classifier plus the scaler and feature order it was fitted with."""

    classifier: GradientBoostedClassifier
    scaler: FeatureScaler
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def predict_label(self, x: np.ndarray) -> int:
        """Algorithm step: standardize one raw feature vector, then classify."""
        return int(self.classifier.predict(self.scaler.transform(x))[0])

    def to_dict(self) -> dict:
        clf = self.classifier
        return {
            "schema_version": MODEL_SCHEMA_VERSION,
            "hyperparams": {
                "n_estimators": clf.n_estimators,
                "max_depth": clf.max_depth,
                "learning_rate": clf.learning_rate,
                "l2_lambda": clf.l2_lambda,
                "min_child_weight": clf.min_child_weight,
                "decision_threshold": clf.decision_threshold,
                "seed": clf.seed,
            },
            "base_score_logit": clf.base_score_logit_,
            "feature_names": list(self.feature_names),
            "scaler": self.scaler.to_dict(),
            "trees": [t.to_dict() for t in clf.trees_],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=None, separators=(",", ":")) + "\n")

    @classmethod
    def from_dict(cls, payload: dict) -> "ModelBundle":
        try:
            version = payload["schema_version"]
        except (KeyError, TypeError) as exc:
            raise CorruptModelFile("model payload has no schema_version") from exc
        if version != MODEL_SCHEMA_VERSION:
            raise SchemaVersionMismatch(f"model schema {version}, supported {MODEL_SCHEMA_VERSION}")
        try:
            hp = payload["hyperparams"]
            clf = GradientBoostedClassifier(
                n_estimators=int(hp["n_estimators"]),
                max_depth=int(hp["max_depth"]),
                learning_rate=float(hp["learning_rate"]),
                l2_lambda=float(hp["l2_lambda"]),
                min_child_weight=float(hp["min_child_weight"]),
                decision_threshold=float(hp["decision_threshold"]),
                seed=int(hp.get("seed", 0)),
            )
            clf.classes_ = np.array([0, 1])
            clf.base_score_logit_ = float(payload["base_score_logit"])
            clf.trees_ = [TreeNode.from_dict(t) for t in payload["trees"]]
            feature_names = tuple(payload["feature_names"])
            scaler = FeatureScaler.from_dict(payload["scaler"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptModelFile(f"model payload invalid: {exc}") from exc
        if feature_names != FEATURE_NAMES:
            raise CorruptModelFile(f"model feature names {feature_names!r} do not match {FEATURE_NAMES}")
        if len(clf.trees_) > clf.n_estimators:
            raise CorruptModelFile(f"{len(clf.trees_)} trees exceed n_estimators={clf.n_estimators}")
        return cls(classifier=clf, scaler=scaler, feature_names=feature_names)

    @classmethod
    def load(cls, path: str | Path) -> "ModelBundle":
        try:
            payload = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CorruptModelFile(f"{path}: {exc}") from exc
        return cls.from_dict(payload)

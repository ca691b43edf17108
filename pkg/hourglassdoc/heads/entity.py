"""
Entity labeling and biaffine entity linking heads
"""
import typing as tp
import numpy as np
from hourglassdoc.common import ContractError, DimensionError
from hourglassdoc.attention.params import Linear
from hourglassdoc.features.config import ModelConfig
from hourglassdoc.features.stream import DualStream
from hourglassdoc.numerics import (ParameterScope, Tensor, binary_cross_entropy, cross_entropy, matmul, mul,
                                   reshape, sigmoid, softmax, take, transpose)


def span_average_matrix(segment_positions: tp.Sequence[tp.Sequence[int]], text_length: int) -> np.ndarray:
    """
    Row i averages the text positions of segment i
    """
    matrix = np.zeros((len(segment_positions), text_length))
    for index, positions in enumerate(segment_positions):
        if not positions:
            raise ContractError(f"entity {index} has no text tokens")
        matrix[index, list(positions)] = 1.0 / len(positions)
    return matrix


def entity_features(encoded: DualStream, segment_positions: tp.Sequence[tp.Sequence[int]]) -> Tensor:
    """
    Z_F = mean of the entity's token features ⊙ the entity's visual feature
    :param encoded: full-length encoder output
    :param segment_positions: text positions of every segment; segment i owns visual token i
    :return: [N, d]
    """
    if len(segment_positions) > encoded.visual_length:
        raise ContractError(f"{len(segment_positions)} entities but only {encoded.visual_length} visual tokens")
    if not segment_positions:
        raise ContractError("document has no entities")
    averages = Tensor(span_average_matrix(segment_positions, encoded.text_length))
    return mul(matmul(averages, encoded.text), take(encoded.visual, np.arange(len(segment_positions))))


class EntityLabelingHead:
    def __init__(self, scope: ParameterScope, cfg: ModelConfig):
        self.n_categories = cfg.n_categories
        self.classifier = Linear(scope.scope('classifier'), cfg.d, cfg.n_categories)

    def logits(self, features: Tensor) -> Tensor:
        return self.classifier(features)

    def probabilities(self, features: Tensor) -> Tensor:
        return softmax(self.logits(features), axis=-1)

    def loss(self, features: Tensor, labels: tp.Sequence[tp.Optional[int]]) -> Tensor:
        """
        Mean cross-entropy over entities with a known label
        """
        known = [label for label in labels if label is not None]
        if any(not 0 <= label < self.n_categories for label in known):
            raise ContractError(f"labels {sorted(set(known))} do not fit {self.n_categories} categories")
        targets = np.array([label if label is not None else 0 for label in labels], dtype=np.int64)
        weights = np.array([label is not None for label in labels], dtype=np.float64)
        return cross_entropy(self.logits(features), targets, weights)


def entity_labeling(encoded: DualStream, segment_positions: tp.Sequence[tp.Sequence[int]],
                    head: EntityLabelingHead) -> Tensor:
    """
    Category probabilities [N, n_categories] per entity
    """
    return head.probabilities(entity_features(encoded, segment_positions))


class BiaffineLinker:
    """
    score(i, j) = sigmoid((W_k·Z_i + b_k)ᵀ · W_b · (W_v·Z_j + b_v)), directed from i to j
    """

    def __init__(self, scope: ParameterScope, cfg: ModelConfig):
        self.key = Linear(scope.scope('key'), cfg.d, cfg.d)
        self.value = Linear(scope.scope('value'), cfg.d, cfg.d)
        # logits start near unit scale for unit-variance entity features
        self.bilinear = scope.create('bilinear', (cfg.d, cfg.d), std=1.0 / cfg.d)

    def pair_logits(self, features: Tensor) -> Tensor:
        """
        Bilinear form of every ordered pair, [N, N]
        """
        keys = self.key(features)
        values = self.value(features)
        return matmul(matmul(keys, self.bilinear), transpose(values, (1, 0)))

    def pair_scores(self, features: Tensor) -> Tensor:
        return sigmoid(self.pair_logits(features))

    def loss(self, features: Tensor, links: tp.Iterable[tp.Tuple[int, int]]) -> Tensor:
        """
        Binary cross-entropy over all ordered pairs i != j
        """
        count = features.shape[0]
        targets = np.zeros((count, count))
        for i, j in links:
            targets[i, j] = 1.0
        weights = 1.0 - np.eye(count)
        return binary_cross_entropy(self.pair_logits(features), targets, weights)

    def pairs_loss(self, features: Tensor, pairs: tp.Sequence[tp.Tuple[int, int, int]]) -> Tensor:
        """
        Binary cross-entropy over explicit (i, j, label) pairs
        """
        count = features.shape[0]
        targets = np.zeros((count, count))
        weights = np.zeros((count, count))
        for i, j, label in pairs:
            targets[i, j] = label
            weights[i, j] = 1.0
        return binary_cross_entropy(self.pair_logits(features), targets, weights)


def entity_linking(z_i: Tensor, z_j: Tensor, linker: BiaffineLinker) -> Tensor:
    """
    Score in (0, 1) that entity i links to entity j
    :param z_i: fused feature [d] of the source entity
    :param z_j: fused feature [d] of the target entity
    :return: scalar score
    """
    if z_i.shape != z_j.shape or z_i.ndim != 1:
        raise DimensionError(f"entity features {z_i.shape} and {z_j.shape} must both be [d]")
    d = z_i.shape[0]
    key = linker.key(reshape(z_i, (1, d)))
    value = linker.value(reshape(z_j, (1, d)))
    return reshape(sigmoid(matmul(matmul(key, linker.bilinear), transpose(value, (1, 0)))), ())

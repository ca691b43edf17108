"""
Spatial relation labels between segments and the pairwise relation classifier
"""
import typing as tp
import numpy as np
from hourglassdoc.common import Box
from hourglassdoc.attention.params import Linear
from hourglassdoc.features.config import ModelConfig
from hourglassdoc.numerics import ParameterScope, Tensor, cross_entropy, matmul, reshape, transpose

FAR = 0
UP, BOTTOM, LEFT, RIGHT, TOP_LEFT, TOP_RIGHT, BOTTOM_LEFT, BOTTOM_RIGHT = range(1, 9)
COINCIDENT = 9
N_RELATIONS = 10

# 45° sectors counter-clockwise from "right", y pointing down on the page
SECTOR_LABELS = np.array([RIGHT, TOP_RIGHT, UP, TOP_LEFT, LEFT, BOTTOM_LEFT, BOTTOM, BOTTOM_RIGHT])


def gtr_labels(boxes: tp.Sequence[Box], page_w: float, page_h: float) -> np.ndarray:
    """
    Relation matrix G[i][j] of segment j as seen from segment i
    :param boxes: segment boxes (x0, y0, x1, y1)
    :return: N×N integers in [0, 9]
    """
    corners = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    centers = np.stack([(corners[:, 0] + corners[:, 2]) / 2, (corners[:, 1] + corners[:, 3]) / 2], axis=1)
    dx = centers[None, :, 0] - centers[:, None, 0]
    dy = centers[None, :, 1] - centers[:, None, 1]
    distance = np.hypot(dx, dy)
    size = max(page_w, page_h)
    angle = np.degrees(np.arctan2(-dy, dx))
    sectors = np.floor((angle + 22.5) / 45.0).astype(np.int64) % 8
    relations = SECTOR_LABELS[sectors]
    relations[distance > 0.5 * size] = FAR
    relations[distance < 1e-6 * size] = COINCIDENT
    return relations


class GtrHead:
    """
    Bilinear pair features of segment-level visual states followed by a 10-way linear classifier
    """

    def __init__(self, scope: ParameterScope, cfg: ModelConfig):
        self.pair_dim = cfg.gtr_pair_dim
        self.bilinear = scope.create('bilinear', (cfg.d, cfg.gtr_pair_dim * cfg.d))
        self.classifier = Linear(scope.scope('classifier'), cfg.gtr_pair_dim, N_RELATIONS)

    def pair_features(self, visual: Tensor) -> Tensor:
        """
        P[i, j, o] = v_i · B_o · v_j, flattened to [N·N, pair_dim]
        """
        count, d = visual.shape
        projected = reshape(matmul(visual, self.bilinear), (count, self.pair_dim, d))
        forms = matmul(transpose(projected, (1, 0, 2)), transpose(visual, (1, 0)))
        return reshape(transpose(forms, (1, 2, 0)), (count * count, self.pair_dim))

    def logits(self, visual: Tensor) -> Tensor:
        return self.classifier(self.pair_features(visual))


def gtr_loss(visual: Tensor, relations: np.ndarray, head: GtrHead) -> Tensor:
    """
    Mean cross-entropy over all ordered segment pairs
    :param visual: segment-level visual features [N, d]
    :param relations: N×N relation matrix from gtr_labels
    """
    return cross_entropy(head.logits(visual), np.asarray(relations).reshape(-1))

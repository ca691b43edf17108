"""
Task metrics for entity labeling and entity linking
"""
import typing as tp
import numpy as np
from sklearn.metrics import accuracy_score, f1_score, roc_auc_score

LINK_THRESHOLD = 0.5


def labeling_metrics(gold: tp.Sequence[int], predicted: tp.Sequence[int]) -> tp.Dict[str, float]:
    """
    Entity-level macro F1 and accuracy over labeled entities
    """
    if not gold:
        return {'f1': float('nan'), 'accuracy': float('nan')}
    return {'f1': float(f1_score(gold, predicted, average='macro', zero_division=0)),
            'accuracy': float(accuracy_score(gold, predicted))}


def link_targets(count: int, links: tp.Iterable[tp.Tuple[int, int]]) -> np.ndarray:
    """
    0/1 target of every ordered pair i != j, flattened row by row
    """
    targets = np.zeros((count, count))
    for i, j in links:
        targets[i, j] = 1.0
    return targets[~np.eye(count, dtype=bool)]


def linking_metrics(targets: np.ndarray, scores: np.ndarray) -> tp.Dict[str, float]:
    """
    Pair accuracy and F1 at the 0.5 threshold, and ranking AUC
    """
    targets = np.asarray(targets).astype(int)
    if not targets.size:
        return {'accuracy': float('nan'), 'f1': float('nan'), 'auc': float('nan')}
    decisions = (np.asarray(scores) > LINK_THRESHOLD).astype(int)
    auc = float(roc_auc_score(targets, scores)) if len(np.unique(targets)) == 2 else float('nan')
    return {'accuracy': float(accuracy_score(targets, decisions)),
            'f1': float(f1_score(targets, decisions, zero_division=0)),
            'auc': auc}

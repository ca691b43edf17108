"""
Training and evaluation loops for entity labeling, entity linking and pre-training
"""
import dataclasses
import json
import math
import typing as tp
from concurrent.futures import ThreadPoolExecutor
from logging import debug, error, info
import numpy as np
from hourglassdoc.common import ContractError
from hourglassdoc.bench.metrics import labeling_metrics, link_targets, linking_metrics
from hourglassdoc.features.config import ModelConfig
from hourglassdoc.features.document import DocumentSample
from hourglassdoc.model import PRETRAIN_TASKS, DocumentModel, total_loss
from hourglassdoc.numerics import SGD, Graph, Tensor, backward

TASKS = ('labeling', 'linking', 'pretrain')


@dataclasses.dataclass
class TrainHistory:
    task: str
    epochs: tp.List[tp.Dict[str, float]] = dataclasses.field(default_factory=list)
    diverged: bool = False

    @property
    def losses(self) -> tp.List[float]:
        return [epoch['loss'] for epoch in self.epochs]


def _check_task(task: str):
    if task not in TASKS:
        raise ContractError(f"task must be one of {', '.join(TASKS)}, got {task}")


def step_seed(seed: int, epoch: int, index: int, corpus_size: int) -> int:
    return seed * 1_000_003 + epoch * corpus_size + index


def document_losses(model: DocumentModel, doc: DocumentSample, task: str, seed: int = 0) -> tp.Dict[str, Tensor]:
    if task == 'labeling':
        return {'labeling': model.labeling_loss(doc)}
    if task == 'linking':
        return {'linking': model.linking_loss(doc)}
    return model.pretrain_losses(doc, seed)


def _labeling_outcome(model: DocumentModel, doc: DocumentSample) -> tp.Tuple[tp.List[int], tp.List[int]]:
    predicted = model.predict_labels(doc)
    pairs = [(label, guess) for label, guess in zip(doc.labels, predicted) if label is not None]
    return [label for label, _ in pairs], [guess for _, guess in pairs]


def _linking_outcome(model: DocumentModel, doc: DocumentSample) -> tp.Tuple[np.ndarray, np.ndarray]:
    scores = model.link_scores(doc)
    count = len(doc.segments)
    return link_targets(count, doc.links), scores[~np.eye(count, dtype=bool)]


def evaluate(model: DocumentModel, corpus: tp.Sequence[DocumentSample], task: str,
             workers: int = 1) -> tp.Dict[str, float]:
    """
    Labeling: macro F1 and accuracy. Linking: pair accuracy, F1 and AUC.
    :param workers: documents are sharded over this many threads; parameters are only read
    """
    _check_task(task)
    if task == 'pretrain':
        raise ContractError("pre-training has no evaluation metric, use the training losses")
    outcome = _labeling_outcome if task == 'labeling' else _linking_outcome
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda doc: outcome(model, doc), corpus))
    else:
        results = [outcome(model, doc) for doc in corpus]
    if task == 'labeling':
        return labeling_metrics([label for gold, _ in results for label in gold],
                                [guess for _, predicted in results for guess in predicted])
    targets = np.concatenate([gold for gold, _ in results]) if results else np.zeros(0)
    scores = np.concatenate([predicted for _, predicted in results]) if results else np.zeros(0)
    return linking_metrics(targets, scores)


def train_loop(corpus: tp.Sequence[DocumentSample], task: str, cfg: ModelConfig, epochs: int, lr: float,
               seed: int = 0, momentum: float = 0.0, model: tp.Optional[DocumentModel] = None,
               metric_log: tp.Optional[tp.TextIO] = None, eval_every: int = 1,
               target: tp.Optional[float] = None) -> tp.Tuple[DocumentModel, TrainHistory]:
    """
    Per-document gradient descent in corpus order.
    A non-finite loss restores the parameters of the last finite step and ends training.
    :param task: 'labeling', 'linking' or 'pretrain'
    :param seed: parameter initialization and pre-training masks
    :param metric_log: receives one JSON object per epoch
    :param eval_every: evaluate the task metric every this many epochs and after the last one
    :param target: stop once the task metric (F1 for labeling, accuracy for linking) reaches it
    """
    # pylint: disable=too-many-arguments, too-many-locals
    _check_task(task)
    if not corpus:
        raise ContractError("training corpus is empty")
    model = model if model is not None else DocumentModel(cfg, seed=seed)
    optimizer = SGD(model.store, lr, momentum)
    history = TrainHistory(task)
    previous: tp.Optional[tp.Dict[str, np.ndarray]] = None
    for epoch in range(epochs):
        sums = {name: 0.0 for name in (PRETRAIN_TASKS if task == 'pretrain' else ())}
        total = 0.0
        for index, doc in enumerate(corpus):
            optimizer.zero_grad()
            with Graph():
                losses = document_losses(model, doc, task, step_seed(seed, epoch, index, len(corpus)))
                loss = total_loss(losses)
                value = loss.item()
                if not math.isfinite(value):
                    error(f"Loss diverged in epoch {epoch + 1} at document {index}, "
                          f"keeping the last finite parameters.")
                    history.diverged = True
                    if previous is not None:
                        model.store.load_state(previous)
                    return model, history
                backward(loss)
            for name in sums:
                sums[name] += losses[name].item()
            total += value
            previous = model.store.state()
            optimizer.step()
        metrics = {'epoch': epoch + 1, 'loss': total / len(corpus)}
        metrics.update({f'loss_{name}': value / len(corpus) for name, value in sums.items()})
        last = epoch + 1 == epochs
        if task != 'pretrain' and ((epoch + 1) % eval_every == 0 or last):
            metrics.update(evaluate(model, corpus, task))
        history.epochs.append(metrics)
        info(f"Epoch {epoch + 1}: " + ", ".join(f"{key} {value:.4f}" for key, value in metrics.items()
                                                if key != 'epoch'))
        if metric_log is not None:
            metric_log.write(json.dumps(dict(metrics, task=task)) + "\n")
        key = 'f1' if task == 'labeling' else 'accuracy'
        if target is not None and metrics.get(key, -1.0) >= target:
            debug(f"Reached {key} {metrics[key]:.4f} after {epoch + 1} epochs.")
            break
    return model, history

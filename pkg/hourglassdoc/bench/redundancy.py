"""
Attention redundancy: how many attention entries exceed a probability threshold, per layer
"""
import csv
import dataclasses
import typing as tp
import numpy as np
from hourglassdoc.common import ContractError
from hourglassdoc.attention.core import AttentionRecord

DEFAULT_THRESHOLD = 0.7
STAT_HEADER = ['layer', 'count', 'cumulative']
DUMP_HEADER = ['layer', 'head', 'query_index', 'key_index', 'weight']


@dataclasses.dataclass
class RedundancyRow:
    layer: str
    count: int
    cumulative: int


def _active_rows(record: AttentionRecord) -> np.ndarray:
    """
    Weights of active queries only, [heads, active queries, keys]
    """
    return record.weights[:, np.asarray(record.query_mask, dtype=bool), :]


def attention_redundancy_stat(records: tp.Iterable[AttentionRecord],
                              threshold: float = DEFAULT_THRESHOLD) -> tp.List[RedundancyRow]:
    """
    Per layer, the number of attention entries above threshold and the running total over layers.
    Records of the same layer from several documents are summed; layers keep first-seen order.
    """
    counts: tp.Dict[str, int] = {}
    for record in records:
        counts[record.layer] = counts.get(record.layer, 0) + int(np.count_nonzero(_active_rows(record) > threshold))
    if not counts:
        raise ContractError("no attention records, encode with attention recording enabled")
    rows = []
    cumulative = 0
    for layer, count in counts.items():
        cumulative += count
        rows.append(RedundancyRow(layer, count, cumulative))
    return rows


def write_redundancy_csv(rows: tp.Sequence[RedundancyRow], stream: tp.TextIO):
    writer = csv.writer(stream)
    writer.writerow(STAT_HEADER)
    for row in rows:
        writer.writerow([row.layer, row.count, row.cumulative])


def dump_attention(records: tp.Iterable[AttentionRecord], threshold: float, stream: tp.TextIO) -> int:
    """
    Write every active-query attention entry above threshold as CSV
    :return: number of entries written
    """
    writer = csv.writer(stream)
    writer.writerow(DUMP_HEADER)
    written = 0
    for record in records:
        query_index = np.flatnonzero(record.query_mask)
        for head, row, key in np.argwhere(_active_rows(record) > threshold):
            weight = record.weights[head, query_index[row], key]
            writer.writerow([record.layer, int(head), int(query_index[row]), int(key), f"{weight:.6f}"])
            written += 1
    return written

"""
Multiply-accumulate accounting: closed form for the vanilla stack and graph walks over dry runs
"""
import dataclasses
import typing as tp
from hourglassdoc.common import ContractError
from hourglassdoc.features.config import ModelConfig
from hourglassdoc.model import DocumentModel
from hourglassdoc.numerics import Graph

SCOPES = ('text', 'all')
UNLABELED = 'guidance'


def count_macs_vanilla(length: int, d: int, layers: int, d_ffn: int) -> int:
    """
    layers·((4·d² + 2·d·d_ffn)·L + 2·L²·d)
    :param length: sequence length L
    :param d: hidden size
    :param layers: number of transformer layers
    :param d_ffn: feed-forward inner size
    """
    if min(length, d, layers, d_ffn) < 1:
        raise ContractError("all arguments must be positive")
    return layers * ((4 * d * d + 2 * d * d_ffn) * length + 2 * length * length * d)


@dataclasses.dataclass
class MacReport:
    layers: tp.Dict[str, int]
    total: int
    vanilla_total: int
    config: tp.Dict[str, tp.Any]
    scope: str = 'text'

    @property
    def reduction_vs_vanilla(self) -> float:
        return 1.0 - self.total / self.vanilla_total

    def to_dict(self) -> tp.Dict[str, tp.Any]:
        return {'scope': self.scope, 'total': self.total, 'vanilla_total': self.vanilla_total,
                'reduction_vs_vanilla': self.reduction_vs_vanilla, 'config': self.config, 'layers': self.layers}


def layer_macs(graph: Graph, scope: str = 'text') -> tp.Dict[str, int]:
    """
    Per-layer MACs of a recorded forward pass.
    'text' counts the dependency closure of each layer's text output,
    'all' counts every matmul and puts unlabeled ones under 'guidance'.
    """
    if scope not in SCOPES:
        raise ContractError(f"scope must be one of {', '.join(SCOPES)}")
    if scope == 'text':
        return {name: graph.closure_macs(name, 'text') for name in graph.layer_order}
    counts = graph.macs_by_layer()
    unlabeled = graph.total_macs - sum(counts.values())
    if unlabeled:
        counts[UNLABELED] = unlabeled
    return counts


def _dry_run_macs(cfg: ModelConfig, vanilla: bool, scope: str) -> tp.Dict[str, int]:
    graph = Graph()
    DocumentModel(cfg, vanilla=vanilla, meta=True).dry_run(graph)
    return layer_macs(graph, scope)


def count_macs_graph(cfg: ModelConfig, vanilla: bool = False, scope: str = 'text') -> MacReport:
    """
    MACs of one encoder forward from a shape-only dry run.
    The reference is the same block stack with merging and extension removed.
    :param cfg: model configuration, any scale
    :param vanilla: count the reference stack itself
    :param scope: 'text' or 'all'
    """
    layers = _dry_run_macs(cfg, vanilla, scope)
    reference = layers if vanilla else _dry_run_macs(cfg, True, scope)
    config = {'d': cfg.d, 'd_ffn': cfg.d_ffn, 'k': cfg.k, 'n_stages': cfg.n_stages,
              'layers': 4 * cfg.n_stages, 'stage_lengths': [list(lengths) for lengths in cfg.stage_lengths()],
              'vanilla': vanilla}
    return MacReport(layers, sum(layers.values()), sum(reference.values()), config, scope)


def scale_lengths(cfg: ModelConfig, text_length: int) -> ModelConfig:
    """
    The configuration at another text length with the text/visual ratio kept
    """
    if text_length % cfg.ratio:
        raise ContractError(f"length {text_length} is not divisible by the stream ratio {cfg.ratio}")
    return cfg.replace(L_t=text_length, L_v=text_length // cfg.ratio)

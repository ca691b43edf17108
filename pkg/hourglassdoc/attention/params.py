"""
Parameter groups of transformer sub-layers
"""
import typing as tp
from hourglassdoc.common import ConfigError
from hourglassdoc.numerics import ParameterScope, Tensor, add, gelu, layer_norm, matmul


class Linear:
    """
    y = x·W + b
    """

    def __init__(self, scope: ParameterScope, d_in: int, d_out: int, bias: bool = True,
                 std: tp.Optional[float] = None):
        # pylint: disable=too-many-arguments
        self.weight = scope.create('weight', (d_in, d_out), std=std)
        self.bias = scope.create('bias', (d_out,), init='zeros') if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        out = matmul(x, self.weight)
        return add(out, self.bias) if self.bias is not None else out


class LayerNorm:
    def __init__(self, scope: ParameterScope, d: int, eps: float):
        self.gamma = scope.create('gamma', (d,), init='ones')
        self.beta = scope.create('beta', (d,), init='zeros')
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        return layer_norm(x, self.gamma, self.beta, self.eps)


class FeedForward:
    """
    Two-layer position-wise network with GELU
    """

    def __init__(self, scope: ParameterScope, d: int, d_ffn: int):
        self.inner = Linear(scope.scope('inner'), d, d_ffn)
        self.outer = Linear(scope.scope('outer'), d_ffn, d)

    def __call__(self, x: Tensor) -> Tensor:
        return self.outer(gelu(self.inner(x)))


class AttentionParams:
    """
    Query/key/value projections and output weight of one multi-head attention
    """

    def __init__(self, scope: ParameterScope, d: int, heads: int):
        if d % heads:
            raise ConfigError(f"d={d} is not divisible by heads={heads}")
        self.heads = heads
        self.query = Linear(scope.scope('query'), d, d)
        # a key bias shifts every score of a query row equally, softmax removes it
        self.key = Linear(scope.scope('key'), d, d, bias=False)
        self.value = Linear(scope.scope('value'), d, d)
        self.output = Linear(scope.scope('output'), d, d)

    @property
    def head_dim(self) -> int:
        return self.query.weight.shape[1] // self.heads

"""
Dense tensors and the recording graph used for reverse-mode differentiation
and multiply-accumulate accounting.
"""
import contextvars
import typing as tp
from contextlib import contextmanager
import numpy as np
from hourglassdoc.common import ContractError

_ACTIVE_GRAPH: contextvars.ContextVar = contextvars.ContextVar('hourglassdoc_graph', default=None)


class Tensor:
    """
    Row-major float64 array with an optional gradient slot.
    A tensor without data (``data is None``) is a shape-only placeholder
    used for dry runs: ops propagate shapes and MAC counts but compute nothing.
    """

    def __init__(self, data: tp.Any = None, requires_grad: bool = False,
                 shape: tp.Optional[tp.Sequence[int]] = None, name: str = ''):
        if data is None:
            if shape is None:
                raise ContractError("a tensor needs either data or a shape")
            self.data = None
            self.shape = tuple(int(dim) for dim in shape)
        else:
            self.data = np.ascontiguousarray(data, dtype=np.float64)
            self.shape = self.data.shape
        self.requires_grad = requires_grad
        self.grad: tp.Optional[np.ndarray] = None
        self.node: tp.Optional['Node'] = None
        self.name = name

    @classmethod
    def meta(cls, shape: tp.Sequence[int], requires_grad: bool = False, name: str = '') -> 'Tensor':
        return cls(None, requires_grad=requires_grad, shape=shape, name=name)

    @property
    def is_meta(self) -> bool:
        return self.data is None

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    def numpy(self) -> np.ndarray:
        if self.data is None:
            raise ContractError(f"tensor {self.name or self.shape} holds no data (dry run)")
        return self.data

    def item(self) -> float:
        return float(self.numpy().reshape(-1)[0])

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        kind = 'meta' if self.is_meta else 'tensor'
        return f"{kind}({self.name or '?'}, shape={self.shape}, requires_grad={self.requires_grad})"

    # Operator sugar, resolved lazily to avoid an import cycle with ops
    def __add__(self, other):
        from hourglassdoc.numerics import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from hourglassdoc.numerics import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from hourglassdoc.numerics import ops
        return ops.sub(self, other)

    def __mul__(self, other):
        from hourglassdoc.numerics import ops
        return ops.mul(self, other)

    def __rmul__(self, other):
        from hourglassdoc.numerics import ops
        return ops.mul(other, self)

    def __matmul__(self, other):
        from hourglassdoc.numerics import ops
        return ops.matmul(self, other)

    def __neg__(self):
        from hourglassdoc.numerics import ops
        return ops.mul(self, -1.0)


class Node:
    """
    One primitive application on a graph
    """
    __slots__ = ('graph', 'index', 'kind', 'inputs', 'output', 'macs', 'layer', 'backward')

    def __init__(self, graph: 'Graph', index: int, kind: str, inputs: tp.Tuple[Tensor, ...],
                 output: Tensor, macs: int, layer: tp.Optional[str],
                 backward: tp.Optional[tp.Callable[[np.ndarray], tp.Sequence[tp.Optional[np.ndarray]]]]):
        # pylint: disable=too-many-arguments
        self.graph = graph
        self.index = index
        self.kind = kind
        self.inputs = inputs
        self.output = output
        self.macs = macs
        self.layer = layer
        self.backward = backward


class Graph:
    """
    Ordered record of primitive applications.
    Use as a context manager; ops executed inside record onto it.
    Nodes are appended in execution order, which is a topological order.
    """

    def __init__(self):
        self.nodes: tp.List[Node] = []
        self.layer_outputs: tp.Dict[str, tp.Dict[str, int]] = {}
        self.layer_order: tp.List[str] = []
        self.__layer: tp.Optional[str] = None
        self.__tokens = []

    def __enter__(self) -> 'Graph':
        self.__tokens.append(_ACTIVE_GRAPH.set(self))
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        _ACTIVE_GRAPH.reset(self.__tokens.pop())

    @contextmanager
    def layer(self, name: str):
        """
        Label every node recorded inside the block with a layer name
        :param name: unique layer name, e.g. 'm1.sa'
        """
        previous = self.__layer
        self.__layer = name
        if name not in self.layer_outputs:
            self.layer_outputs[name] = {}
            self.layer_order.append(name)
        try:
            yield self
        finally:
            self.__layer = previous

    def record(self, kind: str, inputs: tp.Tuple[Tensor, ...], output: Tensor, macs: int = 0,
               backward=None) -> Node:
        # pylint: disable=too-many-arguments
        node = Node(self, len(self.nodes), kind, inputs, output, int(macs), self.__layer, backward)
        self.nodes.append(node)
        output.node = node
        return node

    def mark_output(self, layer: str, stream: str, tensor: Tensor):
        """
        Remember which node produced a layer's output for one stream
        """
        if tensor.node is None or tensor.node.graph is not self:
            raise ContractError(f"output '{stream}' of layer {layer} was not recorded on this graph")
        self.layer_outputs.setdefault(layer, {})[stream] = tensor.node.index
        if layer not in self.layer_order:
            self.layer_order.append(layer)

    @property
    def total_macs(self) -> int:
        return sum(node.macs for node in self.nodes)

    def macs_by_layer(self) -> tp.Dict[str, int]:
        counts = {name: 0 for name in self.layer_order}
        for node in self.nodes:
            if node.layer is not None:
                counts[node.layer] = counts.get(node.layer, 0) + node.macs
        return counts

    def closure_macs(self, layer: str, stream: str) -> int:
        """
        MACs of all nodes inside ``layer`` that the layer's ``stream`` output depends on
        """
        start = self.layer_outputs.get(layer, {}).get(stream)
        if start is None:
            raise ContractError(f"layer {layer} has no recorded '{stream}' output")
        seen = set()
        pending = [start]
        total = 0
        while pending:
            index = pending.pop()
            if index in seen:
                continue
            seen.add(index)
            node = self.nodes[index]
            if node.layer != layer:
                continue
            total += node.macs
            for tensor in node.inputs:
                if tensor.node is not None and tensor.node.graph is self:
                    pending.append(tensor.node.index)
        return total


def current_graph() -> tp.Optional[Graph]:
    return _ACTIVE_GRAPH.get()


def backward(loss: Tensor):
    """
    Reverse-mode pass from a scalar loss.
    Gradients of leaf tensors with ``requires_grad`` are accumulated into ``.grad``;
    calling twice without resetting adds both contributions.
    :param loss: scalar tensor produced on an active graph
    """
    if loss.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    if loss.node is None or loss.is_meta:
        raise ContractError("loss was not recorded on a graph")
    if not loss.requires_grad:
        return
    graph = loss.node.graph
    pending: tp.Dict[int, np.ndarray] = {loss.node.index: np.ones(loss.shape)}
    for node in reversed(graph.nodes[:loss.node.index + 1]):
        grad = pending.pop(node.index, None)
        if grad is None or node.backward is None:
            continue
        for tensor, input_grad in zip(node.inputs, node.backward(grad)):
            if input_grad is None or not tensor.requires_grad:
                continue
            if tensor.node is not None and tensor.node.graph is graph:
                index = tensor.node.index
                pending[index] = pending[index] + input_grad if index in pending else input_grad
            else:
                tensor.grad = input_grad.copy() if tensor.grad is None else tensor.grad + input_grad

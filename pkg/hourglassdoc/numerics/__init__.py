from hourglassdoc.numerics.tensor import Tensor, Graph, Node, backward, current_graph
from hourglassdoc.numerics.ops import (matmul, add, sub, mul, softmax, layer_norm, gelu, sigmoid, reshape,
                                       transpose, concat, take, sum_, mean, cross_entropy, binary_cross_entropy,
                                       as_tensor, constant, zeros)
from hourglassdoc.numerics.params import ParameterStore, ParameterScope, SGD
from hourglassdoc.numerics.gradcheck import check_gradients

__all__ = ["Tensor", "Graph", "Node", "backward", "current_graph",
           "matmul", "add", "sub", "mul", "softmax", "layer_norm", "gelu", "sigmoid", "reshape",
           "transpose", "concat", "take", "sum_", "mean", "cross_entropy", "binary_cross_entropy",
           "as_tensor", "constant", "zeros",
           "ParameterStore", "ParameterScope", "SGD",
           "check_gradients"]

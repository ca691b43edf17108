import math
import unittest
import numpy as np
from hourglassdoc.common import ContractError, DimensionError
from hourglassdoc.numerics import ops
from hourglassdoc.numerics.tensor import Graph, Tensor, backward
from hourglassdoc.numerics.gradcheck import check_gradients


def param(rng, *shape):
    return Tensor(rng.normal(size=shape), requires_grad=True, name=f"p{shape}")


class TestMatmul(unittest.TestCase):
    def test_identity(self):
        x = Tensor(np.array([[1.5, -2.0, 3.0], [0.25, 4.0, -1.0]]))
        out = ops.matmul(Tensor(np.eye(2)), x)
        self.assertTrue(np.array_equal(x.data, out.data))

    def test_hand_computed(self):
        out = ops.matmul(Tensor([[1, 2], [3, 4]]), Tensor([[5, 6], [7, 8]]))
        self.assertEqual([[19, 22], [43, 50]], out.data.tolist())

    def test_shape_mismatch(self):
        with self.assertRaises(DimensionError) as ctx:
            ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((4, 5))))
        self.assertIn('(2, 3)', str(ctx.exception))
        self.assertIn('(4, 5)', str(ctx.exception))

    def test_macs_recorded(self):
        with Graph() as graph:
            ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((3, 5))))
            ops.matmul(Tensor(np.ones((4, 2, 3))), Tensor(np.ones((3, 5))))
        self.assertEqual([30, 120], [node.macs for node in graph.nodes])
        self.assertEqual(150, graph.total_macs)

    def test_meta_shapes(self):
        with Graph() as graph:
            out = ops.matmul(Tensor.meta((512, 768)), Tensor.meta((768, 3072)))
        self.assertTrue(out.is_meta)
        self.assertEqual((512, 3072), out.shape)
        self.assertEqual(512 * 768 * 3072, graph.total_macs)


class TestSoftmax(unittest.TestCase):
    def test_uniform(self):
        out = ops.softmax(Tensor([0.0, 0.0, 0.0]), axis=0)
        np.testing.assert_allclose(out.data, [1 / 3] * 3, rtol=0, atol=1e-15)

    def test_stabilized(self):
        out = ops.softmax(Tensor([1000.0, 1000.0]), axis=0)
        self.assertEqual([0.5, 0.5], out.data.tolist())

    def test_closed_form(self):
        out = ops.softmax(Tensor([0.0, math.log(3)]), axis=0)
        np.testing.assert_allclose(out.data, [0.25, 0.75], atol=1e-15)

    def test_rows_normalized(self):
        rng = np.random.default_rng(3)
        out = ops.softmax(Tensor(rng.normal(scale=5.0, size=(6, 7))), axis=-1)
        np.testing.assert_allclose(out.data.sum(axis=-1), np.ones(6), atol=1e-12)
        self.assertTrue(np.all(out.data > 0) and np.all(out.data < 1))

    def test_mask(self):
        mask = np.array([True, False, True])
        out = ops.softmax(Tensor([1.0, 50.0, 1.0]), axis=0, mask=mask)
        self.assertEqual([0.5, 0.0, 0.5], out.data.tolist())

    def test_axis_bounds(self):
        with self.assertRaises(DimensionError):
            ops.softmax(Tensor(np.zeros((2, 2))), axis=2)


class TestLayerNorm(unittest.TestCase):
    def test_constant_row(self):
        out = ops.layer_norm(Tensor([[4.0, 4.0, 4.0]]), Tensor(np.ones(3)), Tensor(np.zeros(3)), 1e-6)
        self.assertEqual([[0.0, 0.0, 0.0]], out.data.tolist())

    def test_two_values(self):
        out = ops.layer_norm(Tensor([[1.0, 3.0]]), Tensor(np.ones(2)), Tensor(np.zeros(2)), 1e-12)
        np.testing.assert_allclose(out.data, [[-1.0, 1.0]], atol=1e-9)

    def test_beta_only(self):
        beta = Tensor([0.5, -1.0, 2.0])
        out = ops.layer_norm(Tensor([[1.0, 7.0, -3.0], [2.0, 2.5, 9.0]]), Tensor(np.zeros(3)), beta, 1e-6)
        self.assertEqual([beta.data.tolist()] * 2, out.data.tolist())

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionError):
            ops.layer_norm(Tensor(np.ones((2, 3))), Tensor(np.ones(4)), Tensor(np.zeros(4)), 1e-6)

    def test_eps_positive(self):
        with self.assertRaises(ContractError):
            ops.layer_norm(Tensor(np.ones((2, 3))), Tensor(np.ones(3)), Tensor(np.zeros(3)), 0.0)


class TestGradients(unittest.TestCase):
    """
    Every differentiable primitive against central differences
    """

    def setUp(self):
        self.rng = np.random.default_rng(11)

    def assertGradients(self, loss_fn, tensors):
        errors = check_gradients(loss_fn, tensors, h=1e-5)
        for name, err in errors.items():
            self.assertLess(err, 1e-4, name)

    def test_sum_of_product(self):
        w = Tensor(self.rng.normal(size=(3, 4)), requires_grad=True)
        x = Tensor(self.rng.normal(size=(4, 1)))
        with Graph():
            loss = ops.sum_(ops.matmul(w, x))
            backward(loss)
        np.testing.assert_allclose(w.grad, np.broadcast_to(x.data.T, (3, 4)), atol=1e-12)

    def test_wrong_gradient_is_flagged(self):
        w = param(self.rng, 2, 3)
        calls = []

        def loss_fn():
            calls.append(None)
            scale = 2.0 if len(calls) == 1 else 1.0
            return ops.add(ops.mul(ops.sum_(ops.mul(w, w)), scale), 1e3)

        errors = check_gradients(loss_fn, [w])
        self.assertAlmostEqual(0.5, errors[w.name], places=4)

    def test_independent_parameter(self):
        w = param(self.rng, 2, 2)
        unused = param(self.rng, 3)
        with Graph():
            loss = ops.sum_(ops.mul(w, w))
            backward(loss)
        self.assertIsNone(unused.grad)

    def test_accumulates(self):
        w = param(self.rng, 2, 3)
        for _ in range(2):
            with Graph():
                backward(ops.sum_(ops.mul(w, 3.0)))
        np.testing.assert_allclose(w.grad, np.full((2, 3), 6.0))

    def test_non_scalar_backward(self):
        with Graph():
            out = ops.mul(param(self.rng, 2), 2.0)
            with self.assertRaises(ContractError):
                backward(out)

    def test_matmul_batched(self):
        a, b = param(self.rng, 2, 3, 4), param(self.rng, 4, 5)
        self.assertGradients(lambda: ops.sum_(ops.mul(ops.matmul(a, b), ops.matmul(a, b))), [a, b])

    def test_elementwise(self):
        a, b = param(self.rng, 3, 4), param(self.rng, 4)
        self.assertGradients(lambda: ops.sum_(ops.mul(ops.sub(ops.add(a, b), b), ops.sigmoid(a))), [a, b])

    def test_softmax_masked(self):
        x = param(self.rng, 3, 5)
        w = Tensor(self.rng.normal(size=(3, 5)))
        mask = np.array([True, True, False, True, True])
        self.assertGradients(lambda: ops.sum_(ops.mul(ops.softmax(x, axis=-1, mask=mask), w)), [x])

    def test_layer_norm(self):
        x, gamma, beta = param(self.rng, 4, 6), param(self.rng, 6), param(self.rng, 6)
        w = Tensor(self.rng.normal(size=(4, 6)))
        self.assertGradients(lambda: ops.sum_(ops.mul(ops.layer_norm(x, gamma, beta, 1e-6), w)), [x, gamma, beta])

    def test_gelu_and_shapes(self):
        x = param(self.rng, 2, 3, 4)

        def loss():
            moved = ops.reshape(ops.transpose(ops.gelu(x), (1, 0, 2)), (3, 8))
            joined = ops.concat([moved, ops.take(moved, [2, 0], axis=0)], axis=0)
            return ops.sum_(ops.mul(ops.mean(joined, axis=1), ops.sum_(joined, axis=1)))
        self.assertGradients(loss, [x])

    def test_cross_entropy(self):
        logits = param(self.rng, 5, 4)
        weights = np.array([1.0, 0.0, 1.0, 1.0, 0.5])
        self.assertGradients(lambda: ops.cross_entropy(logits, [0, 1, 3, 2, 2], weights), [logits])

    def test_cross_entropy_uniform(self):
        loss = ops.cross_entropy(Tensor(np.zeros((3, 10))), [1, 4, 9])
        self.assertAlmostEqual(math.log(10), loss.item(), places=12)

    def test_binary_cross_entropy(self):
        logits = param(self.rng, 6)
        self.assertGradients(lambda: ops.binary_cross_entropy(logits, [1, 0, 0, 1, 1, 0]), [logits])

    def test_empty_weights(self):
        loss = ops.cross_entropy(Tensor(np.zeros((2, 3))), [0, 1], np.zeros(2))
        self.assertEqual(0.0, loss.item())


if __name__ == '__main__':
    unittest.main()

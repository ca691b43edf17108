import unittest
import numpy as np
from hourglassdoc.common import ContractError
from hourglassdoc.features.config import ModelConfig
from hourglassdoc.features.document import DocumentSample, Segment, Word, generate_synthetic_document
from hourglassdoc.features.embedding import Embedder, quantize_boxes, synthetic_segment_feature
from hourglassdoc.features.tokenizer import tokenize_and_pad
from hourglassdoc.numerics import ParameterStore

CFG = ModelConfig(d=8, heads=2, d_ffn=16, k=2, n_stages=2, L_t=32, L_v=8, vocab=64, coord_buckets=64,
                  visual_feat_dim=6)


def make_embedder(seed=0):
    store = ParameterStore(seed)
    return Embedder(store.scope('embed'), CFG), store


class TestQuantization(unittest.TestCase):
    def test_page_edge_lands_in_last_bucket(self):
        buckets, outside = quantize_boxes(np.array([[600, 0, 600, 800]]), 600, 800, 64)
        self.assertEqual([[63, 0, 63, 63]], buckets.tolist())
        self.assertEqual(0, outside)

    def test_floor(self):
        buckets, _ = quantize_boxes(np.array([[300, 399, 301, 401]]), 600, 800, 64)
        self.assertEqual([[32, 31, 32, 32]], buckets.tolist())

    def test_clamping_is_counted(self):
        buckets, outside = quantize_boxes(np.array([[-5, 0, 700, 10]]), 600, 800, 64)
        self.assertEqual([[0, 0, 63, 0]], buckets.tolist())
        self.assertEqual(2, outside)


class TestSyntheticFeature(unittest.TestCase):
    def test_keyed_by_content(self):
        np.testing.assert_array_equal(synthetic_segment_feature([5, 6], 4), synthetic_segment_feature([5, 6], 4))
        self.assertFalse(np.allclose(synthetic_segment_feature([5, 6], 4), synthetic_segment_feature([6, 5], 4)))


class TestEmbedder(unittest.TestCase):
    def setUp(self):
        self.doc = generate_synthetic_document(4, 600, 800, 5, CFG.vocab)
        self.streams = tokenize_and_pad(self.doc, CFG)

    def test_shapes(self):
        embedder, _ = make_embedder()
        stream = embedder.embed(self.streams)
        self.assertEqual((CFG.L_t, CFG.d), stream.text.shape)
        self.assertEqual((CFG.L_v, CFG.d), stream.visual.shape)
        self.assertEqual(CFG.ratio, stream.ratio)

    def test_deterministic(self):
        first, _ = make_embedder(3)
        second, _ = make_embedder(3)
        a, b = first.embed(self.streams), second.embed(self.streams)
        np.testing.assert_array_equal(a.text.numpy(), b.text.numpy())
        np.testing.assert_array_equal(a.visual.numpy(), b.visual.numpy())

    def test_padding_rows(self):
        embedder, store = make_embedder()
        stream = embedder.embed(self.streams)
        layout_zero = sum(store[f'embed.layout_{name}'].numpy()[0] for name in ('x0', 'y0', 'x1', 'y1'))
        position = CFG.L_t - 1
        expected = (store['embed.word'].numpy()[0] + store['embed.position'].numpy()[position]
                    + layout_zero + store['embed.segment'].numpy()[0])
        np.testing.assert_allclose(stream.text.numpy()[position], expected, atol=1e-12)
        expected_visual = store['embed.visual_bias'].numpy() + layout_zero + store['embed.segment'].numpy()[0]
        np.testing.assert_allclose(stream.visual.numpy()[CFG.L_v - 1], expected_visual, atol=1e-12)

    def test_token_out_of_vocabulary(self):
        embedder, _ = make_embedder()
        ids = self.streams.text_ids.copy()
        ids[1] = CFG.vocab
        with self.assertRaises(ContractError):
            embedder.embed(self.streams, text_ids=ids)

    def test_feature_mask_zeroes_projection_input(self):
        embedder, store = make_embedder()
        mask = np.zeros(CFG.L_v, dtype=bool)
        mask[0] = True
        features = embedder.visual_features(self.streams, mask)
        self.assertTrue(np.all(features[0] == 0))
        self.assertFalse(np.all(features[1] == 0))
        masked = embedder.embed(self.streams, visual_feature_mask=mask).visual.numpy()
        plain = embedder.embed(self.streams).visual.numpy()
        shift = features[1] @ store['embed.visual_proj'].numpy()
        np.testing.assert_allclose(masked[1], plain[1], atol=1e-12)
        self.assertGreater(np.abs(masked[0] - plain[0]).max(), 0)
        self.assertGreater(np.abs(shift).max(), 0)

    def test_out_of_page_coordinates_warn(self):
        words = [Word(5, (0, 0, 10, 10))]
        doc = DocumentSample(100, 100, words, [Segment(0, 1, (0, 0, 10, 10))], [])
        streams = tokenize_and_pad(doc, CFG)
        streams.text_boxes[1] = (0, 0, 150, 10)
        embedder, _ = make_embedder()
        with self.assertLogs(level='WARNING'):
            embedder.embed(streams)
        self.assertEqual(1, embedder.clamped_coordinates)


if __name__ == '__main__':
    unittest.main()

import unittest
import numpy as np
from hourglassdoc.common import CapacityError
from hourglassdoc.features.config import ModelConfig
from hourglassdoc.features.document import DocumentSample, Segment, Word
from hourglassdoc.features.tokenizer import tokenize_and_pad

TINY = ModelConfig(d=8, heads=2, d_ffn=16, k=2, n_stages=1, L_t=8, L_v=2, vocab=32, coord_buckets=8)


def one_line(n_words: int, page: int = 200) -> DocumentSample:
    words = [Word(4 + i, (10 * i, 0, 10 * i + 10, 10)) for i in range(n_words)]
    return DocumentSample(page, page, words, [Segment(0, n_words, (0, 0, 10 * n_words, 10))], [])


class TestTokenizeAndPad(unittest.TestCase):
    def test_empty_document(self):
        streams = tokenize_and_pad(DocumentSample(100, 50, [], [], []), TINY)
        self.assertEqual(1, int(streams.text_mask.sum()))
        self.assertTrue(streams.text_mask[0])
        self.assertEqual([0, 0, 100, 50], list(streams.text_boxes[0]))
        self.assertFalse(streams.visual_mask.any())
        self.assertEqual(0, streams.n_segments)

    def test_three_words_one_segment(self):
        streams = tokenize_and_pad(one_line(3), TINY)
        self.assertEqual([-1, 0, 0, 0, -1, -1, -1, -1], list(streams.text_segment_ids))
        self.assertEqual([1, 4, 5, 6, 0, 0, 0, 0], list(streams.text_ids))
        self.assertEqual([0, -1], list(streams.visual_segment_ids))
        self.assertEqual([True, False], list(streams.visual_mask))
        self.assertEqual([[1, 2, 3]], streams.segment_positions)
        self.assertEqual([(4, 5, 6)], streams.segment_tokens)

    def test_exact_fit(self):
        streams = tokenize_and_pad(one_line(TINY.L_t - 1), TINY)
        self.assertTrue(streams.text_mask.all())
        self.assertEqual(TINY.L_t, streams.text_length)

    def test_text_overflow(self):
        with self.assertRaises(CapacityError) as context:
            tokenize_and_pad(one_line(TINY.L_t), TINY)
        self.assertEqual('text', context.exception.stream)
        self.assertIn('text', str(context.exception))

    def test_visual_overflow(self):
        words = [Word(4, (0, 0, 10, 10)), Word(5, (0, 20, 10, 30)), Word(6, (0, 40, 10, 50))]
        segments = [Segment(i, i + 1, words[i].box) for i in range(3)]
        with self.assertRaises(CapacityError) as context:
            tokenize_and_pad(DocumentSample(100, 100, words, segments, []), TINY)
        self.assertEqual('visual', context.exception.stream)

    def test_words_follow_reading_order(self):
        words = [Word(10, (0, 50, 10, 60)), Word(11, (0, 0, 10, 10))]
        segments = [Segment(0, 1, words[0].box), Segment(1, 2, words[1].box)]
        streams = tokenize_and_pad(DocumentSample(100, 100, words, segments, []), TINY)
        self.assertEqual([1, 11, 10], list(streams.text_ids[:3]))
        self.assertEqual([-1, 1, 0], list(streams.text_segment_ids[:3]))
        np.testing.assert_array_equal(streams.visual_boxes[0], words[0].box)


if __name__ == '__main__':
    unittest.main()

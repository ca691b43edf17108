import math
import os
import unittest
from unittest import mock
from hourglassdoc.common import ContractError
from hourglassdoc.bench import timing
from hourglassdoc.bench.timing import BenchResult, random_stream, run_benchmark
from hourglassdoc.features.config import ModelConfig

TINY = ModelConfig(d=8, heads=2, d_ffn=16, k=2, n_stages=2, L_t=32, L_v=8, vocab=32, coord_buckets=8,
                   visual_feat_dim=6, gtr_pair_dim=3)
SLOW = os.environ.get('HOURGLASS_SLOW_TESTS')


class TestBenchResult(unittest.TestCase):
    def test_speedup(self):
        self.assertAlmostEqual(0.5, BenchResult(512, 3.0, 2.0).speedup)
        self.assertTrue(math.isnan(BenchResult(512, float('nan'), float('nan'), failed=True).speedup))

    def test_row(self):
        self.assertEqual([64, 2.0, 1.0, 1.0, 'note'], BenchResult(64, 2.0, 1.0, 'note').to_row())


class TestRunBenchmark(unittest.TestCase):
    def test_lengths(self):
        results = run_benchmark([32, 64], TINY)
        self.assertEqual([32, 64], [result.length for result in results])
        for result in results:
            self.assertFalse(result.failed)
            self.assertGreater(result.vanilla_seconds, 0.0)
            self.assertGreater(result.hourglass_seconds, 0.0)
            self.assertIn('numpy', result.note)

    def test_too_few_repeats(self):
        with self.assertRaises(ContractError):
            run_benchmark([32], TINY, repeats=4)

    def test_indivisible_length(self):
        with self.assertRaises(ContractError):
            run_benchmark([34], TINY)

    def test_blas_threads_pinned(self):
        with mock.patch('hourglassdoc.bench.timing.threadpool_limits', wraps=timing.threadpool_limits) as limits:
            results = run_benchmark([32], TINY, threads=2)
        limits.assert_called_once_with(limits=2, user_api='blas')
        self.assertIn('blas threads 2', results[0].note)
        self.assertIn('blas threads 1', run_benchmark([32], TINY)[0].note)

    def test_no_threads(self):
        with self.assertRaises(ContractError):
            run_benchmark([32], TINY, threads=0)

    def test_exhausted_budget(self):
        self.assertEqual([], run_benchmark([32, 64], TINY, time_budget=-1.0))

    def test_memory_error_gives_partial_report(self):
        calls = []

        def fake_median(model, stream, repeats):
            calls.append(stream.text_length)
            if stream.text_length == 64:
                raise MemoryError()
            return 0.01

        with mock.patch('hourglassdoc.bench.timing.median_forward_seconds', side_effect=fake_median):
            with self.assertLogs(level='ERROR'):
                results = run_benchmark([32, 64, 128], TINY)
        self.assertEqual([32, 64], [result.length for result in results])
        self.assertFalse(results[0].failed)
        self.assertTrue(results[1].failed)
        self.assertNotIn(128, calls)

    def test_random_stream(self):
        stream = random_stream(TINY, seed=3)
        self.assertEqual((32, 8), stream.text.shape)
        self.assertEqual((8, 8), stream.visual.shape)
        self.assertTrue(stream.text_mask.all())


@unittest.skipUnless(SLOW, "set HOURGLASS_SLOW_TESTS to run wall-clock sweeps")
class TestSpeedup(unittest.TestCase):
    CFG = ModelConfig(d=32, heads=2, d_ffn=128, k=2, n_stages=3, L_t=512, L_v=128)

    def test_hourglass_faster(self):
        results = run_benchmark([512, 1024, 2048], self.CFG, repeats=5)
        speedups = [result.speedup for result in results]
        self.assertGreaterEqual(speedups[0], 0.15)
        for shorter, longer in zip(speedups, speedups[1:]):
            self.assertGreaterEqual(longer, shorter - 0.1)

    def test_k_one_matches_vanilla(self):
        result = run_benchmark([512], self.CFG.replace(k=1), repeats=7)[0]
        self.assertLess(abs(result.speedup), 0.1)


if __name__ == '__main__':
    unittest.main()

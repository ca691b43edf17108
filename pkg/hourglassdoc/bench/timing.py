"""
Wall-clock comparison of the hourglass encoder against the full-length block stack
"""
import dataclasses
import platform
import statistics
import time
import typing as tp
from logging import error, info
import numpy as np
import humanfriendly
from threadpoolctl import threadpool_limits
from hourglassdoc.common import ContractError
from hourglassdoc.bench.macs import scale_lengths
from hourglassdoc.features.config import ModelConfig
from hourglassdoc.features.stream import DualStream
from hourglassdoc.model import DocumentModel
from hourglassdoc.numerics import Tensor

MIN_REPEATS = 5
BLAS_THREADS = 1


@dataclasses.dataclass
class BenchResult:
    length: int
    vanilla_seconds: float
    hourglass_seconds: float
    note: str = ''
    failed: bool = False

    @property
    def speedup(self) -> float:
        """
        vanilla time / hourglass time - 1
        """
        if self.failed or not self.hourglass_seconds:
            return float('nan')
        return self.vanilla_seconds / self.hourglass_seconds - 1.0

    def to_row(self) -> tp.List[tp.Any]:
        return [self.length, self.vanilla_seconds, self.hourglass_seconds, self.speedup, self.note]


CSV_HEADER = ['length', 'vanilla_seconds', 'hourglass_seconds', 'speedup', 'note']


def environment_note(threads: int = BLAS_THREADS) -> str:
    return (f"python {platform.python_version()}, numpy {np.__version__}, {platform.machine()}, "
            f"blas threads {threads}")


def random_stream(cfg: ModelConfig, seed: int = 0) -> DualStream:
    """
    Fully active streams of random hidden states at the configured lengths
    """
    rng = np.random.default_rng(seed)
    stream = DualStream.meta(cfg.L_t, cfg.L_v, cfg.d)
    return stream.with_states(Tensor(rng.normal(size=(cfg.L_t, cfg.d))), Tensor(rng.normal(size=(cfg.L_v, cfg.d))))


def median_forward_seconds(model: DocumentModel, stream: DualStream, repeats: int) -> float:
    """
    Median over repeats encoder forwards after one warm-up run
    """
    model.encoder(stream)
    durations = []
    for _ in range(repeats):
        start = time.perf_counter()
        model.encoder(stream)
        durations.append(time.perf_counter() - start)
    return statistics.median(durations)


def run_benchmark(lengths: tp.Sequence[int], cfg: ModelConfig, repeats: int = MIN_REPEATS,
                  time_budget: tp.Optional[float] = None, threads: int = BLAS_THREADS) -> tp.List[BenchResult]:
    """
    Time matched vanilla and hourglass encoders at every text length
    :param lengths: text lengths, each divisible by k^n_stages and by the stream ratio
    :param cfg: model shape; L_t and L_v are replaced per length
    :param repeats: timed forwards per model and length
    :param time_budget: stop starting new lengths once this many seconds have passed
    :param threads: BLAS thread pool size while timing
    :return: one result per attempted length; a failing length ends the sweep
    """
    if repeats < MIN_REPEATS:
        raise ContractError(f"repeats must be at least {MIN_REPEATS}, got {repeats}")
    if threads < 1:
        raise ContractError(f"threads must be positive, got {threads}")
    with threadpool_limits(limits=threads, user_api='blas'):
        return _sweep(lengths, cfg, repeats, time_budget, environment_note(threads))


def _sweep(lengths: tp.Sequence[int], cfg: ModelConfig, repeats: int, time_budget: tp.Optional[float],
           note: str) -> tp.List[BenchResult]:
    results = []
    started = time.perf_counter()
    for length in lengths:
        if time_budget is not None and time.perf_counter() - started > time_budget:
            info(f"Time budget of {humanfriendly.format_timespan(time_budget)} used up before length {length}.")
            break
        scaled = scale_lengths(cfg, length)
        try:
            stream = random_stream(scaled, seed=length)
            vanilla = median_forward_seconds(DocumentModel(scaled, vanilla=True), stream, repeats)
            hourglass = median_forward_seconds(DocumentModel(scaled), stream, repeats)
        except MemoryError:
            error(f"Out of memory at length {length}, report is partial.")
            results.append(BenchResult(length, float('nan'), float('nan'), 'out of memory', failed=True))
            break
        result = BenchResult(length, vanilla, hourglass, note)
        info(f"Length {length}: vanilla {humanfriendly.format_timespan(vanilla, detailed=True)}, "
             f"hourglass {humanfriendly.format_timespan(hourglass, detailed=True)}, speedup {result.speedup:+.0%}")
        results.append(result)
    return results

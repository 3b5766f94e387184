"""
Monte Carlo engine: chunked, counter-addressed sampling with mergeable reducers.
Chunk c of a run always reads the same uniforms, so statistics do not depend on the worker count.
"""

from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Callable, List, Optional, Sequence, Tuple
import logging
import math
import time

import numpy as np
from scipy.special import gammaincc

from config import settings
from models.metrics import ModulationScheme
from services.streams import RandomStream
from utils.error_handler import DomainError, EmptyInput

logger = logging.getLogger(__name__)

Sampler = Callable[[RandomStream, int], np.ndarray]


@dataclass
class Histogram:
    """
    Density histogram with out-of-range samples tracked separately.

    Attributes:
        edges: Strictly increasing bin edges
        counts: Samples per bin (last bin closed on the right)
        total: All samples, including those outside the edges
        below: Samples left of edges[0]
        above: Samples right of edges[-1]
    """

    edges: np.ndarray
    counts: np.ndarray
    total: int
    below: int = 0
    above: int = 0

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.total * self.widths)

    @property
    def stderr(self) -> np.ndarray:
        p = self.counts / self.total
        return np.sqrt(p * (1.0 - p) / self.total) / self.widths

    @property
    def integral(self) -> float:
        return float(self.counts.sum()) / self.total


def _require_samples(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=float).ravel()
    if arr.size == 0:
        raise EmptyInput("no samples to estimate from")
    return arr


def _check_edges(edges) -> np.ndarray:
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0.0):
        raise DomainError("histogram edges must be a strictly increasing sequence of at least two values")
    return edges


def _bin_counts(samples: np.ndarray, edges: np.ndarray) -> Tuple[np.ndarray, int, int]:
    counts, _ = np.histogram(samples, bins=edges)
    below = int(np.count_nonzero(samples < edges[0]))
    above = int(np.count_nonzero(samples > edges[-1]))
    return counts.astype(np.int64), below, above


def estimate_pdf(samples, edges) -> Histogram:
    """
    Density histogram of samples.

    Args:
        samples: Sample values
        edges: Strictly increasing bin edges

    Returns:
        Histogram with density count_k / (total width_k)

    Raises:
        EmptyInput: for no samples
        DomainError: for invalid edges
    """
    arr = _require_samples(samples)
    edges = _check_edges(edges)
    counts, below, above = _bin_counts(arr, edges)
    return Histogram(edges=edges, counts=counts, total=arr.size, below=below, above=above)


def estimate_outage(snr_samples, gamma_th: float) -> Tuple[float, float]:
    """
    Fraction of samples below gamma_th with its binomial standard error.
    """
    arr = _require_samples(snr_samples)
    p = float(np.count_nonzero(arr < gamma_th)) / arr.size
    return p, math.sqrt(p * (1.0 - p) / arr.size)


def conditional_ber(snr: np.ndarray, mod: ModulationScheme) -> np.ndarray:
    """Gamma_upper(p_m, q_m gamma) / (2 Gamma(p_m)) for each SNR value."""
    return 0.5 * gammaincc(mod.p_m, mod.q_m * np.asarray(snr, dtype=float))


def estimate_ber(snr_samples, mod: ModulationScheme) -> Tuple[float, float]:
    """
    Mean conditional BER over SNR samples with the sample standard error.

    Args:
        snr_samples: Instantaneous SNR samples (linear)
        mod: Modulation

    Returns:
        (ber, stderr)
    """
    arr = _require_samples(snr_samples)
    values = conditional_ber(arr, mod)
    mean = math.fsum(values) / arr.size
    if arr.size < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1)) / math.sqrt(arr.size)


# Reducers turn one chunk of samples into a small picklable partial result.
# Integer parts merge by sum, float parts by math.fsum in chunk order.


class OutageReducer:
    """Empirical CDF of the sampled quantity at fixed thresholds."""

    def __init__(self, thresholds: Sequence[float]):
        self.thresholds = np.asarray(thresholds, dtype=float)

    def partial(self, samples: np.ndarray) -> np.ndarray:
        return np.count_nonzero(samples[:, None] < self.thresholds[None, :], axis=0).astype(np.int64)

    def merge(self, parts: List[np.ndarray]) -> np.ndarray:
        return np.sum(parts, axis=0, dtype=np.int64)

    def finalize(self, merged: np.ndarray, total: int) -> List[Tuple[float, float]]:
        out = []
        for count in merged:
            p = int(count) / total
            out.append((p, math.sqrt(p * (1.0 - p) / total)))
        return out


class BerReducer:
    """Average conditional BER of gamma_bar Z^2 for each mean SNR in gamma_bars."""

    def __init__(self, gamma_bars: Sequence[float], mod: ModulationScheme):
        self.gamma_bars = [float(g) for g in gamma_bars]
        self.mod = mod

    def partial(self, samples: np.ndarray) -> List[Tuple[float, float]]:
        power = samples * samples
        out = []
        for gamma_bar in self.gamma_bars:
            values = conditional_ber(gamma_bar * power, self.mod)
            out.append((math.fsum(values), math.fsum(values * values)))
        return out

    def merge(self, parts: List[List[Tuple[float, float]]]) -> List[Tuple[float, float]]:
        merged = []
        for idx in range(len(self.gamma_bars)):
            merged.append((
                math.fsum(part[idx][0] for part in parts),
                math.fsum(part[idx][1] for part in parts),
            ))
        return merged

    def finalize(self, merged, total: int) -> List[Tuple[float, float]]:
        out = []
        for total_sum, total_sq in merged:
            mean = total_sum / total
            if total < 2:
                out.append((mean, 0.0))
                continue
            variance = max(total_sq - total * mean * mean, 0.0) / (total - 1)
            out.append((mean, math.sqrt(variance / total)))
        return out


class HistogramReducer:
    def __init__(self, edges: Sequence[float]):
        self.edges = _check_edges(edges)

    def partial(self, samples: np.ndarray) -> Tuple[np.ndarray, int, int]:
        return _bin_counts(samples, self.edges)

    def merge(self, parts) -> Tuple[np.ndarray, int, int]:
        counts = np.sum([p[0] for p in parts], axis=0, dtype=np.int64)
        return counts, sum(p[1] for p in parts), sum(p[2] for p in parts)

    def finalize(self, merged, total: int) -> Histogram:
        counts, below, above = merged
        return Histogram(edges=self.edges, counts=counts, total=total, below=below, above=above)


class MomentReducer:
    """Raw moments E[Z^k] for the given orders."""

    def __init__(self, orders: Sequence[float]):
        self.orders = [float(k) for k in orders]

    def partial(self, samples: np.ndarray) -> List[float]:
        return [math.fsum(samples ** k) for k in self.orders]

    def merge(self, parts) -> List[float]:
        return [math.fsum(part[idx] for part in parts) for idx in range(len(self.orders))]

    def finalize(self, merged, total: int) -> List[float]:
        return [value / total for value in merged]


class CompositeReducer:
    """Several reducers fed from one pass over the samples."""

    def __init__(self, *reducers):
        self.reducers = reducers

    def partial(self, samples: np.ndarray) -> tuple:
        return tuple(r.partial(samples) for r in self.reducers)

    def merge(self, parts) -> tuple:
        return tuple(r.merge([p[i] for p in parts]) for i, r in enumerate(self.reducers))

    def finalize(self, merged, total: int) -> tuple:
        return tuple(r.finalize(m, total) for r, m in zip(self.reducers, merged))


@dataclass
class ChunkTask:
    """Everything a worker needs to reproduce chunk `index` of a run."""

    sampler: Sampler
    uniforms_per_sample: int
    seed: int
    stream_id: int
    index: int
    chunk_size: int
    count: int
    reducer: object = field(default=None)

    def stream(self) -> RandomStream:
        start = self.index * self.chunk_size * self.uniforms_per_sample
        return RandomStream(seed=self.seed, stream_id=self.stream_id, counter=start)

    def draw(self) -> np.ndarray:
        return self.sampler(self.stream(), self.count)


def _run_chunk(task: ChunkTask):
    return task.reducer.partial(task.draw())


class MonteCarloEngine:
    """
    Splits a run of `total` samples into fixed-size chunks.

    Chunk c starts at counter c * chunk_size * uniforms_per_sample of the
    (seed, stream_id) stream, so the union of samples is the same for every
    worker count; partials are merged in chunk order.
    """

    def __init__(
        self,
        sampler: Sampler,
        uniforms_per_sample: int,
        seed: Optional[int] = None,
        stream_id: int = 0,
        chunk_size: Optional[int] = None,
        workers: Optional[int] = None,
    ):
        self.sampler = sampler
        self.uniforms_per_sample = uniforms_per_sample
        self.seed = settings.MC_SEED if seed is None else seed
        self.stream_id = stream_id
        self.chunk_size = chunk_size or settings.MC_CHUNK
        self.workers = settings.WORKERS if workers is None else workers

    def _tasks(self, total: int, reducer=None) -> List[ChunkTask]:
        if total <= 0:
            raise EmptyInput("sample count must be positive")
        tasks = []
        for index, start in enumerate(range(0, total, self.chunk_size)):
            tasks.append(ChunkTask(
                sampler=self.sampler,
                uniforms_per_sample=self.uniforms_per_sample,
                seed=self.seed,
                stream_id=self.stream_id,
                index=index,
                chunk_size=self.chunk_size,
                count=min(self.chunk_size, total - start),
                reducer=reducer,
            ))
        return tasks

    def run(self, total: int, reducer):
        """
        Draw `total` samples and reduce them.

        Args:
            total: Number of samples
            reducer: Object with partial, merge and finalize

        Returns:
            reducer.finalize(...) of the merged partials
        """
        tasks = self._tasks(total, reducer)
        started = time.time()
        if self.workers > 1 and len(tasks) > 1:
            with Pool(processes=self.workers) as pool:
                parts = pool.map(_run_chunk, tasks)
        else:
            parts = [_run_chunk(task) for task in tasks]
        elapsed = time.time() - started
        logger.info(
            f"Monte Carlo: {total} samples in {len(tasks)} chunks "
            f"(seed={self.seed}, stream={self.stream_id}, workers={self.workers}) took {elapsed:.2f}s"
        )
        return reducer.finalize(reducer.merge(parts), total)

    def draw(self, total: int) -> np.ndarray:
        """All samples of a run, concatenated in chunk order."""
        return np.concatenate([task.draw() for task in self._tasks(total)])

    def pilot_edges(self, bins: Optional[int] = None, quantile: float = 99.9) -> np.ndarray:
        """Equal-width edges on [0, q-th percentile of chunk 0]."""
        bins = bins or settings.MC_BINS
        pilot = self._tasks(self.chunk_size)[0].draw()
        upper = float(np.percentile(pilot, quantile))
        return np.linspace(0.0, upper, bins + 1)

    def histogram(self, total: int, edges: Optional[Sequence[float]] = None) -> Histogram:
        if edges is None:
            edges = self.pilot_edges()
        return self.run(total, HistogramReducer(edges))

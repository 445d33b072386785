"""Monte Carlo estimate containers and deterministic RNG streams."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

# Scenes/walks per RNG stream. Fixed so results never depend on worker count.
BATCH_SIZE = 2000


@dataclass(frozen=True)
class ProbEstimate:
    """Frequency estimate of a probability from ``hits`` successes in ``n`` trials."""

    hits: int
    n: int
    undecided: int = 0

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("n must be positive")
        if not 0 <= self.hits <= self.n:
            raise ValueError("hits must lie in [0, n]")

    @property
    def p_hat(self) -> float:
        return self.hits / self.n

    @property
    def se(self) -> float:
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.n)

    @property
    def bracket(self) -> tuple[float, float]:
        """[p_low, p_high] if every undecided trial were a failure / a success."""
        return self.hits / self.n, (self.hits + self.undecided) / self.n

    @property
    def rel_se(self) -> float:
        return self.se / self.p_hat if self.hits else math.inf


@dataclass(frozen=True)
class ScaledEstimate:
    """``scale * hits / n`` with binomial standard error.

    Used for capacities (scale = mass of the starting measure) and for
    rejection-sampled volumes (scale = bounding box volume).
    """

    hits: int
    n: int
    scale: float
    censored: int = 0

    @property
    def fraction(self) -> float:
        return self.hits / self.n

    @property
    def value(self) -> float:
        return self.scale * self.fraction

    @property
    def se(self) -> float:
        p = self.fraction
        return self.scale * math.sqrt(p * (1.0 - p) / self.n)


CapacityEstimate = ScaledEstimate


@dataclass(frozen=True)
class Estimate:
    """Generic point estimate with a standard error (delta-method results, averages)."""

    value: float
    se: float
    n: int


def mean_estimate(samples: np.ndarray) -> Estimate:
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    se = float(samples.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return Estimate(float(samples.mean()), se, n)


def combined_se(*ses: float) -> float:
    return math.sqrt(sum(s * s for s in ses))


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for (seed, task, batch, ...) via SeedSequence hashing."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def batch_sizes(n: int, batch: int = BATCH_SIZE) -> list[int]:
    if n <= 0:
        raise ValueError("n must be positive")
    full, rest = divmod(n, batch)
    return [batch] * full + ([rest] if rest else [])


def run_batches(
    work: Callable[[int, np.random.Generator], T],
    n: int,
    seed: int,
    task: Sequence[int] = (),
    threads: int = 1,
    batch: int = BATCH_SIZE,
) -> list[T]:
    """Run ``work(size, rng)`` over fixed batches, returning results in batch order.

    Batch ``b`` always receives ``stream(seed, *task, b)`` so the list of
    results is identical for any ``threads``.
    """
    sizes = batch_sizes(n, batch)
    jobs = [(size, stream(seed, *task, b)) for b, size in enumerate(sizes)]
    if threads <= 1 or len(jobs) == 1:
        return [work(size, rng) for size, rng in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: work(*job), jobs))

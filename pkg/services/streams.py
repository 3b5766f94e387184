"""
Counter-based random streams for reproducible parallel sampling.
Every variate is a pure function of (seed, stream_id, counter).
"""

from dataclasses import dataclass, replace
from typing import Tuple
import math

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass
class RandomStream:
    """
    Philox-4x64 substream keyed by (seed, stream_id).

    counter counts uniforms already consumed; uniforms(n) returns the
    uniforms with indices counter .. counter + n - 1 and advances it.
    """

    seed: int
    stream_id: int = 0
    counter: int = 0

    def _bit_generator(self, block: int) -> np.random.Philox:
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
        # uniform 4b + j comes from word j of Philox block b + 1
        start = np.array([block & _MASK64, 0, 0, 0], dtype=np.uint64)
        return np.random.Philox(key=key, counter=start)

    def uniforms(self, count: int) -> np.ndarray:
        """
        Uniform variates on (0, 1].

        Args:
            count: Number of variates

        Returns:
            float64 array of length count
        """
        block, skip = divmod(self.counter, 4)
        generator = np.random.Generator(self._bit_generator(block))
        raw = generator.random(skip + count)[skip:]
        self.counter += count
        return 1.0 - raw

    def normals(self, count: int) -> np.ndarray:
        """
        Standard normal variates by Box-Muller on consecutive uniform pairs.

        Consumes 2 * ceil(count / 2) uniforms.
        """
        pairs = (count + 1) // 2
        u = self.uniforms(2 * pairs)
        radius = np.sqrt(-2.0 * np.log(u[0::2]))
        angle = 2.0 * math.pi * u[1::2]
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:count]

    def at(self, counter: int) -> "RandomStream":
        """Copy of this stream positioned at counter."""
        return replace(self, counter=counter)

    def substream(self, stream_id: int) -> "RandomStream":
        return RandomStream(seed=self.seed, stream_id=stream_id)


def normal_pair(stream: RandomStream) -> Tuple[float, float]:
    """Two independent standard normals from the next two uniforms of stream."""
    z = stream.normals(2)
    return float(z[0]), float(z[1])

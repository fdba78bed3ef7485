"""Deterministic SplitMix64 random stream.

Outputs are stable across platforms and Python versions; nothing here uses
the ``random`` module.
"""

from typing import Sequence

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def splitmix64(x: int) -> int:
    """SplitMix64 mix function of a single 64-bit value."""
    return _mix((x + _GOLDEN) & _MASK64)


def derive_seed(master_seed: int, point_index: int, sample_index: int) -> int:
    """Per-formula seed from (master seed, sweep point, sample) by three absorption steps."""
    h = splitmix64(master_seed & _MASK64)
    h = splitmix64(h ^ (point_index & _MASK64))
    return splitmix64(h ^ (sample_index & _MASK64))


class RandomStream:
    """SplitMix64 generator. Single owner; not safe to share between threads."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        return _mix(self.state)

    def uniform_below(self, n: int) -> int:
        """Exactly uniform integer in [0, n), rejecting the biased top of the range."""
        if n < 1:
            raise ValueError(f"uniform_below needs n >= 1, got {n}")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def weighted_index(self, weights: Sequence[int]) -> int:
        """Index ``i`` with probability ``weights[i] / sum(weights)``; one draw."""
        total = sum(weights)
        if total <= 0:
            raise ValueError("weighted_index needs a positive weight")
        return index_for_draw(weights, self.uniform_below(total))


def index_for_draw(weights: Sequence[int], u: int) -> int:
    """Cumulative-weight lookup of a draw ``u`` in [0, sum(weights))."""
    acc = 0
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            return i
    raise ValueError(f"draw {u} outside total weight {acc}")

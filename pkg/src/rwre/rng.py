"""Counter-based random numbers keyed by integer tuples.

Every uniform variate in this package is a pure function of a (seed, key)
chain built from a splitmix64-style finalizer.  Nothing here carries hidden
state: the value drawn for (seed, replica 7, step 12345) is the same whether
it is produced alone, inside a vectorized batch, or on another worker.  That
purity is what makes lazy window extension and thread-count-independent
results possible, so no stateful generator (``random``, ``numpy.random``)
may be used anywhere results depend on randomness.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_U_GAMMA = np.uint64(_GAMMA)
_U_MIX1 = np.uint64(_MIX1)
_U_MIX2 = np.uint64(_MIX2)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)

# (value >> 11) covers 53 bits, the float64 mantissa
_INV53 = float(2.0 ** -53)


def _finalize(z: int) -> int:
    z &= _MASK
    z ^= z >> 30
    z = (z * _MIX1) & _MASK
    z ^= z >> 27
    z = (z * _MIX2) & _MASK
    z ^= z >> 31
    return z


def derive(seed: int, key: int) -> int:
    """The key-th output of the splitmix64 stream started at seed.

    Used both to draw raw 64-bit values and to derive child seeds, so a
    (master, replica, step) draw is derive(derive(master, replica), step).
    """
    return _finalize(seed + ((key + 1) & _MASK) * _GAMMA)


def uniform(seed: int, key: int) -> float:
    """Uniform [0,1) variate, pure in (seed, key)."""
    return (derive(seed, key) >> 11) * _INV53


def derive_array(seed, keys) -> np.ndarray:
    """Vectorized derive(); bit-identical to the scalar path."""
    z = np.asarray(keys, dtype=np.uint64) + np.uint64(1)
    if np.isscalar(seed):
        base = np.uint64(seed)
    else:
        base = np.asarray(seed, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = base + z * _U_GAMMA
        z = z ^ (z >> _U30)
        z = z * _U_MIX1
        z = z ^ (z >> _U27)
        z = z * _U_MIX2
        z = z ^ (z >> _U31)
    return z


def uniform_array(seed, keys) -> np.ndarray:
    """Vectorized uniform(); bit-identical to the scalar path."""
    return (derive_array(seed, keys) >> _U11).astype(np.float64) * _INV53


def zigzag(x: int) -> int:
    """Map a signed site index to an unsigned key (0,-1,1,-2,... -> 0,1,2,3,...)."""
    return 2 * x if x >= 0 else -2 * x - 1


def zigzag_array(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    return np.where(x >= 0, 2 * x, -2 * x - 1).astype(np.uint64)


class CounterStream:
    """Sequential view of one keyed stream: the i-th call returns uniform(seed, i).

    Convenience for step-by-step simulation code; batch kernels reproduce the
    same values through uniform_array(seed, arange).
    """

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int, counter: int = 0):
        self.seed = seed & _MASK
        self.counter = counter

    def next_uniform(self) -> float:
        u = uniform(self.seed, self.counter)
        self.counter += 1
        return u

    def spawn(self, key: int) -> "CounterStream":
        """Child stream independent of this one and of the counter position."""
        return CounterStream(derive(self.seed, (1 << 62) + key))

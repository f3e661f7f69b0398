"""Counter-based SplitMix64 stream used for reproducible gauge fields.

The generator is stateless: draw ``i`` of stream ``key`` is

    mix64(key + (i + 1) * GOLDEN)            (arithmetic mod 2**64)

and a uniform double in [0, 1) is ``(draw >> 11) * 2**-53``. Per-link keys
are ``mix64(seed + (4 * site + mu + 1) * GOLDEN)``. Everything is plain
64-bit integer arithmetic, so other languages reproduce the bits exactly.
"""

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(GOLDEN)


def mix64(z):
    """SplitMix64 finalizer on a uint64 array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def as_key(seed):
    """Reduce an arbitrary Python integer seed to a uint64 key."""
    return np.uint64(int(seed) & MASK64)


def draws(keys, start, count):
    """Raw 64-bit draws ``start .. start+count-1`` for each key.

    Returns an array of shape ``keys.shape + (count,)``.
    """
    keys = np.asarray(keys, dtype=np.uint64)
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = keys[..., None] + idx * _GOLDEN
    return mix64(z)


def uniforms(keys, start, count):
    """Uniform doubles in [0, 1) built from the top 53 bits of each draw."""
    bits = draws(keys, start, count) >> np.uint64(11)
    return bits.astype(np.float64) * 2.0**-53


def link_keys(seed, volume):
    """Keys for every (site, mu) link, shape (volume, 4)."""
    counter = np.arange(1, 4 * volume + 1, dtype=np.uint64).reshape(volume, 4)
    with np.errstate(over="ignore"):
        z = as_key(seed) + counter * _GOLDEN
    return mix64(z)

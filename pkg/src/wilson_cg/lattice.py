"""Lattice geometry: site ordering, neighbor tables and the two-block split.

Directions mu = 0, 1, 2 are the spatial axes x, y, z (extent L) and mu = 3
is time (extent T). Sites are numbered x-fastest:
``x + L*(y + L*(z + L*t))``.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

PERIODIC = "periodic"
ANTIPERIODIC = "antiperiodic"
TIME = 3


@dataclass(frozen=True)
class LatticeDims:
    L: int
    T: int

    def __post_init__(self):
        for name, n in (("L", self.L), ("T", self.T)):
            if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
                raise TypeError(f"{name} must be an integer, got {n!r}")
            if n < 2 or n % 2:
                raise ValueError(f"{name} must be even and >= 2, got {n}")

    @property
    def shape(self):
        """Extent per direction mu = 0..3."""
        return (self.L, self.L, self.L, self.T)

    @property
    def volume(self):
        return self.L**3 * self.T

    def __str__(self):
        return f"{self.L}^3x{self.T}"


def site_index(coords, dims):
    """Linear index of (x, y, z, t); accepts arrays of coordinates on the last axis."""
    c = np.asarray(coords)
    if c.shape[-1:] != (4,):
        raise ValueError("coords must have length 4 (x, y, z, t)")
    ext = np.array(dims.shape)
    if np.any(c < 0) or np.any(c >= ext):
        raise ValueError(f"coordinates {coords!r} out of range for {dims}")
    L = dims.L
    idx = c[..., 0] + L * (c[..., 1] + L * (c[..., 2] + L * c[..., 3]))
    return int(idx) if idx.ndim == 0 else idx


def site_coords(index, dims):
    """Inverse of site_index; returns (..., 4) integer coordinates."""
    n = np.asarray(index)
    if np.any(n < 0) or np.any(n >= dims.volume):
        raise ValueError(f"site index {index!r} out of range for {dims}")
    L = dims.L
    x = n % L
    y = (n // L) % L
    z = (n // L**2) % L
    t = n // L**3
    return np.stack([x, y, z, t], axis=-1)


@dataclass(frozen=True, eq=False)
class NeighborTable:
    """fwd[s, mu] = s + mu_hat, bwd[s, mu] = s - mu_hat.

    bc_sign[s, mu] multiplies the link U_mu(s) whenever the hop s -> s + mu_hat
    wraps around the lattice (and its adjoint on the way back).
    """

    dims: LatticeDims
    bc: str
    fwd: np.ndarray
    bwd: np.ndarray
    bc_sign: np.ndarray

    @property
    def bwd_sign(self):
        """Sign picked up by the link U_mu(s - mu_hat) used in the backward hop."""
        return np.take_along_axis(self.bc_sign, self.bwd, axis=0)


@lru_cache(maxsize=32)
def build_neighbor_table(dims, bc=PERIODIC):
    if bc not in (PERIODIC, ANTIPERIODIC):
        raise ValueError(f"bc must be {PERIODIC!r} or {ANTIPERIODIC!r}, got {bc!r}")
    V = dims.volume
    coords = site_coords(np.arange(V), dims)
    ext = np.array(dims.shape)
    L = dims.L
    fwd = np.empty((V, 4), dtype=np.int64)
    bwd = np.empty((V, 4), dtype=np.int64)
    for mu in range(4):
        for table, step in ((fwd, 1), (bwd, -1)):
            c = coords.copy()
            c[:, mu] = (c[:, mu] + step) % ext[mu]
            table[:, mu] = c[:, 0] + L * (c[:, 1] + L * (c[:, 2] + L * c[:, 3]))
    sign = np.ones((V, 4), dtype=np.float64)
    if bc == ANTIPERIODIC:
        sign[coords[:, TIME] == dims.T - 1, TIME] = -1.0
    for arr in (fwd, bwd, sign):
        arr.setflags(write=False)
    return NeighborTable(dims, bc, fwd, bwd, sign)


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    """Two halves of the lattice cut along ``axis``.

    ``blocks[b]`` lists the sites of half b in increasing order; ``halos[b]``
    lists the sites of the other half that neighbor half b.
    """

    dims: LatticeDims
    axis: int
    blocks: tuple = field(default=())
    halos: tuple = field(default=())


def split_blocks(dims, axis=TIME):
    if axis not in (0, 1, 2, 3):
        raise ValueError(f"axis must be 0..3, got {axis!r}")
    n = dims.shape[axis]
    if n % 2:
        raise ValueError(f"extent {n} along axis {axis} is odd")
    V = dims.volume
    coords = site_coords(np.arange(V), dims)
    lower = coords[:, axis] < n // 2
    blocks = (np.flatnonzero(lower), np.flatnonzero(~lower))
    nbr = build_neighbor_table(dims)
    halos = []
    for b, own in enumerate(blocks):
        other = ~lower if b == 0 else lower
        touched = np.unique(np.concatenate([nbr.fwd[own].ravel(), nbr.bwd[own].ravel()]))
        halos.append(touched[other[touched]])
    return BlockDecomposition(dims, axis, blocks, tuple(halos))

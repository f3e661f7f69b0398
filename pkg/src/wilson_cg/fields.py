"""Lattice-wide gauge and fermion fields."""

from dataclasses import dataclass

import numpy as np

from .lattice import LatticeDims
from .su3 import unitarity_error


class NonUnitaryError(ValueError):
    """A gauge link failed the unitarity check."""


@dataclass(eq=False)
class GaugeField:
    """Forward links U_mu(n), array of shape (V, 4, 3, 3) complex128."""

    links: np.ndarray
    dims: LatticeDims

    def __post_init__(self):
        self.links = np.ascontiguousarray(self.links, dtype=np.complex128)
        if self.links.shape != (self.dims.volume, 4, 3, 3):
            raise ValueError(f"links shape {self.links.shape} does not match {self.dims}")

    def unitarity_error(self):
        return unitarity_error(self.links)

    def validate(self, tol=1e-10):
        err = self.unitarity_error()
        if not err <= tol:
            raise NonUnitaryError(f"max |U^dag U - 1| = {err:.3e} exceeds {tol:.1e}")
        return self

    @classmethod
    def unit(cls, dims):
        links = np.zeros((dims.volume, 4, 3, 3), dtype=np.complex128)
        links[...] = np.eye(3)
        return cls(links, dims)


@dataclass(eq=False)
class FermionField:
    """One spinor per site, array of shape (V, 4, 3) complex128."""

    psi: np.ndarray
    dims: LatticeDims

    def __post_init__(self):
        self.psi = np.ascontiguousarray(self.psi, dtype=np.complex128)
        if self.psi.shape != (self.dims.volume, 4, 3):
            raise ValueError(f"spinor shape {self.psi.shape} does not match {self.dims}")

    @classmethod
    def zeros(cls, dims):
        return cls(np.zeros((dims.volume, 4, 3), dtype=np.complex128), dims)

    def flat(self):
        """Vector of length 12 V, index = 12 * site + 3 * spin + color."""
        return self.psi.reshape(-1)

    @classmethod
    def from_flat(cls, vec, dims):
        return cls(np.asarray(vec).reshape(dims.volume, 4, 3), dims)

    def copy(self):
        return FermionField(self.psi.copy(), self.dims)

    def __add__(self, other):
        return FermionField(self.psi + other.psi, self.dims)

    def __sub__(self, other):
        return FermionField(self.psi - other.psi, self.dims)

    def __mul__(self, scalar):
        return FermionField(scalar * self.psi, self.dims)

    __rmul__ = __mul__


def random_fermion(dims, rng):
    """Gaussian random spinor field from a numpy Generator (test inputs)."""
    shape = (dims.volume, 4, 3)
    return FermionField(rng.standard_normal(shape) + 1j * rng.standard_normal(shape), dims)


def check_same_dims(*fields):
    dims = fields[0].dims
    for f in fields[1:]:
        if f.dims != dims:
            raise ValueError(f"lattice mismatch: {dims} vs {f.dims}")
    return dims

"""Conjugate gradient on the normal equations D D^dag y = eta, psi = D^dag y."""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from ._parallel import chunks, resolve_threads
from .dirac import SITE_COMPONENTS, apply_D, apply_Ddag, stencil_flops
from .fields import FermionField, check_same_dims
from .flops import AXPY_FLOPS_PER_ENTRY, DOT_FLOPS_PER_ENTRY
from .lattice import PERIODIC


class CGBreakdownError(ArithmeticError):
    """<D^dag p, D^dag p> was not positive: the normal operator is not SPD."""


@dataclass
class SolverParams:
    """Stopping rule and start vector.

    ``tol`` is relative: iterate while |r| / |eta| > tol. ``initial_guess``
    seeds the normal-system iterate y (psi = D^dag y); None means zero.
    """

    tol: float = 1e-10
    max_iter: int = 10_000
    initial_guess: Optional[FermionField] = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass
class SolverResult:
    psi: FermionField
    iterations: int
    residual_history: List[float]
    converged: bool
    flops_total: int
    true_residual: float
    y: FermionField = field(repr=False)

    @property
    def recursive_residual(self):
        return self.residual_history[-1]


def _partial_sums(x, deterministic, threads):
    if deterministic:
        # strict left-to-right order, independent of the thread count
        return float(np.cumsum(x)[-1]) if x.size else 0.0
    parts = [float(np.sum(x[c])) for c in chunks(x.size, threads)]
    return math.fsum(parts) if len(parts) > 1 else parts[0]


def dot(a, b, deterministic=True, threads=1):
    """<a, b> = sum over sites and components of conj(a) b."""
    check_same_dims(a, b)
    ar, ai = a.psi.real.ravel(), a.psi.imag.ravel()
    br, bi = b.psi.real.ravel(), b.psi.imag.ravel()
    threads = 1 if deterministic else resolve_threads(threads)
    re = _partial_sums(ar * br + ai * bi, deterministic, threads)
    im = _partial_sums(ar * bi - ai * br, deterministic, threads)
    return complex(re, im)


def norm2(a, deterministic=True, threads=1):
    x = a.psi.view(np.float64).ravel()
    threads = 1 if deterministic else resolve_threads(threads)
    return _partial_sums(x * x, deterministic, threads)


def make_point_source(dims, site=0, spin=0, color=0):
    """Field with a single unit real entry at (site, spin, color)."""
    if not 0 <= site < dims.volume:
        raise ValueError(f"site {site} out of range for {dims}")
    if not 0 <= spin < 4:
        raise ValueError(f"spin {spin} out of range 0..3")
    if not 0 <= color < 3:
        raise ValueError(f"color {color} out of range 0..2")
    eta = FermionField.zeros(dims)
    eta.psi[site, spin, color] = 1.0
    return eta


def cg_normal(U, eta, kappa, params=None, bc=PERIODIC, threads=1, deterministic=True,
              callback: Optional[Callable[[int, FermionField, FermionField], None]] = None):
    """Solve D psi = eta via CG on D D^dag y = eta, then psi = D^dag y.

    Uses alpha = <r, r> / <D^dag p, D^dag p> and beta = <r, r>_new / <r, r>_old.
    Stops once the recursive residual is below tol and the recomputed outer
    residual |D psi - eta| / |eta| confirms it; if the recursive residual is
    ahead of the true one the iteration simply continues. ``callback`` is
    called as callback(k, y_k, r_k) after every step.
    """
    params = params or SolverParams()
    dims = check_same_dims(U, eta)
    N = SITE_COMPONENTS * dims.volume
    op_flops = stencil_flops() * dims.volume
    dot_flops = DOT_FLOPS_PER_ENTRY * N
    axpy_flops = AXPY_FLOPS_PER_ENTRY * N
    nrm = lambda f: norm2(f, deterministic, threads)
    D = lambda f: apply_D(U, f, kappa, bc, threads)
    Ddag = lambda f: apply_Ddag(U, f, kappa, bc, threads)

    flops = dot_flops
    eta2 = nrm(eta)
    if eta2 == 0.0:
        zero = FermionField.zeros(dims)
        return SolverResult(zero, 0, [0.0], True, flops, 0.0, zero.copy())

    if params.initial_guess is None:
        y = np.zeros_like(eta.psi)
        r = eta.psi.copy()
    else:
        y = params.initial_guess.psi.copy()
        r = eta.psi - D(Ddag(FermionField(y, dims))).psi
        flops += 2 * op_flops + 2 * N
    p = r.copy()
    rr = nrm(FermionField(r, dims))
    flops += dot_flops
    scale = 1.0 / math.sqrt(eta2)
    history = [math.sqrt(rr) * scale]
    target = params.tol / scale  # absolute |r| threshold

    it = 0
    converged = False
    psi = None
    true_res = math.inf
    while True:
        if math.sqrt(rr) <= target:
            psi = Ddag(FermionField(y, dims))
            res = D(psi).psi - eta.psi
            flops += 2 * op_flops + 2 * N + dot_flops
            true_res = math.sqrt(nrm(FermionField(res, dims))) * scale
            if true_res <= params.tol:
                converged = True
                break
            psi = None
            if rr == 0.0:
                break
        if it >= params.max_iter:
            break
        Dp = Ddag(FermionField(p, dims))
        pAp = nrm(Dp)
        flops += op_flops + dot_flops
        if not pAp > 0.0:
            raise CGBreakdownError(f"<D^dag p, D^dag p> = {pAp!r} at iteration {it}")
        alpha = rr / pAp
        y = y + alpha * p
        r = r - alpha * D(Dp).psi
        rr_new = nrm(FermionField(r, dims))
        beta = rr_new / rr
        p = r + beta * p
        flops += op_flops + 3 * axpy_flops + dot_flops
        rr = rr_new
        it += 1
        history.append(math.sqrt(rr) * scale)
        if callback is not None:
            callback(it, FermionField(y, dims), FermionField(r, dims))

    if psi is None:
        psi = Ddag(FermionField(y, dims))
        res = D(psi).psi - eta.psi
        flops += 2 * op_flops + 2 * N + dot_flops
        true_res = math.sqrt(nrm(FermionField(res, dims))) * scale
    return SolverResult(psi, it, history, converged, flops, true_res, FermionField(y, dims))

"""The Wilson-Dirac operator

    (D psi)(n) = psi(n) + kappa * sum_mu [ U_mu(n) (1 - gamma_mu) psi(n + mu)
                                         + U_mu(n - mu)^dag (1 + gamma_mu) psi(n - mu) ]

evaluated with the half-spinor trick, plus its adjoint, the normal operator
D D^dag, an instrumented single-site stencil and a dense-matrix builder.

The stencil is organized as the four-stage cascade of the hardware kernel:
(1) gather the 9 spinors and 8 links, (2) spin-project the 8 neighbors,
(3) 16 link times color-vector products with the kappa rescaling,
(4) reconstruct and accumulate. The hop order is fixed (mu = 0..3, forward
hop before backward hop), so every path through this module produces the
same bits for the same site.
"""

from functools import lru_cache

import numpy as np

from . import gamma as _g
from ._parallel import chunks, map_chunks, resolve_threads
from .fields import FermionField, GaugeField, check_same_dims
from .flops import FlopLedger, counted, uncounted
from .lattice import PERIODIC, build_neighbor_table, split_blocks
from .su3 import adj_mat_vec_split, join, mat_vec_split, split

SPINS = 4
COLORS = 3
SITE_COMPONENTS = SPINS * COLORS          # complex entries per site
SPINOR_REALS = 2 * SITE_COMPONENTS        # 24
LINK_REALS = 2 * COLORS * COLORS          # 18
REAL_BYTES = np.dtype(np.float64).itemsize
MAX_DENSE_VOLUME = 256


def kappa_from_mass(mq):
    """Hopping parameter kappa = 1 / (2 (m_q + 4))."""
    return 1.0 / (2.0 * (mq + 4.0))


def stencil_io_bytes():
    """Bytes read by one stencil: the site spinor, 8 neighbor spinors, 8 links."""
    spinors = 1 + 2 * 4
    links = 2 * 4
    return (spinors * SPINOR_REALS + links * LINK_REALS) * REAL_BYTES


# -- kernel -------------------------------------------------------------------

def _stencil(psi_n, hops, ledger=None):
    """Stages 2-4 on pre-gathered data.

    psi_n is a split pair of arrays (..., S, 4, 3). ``hops`` holds, per hop,
    (mu, sign, adjoint, split psi neighbor, split link (S, 3, 3), kappa (S,)).
    Works on float arrays or on object arrays of CountedReal.
    """
    if ledger is not None:
        ledger.enter(2)
    halves = [_g.project_split(mu, s, pr_pi[0], pr_pi[1]) for mu, s, _, pr_pi, _, _ in hops]

    if ledger is not None:
        ledger.enter(3)
    prods = []
    for (mu, s, adj, _, (ur, ui), k), half in zip(hops, halves):
        mv = adj_mat_vec_split if adj else mat_vec_split
        prods.append([mv(ur, ui, hr, hi, scale=k, ledger=ledger) for hr, hi in half])

    if ledger is not None:
        ledger.enter(4)
    zero = np.zeros_like(psi_n[0][..., 0, :])
    acc = [(zero, zero) for _ in range(SPINS)]
    for (mu, s, *_), w in zip(hops, prods):
        for a in (0, 1):
            acc[a] = (acc[a][0] + w[a][0], acc[a][1] + w[a][1])
        for r, (a, ph) in zip((2, 3), _g.RECONSTRUCT_TABLE[mu, s]):
            acc[r] = _g.add_unit(acc[r][0], acc[r][1], w[a][0], w[a][1], ph)
    out_re = np.stack([psi_n[0][..., sp, :] + acc[sp][0] for sp in range(SPINS)], axis=-2)
    out_im = np.stack([psi_n[1][..., sp, :] + acc[sp][1] for sp in range(SPINS)], axis=-2)
    if ledger is not None:
        ledger.enter(1)
    return out_re, out_im


def _gather(links, psi, sites, fwd, bwd, kfwd, kbwd):
    """Stage 1: collect the site spinor and the 8 hop inputs.

    ``links`` and ``psi`` are split pairs over some storage of sites;
    ``sites``, ``fwd`` and ``bwd`` index into that storage (fwd and bwd are
    (S, 4) tables aligned with ``sites``); kfwd/kbwd are (S, 4) kappa values
    including boundary signs.
    """
    lr, li = links
    pr, pi = psi
    hops = []
    for mu in range(4):
        f, b = fwd[:, mu], bwd[:, mu]
        hops.append((mu, -1, False, (pr[..., f, :, :], pi[..., f, :, :]),
                     (lr[sites, mu], li[sites, mu]), kfwd[:, mu]))
        hops.append((mu, 1, True, (pr[..., b, :, :], pi[..., b, :, :]),
                     (lr[b, mu], li[b, mu]), kbwd[:, mu]))
    return (pr[..., sites, :, :], pi[..., sites, :, :]), hops


def _hop_kappas(nbr, kappa, sites):
    return kappa * nbr.bc_sign[sites], kappa * nbr.bwd_sign[sites]


def _apply(links, psi, kappa, nbr, threads=1, ledger=None):
    """D on a complex array psi (..., V, 4, 3); returns a new complex array."""
    lsplit = split(links)
    psplit = split(psi)
    kfwd_all, kbwd_all = _hop_kappas(nbr, float(kappa), slice(None))

    def run(sites):
        psi_n, hops = _gather(lsplit, psplit, sites, nbr.fwd[sites], nbr.bwd[sites],
                              kfwd_all[sites], kbwd_all[sites])
        return sites, _stencil(psi_n, hops, ledger)

    out = np.empty(np.shape(psi), dtype=np.complex128)
    for sites, (re, im) in map_chunks(run, chunks(nbr.dims.volume, threads), threads):
        out[..., sites, :, :] = join(re, im)
    return out


def _nbr(U, bc):
    return build_neighbor_table(U.dims, bc)


# -- public operators ---------------------------------------------------------

def apply_D(U, psi, kappa, bc=PERIODIC, threads=1):
    """D psi for a GaugeField U and FermionField psi."""
    dims = check_same_dims(U, psi)
    threads = resolve_threads(threads)
    return FermionField(_apply(U.links, psi.psi, kappa, _nbr(U, bc), threads), dims)


def apply_Ddag(U, psi, kappa, bc=PERIODIC, threads=1):
    """D^dag psi computed as gamma5 D gamma5 psi."""
    dims = check_same_dims(U, psi)
    threads = resolve_threads(threads)
    out = _apply(U.links, _g.gamma5(psi.psi), kappa, _nbr(U, bc), threads)
    return FermionField(_g.gamma5(out), dims)


def apply_normal(U, psi, kappa, bc=PERIODIC, threads=1):
    """D (D^dag psi)."""
    return apply_D(U, apply_Ddag(U, psi, kappa, bc, threads), kappa, bc, threads)


def apply_stencil(n, U, psi, kappa, bc=PERIODIC):
    """(D psi)(n) as a (4, 3) spinor."""
    check_same_dims(U, psi)
    nbr = _nbr(U, bc)
    sites = np.array([int(n)])
    kf, kb = _hop_kappas(nbr, float(kappa), sites)
    psi_n, hops = _gather(split(U.links), split(psi.psi), sites,
                          nbr.fwd[sites], nbr.bwd[sites], kf, kb)
    return join(*_stencil(psi_n, hops))[0]


def _count_hops(psi_n, hops, ledger):
    wrap = lambda pair: (counted(pair[0], ledger), counted(pair[1], ledger))
    psi_c = wrap(psi_n)
    hops_c = [(mu, s, adj, wrap(p), wrap(u), k) for mu, s, adj, p, u, k in hops]
    return psi_c, hops_c


def apply_stencil_staged(n, U, psi, kappa, bc=PERIODIC):
    """Instrumented stencil: returns ((4, 3) spinor, FlopLedger).

    Every real addition and multiplication is counted as it happens, per
    stage of the cascade. The spinor equals apply_stencil bit for bit.
    """
    check_same_dims(U, psi)
    nbr = _nbr(U, bc)
    sites = np.array([int(n)])
    kf, kb = _hop_kappas(nbr, float(kappa), sites)
    psi_n, hops = _gather(split(U.links), split(psi.psi), sites,
                          nbr.fwd[sites], nbr.bwd[sites], kf, kb)
    ledger = FlopLedger()
    re, im = _stencil(*_count_hops(psi_n, hops, ledger), ledger)
    return join(uncounted(re), uncounted(im))[0], ledger


@lru_cache(maxsize=None)
def _reference_ledger():
    from .lattice import LatticeDims
    dims = LatticeDims(2, 2)
    U = GaugeField.unit(dims)
    psi = FermionField(np.ones((dims.volume, 4, 3), dtype=np.complex128), dims)
    return apply_stencil_staged(0, U, psi, 0.1)[1]


def stencil_flops():
    """Instrumented floating point operations per site (1464)."""
    return _reference_ledger().total


# -- decomposed and reference paths ------------------------------------------

def apply_D_blocked(U, psi, kappa, axis=3, bc=PERIODIC):
    """D psi evaluated block by block on the two-block split with halo copies.

    Each block works on its own copy of its sites plus the halo; the result
    is identical to apply_D.
    """
    dims = check_same_dims(U, psi)
    nbr = _nbr(U, bc)
    dec = split_blocks(dims, axis)
    out = np.empty_like(psi.psi)
    for own, halo in zip(dec.blocks, dec.halos):
        local = np.concatenate([own, halo])
        where = np.full(dims.volume, -1, dtype=np.int64)
        where[local] = np.arange(local.size)
        fwd, bwd = where[nbr.fwd[own]], where[nbr.bwd[own]]
        if (fwd < 0).any() or (bwd < 0).any():
            raise RuntimeError("halo does not cover the block's neighbors")
        kf, kb = _hop_kappas(nbr, float(kappa), own)
        links_local = split(U.links[local])
        psi_local = split(psi.psi[local])
        psi_n, hops = _gather(links_local, psi_local, np.arange(own.size), fwd, bwd, kf, kb)
        out[own] = join(*_stencil(psi_n, hops))
    return FermionField(out, dims)


def apply_D_unprojected(U, psi, kappa, bc=PERIODIC, ledger=None):
    """D psi without the half-spinor trick: full 4-spin projection, then the
    link applied to all four spin components (32 products per site)."""
    dims = check_same_dims(U, psi)
    nbr = _nbr(U, bc)
    lr, li = split(U.links)
    kf, kb = _hop_kappas(nbr, float(kappa), slice(None))
    out = psi.psi.copy()
    for mu in range(4):
        for s, idx, link_site, k, adj in (
            (-1, nbr.fwd[:, mu], slice(None), kf[:, mu], False),
            (1, nbr.bwd[:, mu], nbr.bwd[:, mu], kb[:, mu], True),
        ):
            full = np.einsum("ab,nbc->nac", _g.projector(mu, s), psi.psi[idx])
            fr, fi = split(full)
            mv = adj_mat_vec_split if adj else mat_vec_split
            for sp in range(SPINS):
                hr, hi = mv(lr[link_site, mu], li[link_site, mu], fr[:, sp], fi[:, sp],
                            scale=k, ledger=ledger)
                out[:, sp] += join(hr, hi)
    return FermionField(out, dims)


def build_dense(U, kappa, bc=PERIODIC, max_volume=MAX_DENSE_VOLUME, batch=192):
    """Dense (12 V, 12 V) complex matrix of D; column j = D e_j.

    Row/column index is 12 * site + 3 * spin + color.
    """
    V = U.dims.volume
    if V > max_volume:
        raise ValueError(f"dense matrix refused for V = {V} > {max_volume}")
    N = SITE_COMPONENTS * V
    nbr = _nbr(U, bc)
    M = np.empty((N, N), dtype=np.complex128)
    for start in range(0, N, batch):
        stop = min(N, start + batch)
        basis = np.zeros((stop - start, N), dtype=np.complex128)
        basis[np.arange(stop - start), np.arange(start, stop)] = 1.0
        cols = _apply(U.links, basis.reshape(-1, V, SPINS, COLORS), kappa, nbr)
        M[:, start:stop] = cols.reshape(stop - start, N).T
    return M


def gamma5_dense(V):
    """The (12 V, 12 V) diagonal matrix of gamma5 acting on every site."""
    d = np.repeat(np.diag(_g.GAMMA[5]).real, COLORS)
    return np.diag(np.tile(d, V)).astype(np.complex128)

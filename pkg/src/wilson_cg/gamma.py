"""Dirac matrices, the projectors 1 +- gamma_mu and half-spinor compression.

Spinors are complex arrays of shape (..., 4, 3): spin index, then color.
Half spinors have shape (..., 2, 3) and hold the two upper spin components
of (1 +- gamma_mu) psi. The lower two are fixed unit-phase multiples of the
upper ones; those phases are read off the matrices below at import time and
checked against the dense projectors.
"""

import numpy as np

I = 1j

GAMMA = {
    0: np.array([[0, 0, 0, I],
                 [0, 0, I, 0],
                 [0, -I, 0, 0],
                 [-I, 0, 0, 0]], dtype=np.complex128),
    1: np.array([[0, 0, 0, -1],
                 [0, 0, 1, 0],
                 [0, 1, 0, 0],
                 [-1, 0, 0, 0]], dtype=np.complex128),
    2: np.array([[0, 0, I, 0],
                 [0, 0, 0, -I],
                 [-I, 0, 0, 0],
                 [0, I, 0, 0]], dtype=np.complex128),
    3: np.array([[0, 0, 1, 0],
                 [0, 0, 0, 1],
                 [1, 0, 0, 0],
                 [0, 1, 0, 0]], dtype=np.complex128),
    5: np.diag([1, 1, -1, -1]).astype(np.complex128),
}
for _g in GAMMA.values():
    _g.setflags(write=False)

SIGNS = (1, -1)


def projector(mu, sign):
    """Dense 4x4 matrix 1 + sign * gamma_mu (not normalized)."""
    return np.eye(4, dtype=np.complex128) + sign * GAMMA[mu]


def _unit(z):
    z = complex(z)
    for u in (1, -1, 1j, -1j):
        if z == u:
            return u
    raise ValueError(f"{z!r} is not a unit phase")


def _single_entry(row, cols):
    nz = [c for c in cols if row[c] != 0]
    if len(nz) != 1:
        raise ValueError("gamma row does not have exactly one entry in block")
    return nz[0], _unit(row[nz[0]])


def _build_tables():
    proj, recon = {}, {}
    for mu in range(4):
        g = GAMMA[mu]
        for s in SIGNS:
            # upper row a of (1 + s g): psi_a + s g[a, b] psi_b
            proj[mu, s] = tuple(
                (b, _unit(s * ph))
                for b, ph in (_single_entry(g[a], (2, 3)) for a in (0, 1))
            )
            # image of (1 + s g) satisfies g v = s v, so v_r = s g[r, a] v_a
            recon[mu, s] = tuple(
                (a, _unit(s * ph))
                for a, ph in (_single_entry(g[r], (0, 1)) for r in (2, 3))
            )
    return proj, recon


#: (mu, sign) -> ((b, phase) for upper rows 0, 1)
PROJECT_TABLE, RECONSTRUCT_TABLE = _build_tables()


def _check_gamma(idx):
    if idx not in GAMMA:
        raise ValueError(f"gamma index must be one of 0, 1, 2, 3, 5; got {idx!r}")


def _check_dir(mu, sign):
    if mu not in (0, 1, 2, 3):
        raise ValueError(f"direction must be 0..3, got {mu!r}")
    if sign not in SIGNS:
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")


# -- split-complex kernels (shared with the stencil) -------------------------

def add_unit(ar, ai, br, bi, phase):
    """a + phase * b for phase in {1, -1, i, -i}; 2 real ops per entry."""
    if phase == 1:
        return ar + br, ai + bi
    if phase == -1:
        return ar - br, ai - bi
    if phase == 1j:
        return ar - bi, ai + br
    return ar + bi, ai - br


def times_unit(br, bi, phase):
    """phase * b, a pure sign/swap (no arithmetic)."""
    if phase == 1:
        return br, bi
    if phase == -1:
        return -br, -bi
    if phase == 1j:
        return -bi, br
    return bi, -br


def project_split(mu, sign, pr, pi):
    """Upper components of (1 + sign gamma_mu) psi as two split color vectors."""
    out = []
    for a, (b, ph) in enumerate(PROJECT_TABLE[mu, sign]):
        out.append(add_unit(pr[..., a, :], pi[..., a, :], pr[..., b, :], pi[..., b, :], ph))
    return out


# -- public complex API -------------------------------------------------------

def gamma_mul(idx, psi):
    """Multiply the spin index of psi by gamma_idx (idx in 0, 1, 2, 3, 5)."""
    _check_gamma(idx)
    psi = np.asarray(psi, dtype=np.complex128)
    g = GAMMA[idx]
    out = np.zeros_like(psi)
    for r in range(4):
        for c in range(4):
            if g[r, c] != 0:
                out[..., r, :] = g[r, c] * psi[..., c, :]
    return out


def gamma5(psi):
    """gamma_5 psi: flip the sign of the two lower spin components."""
    psi = np.array(psi, dtype=np.complex128)
    psi[..., 2:, :] *= -1
    return psi


def project(mu, sign, psi):
    """Half spinor (..., 2, 3): upper two components of (1 + sign gamma_mu) psi."""
    _check_dir(mu, sign)
    pr, pi = np.real(psi), np.imag(psi)
    h = np.empty(np.shape(psi)[:-2] + (2, 3), dtype=np.complex128)
    for a, (hr, hi) in enumerate(project_split(mu, sign, pr, pi)):
        h[..., a, :].real = hr
        h[..., a, :].imag = hi
    return h


def reconstruct(mu, sign, h):
    """Full spinor in the image of 1 + sign gamma_mu from its upper half."""
    _check_dir(mu, sign)
    h = np.asarray(h, dtype=np.complex128)
    out = np.empty(h.shape[:-2] + (4, 3), dtype=np.complex128)
    out[..., :2, :] = h
    hr, hi = h.real, h.imag
    for r, (a, ph) in zip((2, 3), RECONSTRUCT_TABLE[mu, sign]):
        lr, li = times_unit(hr[..., a, :], hi[..., a, :], ph)
        out[..., r, :].real = lr
        out[..., r, :].imag = li
    return out


def _self_check():
    basis = np.zeros((12, 4, 3), dtype=np.complex128)
    basis.reshape(12, 12)[np.arange(12), np.arange(12)] = 1.0
    for mu in range(4):
        for s in SIGNS:
            dense = np.einsum("ab,nbc->nac", projector(mu, s), basis)
            if not np.array_equal(reconstruct(mu, s, project(mu, s, basis)), dense):
                raise RuntimeError(f"half-spinor tables wrong for mu={mu}, sign={s}")


_self_check()

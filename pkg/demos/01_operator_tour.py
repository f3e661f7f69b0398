"""
The Wilson-Dirac operator on a small lattice
============================================

Build a random SU(3) gauge field, apply D to a spinor field, and check the
identities the operator is supposed to satisfy.
"""

import numpy as np

from wilson_cg import fieldio
from wilson_cg.cg import dot
from wilson_cg.dirac import apply_D, apply_Ddag, apply_stencil_staged, build_dense, gamma5_dense
from wilson_cg.fields import random_fermion
from wilson_cg.lattice import LatticeDims

# a 4^3 x 8 lattice with reproducible random links
dims = LatticeDims(4, 8)
U = fieldio.generate("random", dims, seed=1)
psi = random_fermion(dims, np.random.default_rng(0))
kappa = 0.12

print("lattice", dims, "volume", dims.volume)
print("max link unitarity error", U.unitarity_error())

out = apply_D(U, psi, kappa)
print("|D psi| / |psi| =", np.linalg.norm(out.psi) / np.linalg.norm(psi.psi))

# D^dag is gamma5 D gamma5, so <phi, D psi> = <D^dag phi, psi>
phi = random_fermion(dims, np.random.default_rng(1))
print("adjointness gap", abs(dot(phi, out) - dot(apply_Ddag(U, phi, kappa), psi)))

# the staged stencil counts every real add and multiply
_, ledger = apply_stencil_staged(0, U, psi, kappa)
print("flops per site by stage", [ledger.stage_total(s) for s in (1, 2, 3, 4)],
      "total", ledger.total, "mat-vecs", ledger.mat_vec_calls)

# on 2^4 the whole operator fits in a dense 192 x 192 matrix
small = LatticeDims(2, 2)
M = build_dense(fieldio.generate("random", small, seed=2), kappa)
G = gamma5_dense(small.volume)
print("dense", M.shape, "gamma5-hermiticity gap", np.max(np.abs(G @ M @ G - M.conj().T)))

"""Double-precision Wilson-Dirac operator, CG solver and FPGA kernel model."""

from .cg import SolverParams, SolverResult, cg_normal, dot, make_point_source, norm2
from .dirac import (
    apply_D,
    apply_D_blocked,
    apply_Ddag,
    apply_normal,
    apply_stencil,
    apply_stencil_staged,
    build_dense,
    kappa_from_mass,
    stencil_flops,
    stencil_io_bytes,
)
from .fieldio import generate, read_fermion, read_gauge, write_fermion, write_gauge
from .fields import FermionField, GaugeField
from .lattice import LatticeDims, build_neighbor_table, site_index, split_blocks

__version__ = "0.1.0"

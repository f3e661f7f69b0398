"""
Analytic FPGA throughput model
==============================

performance = V f nu / (V delta + tau), evaluated for the built-in device
profiles, next to the published figures and the per-site FLOP count each
figure implies.
"""

from wilson_cg.dirac import stencil_flops
from wilson_cg.lattice import LatticeDims
from wilson_cg.perf import (
    load_profiles,
    memory_footprint,
    resource_scaling_check,
    compare_published,
    throughput,
    with_transfer,
)

f = stencil_flops()
dims = LatticeDims(6, 8)
print(f"f = {f} flops/site, V = {dims.volume}")

for p in load_profiles().values():
    row = compare_published(p, dims.volume, f)
    print(f"{p.name:6s} model {row.model_gflops:8.3f}  asymptote {row.asymptotic_gflops:7.2f}  "
          f"published {row.published_gflops}")
    print("       ", row.diagnostic())
    if p.bandwidth:
        est = throughput(dims.volume, f, p.clock_hz, p.interval, p.latency)
        print(f"        with DDR transfer: {with_transfer(est, dims.volume, p).effective_gflops:.3f}")

# the throughput approaches f nu / delta as the lattice grows
for L, T in ((4, 8), (6, 8), (8, 12), (16, 32)):
    V = LatticeDims(L, T).volume
    print(f"V={V:7d}  VU13P {throughput(V, f, 500e6, 1, 142).gflops:7.2f} GFLOPs")

fp = memory_footprint(dims)
print("on-chip bytes:", {k: v for k, v in fp.items() if k.endswith("bytes")})
for claim in resource_scaling_check():
    print(claim.claim, "PASS" if claim.passed else "FAIL", claim.detail)

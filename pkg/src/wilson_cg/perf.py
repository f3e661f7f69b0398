"""Analytic throughput, transfer and footprint model of the pipelined stencil kernel.

A kernel with initiation interval delta and latency tau, clocked at nu,
processes V sites in V * delta + tau cycles, so

    performance = V * f * nu / (V * delta + tau)

with f floating point operations per site.
"""

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Optional

from .dirac import LINK_REALS, REAL_BYTES, SPINOR_REALS, stencil_flops, stencil_io_bytes
from .lattice import LatticeDims, split_blocks

DEFAULT_STAGES = (1, 14, 70, 57)
DOUBLE_OP_CYCLES = 14
PUBLISHED_TOLERANCE = 0.01


class UnknownProfileError(KeyError):
    pass


@dataclass(frozen=True)
class KernelTiming:
    stage_latencies: tuple = DEFAULT_STAGES
    initiation_interval: int = 1

    def __post_init__(self):
        if len(self.stage_latencies) != 4 or any(s < 0 for s in self.stage_latencies):
            raise ValueError("need four non-negative stage latencies")
        if self.initiation_interval < 1:
            raise ValueError("initiation interval must be >= 1")

    @property
    def total_latency(self):
        return sum(self.stage_latencies)


def cascade_stages(op_cycles=DOUBLE_OP_CYCLES):
    """Stage latencies implied by a double add/mul latency of ``op_cycles``.

    Stage 1 is a single-cycle register load. Stage 2 is one layer of
    additions. Stage 3 is multiply+add, two additions, then the kappa
    multiply. Stage 4 is four dependent additions plus one copy cycle.
    """
    return (1, op_cycles, 2 * op_cycles + 2 * op_cycles + op_cycles, 4 * op_cycles + 1)


def kernel_latency(stages=DEFAULT_STAGES):
    stages = tuple(stages)
    if len(stages) != 4 or any(s < 0 for s in stages):
        raise ValueError("need four non-negative stage latencies")
    return sum(stages)


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    clock_hz: float
    bram: int = 0
    dsp: int = 0
    ff: int = 0
    lut: int = 0
    uram: int = 0
    ddr_channels: Optional[int] = None
    channel_bandwidth: Optional[float] = None   # bytes/s per channel
    latency: int = 142
    interval: int = 1
    published_gflops: Optional[float] = None
    published_gflops_with_transfer: Optional[float] = None
    aliases: tuple = ()
    calibrated: bool = False

    @property
    def bandwidth(self):
        """Aggregate DDR-to-logic bandwidth in bytes/s (None if unknown)."""
        if not self.ddr_channels or self.channel_bandwidth is None:
            return None
        return self.ddr_channels * self.channel_bandwidth


@dataclass(frozen=True)
class PerfEstimate:
    gflops: float
    cycles_total: int
    time_s: float
    flops_total: int
    transfer_s: Optional[float] = None
    effective_gflops: Optional[float] = None
    calls: int = 1


def throughput(V, f, nu, delta, tau):
    """Compute-only estimate for one sweep over V sites."""
    for name, x in (("V", V), ("f", f), ("nu", nu), ("delta", delta)):
        if not x > 0:
            raise ValueError(f"{name} must be positive, got {x!r}")
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau!r}")
    cycles = V * delta + tau
    time_s = cycles / nu
    flops = V * f
    return PerfEstimate(flops / time_s / 1e9, cycles, time_s, flops)


def asymptotic_gflops(f, nu, delta):
    """V -> infinity limit of the throughput formula."""
    return f * nu / delta / 1e9


def implied_flops_per_site(gflops, nu, delta, V=None, tau=0):
    """Per-site FLOP count that makes the formula reproduce ``gflops``.

    With V=None the asymptotic reading f * nu / delta is inverted.
    """
    if V is None:
        return gflops * 1e9 * delta / nu
    return gflops * 1e9 * (V * delta + tau) / (V * nu)


def transfer_bytes(V):
    """Bytes streamed per sweep when every stencil input comes from DDR."""
    return V * stencil_io_bytes()


def transfer_time(V, profile):
    bw = profile.bandwidth
    if bw is None or not bw > 0:
        raise ValueError(f"profile {profile.name} has no transfer bandwidth")
    if math.isinf(bw):
        return 0.0
    return transfer_bytes(V) / bw


def with_transfer(estimate, V, profile, resident=True, calls=1):
    """Add DDR transfer time for ``calls`` sweeps.

    Resident data (links kept in the logic between calls) is transferred once;
    otherwise every call pays the transfer again.
    """
    per_call = transfer_time(V, profile)
    transfer_s = per_call * (1 if resident else calls)
    compute_s = estimate.time_s * calls
    flops = estimate.flops_total * calls
    return replace(
        estimate,
        time_s=compute_s,
        flops_total=flops,
        cycles_total=estimate.cycles_total * calls,
        transfer_s=transfer_s,
        effective_gflops=flops / (compute_s + transfer_s) / 1e9,
        calls=calls,
    )


@dataclass(frozen=True)
class Calibration:
    overhead_ratio: float      # transfer time / compute time
    channel_bandwidth: float   # bytes/s per channel
    transfer_s: float


def calibrate_bandwidth(profile, V, f=None):
    """Channel bandwidth that turns the compute-only figure into the
    with-transfer figure, using the ratio of the two published numbers."""
    if profile.published_gflops is None or profile.published_gflops_with_transfer is None:
        raise ValueError(f"profile {profile.name} has no published transfer pair")
    if not profile.ddr_channels:
        raise ValueError(f"profile {profile.name} has no DDR channel count")
    f = stencil_flops() if f is None else f
    ratio = profile.published_gflops / profile.published_gflops_with_transfer - 1.0
    est = throughput(V, f, profile.clock_hz, profile.interval, profile.latency)
    t = ratio * est.time_s
    bw = transfer_bytes(V) / (profile.ddr_channels * t)
    return Calibration(ratio, bw, t)


# -- fixtures ---------------------------------------------------------------

def load_model_data(path=None):
    """Read the device/table fixture file (JSON, schema in the README)."""
    if path is None:
        text = resources.files("wilson_cg.data").joinpath("devices.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


def _profile_from_entry(entry):
    t = entry.get("timing", {})
    return DeviceProfile(
        name=entry["name"],
        clock_hz=float(entry["clock_hz"]),
        bram=entry.get("bram") or 0,
        dsp=entry.get("dsp") or 0,
        ff=entry.get("ff") or 0,
        lut=entry.get("lut") or 0,
        uram=entry.get("uram") or 0,
        ddr_channels=entry.get("ddr_channels"),
        channel_bandwidth=entry.get("channel_bandwidth"),
        latency=int(t.get("latency", 142)),
        interval=int(t.get("interval", 1)),
        published_gflops=entry.get("published_gflops"),
        published_gflops_with_transfer=entry.get("published_gflops_with_transfer"),
        aliases=tuple(entry.get("aliases", ())),
    )


def reference_dims(data=None):
    data = data or load_model_data()
    ref = data.get("reference_lattice", {"L": 6, "T": 8})
    return LatticeDims(ref["L"], ref["T"])


def load_profiles(data=None, calibrate=True):
    """Device profiles keyed by name. Missing bandwidths are calibrated from
    a published compute/with-transfer pair when one exists."""
    data = data or load_model_data()
    V = reference_dims(data).volume
    out = {}
    for entry in data["devices"]:
        p = _profile_from_entry(entry)
        if calibrate and p.channel_bandwidth is None and p.published_gflops_with_transfer:
            cal = calibrate_bandwidth(p, V, data.get("flops_per_site"))
            p = replace(p, channel_bandwidth=cal.channel_bandwidth, calibrated=True)
        out[p.name] = p
    return out


def get_profile(name, profiles=None):
    profiles = profiles or load_profiles()
    key = name.upper()
    for p in profiles.values():
        if key == p.name.upper() or key in (a.upper() for a in p.aliases):
            return p
    raise UnknownProfileError(f"unknown profile {name!r}; known: {', '.join(profiles)}")


# -- comparison against the published table ---------------------------------

@dataclass
class PublishedComparison:
    device: str
    interval: int
    clock_hz: float
    latency: int
    volume: int
    flops_per_site: int
    model_gflops: float
    asymptotic_gflops: float
    published_gflops: Optional[float]
    implied_f_asymptotic: Optional[float]
    implied_f_finite: Optional[float]

    @property
    def rel_error(self):
        if self.published_gflops is None:
            return None
        return abs(self.model_gflops - self.published_gflops) / self.published_gflops

    @property
    def asymptotic_rel_error(self):
        if self.published_gflops is None:
            return None
        return abs(self.asymptotic_gflops - self.published_gflops) / self.published_gflops

    @property
    def passed(self):
        err = self.rel_error
        return err is not None and err <= PUBLISHED_TOLERANCE

    def diagnostic(self):
        if self.published_gflops is None:
            return ""
        return (
            f"{self.device}: f={self.flops_per_site} from the stencil count; "
            f"asymptote f*nu/delta = {self.asymptotic_gflops:.4g} GFLOPs "
            f"(implied f = {self.implied_f_asymptotic:.0f} for {self.published_gflops:g}); "
            f"finite V={self.volume}, tau={self.latency} gives {self.model_gflops:.5g} "
            f"(implied f = {self.implied_f_finite:.0f})"
        )


def compare_published(profile, V, f=None):
    f = stencil_flops() if f is None else f
    est = throughput(V, f, profile.clock_hz, profile.interval, profile.latency)
    g = profile.published_gflops
    return PublishedComparison(
        device=profile.name,
        interval=profile.interval,
        clock_hz=profile.clock_hz,
        latency=profile.latency,
        volume=V,
        flops_per_site=f,
        model_gflops=est.gflops,
        asymptotic_gflops=asymptotic_gflops(f, profile.clock_hz, profile.interval),
        published_gflops=g,
        implied_f_asymptotic=None if g is None else implied_flops_per_site(g, profile.clock_hz, profile.interval),
        implied_f_finite=None if g is None else implied_flops_per_site(
            g, profile.clock_hz, profile.interval, V, profile.latency),
    )


# -- footprint ----------------------------------------------------------------

@dataclass(frozen=True)
class MemoryLayout:
    duplication: int = 2        # copies of every link array (forward and backward reads)
    halo_copies: bool = True    # per-block boundary copies of the two-block split
    channel_split: bool = False # separate real/imaginary streams
    n_fields: int = 4           # resident spinor fields: psi, r, p and one temporary
    split_axis: int = 3


LINK_BYTES = LINK_REALS * REAL_BYTES
SPINOR_BYTES = SPINOR_REALS * REAL_BYTES


def memory_footprint(dims, layout=None):
    """On-chip bytes by category.

    Halo sites carry one spinor plus their four links (in every duplicated
    copy) for each block.
    """
    layout = layout or MemoryLayout()
    V = dims.volume
    gauge = layout.duplication * V * 4 * LINK_BYTES
    spinor = layout.n_fields * V * SPINOR_BYTES
    halo_sites = 0
    halo = 0
    if layout.halo_copies:
        dec = split_blocks(dims, layout.split_axis)
        halo_sites = sum(h.size for h in dec.halos)
        halo = halo_sites * (SPINOR_BYTES + layout.duplication * 4 * LINK_BYTES)
    total = gauge + spinor + halo
    out = {
        "volume": V,
        "gauge_bytes": gauge,
        "spinor_bytes": spinor,
        "halo_sites": halo_sites,
        "halo_bytes": halo,
        "total_bytes": total,
        "channels": 2 if layout.channel_split else 1,
    }
    out["bytes_per_channel"] = total // out["channels"]
    return out


# -- resource scaling ---------------------------------------------------------

COMPUTE_COLUMNS = ("dsp", "ff", "lut", "bram")


@dataclass
class ClaimResult:
    claim: str
    passed: bool
    detail: str = ""


def resource_scaling_check(rows=None):
    """Check the problem-size table: compute resources constant, URAM
    nondecreasing with the volume."""
    if rows is None:
        rows = load_model_data()["size_scaling"]
    rows = sorted(rows, key=lambda r: r["L"] ** 3 * r["T"])
    varying = [c for c in COMPUTE_COLUMNS if len({r[c] for r in rows}) > 1]
    uram = [r["uram"] for r in rows]
    drops = [(a, b) for a, b in zip(uram, uram[1:]) if b < a]
    return [
        ClaimResult("compute constant", not varying,
                    "varying: " + ", ".join(varying) if varying else "dsp, ff, lut, bram constant"),
        ClaimResult("URAM nondecreasing", not drops,
                    " -> ".join(str(u) for u in uram)),
    ]

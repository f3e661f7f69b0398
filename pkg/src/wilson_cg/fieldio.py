"""Binary field files and field generators.

Layout (little-endian, see FORMAT.md): a 56-byte header followed by the
binary64 payload. Gauge payload order is site (x fastest), mu, row, column,
(re, im); fermion payload order is site, spin, color, (re, im).
"""

import hashlib
import os
import struct
import warnings
from dataclasses import dataclass

import numpy as np

from . import rng
from .fields import FermionField, GaugeField, NonUnitaryError
from .lattice import LatticeDims
from .su3 import su3_from_keys, unitarity_error

MAGIC = b"WILSONCG"
VERSION = 1
KIND_GAUGE = 1
KIND_FERMION = 2
ORDERING_LEXICOGRAPHIC = 1
PRECISION_BINARY64 = 64
CHANNEL_INTERLEAVED = 0
CHANNEL_REAL = 1
CHANNEL_IMAG = 2

_HEADER = struct.Struct("<8s8IQQ")
HEADER_BYTES = _HEADER.size
_KIND_NAMES = {KIND_GAUGE: "gauge", KIND_FERMION: "fermion"}
_SITE_SHAPE = {KIND_GAUGE: (4, 3, 3), KIND_FERMION: (4, 3)}


class FieldFormatError(ValueError):
    pass


class BadMagicError(FieldFormatError):
    pass


class UnsupportedVersionError(FieldFormatError):
    pass


class ChecksumError(FieldFormatError):
    pass


class TruncatedFileError(FieldFormatError):
    pass


class WrongKindError(FieldFormatError):
    pass


def checksum(payload):
    """BLAKE2b with an 8-byte digest, read as a little-endian uint64."""
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


@dataclass(frozen=True)
class FieldFileHeader:
    kind: int
    L: int
    T: int
    payload_bytes: int
    checksum: int
    channel: int = CHANNEL_INTERLEAVED
    version: int = VERSION
    ordering: int = ORDERING_LEXICOGRAPHIC
    precision: int = PRECISION_BINARY64

    def pack(self):
        return _HEADER.pack(MAGIC, self.version, self.kind, self.L, self.T, self.ordering,
                            self.precision, self.channel, 0, self.payload_bytes, self.checksum)

    @classmethod
    def unpack(cls, raw):
        if len(raw) < HEADER_BYTES:
            raise TruncatedFileError(f"header is {len(raw)} bytes, need {HEADER_BYTES}")
        magic, version, kind, L, T, ordering, precision, channel, _, nbytes, csum = \
            _HEADER.unpack(raw[:HEADER_BYTES])
        if magic != MAGIC:
            raise BadMagicError(f"bad magic {magic!r}")
        if version != VERSION:
            raise UnsupportedVersionError(f"file version {version}, supported {VERSION}")
        if kind not in _KIND_NAMES:
            raise FieldFormatError(f"unknown field kind {kind}")
        if ordering != ORDERING_LEXICOGRAPHIC or precision != PRECISION_BINARY64:
            raise FieldFormatError(f"unsupported ordering/precision tags {ordering}/{precision}")
        if channel not in (CHANNEL_INTERLEAVED, CHANNEL_REAL, CHANNEL_IMAG):
            raise FieldFormatError(f"unknown channel tag {channel}")
        return cls(kind, L, T, nbytes, csum, channel, version, ordering, precision)

    @property
    def dims(self):
        return LatticeDims(self.L, self.T)


def _kind_of(field):
    if isinstance(field, GaugeField):
        return KIND_GAUGE, field.links
    if isinstance(field, FermionField):
        return KIND_FERMION, field.psi
    raise TypeError(f"not a lattice field: {type(field).__name__}")


def payload_bytes(field):
    """Canonical interleaved payload of a field."""
    _, arr = _kind_of(field)
    return np.ascontiguousarray(arr, dtype="<c16").tobytes()


def _write(path, kind, dims, payload, channel=CHANNEL_INTERLEAVED):
    header = FieldFileHeader(kind, dims.L, dims.T, len(payload), checksum(payload), channel)
    with open(path, "wb") as fh:
        fh.write(header.pack())
        fh.write(payload)


def _read(path, expected_kind=None):
    with open(path, "rb") as fh:
        raw = fh.read()
    header = FieldFileHeader.unpack(raw)
    if expected_kind is not None and header.kind != expected_kind:
        raise WrongKindError(
            f"{path}: expected {_KIND_NAMES[expected_kind]} file, found {_KIND_NAMES[header.kind]}")
    dims = header.dims
    reals = dims.volume * int(np.prod(_SITE_SHAPE[header.kind]))
    expected = reals * (8 if header.channel != CHANNEL_INTERLEAVED else 16)
    payload = raw[HEADER_BYTES:]
    if header.payload_bytes != expected:
        raise FieldFormatError(f"header payload size {header.payload_bytes} != {expected} for {dims}")
    if len(payload) < expected:
        raise TruncatedFileError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    if len(payload) > expected:
        raise FieldFormatError(f"{path}: {len(payload) - expected} trailing bytes")
    if checksum(payload) != header.checksum:
        raise ChecksumError(f"{path}: payload checksum mismatch")
    return header, payload


def read_header(path):
    with open(path, "rb") as fh:
        return FieldFileHeader.unpack(fh.read(HEADER_BYTES))


def write_gauge(path, U):
    _write(path, KIND_GAUGE, U.dims, payload_bytes(U))


def read_gauge(path, on_nonunitary="error", tol=1e-10):
    """Read and validate a gauge file.

    ``on_nonunitary`` is "error" (default) or "warn" for deliberately
    perturbed fixtures.
    """
    if on_nonunitary not in ("error", "warn"):
        raise ValueError(f"on_nonunitary must be 'error' or 'warn', got {on_nonunitary!r}")
    header, payload = _read(path, KIND_GAUGE)
    dims = header.dims
    links = np.frombuffer(payload, dtype="<c16").astype(np.complex128)
    U = GaugeField(links.reshape(dims.volume, 4, 3, 3), dims)
    err = unitarity_error(U.links)
    if not err <= tol:
        msg = f"{path}: max |U^dag U - 1| = {err:.3e} exceeds {tol:.1e}"
        if on_nonunitary == "error":
            raise NonUnitaryError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return U


def write_fermion(path, psi):
    _write(path, KIND_FERMION, psi.dims, payload_bytes(psi))


def read_fermion(path):
    header, payload = _read(path, KIND_FERMION)
    dims = header.dims
    arr = np.frombuffer(payload, dtype="<c16").astype(np.complex128)
    return FermionField(arr.reshape(dims.volume, 4, 3), dims)


def channel_paths(path):
    base = os.fspath(path)
    return base + ".re", base + ".im"


def export_channel_split(field, path):
    """Write the real and imaginary parts as two files ``path.re``/``path.im``.

    Each payload is the binary64 parts in canonical element order.
    """
    kind, arr = _kind_of(field)
    arr = np.ascontiguousarray(arr, dtype=np.complex128)
    re_path, im_path = channel_paths(path)
    _write(re_path, kind, field.dims, arr.real.astype("<f8").tobytes(), CHANNEL_REAL)
    _write(im_path, kind, field.dims, arr.imag.astype("<f8").tobytes(), CHANNEL_IMAG)
    return re_path, im_path


def recombine_channels(re_path, im_path):
    """Interleave a channel-split pair back into the canonical payload bytes.

    Returns (header of the real file, payload).
    """
    h_re, p_re = _read(re_path)
    h_im, p_im = _read(im_path)
    if (h_re.channel, h_im.channel) != (CHANNEL_REAL, CHANNEL_IMAG):
        raise FieldFormatError("expected a real-channel and an imaginary-channel file")
    if (h_re.kind, h_re.L, h_re.T) != (h_im.kind, h_im.L, h_im.T):
        raise FieldFormatError("channel files describe different fields")
    both = np.empty((len(p_re) // 8, 2), dtype="<f8")
    both[:, 0] = np.frombuffer(p_re, dtype="<f8")
    both[:, 1] = np.frombuffer(p_im, dtype="<f8")
    return h_re, both.tobytes()


def read_channel_split(path, on_nonunitary="error", tol=1e-10):
    """Load a field from its ``.re``/``.im`` pair."""
    header, payload = recombine_channels(*channel_paths(path))
    dims = header.dims
    arr = np.frombuffer(payload, dtype="<c16").astype(np.complex128)
    if header.kind == KIND_FERMION:
        return FermionField(arr.reshape(dims.volume, 4, 3), dims)
    U = GaugeField(arr.reshape(dims.volume, 4, 3, 3), dims)
    err = unitarity_error(U.links)
    if not err <= tol:
        if on_nonunitary == "error":
            raise NonUnitaryError(f"max |U^dag U - 1| = {err:.3e}")
        warnings.warn(f"max |U^dag U - 1| = {err:.3e}", RuntimeWarning, stacklevel=2)
    return U


# -- generators ---------------------------------------------------------------

GAUGE_KINDS = ("unit", "random")


def generate(kind, dims, seed=0):
    """Gauge field generator: "unit" (all links 1) or "random" (per-link
    SU(3) from the key mix64(seed + (4 site + mu + 1) * GOLDEN))."""
    if kind == "unit":
        return GaugeField.unit(dims)
    if kind == "random":
        return GaugeField(su3_from_keys(rng.link_keys(seed, dims.volume)), dims)
    raise ValueError(f"unknown gauge kind {kind!r}; choose from {GAUGE_KINDS}")

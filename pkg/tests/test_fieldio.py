import os
from pathlib import Path

import numpy as np
import pytest

from wilson_cg import rng as wrng
from wilson_cg.dirac import apply_D
from wilson_cg.fieldio import (
    HEADER_BYTES,
    BadMagicError,
    ChecksumError,
    FieldFormatError,
    TruncatedFileError,
    UnsupportedVersionError,
    WrongKindError,
    checksum,
    export_channel_split,
    generate,
    payload_bytes,
    read_channel_split,
    read_fermion,
    read_gauge,
    read_header,
    recombine_channels,
    write_fermion,
    write_gauge,
)
from wilson_cg.fields import FermionField, GaugeField, NonUnitaryError, random_fermion
from wilson_cg.lattice import LatticeDims

FIXTURE = Path(__file__).parent / "data" / "gauge_2x2_seed7.bin"
FIXTURE_CHECKSUM = 0x792623A42CD013DF


def test_splitmix_reference_stream():
    # published SplitMix64 outputs for state 0
    assert [int(x) for x in wrng.draws(0, 0, 3)] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_uniforms_in_unit_interval():
    u = wrng.uniforms(np.arange(100, dtype=np.uint64), 0, 50)
    assert u.min() >= 0 and u.max() < 1


def test_gauge_round_trip(tmp_path, gauge16):
    p = tmp_path / "g.bin"
    write_gauge(p, gauge16)
    back = read_gauge(p)
    assert np.array_equal(back.links, gauge16.links)
    assert back.dims == gauge16.dims
    assert os.path.getsize(p) == HEADER_BYTES + 16 * 4 * 18 * 8


def test_fermion_round_trip(tmp_path, psi512):
    p = tmp_path / "f.bin"
    write_fermion(p, psi512)
    assert np.array_equal(read_fermion(p).psi, psi512.psi)
    assert os.path.getsize(p) == HEADER_BYTES + 512 * 24 * 8


@pytest.mark.parametrize("L,T", [(2, 2), (2, 4), (4, 2), (4, 8)])
def test_round_trip_dims(tmp_path, L, T):
    U = generate("random", LatticeDims(L, T), seed=L + T)
    write_gauge(tmp_path / "g", U)
    assert np.array_equal(read_gauge(tmp_path / "g").links, U.links)


def test_header_fields(tmp_path, gauge16):
    write_gauge(tmp_path / "g", gauge16)
    h = read_header(tmp_path / "g")
    assert (h.kind, h.L, h.T, h.payload_bytes) == (1, 2, 2, 16 * 4 * 18 * 8)
    assert h.checksum == checksum(payload_bytes(gauge16))
    assert HEADER_BYTES == 56


def _corrupt(path, offset, xor=0x01):
    raw = bytearray(Path(path).read_bytes())
    raw[offset] ^= xor
    Path(path).write_bytes(bytes(raw))


def test_flipped_bit(tmp_path, gauge16):
    p = tmp_path / "g"
    write_gauge(p, gauge16)
    _corrupt(p, HEADER_BYTES + 100, 0x10)
    with pytest.raises(ChecksumError):
        read_gauge(p)


def test_bad_magic(tmp_path, gauge16):
    p = tmp_path / "g"
    write_gauge(p, gauge16)
    _corrupt(p, 0)
    with pytest.raises(BadMagicError):
        read_gauge(p)


def test_bad_version(tmp_path, gauge16):
    p = tmp_path / "g"
    write_gauge(p, gauge16)
    _corrupt(p, 8, 0x02)
    with pytest.raises(UnsupportedVersionError):
        read_gauge(p)


def test_truncated(tmp_path, gauge16):
    p = tmp_path / "g"
    write_gauge(p, gauge16)
    raw = p.read_bytes()
    p.write_bytes(raw[:-8])
    with pytest.raises(TruncatedFileError):
        read_gauge(p)
    p.write_bytes(raw[:20])
    with pytest.raises(TruncatedFileError):
        read_gauge(p)


def test_trailing_bytes(tmp_path, gauge16):
    p = tmp_path / "g"
    write_gauge(p, gauge16)
    p.write_bytes(p.read_bytes() + b"\0")
    with pytest.raises(FieldFormatError):
        read_gauge(p)


def test_error_classes_distinct():
    classes = {BadMagicError, UnsupportedVersionError, ChecksumError, TruncatedFileError,
               WrongKindError}
    assert len(classes) == 5
    assert all(issubclass(c, FieldFormatError) for c in classes)


def test_wrong_kind(tmp_path, gauge16, psi512):
    write_fermion(tmp_path / "f", psi512)
    with pytest.raises(WrongKindError):
        read_gauge(tmp_path / "f")
    write_gauge(tmp_path / "g", gauge16)
    with pytest.raises(WrongKindError):
        read_fermion(tmp_path / "g")


def test_nonunitary_policy(tmp_path, gauge16):
    bad = GaugeField(gauge16.links * 1.001, gauge16.dims)
    write_gauge(tmp_path / "g", bad)
    with pytest.raises(NonUnitaryError):
        read_gauge(tmp_path / "g")
    with pytest.warns(RuntimeWarning):
        U = read_gauge(tmp_path / "g", on_nonunitary="warn")
    assert np.array_equal(U.links, bad.links)
    with pytest.raises(ValueError):
        read_gauge(tmp_path / "g", on_nonunitary="ignore")


@pytest.mark.parametrize("which", ["gauge", "fermion"])
def test_channel_split(tmp_path, which, gauge16, psi512):
    field = gauge16 if which == "gauge" else psi512
    re_p, im_p = export_channel_split(field, tmp_path / "x")
    canonical = payload_bytes(field)
    for p in (re_p, im_p):
        assert read_header(p).payload_bytes * 2 == len(canonical)
    _, joined = recombine_channels(re_p, im_p)
    assert joined == canonical
    back = read_channel_split(tmp_path / "x")
    arr = back.links if which == "gauge" else back.psi
    assert np.array_equal(arr, gauge16.links if which == "gauge" else psi512.psi)


def test_channel_split_real_field(tmp_path):
    d = LatticeDims(2, 2)
    real = FermionField(np.arange(d.volume * 12, dtype=float).reshape(d.volume, 4, 3), d)
    _, im_p = export_channel_split(real, tmp_path / "r")
    payload = Path(im_p).read_bytes()[HEADER_BYTES:]
    assert payload == bytes(len(payload))


def test_recombine_rejects_swapped(tmp_path, gauge16):
    re_p, im_p = export_channel_split(gauge16, tmp_path / "x")
    with pytest.raises(FieldFormatError):
        recombine_channels(im_p, re_p)


def test_generate_unit_feeds_free_field(rng):
    d = LatticeDims(2, 4)
    U = generate("unit", d)
    spinor = rng.standard_normal((4, 3)) + 0j
    psi = FermionField(np.broadcast_to(spinor, (d.volume, 4, 3)), d)
    assert np.max(np.abs(apply_D(U, psi, 0.1).psi - 1.8 * psi.psi)) <= 1e-14


def test_generate_deterministic(tmp_path):
    d = LatticeDims(2, 4)
    write_gauge(tmp_path / "a", generate("random", d, seed=5))
    write_gauge(tmp_path / "b", generate("random", d, seed=5))
    write_gauge(tmp_path / "c", generate("random", d, seed=6))
    sums = [read_header(tmp_path / n).checksum for n in "abc"]
    assert sums[0] == sums[1] != sums[2]
    read_gauge(tmp_path / "a")  # passes unitarity validation


def test_generate_unknown_kind():
    with pytest.raises(ValueError):
        generate("hot", LatticeDims(2, 2))


def test_shipped_fixture():
    assert read_header(FIXTURE).checksum == FIXTURE_CHECKSUM
    U = read_gauge(FIXTURE)
    assert np.array_equal(U.links, generate("random", LatticeDims(2, 2), seed=7).links)
    assert checksum(payload_bytes(U)) == FIXTURE_CHECKSUM


def test_documented_example_bytes(tmp_path):
    from wilson_cg.cg import make_point_source
    psi = make_point_source(LatticeDims(2, 2))
    psi.psi[0, 0, 1] = 0.5 - 2j
    write_fermion(tmp_path / "f.bin", psi)
    raw = (tmp_path / "f.bin").read_bytes()
    assert len(raw) == 3128
    assert raw[:8] == b"WILSONCG"
    assert raw[40:48] == bytes.fromhex("000c000000000000")
    assert raw[48:56] == bytes.fromhex("bf77f7737cdeeb20")
    assert raw[56:88] == bytes.fromhex(
        "000000000000f03f" "0000000000000000" "000000000000e03f" "00000000000000c0")

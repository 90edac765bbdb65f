import numpy as np
import pytest

from conftest import random_quartet
from ryseri.bench import LatticeSpec, generate_benchmark, run_class, validate_class, validate_quartets
from ryseri.compress import MalformedChunksError, decompress
from ryseri.kernel import compute_quartet
from ryseri.records import (
    RECORD_BYTES,
    MalformedRecordError,
    QuartetRecord,
    iter_stream,
    quartet_stream_bytes,
    read_records,
    write_records,
    write_stream,
)
from ryseri.rys import prepare_quartet_rys
from ryseri.shells import BOHR_PER_ANGSTROM, QuartetClass


def test_record_round_trip(rng):
    q = random_quartet(QuartetClass.parse("dp|fs"), rng)
    rys = prepare_quartet_rys(q)
    rec = QuartetRecord.from_quartet(q, rys)
    blob = rec.to_bytes()
    assert len(blob) == RECORD_BYTES
    back = QuartetRecord.from_bytes(blob)
    np.testing.assert_array_equal(back.centers, q.centers.astype(np.float32))
    np.testing.assert_array_equal(back.exponents, q.exponents.astype(np.float32))
    nodes = back.rys_nodes(back.quartet(q.qclass))
    np.testing.assert_array_equal(nodes.roots, rys.roots.astype(np.float32))
    assert nodes.n_rys == rys.n_rys


def test_record_layout():
    centers = np.arange(12, dtype=float).reshape(4, 3)
    rec = QuartetRecord(centers, np.array([1.0, 2.0, 3.0, 4.0]), np.array([0.25]), np.array([0.5]))
    v = np.frombuffer(rec.to_bytes(), "<f4")
    np.testing.assert_array_equal(v[:12], np.arange(12))
    np.testing.assert_array_equal(v[12:16], [1, 2, 3, 4])
    np.testing.assert_array_equal(v[16:18], [0.25, 0.5])
    assert not np.any(v[18:])


def test_geometry_only_record(rng):
    q = random_quartet((1, 0, 0, 0), rng)
    back = QuartetRecord.from_bytes(QuartetRecord.from_quartet(q).to_bytes())
    assert back.roots is None and back.rys_nodes(back.quartet(q.qclass)) is None


def test_malformed_records(tmp_path, rng):
    with pytest.raises(MalformedRecordError):
        QuartetRecord.from_bytes(bytes(100))
    q = random_quartet((3, 3, 3, 3), rng)
    rec = QuartetRecord.from_quartet(q, prepare_quartet_rys(q))
    blob = bytearray(rec.to_bytes())
    blob[-4:] = np.float32(1.0).tobytes()
    with pytest.raises(MalformedRecordError):
        QuartetRecord.from_bytes(bytes(blob))
    # wrong number of nodes for the class
    with pytest.raises(MalformedRecordError):
        rec.rys_nodes(rec.quartet((0, 0, 0, 0)))
    bad = QuartetRecord(np.zeros((4, 3)), np.array([1.0, -1.0, 1.0, 1.0]))
    with pytest.raises(MalformedRecordError):
        bad.quartet((0, 0, 0, 0))
    p = tmp_path / "short.bin"
    p.write_bytes(bytes(RECORD_BYTES + 3))
    with pytest.raises(MalformedRecordError):
        read_records(p)


def test_record_file(tmp_path, rng):
    qs = [random_quartet((1, 1, 0, 0), rng) for _ in range(5)]
    p = tmp_path / "r.bin"
    assert write_records(p, (QuartetRecord.from_quartet(q) for q in qs)) == 5
    assert p.stat().st_size == 5 * RECORD_BYTES
    assert len(read_records(p)) == 5


@pytest.mark.parametrize("cls,n,size", [("ss|ss", 16, 68), ("ff|ff", 16, 4 + 313 * 64), ("pp|pp", 16, 4 + 3 * 64)])
def test_stream_sizes(cls, n, size):
    assert quartet_stream_bytes(QuartetClass.parse(cls), n) == size


def test_stream_round_trip(tmp_path, rng):
    qc = QuartetClass.parse("dd|ps")
    qs = [random_quartet(qc, rng) for _ in range(4)]
    res = run_class(qc, qs, n=12)
    assert len(res.stream) == 4 * quartet_stream_bytes(qc, 12)
    p = tmp_path / "s.bin"
    with open(p, "wb") as fh:
        write_stream(fh, iter_stream(res.stream, qc, 12))
    assert p.read_bytes() == res.stream
    for q, c in zip(qs, iter_stream(res.stream, qc, 12)):
        eris = compute_quartet(q, "single")
        assert np.all(np.abs(decompress(c) - eris.values) <= float(c.epsilon) / 2)
    with pytest.raises(MalformedChunksError):
        list(iter_stream(res.stream[:-1], qc, 12))


def test_thread_determinism(rng):
    qc = QuartetClass.parse("pp|ps")
    qs = [random_quartet(qc, rng) for _ in range(12)]
    a = run_class(qc, qs, threads=1)
    b = run_class(qc, qs, threads=4)
    assert a.stream == b.stream
    assert a.n_eris == 12 * 27
    assert a.eris_per_s_wall > 0
    with pytest.raises(ValueError):
        run_class(qc, qs, threads=0)
    with pytest.raises(ValueError):
        run_class(QuartetClass(0, 0, 0, 0), qs)


def test_supplied_rys_nodes_used(rng):
    qc = QuartetClass.parse("ds|ps")
    q = random_quartet(qc, rng)
    rys = prepare_quartet_rys(q)
    assert run_class(qc, [(q, rys)]).stream == run_class(qc, [q]).stream


def test_lattice():
    spec = LatticeSpec()
    assert spec.n_sites == 32
    sites = spec.sites()
    assert sites.shape == (32, 3)
    assert sites[1] == pytest.approx([0, 0, BOHR_PER_ANGSTROM])
    assert np.max(sites[:, 0]) == pytest.approx(3 * BOHR_PER_ANGSTROM)
    bench = generate_benchmark(spec, "pp|ss")
    assert bench.n_quartets == 32**4
    q = bench.quartet((0, 1, 2, 31))
    assert np.all(q.exponents == 1.5)
    assert np.allclose(q.centers[3], sites[31])
    with pytest.raises(ValueError):
        LatticeSpec(dims=(0, 1, 1))
    with pytest.raises(ValueError):
        generate_benchmark(LatticeSpec(shells=(0, 1)), "dd|ss")


def test_small_lattice_iteration():
    bench = generate_benchmark(LatticeSpec(dims=(2, 1, 1)), "ss|ss")
    assert len(list(bench)) == 16 == bench.n_quartets
    s = bench.sample(7, np.random.default_rng(1))
    assert len(s) == 7


def test_validation_report():
    spec = LatticeSpec(dims=(2, 2, 2))
    rep = validate_class("pp|pp", sample_size=10, n=16, spec=spec, seed=3)
    assert rep.n_quartets == 10
    assert rep.bound_holds
    assert 0 < rep.max_abs_error < 1e-4
    reps = validate_quartets(
        "dp|ps", generate_benchmark(spec, "dp|ps").sample(5, np.random.default_rng(0)), widths=(12, 16)
    )
    assert reps[12].max_abs_error > reps[16].max_abs_error
    # a lone [ss|ss] value is b_max itself and maps to the top code exactly
    ss = validate_quartets("ss|ss", generate_benchmark(spec, "ss|ss").sample(5, np.random.default_rng(0)), (12,))
    assert ss[12].max_bound_ratio < 1e-2

"""MatrixMarket I/O: bit-exact round trips and cross-reads against scipy."""

import numpy as np
import pytest
import scipy.io
import scipy.sparse

from spamm.matrixmarket import read_matrix_market, write_matrix_market
from spamm.quadtree import from_dense


def _tricky_matrix():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((7, 7))
    m[0, 0] = 0.1
    m[1, 2] = -1.0 / 3.0
    m[2, 1] = np.pi * 1e300
    m[3, 4] = 5e-324  # smallest denormal
    m[4, 3] = -2.2250738585072014e-308  # smallest normal
    m[5, 5] = 0.0
    return m


@pytest.mark.parametrize("fmt", ["array", "coordinate"])
def test_roundtrip_bit_exact(fmt, tmp_path):
    m = _tricky_matrix()
    path = tmp_path / f"m.{fmt}.mtx"
    write_matrix_market(m, path, fmt=fmt)
    back = read_matrix_market(path)
    assert back.tobytes() == m.tobytes()


@pytest.mark.parametrize("fmt", ["array", "coordinate"])
def test_roundtrip_nonsquare_and_quadtree(fmt, tmp_path):
    rng = np.random.default_rng(1)
    rect = rng.standard_normal((3, 5))
    write_matrix_market(rect, tmp_path / "rect.mtx", fmt=fmt)
    assert read_matrix_market(tmp_path / "rect.mtx").tobytes() == rect.tobytes()
    square = rng.standard_normal((6, 6))
    write_matrix_market(from_dense(square), tmp_path / "tree.mtx", fmt=fmt)
    assert read_matrix_market(tmp_path / "tree.mtx").tobytes() == square.tobytes()


def test_headers_and_zero_matrix(tmp_path):
    write_matrix_market(np.zeros((3, 3)), tmp_path / "za.mtx", fmt="array")
    lines = (tmp_path / "za.mtx").read_text().splitlines()
    assert lines[0] == "%%MatrixMarket matrix array real general"
    assert lines[1] == "3 3"
    assert len(lines) == 2 + 9

    write_matrix_market(np.zeros((3, 3)), tmp_path / "zc.mtx", fmt="coordinate")
    lines = (tmp_path / "zc.mtx").read_text().splitlines()
    assert lines[0] == "%%MatrixMarket matrix coordinate real general"
    assert lines[1] == "3 3 0"
    assert len(lines) == 2


@pytest.mark.parametrize("fmt", ["array", "coordinate"])
def test_scipy_reads_our_files(fmt, tmp_path):
    m = _tricky_matrix()
    path = tmp_path / "ours.mtx"
    write_matrix_market(m, path, fmt=fmt)
    got = scipy.io.mmread(path)
    if scipy.sparse.issparse(got):
        got = got.toarray()
    assert np.array_equal(np.asarray(got), m)


def test_we_read_scipy_files(tmp_path):
    rng = np.random.default_rng(2)
    dense = rng.standard_normal((5, 4))
    scipy.io.mmwrite(tmp_path / "sd.mtx", dense)
    assert np.allclose(read_matrix_market(tmp_path / "sd.mtx"), dense,
                       rtol=0, atol=0)

    sparse = scipy.sparse.random(8, 8, density=0.2, random_state=3)
    scipy.io.mmwrite(tmp_path / "ss.mtx", sparse)
    assert np.array_equal(read_matrix_market(tmp_path / "ss.mtx"),
                          sparse.toarray())

    sym = dense[:4, :4] + dense[:4, :4].T
    scipy.io.mmwrite(tmp_path / "sym.mtx", sym, symmetry="symmetric")
    assert np.array_equal(read_matrix_market(tmp_path / "sym.mtx"), sym)


def test_symmetric_coordinate_mirrors_entries(tmp_path):
    path = tmp_path / "sym.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                    "3 3 2\n"
                    "2 1 5.0\n"
                    "3 3 7.0\n")
    got = read_matrix_market(path)
    expect = np.zeros((3, 3))
    expect[1, 0] = expect[0, 1] = 5.0
    expect[2, 2] = 7.0
    assert np.array_equal(got, expect)


def test_read_rejects_malformed(tmp_path):
    bad = tmp_path / "bad.mtx"
    bad.write_text("not a matrix market file\n1 1\n0\n")
    with pytest.raises(ValueError):
        read_matrix_market(bad)

    complex_hdr = tmp_path / "cx.mtx"
    complex_hdr.write_text("%%MatrixMarket matrix array complex general\n"
                           "1 1\n1.0 0.0\n")
    with pytest.raises(ValueError):
        read_matrix_market(complex_hdr)

    short = tmp_path / "short.mtx"
    short.write_text("%%MatrixMarket matrix array real general\n2 2\n1.0\n")
    with pytest.raises(ValueError):
        read_matrix_market(short)

    with pytest.raises(ValueError):
        write_matrix_market(np.eye(2), tmp_path / "x.mtx", fmt="harwell")
    with pytest.raises(ValueError):
        write_matrix_market(np.zeros(3), tmp_path / "x.mtx")

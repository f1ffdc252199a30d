"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the library's own code paths: the
triple-loop multiply is pure Python over lists, the reference projector
comes from a dense eigensolver, and the plain-array purification recurrence
uses numpy matmul directly.  Agreement between library output and these
implementations is what the tests mean by "correct".
"""

import numpy as np
import pytest

from spamm.generators import ModelHamiltonian, gen_model_hamiltonian
from spamm.purification import SpammMode, purify


def oracle_matmul(a, b):
    """Triple-loop dense multiply, pure Python over list rows."""
    n, m = len(a), len(b[0])
    inner = len(b)
    out = [[0.0] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for k in range(inner):
            aik = ai[k]
            if aik == 0.0:
                continue
            bk = b[k]
            for j in range(m):
                oi[j] += aik * bk[j]
    return np.array(out)


def dense_tc2(fd, n_occ, sweeps=50):
    """Plain-array trace-correcting purification: Gershgorin linear map,
    trace-threshold branch, one squaring per sweep, early exit once the
    idempotency gap reaches the machine floor.  Used as a fast fixture for
    density matrices at sizes where the tree driver would be wasteful."""
    n = fd.shape[0]
    offdiag = np.abs(fd).sum(axis=1) - np.abs(np.diag(fd))
    lo = float((np.diag(fd) - offdiag).min())
    hi = float((np.diag(fd) + offdiag).max())
    if hi <= lo:
        return np.eye(n) * 0.5
    x = (hi * np.eye(n) - fd) / (hi - lo)
    floor = 16.0 * np.finfo(x.dtype).eps * n
    for _ in range(sweeps):
        x2 = x @ x
        if np.linalg.norm(x2 - x, "fro") <= floor:
            break
        x = x2 if np.trace(x) >= n_occ else 2.0 * x - x2
    return x


def eig_projector(fd, n_occ):
    """Spectral projector onto the n_occ lowest eigenvectors."""
    _, vecs = np.linalg.eigh(fd)
    occ = vecs[:, :n_occ]
    return occ @ occ.T


@pytest.fixture(scope="session")
def gapped256():
    """The workhorse model: gapped chain at n=256 with its dense form,
    eigenprojector, and exact-algebra purification shared across tests."""
    n = 256
    f = gen_model_hamiltonian(ModelHamiltonian(n=n, kind="gapped"))
    fd = f.to_dense()
    exact = purify(f, n // 2, SpammMode(0.0))
    return {
        "n": n,
        "n_occ": n // 2,
        "tree": f,
        "dense": fd,
        "projector": eig_projector(fd, n // 2),
        "exact": exact,
    }


@pytest.fixture(scope="session")
def gapless256():
    n = 256
    f = gen_model_hamiltonian(ModelHamiltonian(n=n, kind="gapless"))
    exact = purify(f, n // 2, SpammMode(0.0))
    return {"n": n, "n_occ": n // 2, "tree": f, "exact": exact}

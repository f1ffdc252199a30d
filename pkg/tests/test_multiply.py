"""Kernel tests: norm-product pruning, exact product, accounting, box logs.

The heavyweight check here re-implements the pruned recursion as a flat
depth-first script (no shared traversal code with the library) and demands
identical leaf-multiply counts and an identical pruned-box set on the
n = 512 exponential-decay pair.
"""

import math

import numpy as np
import pytest

from spamm.generators import gen_exponential
from spamm.multiply import (
    PrunedBox,
    SpammConfig,
    exact_multiply,
    multiply_error,
    norm_submultiplicativity_check,
    read_box_log,
    spamm,
    write_box_log,
)
from spamm.quadtree import (
    DimensionMismatchError,
    EmptyNode,
    from_dense,
    identity,
    node_norm,
    to_dense,
)

from conftest import oracle_matmul


# ----------------------------------------------------------- basic contracts

def test_identity_times_b_exact():
    rng = np.random.default_rng(0)
    bd = rng.standard_normal((20, 20))
    c, stats = spamm(identity(20), from_dense(bd), SpammConfig(tau=0.0))
    assert np.array_equal(to_dense(c), bd)
    assert stats.omitted_budget == 0.0


def test_tau_above_total_norm_prunes_root():
    rng = np.random.default_rng(1)
    a = from_dense(rng.standard_normal((16, 16)))
    b = from_dense(rng.standard_normal((16, 16)))
    budget = node_norm(a) * node_norm(b)
    c, stats = spamm(a, b, SpammConfig(tau=budget * 1.5, collect_boxes=True))
    assert isinstance(c.root, EmptyNode)
    assert stats.leaf_matmuls == 0
    assert stats.omitted_budget == budget
    assert stats.boxes == [PrunedBox(0, 0, 0, a.padded_dim, 0)]


def test_full_enumeration_counts_n8():
    rng = np.random.default_rng(2)
    a = from_dense(rng.standard_normal((8, 8)), leaf_size=4)
    b = from_dense(rng.standard_normal((8, 8)), leaf_size=4)
    _, stats = spamm(a, b, SpammConfig(tau=0.0))
    assert stats.leaf_matmuls == 8  # (8/4)**3


def test_exact_vs_triple_loop_oracle_64():
    rng = np.random.default_rng(3)
    ad = rng.standard_normal((64, 64))
    bd = rng.standard_normal((64, 64))
    got = to_dense(exact_multiply(from_dense(ad), from_dense(bd)))
    ref = oracle_matmul(ad, bd)
    err = np.linalg.norm(got - ref) / np.linalg.norm(ref)
    assert err <= 1e-13


def test_zero_operand_gives_empty():
    rng = np.random.default_rng(4)
    z = from_dense(np.zeros((24, 24)))
    m = from_dense(rng.standard_normal((24, 24)))
    c = exact_multiply(z, m)
    assert isinstance(c.root, EmptyNode)
    c2, stats = spamm(m, z, SpammConfig(tau=0.0))
    assert isinstance(c2.root, EmptyNode)
    assert stats.leaf_matmuls == 0
    assert stats.pruned_calls == 1  # the root Empty skip
    assert stats.empty_skip_volume == m.padded_dim ** 3


def test_permutation_times_transpose_is_identity():
    rng = np.random.default_rng(5)
    perm = rng.permutation(32)
    p = np.zeros((32, 32))
    p[np.arange(32), perm] = 1.0
    c = exact_multiply(from_dense(p), from_dense(p.T))
    assert np.array_equal(to_dense(c), np.eye(32))


# ---------------------------------------------- independent flat recursion

def _flat_reference(pa, pb, leaf, tau):
    """Straight-line re-implementation of the pruned product recursion.

    Works directly on the padded dense operands; reproduces the library's
    norm arithmetic (same summation order) so strict-< pruning decisions
    are bit-for-bit comparable, but shares no traversal code with it.
    """
    n = pa.shape[0]
    depth = 0
    while leaf << depth < n:
        depth += 1

    def tiers(padded):
        nb = n // leaf
        blocks = padded.reshape(nb, leaf, nb, leaf).swapaxes(1, 2)
        acc = np.zeros((nb, nb))
        for r in range(leaf):
            for c in range(leaf):
                e = blocks[:, :, r, c]
                acc += e * e
        occ = (blocks != 0).any(axis=(2, 3))
        nsq = [None] * (depth + 1)
        occs = [None] * (depth + 1)
        nsq[depth], occs[depth] = acc, occ
        for k in range(depth - 1, -1, -1):
            f = nsq[k + 1]
            nsq[k] = ((f[0::2, 0::2] + f[0::2, 1::2]) + f[1::2, 0::2]) + f[1::2, 1::2]
            o = occs[k + 1]
            occs[k] = o[0::2, 0::2] | o[0::2, 1::2] | o[1::2, 0::2] | o[1::2, 1::2]
        return nsq, occs

    nsq_a, occ_a = tiers(pa)
    nsq_b, occ_b = tiers(pb)
    mm = 0
    budget = 0.0
    boxes = set()
    stack = [(0, 0, 0, 0)]
    while stack:
        tier, i, j, k = stack.pop()
        if not (occ_a[tier][i, k] and occ_b[tier][k, j]):
            continue
        prod = math.sqrt(nsq_a[tier][i, k]) * math.sqrt(nsq_b[tier][k, j])
        if prod < tau:
            edge = n >> tier
            boxes.add((tier, i * edge, j * edge, k * edge, edge))
            budget += prod
            continue
        if tier == depth:
            mm += 1
            continue
        for di in (0, 1):
            for dj in (0, 1):
                for dk in (0, 1):
                    stack.append((tier + 1, 2 * i + di, 2 * j + dj, 2 * k + dk))
    return mm, boxes, budget


def test_flat_recursion_agrees_on_decay_pair():
    a = gen_exponential(512, 1.0)
    b = gen_exponential(512, 2.0)
    c, stats = spamm(a, b, SpammConfig(tau=1e-8, collect_boxes=True))
    mm, boxes, budget = _flat_reference(np.asarray(a._padded),
                                        np.asarray(b._padded), 4, 1e-8)
    assert stats.leaf_matmuls == mm
    got = {(bx.tier, bx.i_lo, bx.j_lo, bx.k_lo, bx.edge) for bx in stats.boxes}
    assert got == boxes
    assert math.isclose(stats.omitted_budget, budget, rel_tol=1e-12)
    assert stats.covered_volume(4) == a.padded_dim ** 3


# -------------------------------------------------------- error accounting

def test_multiply_error_tau0():
    rng = np.random.default_rng(6)
    a = from_dense(rng.standard_normal((48, 48)))
    b = from_dense(rng.standard_normal((48, 48)))
    abs_err, budget = multiply_error(a, b, SpammConfig(tau=0.0))
    assert budget == 0.0
    assert abs_err <= 1e-13 * node_norm(a) * node_norm(b)


def test_error_bound_random_decay_pairs():
    """abs_err <= omitted_budget + roundoff across random decay pairs."""
    rng = np.random.default_rng(7)
    taus = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12]
    for _ in range(100):
        n = int(rng.integers(8, 49))
        alpha = float(rng.uniform(0.2, 2.5))
        idx = np.arange(n)
        decay = np.exp(-alpha * np.abs(idx[:, None] - idx[None, :]))
        a = from_dense(decay * rng.standard_normal((n, n)))
        b = from_dense(decay * rng.standard_normal((n, n)))
        scale_ab = node_norm(a) * node_norm(b)
        exact = to_dense(exact_multiply(a, b))
        for tau in taus:
            approx, stats = spamm(a, b, SpammConfig(tau=tau))
            abs_err = float(np.linalg.norm(to_dense(approx) - exact))
            assert abs_err <= stats.omitted_budget + 1e-12 * scale_ab


def test_error_sweep_decreases_with_tau():
    a = gen_exponential(512, 1.0)
    b = gen_exponential(512, 2.0)
    exact = to_dense(exact_multiply(a, b))
    errs = {}
    for tau in (1e-2, 1e-4, 1e-6, 1e-8, 1e-10):
        approx, stats = spamm(a, b, SpammConfig(tau=tau))
        errs[tau] = float(np.linalg.norm(to_dense(approx) - exact))
        assert errs[tau] <= stats.omitted_budget + 1e-12
    assert errs[1e-10] < errs[1e-2]


def test_monotone_work_in_tau():
    a = gen_exponential(256, 0.7)
    b = gen_exponential(256, 1.3)
    taus = [0.0, 1e-12, 1e-9, 1e-6, 1e-3, 1e-1]
    counts = [spamm(a, b, SpammConfig(tau=t))[1].leaf_matmuls for t in taus]
    for lo, hi in zip(counts[1:], counts[:-1]):
        assert lo <= hi


def test_determinism_bit_identical():
    a = gen_exponential(256, 0.9)
    b = gen_exponential(256, 1.1)
    cfg = SpammConfig(tau=1e-7, collect_boxes=True)
    c1, s1 = spamm(a, b, cfg)
    c2, s2 = spamm(a, b, cfg)
    assert to_dense(c1).tobytes() == to_dense(c2).tobytes()
    assert s1 == s2


def test_tiling_with_empty_skips():
    # identity has off-diagonal Empty leaves: tau=0 exercises the skip path
    i64 = identity(64)
    _, stats = spamm(i64, i64, SpammConfig(tau=0.0))
    assert stats.leaf_matmuls == 16
    assert stats.omitted_budget == 0.0
    assert stats.pruned_volume == 0
    assert stats.empty_skip_volume > 0
    assert stats.covered_volume(4) == 64 ** 3


def test_tier_tau_decay_is_more_conservative():
    a = gen_exponential(256, 0.7)
    b = gen_exponential(256, 1.3)
    flat = spamm(a, b, SpammConfig(tau=1e-6))[1]
    decayed = spamm(a, b, SpammConfig(tau=1e-6, tier_tau_decay=True))[1]
    assert decayed.leaf_matmuls >= flat.leaf_matmuls
    assert decayed.omitted_budget <= flat.omitted_budget
    assert decayed.covered_volume(4) == a.padded_dim ** 3


# ------------------------------------------------------- norm bound checks

def test_submultiplicativity_identity():
    assert norm_submultiplicativity_check(identity(16), identity(16))


def test_submultiplicativity_random_pairs():
    rng = np.random.default_rng(8)
    for _ in range(100):
        a = from_dense(rng.standard_normal((32, 32)))
        b = from_dense(rng.standard_normal((32, 32)))
        assert norm_submultiplicativity_check(a, b)


def test_submultiplicativity_rank1_equality():
    rng = np.random.default_rng(9)
    u = rng.standard_normal(32)
    v = rng.standard_normal(32)
    w = rng.standard_normal(32)
    u, v, w = (x / np.linalg.norm(x) for x in (u, v, w))
    a = from_dense(np.outer(u, v))
    b = from_dense(np.outer(v, w))
    assert norm_submultiplicativity_check(a, b)
    prod_norm = node_norm(exact_multiply(a, b))
    bound = node_norm(a) * node_norm(b)
    assert abs(prod_norm - bound) <= 1e-13


# --------------------------------------------------------------- box logs

def _interleave3_ref(i, j, k):
    key = 0
    for bit in range(21):
        key |= (((i >> bit) & 1) << (3 * bit + 2)
                | ((j >> bit) & 1) << (3 * bit + 1)
                | ((k >> bit) & 1) << (3 * bit))
    return key


def test_box_log_roundtrip_and_order(tmp_path):
    a = gen_exponential(128, 1.0)
    b = gen_exponential(128, 2.0)
    _, stats = spamm(a, b, SpammConfig(tau=1e-6, collect_boxes=True))
    assert stats.boxes
    path = tmp_path / "boxes.log"
    write_box_log(stats.boxes, path, a.padded_dim)
    back = read_box_log(path)
    assert sorted(map(repr, back)) == sorted(map(repr, stats.boxes))
    keys = [_interleave3_ref(bx.i_lo, bx.j_lo, bx.k_lo) for bx in back]
    assert keys == sorted(keys)
    for line in path.read_text().splitlines():
        tier, i_lo, j_lo, k_lo, edge = map(int, line.split())
        assert edge == a.padded_dim >> tier
        assert i_lo % edge == j_lo % edge == k_lo % edge == 0


# -------------------------------------------------------------- validation

def test_config_rejects_bad_tau():
    with pytest.raises(ValueError):
        SpammConfig(tau=-1e-9)
    with pytest.raises(ValueError):
        SpammConfig(tau=float("nan"))
    with pytest.raises(ValueError):
        SpammConfig(tau=float("inf"))


def test_dimension_mismatch_rejected():
    rng = np.random.default_rng(10)
    a = from_dense(rng.standard_normal((16, 16)))
    b = from_dense(rng.standard_normal((32, 32)))
    with pytest.raises(DimensionMismatchError):
        spamm(a, b, SpammConfig())
    c = from_dense(rng.standard_normal((16, 16)), leaf_size=2)
    with pytest.raises(DimensionMismatchError):
        spamm(a, c, SpammConfig())

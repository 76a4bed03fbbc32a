import numpy as np
import pytest

from cachesieve import build_base, classify_prime, init_circles, simple_sieve, validate_circle_invariants, validate_params
from cachesieve.base import bucket_base
from cachesieve.wheel import first_offset


@pytest.mark.parametrize(
    "p, l, kind, k",
    [
        (37, 4, "large", 2),
        (257, 10, "dense", 3),
        (67, 10, "dense", 15),
        (61, 10, "small", 0),
        (3, 10, "small", 0),
        (2039, 10, "large", 1),
        (1021, 10, "dense", 1),
        (127, 12, "wheel", 0),
        (257, 12, "dense", 15),
    ],
)
def test_classify(p, l, kind, k):
    assert classify_prime(p, l) == (kind, k)


def test_base_example():
    params = validate_params(10, 2048, 4)
    assert params.sqrt_v == 2049
    base = build_base(params)
    assert base.base_primes.tolist() == simple_sieve(2049)[1:].tolist()
    assert base.base_primes[-1] == 2039
    assert base.K == 1


def test_classes_partition_base():
    params = validate_params(12, 3 << 14, 8)
    base = build_base(params)
    seg = params.seg_bits
    parts = [base.class_primes("small"), base.class_primes("wheel")]
    parts += [base.class_primes("dense", k) for k in range(1, 16)]
    parts += [base.class_primes("large", k) for k in range(1, base.K + 1)]
    together = np.sort(np.concatenate(parts).astype(np.int64))
    assert together.tolist() == base.base_primes.tolist()
    assert (base.class_primes("wheel") <= seg // 16).all()
    for k in range(1, 16):
        ps = base.class_primes("dense", k).astype(np.int64)
        assert (seg // ps == k).all()
    for k in range(1, base.K + 1):
        ps = base.class_primes("large", k).astype(np.int64)
        assert (ps >> params.l == k).all()


def test_figure_scale_geometry():
    params = validate_params(4, 2048, 4, test_mode=True)
    base = build_base(params)
    assert params.sqrt_v == 256
    assert base.K == 251 // 16 == 15
    c = base.circles
    assert len(c.bucket) == (base.K + 1) * (base.K + 2) // 2
    assert validate_circle_invariants(c, params, 0, base)


def test_init_circles_example():
    params = validate_params(4, 2, 50, test_mode=True)
    assert first_offset(37, 4, 2) == 23
    c = init_circles(params, np.array([37]), K=2)
    assert c.bucket_pairs(2, 1) == [(37, 7)]
    assert c.bucket_pairs(2, 0) == [] and c.bucket_pairs(2, 2) == []
    # the pair's number, 2*((2 + 0 + 1 - 0)*16 + 7) + 1
    assert 2 * ((2 + 1) * 16 + 7) + 1 == 111 == 3 * 37
    assert validate_circle_invariants(c, params, 0)


def test_init_circles_f_zero_edge():
    # f = 0 is not a valid run, but the offset construction still holds
    assert first_offset(37, 4, 0) == 18
    assert divmod(18, 16) == (1, 2)
    assert 2 * 18 + 1 == 37


def test_empty_circle_representation():
    params = validate_params(10, 5000, 2)
    # primes only in circle 2; circle 1 has none
    c = init_circles(params, np.array([2053, 2063]), K=2)
    b1 = c.bucket[bucket_base(1) : bucket_base(1) + 2]
    assert b1[0] == b1[1]
    assert c.cend[1] == c.cend[0]
    assert validate_circle_invariants(c, params, 0)


def test_pair_array_is_permutation_of_large_base():
    params = validate_params(10, 1 << 20, 8)
    base = build_base(params)
    c = base.circles
    large = base.base_primes[base.base_primes > params.seg_bits]
    stored = np.sort(c.primes[int(c.cend[0]) :].astype(np.int64))
    assert stored.tolist() == large.tolist()
    for k in range(1, base.K + 1):
        cs, ce = c.cstart(k), int(c.cend[k])
        for i in range(cs, ce):
            p, q = int(c.primes[i]), int(c.offsets[i])
            qfirst = first_offset(p, params.l, params.f)
            assert q == qfirst % params.seg_bits
        # starts ascend within the circle and the broken index is k
        starts = c.bucket[bucket_base(k) : bucket_base(k) + k + 1]
        assert (np.diff(starts) >= 0).all() and starts[0] == cs
        assert c.broken[k] == k and c.current[k] == 0


def test_alloc_limit():
    from cachesieve import SieveError

    with pytest.raises(SieveError) as exc:
        build_base(validate_params(10, 1 << 20, 8), max_pairs=10)
    assert exc.value.code == "ALLOC_LIMIT"

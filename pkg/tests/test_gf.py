"""Linear algebra over F_p, cross-checked against exhaustive span enumeration.

The oracle here never row-reduces: spans are enumerated as raw linear
combinations and dimensions recovered as base-p logarithms of their sizes.
"""

import itertools
import random

import pytest

from selmer_lab import gf
from selmer_lab.errors import AmbientMismatch, LengthMismatch


def enumerate_span(p, rows, n):
    """All linear combinations of the rows, as a set of tuples."""
    vecs = set()
    for coeffs in itertools.product(range(p), repeat=len(rows)):
        v = tuple(
            sum(c * row[i] for c, row in zip(coeffs, rows)) % p for i in range(n)
        )
        vecs.add(v)
    if not rows:
        vecs.add((0,) * n)
    return vecs


def span_dim(p, rows, n):
    size = len(enumerate_span(p, rows, n))
    d = 0
    while p ** d < size:
        d += 1
    assert p ** d == size
    return d


def random_rows(rng, p, k, n):
    return [[rng.randrange(p) for _ in range(n)] for _ in range(k)]


def test_rref_identity_is_full_space():
    rows = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    s = gf.rref(5, rows)
    assert s == gf.full_space(5, 3)
    assert s.dim == 3


def test_rref_collapses_dependent_rows():
    s = gf.rref(5, [(1, 2), (2, 4)])
    assert s.dim == 1
    assert s.rows == ((1, 2),)


def test_rref_dim_matches_span_enumeration():
    rng = random.Random(2024)
    for _ in range(50):
        rows = random_rows(rng, 7, 4, 6)
        assert gf.rref(7, rows).dim == span_dim(7, rows, 6)


def test_rref_idempotent_and_order_independent():
    rng = random.Random(7)
    for _ in range(25):
        rows = random_rows(rng, 5, 4, 5)
        s = gf.rref(5, rows)
        assert gf.rref(5, s.rows, 5) == s
        shuffled = rows[:]
        rng.shuffle(shuffled)
        assert gf.rref(5, shuffled, 5) == s


def test_rref_canonical_invariants():
    rng = random.Random(11)
    for _ in range(30):
        s = gf.rref(3, random_rows(rng, 3, 5, 6))
        pivots = s.pivot_columns()
        assert list(pivots) == sorted(set(pivots))
        for row, pc in zip(s.rows, pivots):
            assert row[pc] == 1
            for other in s.rows:
                if other is not row:
                    assert other[pc] == 0


def test_rref_rejects_mixed_lengths():
    with pytest.raises(LengthMismatch):
        gf.rref(3, [[1, 0], [1, 0, 0]])
    with pytest.raises(LengthMismatch):
        gf.rref(3, [])


def test_kernel_of_zero_map_is_everything():
    assert gf.kernel(3, [[0, 0], [0, 0]]) == gf.full_space(3, 2)


def test_kernel_of_identity_is_zero():
    eye = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert gf.kernel(5, eye).dim == 0


def test_kernel_agrees_with_direct_evaluation():
    rng = random.Random(5)
    for _ in range(20):
        matrix = random_rows(rng, 3, 3, 5)
        ker = gf.kernel(3, matrix)
        expected = {
            v
            for v in itertools.product(range(3), repeat=5)
            if all(sum(a * b for a, b in zip(row, v)) % 3 == 0 for row in matrix)
        }
        assert enumerate_span(3, ker.rows, 5) == expected


def test_rank_nullity():
    rng = random.Random(13)
    for _ in range(40):
        k, n = rng.randrange(1, 5), rng.randrange(1, 7)
        matrix = random_rows(rng, 5, k, n)
        assert gf.kernel(5, matrix).dim + gf.rref(5, matrix).dim == n


def test_intersect_coordinate_subspaces():
    e = gf.full_space(3, 3).rows
    a = gf.rref(3, [e[0], e[1]])
    b = gf.rref(3, [e[1], e[2]])
    assert gf.intersect(a, b).rows == (e[1],)


def test_intersect_idempotent():
    rng = random.Random(3)
    for _ in range(20):
        a = gf.rref(5, random_rows(rng, 5, 3, 4))
        assert gf.intersect(a, a) == a


def test_intersect_matches_exhaustive_membership():
    rng = random.Random(17)
    for _ in range(15):
        a_rows = random_rows(rng, 5, 3, 6)
        b_rows = random_rows(rng, 5, 3, 6)
        a = gf.rref(5, a_rows)
        b = gf.rref(5, b_rows)
        result = gf.intersect(a, b)
        span_a = enumerate_span(5, a_rows, 6)
        span_b = enumerate_span(5, b_rows, 6)
        assert enumerate_span(5, result.rows, 6) == span_a & span_b


def test_dimension_formula_on_random_pairs():
    rng = random.Random(23)
    for _ in range(60):
        a = gf.rref(3, random_rows(rng, 3, rng.randrange(1, 5), 6))
        b = gf.rref(3, random_rows(rng, 3, rng.randrange(1, 5), 6))
        inter = gf.intersect(a, b)
        total = gf.subspace_sum(a, b)
        assert inter.dim + total.dim == a.dim + b.dim


def test_sum_of_coordinate_lines():
    e = gf.full_space(3, 3).rows
    assert gf.subspace_sum(gf.rref(3, [e[0]]), gf.rref(3, [e[1]])).rows == (e[0], e[1])


def test_contains_full_space():
    rng = random.Random(29)
    full = gf.full_space(7, 4)
    for _ in range(20):
        assert gf.contains(full, [rng.randrange(7) for _ in range(4)])


def test_contains_agrees_with_span():
    rng = random.Random(31)
    for _ in range(20):
        rows = random_rows(rng, 3, 2, 4)
        s = gf.rref(3, rows)
        span = enumerate_span(3, rows, 4)
        for v in itertools.product(range(3), repeat=4):
            assert gf.contains(s, v) == (v in span)


def test_solve_substitutes_back():
    rng = random.Random(37)
    for _ in range(100):
        k, n = rng.randrange(1, 5), rng.randrange(1, 6)
        matrix = random_rows(rng, 7, k, n)
        x_true = [rng.randrange(7) for _ in range(n)]
        rhs = [sum(a * b for a, b in zip(row, x_true)) % 7 for row in matrix]
        x = gf.solve(7, matrix, rhs)
        assert x is not None
        assert [sum(a * b for a, b in zip(row, x)) % 7 for row in matrix] == rhs


def test_solve_detects_inconsistency():
    assert gf.solve(3, [[1, 0], [1, 0]], [1, 2]) is None


def test_ambient_mismatch_raised():
    a = gf.full_space(3, 2)
    b = gf.full_space(3, 3)
    with pytest.raises(AmbientMismatch):
        gf.intersect(a, b)
    with pytest.raises(AmbientMismatch):
        gf.subspace_sum(a, b)
    with pytest.raises(AmbientMismatch):
        gf.contains(a, (1, 0, 0))


@pytest.mark.parametrize("p", [3, 5])
def test_small_field_operations_match_enumeration(p):
    """Everything against the exhaustive oracle for small ambient spaces."""
    rng = random.Random(p * 1001)
    for _ in range(10):
        n = rng.randrange(2, 7)
        a_rows = random_rows(rng, p, rng.randrange(1, 4), n)
        b_rows = random_rows(rng, p, rng.randrange(1, 4), n)
        a, b = gf.rref(p, a_rows), gf.rref(p, b_rows)
        assert enumerate_span(p, a.rows, n) == enumerate_span(p, a_rows, n)
        assert enumerate_span(p, gf.subspace_sum(a, b).rows, n) == enumerate_span(
            p, a_rows + b_rows, n
        )
        inter_span = enumerate_span(p, a_rows, n) & enumerate_span(p, b_rows, n)
        assert enumerate_span(p, gf.intersect(a, b).rows, n) == inter_span


def test_validate_prime():
    for good in (3, 5, 7, 65521):
        assert gf.validate_prime(good) == good
    for bad in (1, 2, 4, 9, 15, 2 ** 16, 2 ** 16 + 1):
        with pytest.raises(ValueError):
            gf.validate_prime(bad)

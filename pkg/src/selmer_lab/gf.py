"""Exact dense linear algebra over a prime field F_p.

Vectors are tuples of residues in [0, p); a subspace is stored as its
reduced row echelon basis (unit pivots, strictly increasing pivot columns,
pivot columns cleared above and below).  Reduced echelon form is unique per
row space, so subspace equality is plain tuple equality and every operation
is order independent.

Only odd primes 3 <= p <= 2**16 are supported; coordinates are machine
integers reduced mod p at each step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import AmbientMismatch, LengthMismatch

MAX_PRIME = 2 ** 16

Vector = tuple[int, ...]


def validate_prime(p: int) -> int:
    """Check that p is an odd prime in [3, 2**16] and return it."""
    if not isinstance(p, int) or p < 3 or p > MAX_PRIME or p % 2 == 0:
        raise ValueError(f"p must be an odd prime with 3 <= p <= 2**16, got {p!r}")
    d = 3
    while d * d <= p:
        if p % d == 0:
            raise ValueError(f"p must be prime, got {p} = {d} * {p // d}")
        d += 2
    return p


def _reduce_rows(p: int, rows: list[list[int]]) -> list[list[int]]:
    """In-place Gauss-Jordan elimination mod p; returns the nonzero rows
    in reduced echelon order.  Rows must already be reduced mod p."""
    if not rows:
        return []
    ncols = len(rows[0])
    pivot_row = 0
    for col in range(ncols):
        pivot = -1
        for r in range(pivot_row, len(rows)):
            if rows[r][col]:
                pivot = r
                break
        if pivot < 0:
            continue
        rows[pivot_row], rows[pivot] = rows[pivot], rows[pivot_row]
        cur = rows[pivot_row]
        inv = pow(cur[col], p - 2, p)
        if inv != 1:
            rows[pivot_row] = cur = [(x * inv) % p for x in cur]
        for r in range(len(rows)):
            if r == pivot_row:
                continue
            f = rows[r][col]
            if f:
                row = rows[r]
                rows[r] = [(a - f * b) % p for a, b in zip(row, cur)]
        pivot_row += 1
        if pivot_row == len(rows):
            break
    return [row for row in rows[:pivot_row] if any(row)]


@dataclass(frozen=True)
class FpSubspace:
    """A subspace of F_p^n held as its canonical reduced row basis."""

    p: int
    ambient_dim: int
    rows: tuple[Vector, ...]

    @property
    def dim(self) -> int:
        return len(self.rows)

    def pivot_columns(self) -> tuple[int, ...]:
        return tuple(next(i for i, x in enumerate(row) if x) for row in self.rows)

    def is_full(self) -> bool:
        return self.dim == self.ambient_dim

    def __contains__(self, v: Sequence[int]) -> bool:
        return contains(self, v)


def _check_widths(rows: Sequence[Sequence[int]], n: Optional[int]) -> int:
    widths = {len(r) for r in rows}
    if n is not None:
        widths.add(n)
    if len(widths) > 1:
        raise LengthMismatch(f"rows of mixed lengths {sorted(widths)}")
    if not widths:
        raise LengthMismatch("ambient dimension unknown: no rows and no explicit n")
    return widths.pop()


def rref(p: int, rows: Iterable[Sequence[int]], n: Optional[int] = None) -> FpSubspace:
    """Row space of the given rows, in canonical form.

    n fixes the ambient dimension; required when rows is empty.
    """
    mat = [list(r) for r in rows]
    width = _check_widths(mat, n)
    reduced = _reduce_rows(p, [[x % p for x in row] for row in mat])
    return FpSubspace(p, width, tuple(tuple(row) for row in reduced))


def zero_subspace(p: int, n: int) -> FpSubspace:
    return FpSubspace(p, n, ())


def full_space(p: int, n: int) -> FpSubspace:
    rows = tuple(tuple(1 if j == i else 0 for j in range(n)) for i in range(n))
    return FpSubspace(p, n, rows)


def kernel(p: int, matrix: Sequence[Sequence[int]], n: Optional[int] = None) -> FpSubspace:
    """Kernel of the linear map F_p^n -> F_p^k whose rows are `matrix`.

    Satisfies dim kernel + rank = n.
    """
    width = _check_widths(matrix, n)
    reduced = _reduce_rows(p, [[x % p for x in row] for row in matrix])
    pivots = [next(i for i, x in enumerate(row) if x) for row in reduced]
    pivot_set = set(pivots)
    basis = []
    for free in range(width):
        if free in pivot_set:
            continue
        v = [0] * width
        v[free] = 1
        for row, pc in zip(reduced, pivots):
            v[pc] = (-row[free]) % p
        basis.append(v)
    # the construction above need not have unit leading entries; canonicalize
    return rref(p, basis, width)


def _check_compatible(a: FpSubspace, b: FpSubspace) -> None:
    if a.p != b.p or a.ambient_dim != b.ambient_dim:
        raise AmbientMismatch(
            f"subspaces live in F_{a.p}^{a.ambient_dim} and F_{b.p}^{b.ambient_dim}"
        )


def subspace_sum(a: FpSubspace, b: FpSubspace) -> FpSubspace:
    _check_compatible(a, b)
    return rref(a.p, list(a.rows) + list(b.rows), a.ambient_dim)


def intersect(a: FpSubspace, b: FpSubspace) -> FpSubspace:
    """A ∩ B via the Zassenhaus block trick: reduce [A|A; B|0] and read the
    intersection off the rows whose left block vanished."""
    _check_compatible(a, b)
    n = a.ambient_dim
    block = [list(r) + list(r) for r in a.rows]
    block += [list(r) + [0] * n for r in b.rows]
    reduced = _reduce_rows(a.p, block)
    inter = [row[n:] for row in reduced if not any(row[:n])]
    return rref(a.p, inter, n)


def contains(space: FpSubspace, v: Sequence[int]) -> bool:
    if len(v) != space.ambient_dim:
        raise AmbientMismatch(
            f"vector of length {len(v)} against ambient dim {space.ambient_dim}"
        )
    p = space.p
    res = [x % p for x in v]
    for row in space.rows:
        pc = next(i for i, x in enumerate(row) if x)
        f = res[pc]
        if f:
            res = [(a - f * b) % p for a, b in zip(res, row)]
    return not any(res)


def solve(p: int, matrix: Sequence[Sequence[int]], rhs: Sequence[int]) -> Optional[Vector]:
    """One solution x of M x = rhs (free variables set to 0), or None."""
    if len(matrix) != len(rhs):
        raise LengthMismatch(f"{len(matrix)} rows but {len(rhs)} right-hand entries")
    if not matrix:
        return ()
    n = _check_widths(matrix, None)
    aug = [[x % p for x in row] + [b % p] for row, b in zip(matrix, rhs)]
    reduced = _reduce_rows(p, aug)
    x = [0] * n
    for row in reduced:
        pc = next(i for i, v in enumerate(row) if v)
        if pc == n:
            return None  # row (0 ... 0 | nonzero): inconsistent
        x[pc] = row[n]
    # pivots are cleared in reduced form, so pivot entries solve directly
    # once free variables are zero; verify to guard against misuse
    for row, b in zip(matrix, rhs):
        if sum(c * xi for c, xi in zip(row, x)) % p != b % p:
            return None
    return tuple(x)

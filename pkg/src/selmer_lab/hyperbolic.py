"""Orthogonal sum of hyperbolic planes over F_p, and its Lagrangians.

One plane per prime label: coordinates (u, t) with the symmetric pairing

    B(u, t) = B(t, u) = 1,   B(u, u) = B(t, t) = 0,

extended orthogonally across planes.  The u-line models the unramified
local condition, the t-line the transverse one.  Symmetry (rather than
alternation) is essential: in a 2-dimensional plane a symmetric hyperbolic
form has exactly two isotropic lines - the u-line and the t-line - whereas
an alternating form makes every line isotropic.  The rank dichotomies
below need "isotropic line" to pin down one of the two distinguished
lines, so the form must be symmetric.

A Lagrangian here is a self-orthogonal subspace of the maximal dimension
m = half the ambient dimension; it models the localization image of global
cohomology, constrained by global duality.

Defect identity.  For every Lagrangian G and every subspace C of F_p^{2m}:

    dim(G ∩ C) - dim(G ∩ C^perp) = dim C - m.

Proof: G = G^perp, so (G ∩ C)^perp = G + C^perp.  Taking dimensions,
2m - dim(G ∩ C) = dim G + dim C^perp - dim(G ∩ C^perp)
               = m + (2m - dim C) - dim(G ∩ C^perp),
and rearranging gives the identity.  `duality_defect` enforces it at run
time; a failure means the claimed Lagrangian is corrupted.  Every rank
statement the Selmer layer relies on (the relaxed/strict rank gap of 1,
the one-step rank changes of +-1, the surjectivity criterion) specializes
this identity.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import gf
from .errors import AmbientMismatch, DualityViolation
from .gf import FpSubspace, Vector

DEFAULT_WORD_FACTOR = 8  # isometry word length per plane when sampling


@dataclass(frozen=True)
class HyperbolicSpace:
    """m hyperbolic planes over F_p, coordinates ordered u1,t1,...,um,tm."""

    p: int
    m: int

    def __post_init__(self) -> None:
        gf.validate_prime(self.p)
        if self.m < 1:
            raise ValueError(f"need at least one plane, got m={self.m}")

    @property
    def ambient_dim(self) -> int:
        return 2 * self.m

    def u_index(self, plane: int) -> int:
        return 2 * plane

    def t_index(self, plane: int) -> int:
        return 2 * plane + 1

    def basis_u(self, plane: int) -> Vector:
        return tuple(1 if i == 2 * plane else 0 for i in range(self.ambient_dim))

    def basis_t(self, plane: int) -> Vector:
        return tuple(1 if i == 2 * plane + 1 else 0 for i in range(self.ambient_dim))


def pair(space: HyperbolicSpace, v: Vector, w: Vector) -> int:
    """The symmetric pairing: sum over planes of v_u*w_t + v_t*w_u."""
    n = space.ambient_dim
    if len(v) != n or len(w) != n:
        raise AmbientMismatch(f"vectors of lengths {len(v)}, {len(w)} in ambient {n}")
    s = 0
    for i in range(0, n, 2):
        s += v[i] * w[i + 1] + v[i + 1] * w[i]
    return s % space.p


def gram_conjugate(space: HyperbolicSpace, v: Vector) -> Vector:
    """Gram matrix applied to v: swaps the (u, t) coordinates in each plane,
    so that pair(space, v, w) = <gram_conjugate(v), w> (dot product)."""
    out = list(v)
    for i in range(0, space.ambient_dim, 2):
        out[i], out[i + 1] = out[i + 1], out[i]
    return tuple(out)


def orthogonal_complement(space: HyperbolicSpace, s: FpSubspace) -> FpSubspace:
    if s.ambient_dim != space.ambient_dim or s.p != space.p:
        raise AmbientMismatch(
            f"subspace in F_{s.p}^{s.ambient_dim}, space is F_{space.p}^{space.ambient_dim}"
        )
    rows = [gram_conjugate(space, r) for r in s.rows]
    return gf.kernel(space.p, rows, space.ambient_dim)


def is_isotropic(space: HyperbolicSpace, s: FpSubspace) -> bool:
    rows = s.rows
    return all(
        pair(space, rows[i], rows[j]) == 0
        for i in range(len(rows))
        for j in range(i, len(rows))
    )


@dataclass(frozen=True)
class Lagrangian:
    """Self-orthogonal subspace of dimension m; validated at construction."""

    space: HyperbolicSpace
    subspace: FpSubspace

    def __post_init__(self) -> None:
        s = self.subspace
        w = self.space
        if s.p != w.p or s.ambient_dim != w.ambient_dim:
            raise AmbientMismatch("subspace does not live in the given space")
        if s.dim != w.m:
            raise ValueError(f"Lagrangian must have dim {w.m}, got {s.dim}")
        if not is_isotropic(w, s):
            raise ValueError("subspace is not self-orthogonal")


def standard_lagrangian(space: HyperbolicSpace) -> Lagrangian:
    """The direct sum of the unramified lines, one per plane."""
    rows = tuple(space.basis_u(i) for i in range(space.m))
    return Lagrangian(space, FpSubspace(space.p, space.ambient_dim, rows))


def _random_isotropic(space: HyperbolicSpace, rng: random.Random) -> Vector:
    """Nonzero vector with B(x, x) = 0: fill coordinates at random, then
    solve the designated plane's product to cancel the quadratic value."""
    p, m = space.p, space.m
    x = [rng.randrange(p) for _ in range(2 * m)]
    k = rng.randrange(m)
    if rng.randrange(2):
        ui, ti = 2 * k, 2 * k + 1
    else:
        ui, ti = 2 * k + 1, 2 * k
    x[ui] = 1 + rng.randrange(p - 1)
    rest = sum(x[2 * i] * x[2 * i + 1] for i in range(m) if i != k) % p
    x[ti] = (-rest * pow(x[ui], p - 2, p)) % p
    return tuple(x)


def _apply_eichler(space: HyperbolicSpace, rows: list[Vector], x: Vector, y: Vector) -> list[Vector]:
    """Eichler transformation E_{x,y} (x isotropic, y orthogonal to x):

        v  ->  v + B(v,x) y - B(v,y) x - B(y,y)/2 * B(v,x) x

    preserves the pairing; words of these move the standard Lagrangian
    around one spinor family, plane swaps reach the other.
    """
    p = space.p
    half = (p + 1) // 2  # inverse of 2 mod p
    byy = pair(space, y, y)
    out = []
    for v in rows:
        a = pair(space, v, x)
        b = pair(space, v, y)
        c = (b + byy * half % p * a) % p
        out.append(tuple((vi + a * yi - c * xi) % p for vi, xi, yi in zip(v, x, y)))
    return out


def _apply_swap(space: HyperbolicSpace, rows: list[Vector], plane: int) -> list[Vector]:
    ui, ti = 2 * plane, 2 * plane + 1
    out = []
    for v in rows:
        w = list(v)
        w[ui], w[ti] = w[ti], w[ui]
        out.append(tuple(w))
    return out


def random_lagrangian(space: HyperbolicSpace, seed: int, word_length: int | None = None) -> Lagrangian:
    """Seeded Lagrangian: start from the standard one and apply a random
    word of isometries (Eichler transformations mixed with u/t plane
    swaps).  Deterministic in the seed; word_length defaults to 8*m.
    Sampling is not uniform, only well spread.
    """
    rng = random.Random(seed)
    if word_length is None:
        word_length = DEFAULT_WORD_FACTOR * space.m
    rows: list[Vector] = [space.basis_u(i) for i in range(space.m)]
    p = space.p
    for _ in range(word_length):
        if rng.randrange(4) == 0:
            rows = _apply_swap(space, rows, rng.randrange(space.m))
            continue
        x = _random_isotropic(space, rng)
        y0 = [rng.randrange(p) for _ in range(space.ambient_dim)]
        c = pair(space, tuple(y0), x)
        if c:
            # correct y0 into x-perp using a coordinate where x pairs nontrivially
            j = next(i for i, xi in enumerate(gram_conjugate(space, x)) if xi)
            d = gram_conjugate(space, x)[j]
            f = c * pow(d, p - 2, p) % p
            y0[j] = (y0[j] - f) % p
        rows = _apply_eichler(space, rows, x, tuple(y0))
    return Lagrangian(space, gf.rref(p, rows, space.ambient_dim))


def duality_defect(lagrangian: Lagrangian, c: FpSubspace) -> int:
    """dim(G ∩ C) - dim(G ∩ C^perp); checked against dim C - m.

    The module docstring proves the two agree for every true Lagrangian, so
    disagreement raises DualityViolation.
    """
    space = lagrangian.space
    g = lagrangian.subspace
    if c.p != space.p or c.ambient_dim != space.ambient_dim:
        raise AmbientMismatch("condition subspace is not in the ambient space")
    d_cap = gf.intersect(g, c).dim
    d_perp = gf.intersect(g, orthogonal_complement(space, c)).dim
    defect = d_cap - d_perp
    if defect != c.dim - space.m:
        raise DualityViolation(
            f"defect {defect} != dim C - m = {c.dim - space.m}; Lagrangian corrupted"
        )
    return defect

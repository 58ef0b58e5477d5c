"""Selmer groups of a finite model instance.

An instance is a hyperbolic space with one plane per prime label, a
Lagrangian G standing in for the localization image of global cohomology,
and an independent parity bit epsilon.  A squarefree product is any subset
of the labels (the empty product plays the role of 1); the Selmer group
attached to a product is G intersected with the subspace cut out by the
transverse line at primes in the product and the unramified line
elsewhere.

Sign convention: a product of j primes is in the plus class when
epsilon != j (mod 2) and in the minus class when epsilon == j (mod 2).

All queries are pure; results are memoized on the instance, which is
immutable, so instances can be shared freely across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping

from . import gf
from .errors import (
    DualityViolation,
    PrimeInProduct,
    PrimesExhausted,
    ProfileIncomplete,
    UnknownPrime,
)
from .gf import FpSubspace, Vector
from .hyperbolic import HyperbolicSpace, Lagrangian

# A squarefree product of prime labels, kept in instance label order.
SquarefreeProduct = tuple[str, ...]

EMPTY_PRODUCT: SquarefreeProduct = ()


class Condition(Enum):
    """Local condition at one prime."""

    UNRAMIFIED = "unramified"
    TRANSVERSE = "transverse"
    STRICT = "strict"
    RELAXED = "relaxed"


class SearchMode(Enum):
    NONZERO_ON_SOME = "nonzero-on-some"
    SURJECTIVE_UR = "surjective-ur"


class DichotomyCase(Enum):
    """Which middle Selmer group collapses onto the strict one."""

    TRANSVERSE_DROPS = "transverse-drops"
    UNRAMIFIED_DROPS = "unramified-drops"


@dataclass(frozen=True)
class SelmerInstance:
    """One synthetic instance: (p, labels, Lagrangian, parity bit)."""

    space: HyperbolicSpace
    labels: tuple[str, ...]
    lagrangian: Lagrangian
    epsilon: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if len(self.labels) != self.space.m:
            raise ValueError(f"{len(self.labels)} labels for m={self.space.m} planes")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("prime labels must be distinct")
        if self.epsilon not in (0, 1):
            raise ValueError(f"epsilon must be 0 or 1, got {self.epsilon}")
        if self.lagrangian.space != self.space:
            raise ValueError("Lagrangian belongs to a different space")

    @property
    def p(self) -> int:
        return self.space.p

    @property
    def m(self) -> int:
        return self.space.m

    def plane(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownPrime(f"label {label!r} not among {self.labels}") from None


def as_product(inst: SelmerInstance, primes: Iterable[str]) -> SquarefreeProduct:
    """Canonicalize a collection of labels into a product (instance order);
    rejects repeats and unknown labels."""
    seen = set()
    for label in primes:
        if label in seen:
            raise ValueError(f"repeated prime {label!r} in product")
        if label not in inst.labels:
            raise UnknownPrime(f"label {label!r} not among {inst.labels}")
        seen.add(label)
    return tuple(label for label in inst.labels if label in seen)


def sign_class(inst: SelmerInstance, product: SquarefreeProduct) -> str:
    """'+' or '-' per the parity of the product size against epsilon."""
    return "-" if len(product) % 2 == inst.epsilon else "+"


def all_products(inst: SelmerInstance, bound: int) -> Iterator[SquarefreeProduct]:
    """All products with at most `bound` prime factors, smallest first."""
    for j in range(bound + 1):
        yield from itertools.combinations(inst.labels, j)


def add_prime(inst: SelmerInstance, product: SquarefreeProduct, ell: str) -> SquarefreeProduct:
    if ell in product:
        raise PrimeInProduct(f"{ell!r} already divides {product}")
    return as_product(inst, product + (ell,))


def remove_prime(product: SquarefreeProduct, ell: str) -> SquarefreeProduct:
    if ell not in product:
        raise ValueError(f"{ell!r} does not divide {product}")
    return tuple(q for q in product if q != ell)


def condition_subspace(inst: SelmerInstance, profile: Mapping[str, Condition]) -> FpSubspace:
    """Direct sum over planes of the line (or 0, or the whole plane) named
    by the profile.  The profile must mention every instance label exactly."""
    if set(profile) != set(inst.labels):
        raise ProfileIncomplete(
            f"profile covers {sorted(profile)}, instance has {sorted(inst.labels)}"
        )
    rows = []
    for i, label in enumerate(inst.labels):
        cond = profile[label]
        if cond in (Condition.UNRAMIFIED, Condition.RELAXED):
            rows.append(inst.space.basis_u(i))
        if cond in (Condition.TRANSVERSE, Condition.RELAXED):
            rows.append(inst.space.basis_t(i))
    # one-hot rows with increasing pivots are already canonical
    return FpSubspace(inst.p, inst.space.ambient_dim, tuple(rows))


def transverse_profile(
    inst: SelmerInstance, product: SquarefreeProduct
) -> dict[str, Condition]:
    return {
        label: Condition.TRANSVERSE if label in product else Condition.UNRAMIFIED
        for label in inst.labels
    }


def selmer_group(inst: SelmerInstance, product: SquarefreeProduct) -> FpSubspace:
    """G meets (transverse at the product, unramified elsewhere).  The empty
    product gives the plain Selmer group of the instance."""
    key = ("sel", product)
    cached = inst._cache.get(key)
    if cached is None:
        cond = condition_subspace(inst, transverse_profile(inst, product))
        cached = gf.intersect(inst.lagrangian.subspace, cond)
        inst._cache[key] = cached
    return cached


def selmer_variant(
    inst: SelmerInstance,
    product: SquarefreeProduct,
    ell: str,
    which: Condition,
) -> FpSubspace:
    """Selmer group with the condition at one fresh prime replaced by the
    strict (0) or relaxed (everything) condition."""
    if which not in (Condition.STRICT, Condition.RELAXED):
        raise ValueError(f"variant must be STRICT or RELAXED, got {which}")
    if ell in product:
        raise PrimeInProduct(f"{ell!r} divides {product}")
    inst.plane(ell)
    key = ("var", product, ell, which)
    cached = inst._cache.get(key)
    if cached is None:
        profile = transverse_profile(inst, product)
        profile[ell] = which
        cached = gf.intersect(inst.lagrangian.subspace, condition_subspace(inst, profile))
        inst._cache[key] = cached
    return cached


def loc(inst: SelmerInstance, ell: str, v: Vector) -> tuple[int, int]:
    """Localization at one prime: the (unramified, transverse) coordinate
    pair of v in that plane."""
    i = inst.plane(ell)
    if len(v) != inst.space.ambient_dim:
        raise ValueError(f"vector of length {len(v)} in ambient {inst.space.ambient_dim}")
    return v[2 * i] % inst.p, v[2 * i + 1] % inst.p


def loc_image_nonzero(inst: SelmerInstance, ell: str, s: FpSubspace, mode: SearchMode) -> bool:
    """Does the localization of s at ell hit a nonzero value (either
    coordinate, or specifically the unramified one)?"""
    i = inst.plane(ell)
    ui, ti = 2 * i, 2 * i + 1
    if mode is SearchMode.SURJECTIVE_UR:
        return any(row[ui] for row in s.rows)
    return any(row[ui] or row[ti] for row in s.rows)


@dataclass(frozen=True)
class RhombusReport:
    """The four Selmer groups around one (product, fresh prime) corner.

    dim_relaxed - dim_strict = 1 always; the unramified and transverse
    middle groups match the strict/relaxed extremes in exactly one of the
    two possible patterns, and the localization map at the fresh prime is
    surjective on the unramified group precisely when adjoining the prime
    drops the rank by one.
    """

    product: SquarefreeProduct
    ell: str
    dim_selmer: int
    dim_relaxed: int
    dim_strict: int
    dim_adjoined: int
    case: DichotomyCase
    loc_surjective: bool


def rhombus(inst: SelmerInstance, product: SquarefreeProduct, ell: str) -> RhombusReport:
    if ell in product:
        raise PrimeInProduct(f"{ell!r} divides {product}")
    s_ur = selmer_group(inst, product)
    s_tr = selmer_group(inst, add_prime(inst, product, ell))
    s_str = selmer_variant(inst, product, ell, Condition.STRICT)
    s_rel = selmer_variant(inst, product, ell, Condition.RELAXED)

    if s_rel.dim - s_str.dim != 1:
        raise DualityViolation(
            f"relaxed/strict gap {s_rel.dim - s_str.dim} != 1 at {product}, {ell!r}"
        )
    transverse_drops = s_tr == s_str and s_ur == s_rel
    unramified_drops = s_tr == s_rel and s_ur == s_str
    if transverse_drops == unramified_drops:
        raise DualityViolation(f"rank dichotomy failed at {product}, {ell!r}")
    surjective = loc_image_nonzero(inst, ell, s_ur, SearchMode.SURJECTIVE_UR)
    if surjective != (s_tr.dim == s_ur.dim - 1):
        raise DualityViolation(
            f"localization surjectivity criterion failed at {product}, {ell!r}"
        )
    return RhombusReport(
        product=product,
        ell=ell,
        dim_selmer=s_ur.dim,
        dim_relaxed=s_rel.dim,
        dim_strict=s_str.dim,
        dim_adjoined=s_tr.dim,
        case=DichotomyCase.TRANSVERSE_DROPS if transverse_drops else DichotomyCase.UNRAMIFIED_DROPS,
        loc_surjective=surjective,
    )


def find_fresh_prime(
    inst: SelmerInstance,
    product: SquarefreeProduct,
    s: FpSubspace,
    need: SearchMode,
) -> str:
    """Smallest-label prime outside the product where s localizes
    nontrivially (the finite stand-in for an infinite supply of such
    primes).  Raises PrimesExhausted when the model has none left; for a
    subspace of a Selmer group the two search modes agree, since its
    localization at a fresh prime already lies on the unramified line."""
    if s.dim > 0:
        for label in inst.labels:
            if label in product:
                continue
            if loc_image_nonzero(inst, label, s, need):
                return label
    raise PrimesExhausted(
        f"no fresh prime outside {product} with {need.value} localization "
        f"(m={inst.m}, dim S={s.dim})"
    )


@dataclass(frozen=True)
class ParityReport:
    """The constant value of (rank + product size) mod 2, with the sizes
    table it was checked on and whether it matches the instance parity."""

    constant: int
    matches: bool
    dims: dict[SquarefreeProduct, int]


def parity_class(inst: SelmerInstance, bound: int) -> ParityReport:
    """(dim Selmer + j) mod 2 is the same for every product: adjoining one
    prime flips both terms.  Verified over all products up to the bound;
    the matches flag compares the constant against epsilon + 1."""
    dims: dict[SquarefreeProduct, int] = {}
    constant = None
    for product in all_products(inst, bound):
        d = selmer_group(inst, product).dim
        dims[product] = d
        value = (d + len(product)) % 2
        if constant is None:
            constant = value
        elif value != constant:
            raise DualityViolation(
                f"parity class not constant: {product} gives {value}, expected {constant}"
            )
    assert constant is not None
    return ParityReport(
        constant=constant,
        matches=constant == (inst.epsilon + 1) % 2,
        dims=dims,
    )

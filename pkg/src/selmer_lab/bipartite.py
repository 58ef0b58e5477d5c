"""Bipartite Kolyvagin systems over a model instance.

A system assigns to every plus-class product a scalar in F_p and to every
minus-class product a vector inside that product's Selmer group, subject
to two reciprocity laws linking each minus index to its plus neighbours:

  first law  (remove a prime ell | product):   the transverse component of
      the minus value's localization at ell vanishes iff the plus value at
      product/ell vanishes;
  second law (adjoin a fresh prime ell):       the unramified component of
      the minus value's localization at ell vanishes iff the plus value at
      product*ell vanishes.

Systems are truncated at a support bound; the laws are only quantified
over index pairs lying fully inside the bound.  The all-zero assignment is
always a system; everything interesting concerns non-trivial ones, whose
support is forced to live exactly on the heart (the products whose Selmer
rank is at most 1).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Mapping, Optional

from . import gf
from .errors import BoundExceeded, ParityMismatch, PrimesExhausted
from .gf import Vector
from .selmer import (
    SearchMode,
    SelmerInstance,
    SquarefreeProduct,
    add_prime,
    all_products,
    as_product,
    find_fresh_prime,
    loc,
    parity_class,
    remove_prime,
    selmer_group,
    sign_class,
)


@dataclass(frozen=True)
class BipartiteSystem:
    """Sparse assignment: scalars on plus products, Selmer vectors on minus
    products, zero everywhere omitted."""

    bound: int
    plus_values: Mapping[SquarefreeProduct, int] = field(default_factory=dict)
    minus_values: Mapping[SquarefreeProduct, Vector] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        bound: int,
        plus: Mapping[SquarefreeProduct, int],
        minus: Mapping[SquarefreeProduct, Vector],
    ) -> "BipartiteSystem":
        """Normalize by dropping stored zeros."""
        return cls(
            bound=bound,
            plus_values={k: v for k, v in plus.items() if v},
            minus_values={k: tuple(v) for k, v in minus.items() if any(v)},
        )

    def plus_at(self, product: SquarefreeProduct) -> int:
        return self.plus_values.get(product, 0)

    def minus_at(self, product: SquarefreeProduct) -> Optional[Vector]:
        return self.minus_values.get(product)

    def is_zero_at(self, inst: SelmerInstance, product: SquarefreeProduct) -> bool:
        if sign_class(inst, product) == "+":
            return self.plus_at(product) == 0
        return self.minus_at(product) is None

    @property
    def support(self) -> frozenset[SquarefreeProduct]:
        return frozenset(self.plus_values) | frozenset(self.minus_values)

    def is_trivial(self) -> bool:
        return not self.plus_values and not self.minus_values


def zero_system(bound: int) -> BipartiteSystem:
    return BipartiteSystem(bound=bound)


def scale_system(inst: SelmerInstance, z: BipartiteSystem, c: int) -> BipartiteSystem:
    """Multiply every value by a unit; used to probe support-level uniqueness."""
    c %= inst.p
    if c == 0:
        raise ValueError("scaling by zero is not a unit operation")
    return BipartiteSystem.build(
        z.bound,
        {k: (v * c) % inst.p for k, v in z.plus_values.items()},
        {k: tuple(x * c % inst.p for x in v) for k, v in z.minus_values.items()},
    )


def validate_system(inst: SelmerInstance, z: BipartiteSystem) -> None:
    """Structural invariants: canonical in-bound indices on the right side
    of the sign split, and every minus value inside its Selmer group."""
    if z.bound < 0:
        raise ValueError("bound must be >= 0")
    for product, value in z.plus_values.items():
        if as_product(inst, product) != product or len(product) > z.bound:
            raise ValueError(f"bad plus index {product}")
        if sign_class(inst, product) != "+":
            raise ValueError(f"{product} is a minus-class index with a scalar value")
        if not 0 < value < inst.p:
            raise ValueError(f"plus value at {product} must be a nonzero residue")
    for product, vec in z.minus_values.items():
        if as_product(inst, product) != product or len(product) > z.bound:
            raise ValueError(f"bad minus index {product}")
        if sign_class(inst, product) != "-":
            raise ValueError(f"{product} is a plus-class index with a vector value")
        if len(vec) != inst.space.ambient_dim:
            raise ValueError(f"minus value at {product} has wrong length")
        if not any(x % inst.p for x in vec):
            raise ValueError(f"stored zero minus value at {product}")
        if not gf.contains(selmer_group(inst, product), vec):
            raise ValueError(f"minus value at {product} is not a Selmer class")


def heart(inst: SelmerInstance, bound: int) -> tuple[SquarefreeProduct, ...]:
    """All products within the bound whose Selmer rank is at most 1."""
    return tuple(
        product
        for product in all_products(inst, bound)
        if selmer_group(inst, product).dim <= 1
    )


def canonical_system(
    inst: SelmerInstance, bound: int, value_picker_seed: int = 0
) -> BipartiteSystem:
    """The essentially unique non-trivial system: a seeded nonzero scalar
    wherever the Selmer rank is 0, a seeded nonzero Selmer vector wherever
    it is 1, zero elsewhere.  Exists exactly when the instance parity bit
    matches the parity class; refuses otherwise."""
    report = parity_class(inst, bound)
    if not report.matches:
        raise ParityMismatch(
            f"parity class {report.constant} != epsilon + 1 = {(inst.epsilon + 1) % 2}; "
            "no non-trivial system exists on this instance"
        )
    rng = random.Random(value_picker_seed)
    plus: dict[SquarefreeProduct, int] = {}
    minus: dict[SquarefreeProduct, Vector] = {}
    for product in all_products(inst, bound):
        s = selmer_group(inst, product)
        if s.dim == 0:
            assert sign_class(inst, product) == "+", "parity match forces plus sign"
            plus[product] = 1 + rng.randrange(inst.p - 1)
        elif s.dim == 1:
            assert sign_class(inst, product) == "-", "parity match forces minus sign"
            c = 1 + rng.randrange(inst.p - 1)
            minus[product] = tuple(x * c % inst.p for x in s.rows[0])
    return BipartiteSystem.build(bound, plus, minus)


@dataclass(frozen=True)
class ViolationCertificate:
    """One failed reciprocity biconditional, replayable from its fields."""

    law: str  # "RL1" or "RL2"
    product: SquarefreeProduct  # the minus-class index
    ell: str
    loc_vanishes: bool
    partner_vanishes: bool


def verify_rl1(inst: SelmerInstance, z: BipartiteSystem) -> list[ViolationCertificate]:
    """First reciprocity law at every applicable (minus product, dividing
    prime) pair within the bound.  Violations are data, not errors."""
    certs = []
    for product in all_products(inst, z.bound):
        if sign_class(inst, product) != "-":
            continue
        vec = z.minus_at(product)
        for ell in product:
            t_component = 0 if vec is None else loc(inst, ell, vec)[1]
            loc_vanishes = t_component == 0
            partner_vanishes = z.plus_at(remove_prime(product, ell)) == 0
            if loc_vanishes != partner_vanishes:
                certs.append(
                    ViolationCertificate("RL1", product, ell, loc_vanishes, partner_vanishes)
                )
    return certs


def verify_rl2(inst: SelmerInstance, z: BipartiteSystem) -> list[ViolationCertificate]:
    """Second reciprocity law at every (minus product, fresh prime) pair
    with both indices inside the bound."""
    certs = []
    if z.bound < 1:
        return certs
    for product in all_products(inst, z.bound - 1):
        if sign_class(inst, product) != "-":
            continue
        vec = z.minus_at(product)
        for ell in inst.labels:
            if ell in product:
                continue
            u_component = 0 if vec is None else loc(inst, ell, vec)[0]
            loc_vanishes = u_component == 0
            partner_vanishes = z.plus_at(add_prime(inst, product, ell)) == 0
            if loc_vanishes != partner_vanishes:
                certs.append(
                    ViolationCertificate("RL2", product, ell, loc_vanishes, partner_vanishes)
                )
    return certs


@dataclass(frozen=True)
class NontrivialityReport:
    trivial: bool
    plus_witness: Optional[SquarefreeProduct] = None
    minus_witness: Optional[SquarefreeProduct] = None


def nontriviality(inst: SelmerInstance, z: BipartiteSystem) -> NontrivialityReport:
    """Either the system is trivial, or it is nonzero somewhere on each
    side of the sign split.  A side with no stored nonzero entry gets its
    witness derived constructively: adjoining any fresh prime to a nonzero
    plus index gives a nonzero minus neighbour (first law, since the
    neighbour's transverse localization cannot vanish), and adjoining a
    fresh prime that sees a nonzero minus value gives a nonzero plus
    neighbour (second law).  Assumes z passes both verifiers."""
    plus_found = min(z.plus_values, key=lambda k: (len(k), k), default=None)
    minus_found = min(z.minus_values, key=lambda k: (len(k), k), default=None)
    if plus_found is None and minus_found is None:
        return NontrivialityReport(trivial=True)

    if minus_found is None:
        assert plus_found is not None
        candidates = [ell for ell in inst.labels if ell not in plus_found]
        if not candidates or len(plus_found) + 1 > z.bound:
            raise PrimesExhausted(
                f"no in-bound fresh prime to exhibit a minus witness above {plus_found}"
            )
        minus_found = add_prime(inst, plus_found, candidates[0])
    elif plus_found is None:
        vec = z.minus_values[minus_found]
        span = gf.rref(inst.p, [vec], inst.space.ambient_dim)
        ell = find_fresh_prime(inst, minus_found, span, SearchMode.SURJECTIVE_UR)
        if len(minus_found) + 1 > z.bound:
            raise PrimesExhausted(
                f"fresh prime {ell!r} found but {minus_found} is already at the bound"
            )
        plus_found = add_prime(inst, minus_found, ell)
    return NontrivialityReport(
        trivial=False, plus_witness=plus_found, minus_witness=minus_found
    )


@dataclass(frozen=True)
class EquivalenceFailure:
    direction: str
    product: SquarefreeProduct


@dataclass(frozen=True)
class EquivalenceReport:
    nontrivial: bool
    failures: tuple[EquivalenceFailure, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def check_equivalences(
    inst: SelmerInstance, z: BipartiteSystem, bound: int
) -> EquivalenceReport:
    """Support-rank dictionary, all four directions, over every product
    within the bound:

      nonzero plus value  => Selmer rank 0;
      nonzero minus value => Selmer rank 1;
    and when the system is non-trivial, conversely
      rank 0 => plus class carrying a nonzero scalar;
      rank 1 => minus class carrying a nonzero vector.

    Assumes z passes both verifiers; failures come back as data."""
    nontrivial = not z.is_trivial()
    failures = []
    for product in all_products(inst, min(bound, z.bound)):
        dim = selmer_group(inst, product).dim
        sign = sign_class(inst, product)
        nonzero = not z.is_zero_at(inst, product)
        if nonzero and sign == "+" and dim != 0:
            failures.append(EquivalenceFailure("plus-support-has-rank-0", product))
        if nonzero and sign == "-" and dim != 1:
            failures.append(EquivalenceFailure("minus-support-has-rank-1", product))
        if nontrivial:
            if dim == 0 and not (sign == "+" and nonzero):
                failures.append(EquivalenceFailure("rank-0-forces-plus-value", product))
            if dim == 1 and not (sign == "-" and nonzero):
                failures.append(EquivalenceFailure("rank-1-forces-minus-value", product))
    return EquivalenceReport(nontrivial=nontrivial, failures=tuple(failures))


@dataclass(frozen=True)
class Path:
    """Products linked by single-prime moves, all inside the heart."""

    nodes: tuple[SquarefreeProduct, ...]

    @property
    def length(self) -> int:
        """Edge count; a single-node path has length 0."""
        return len(self.nodes) - 1


def validate_path(inst: SelmerInstance, path: Path, bound: int) -> bool:
    nodes = path.nodes
    if not nodes:
        return False
    for node in nodes:
        if len(node) > bound or as_product(inst, node) != node:
            return False
        if selmer_group(inst, node).dim > 1:
            return False
    for a, b in zip(nodes, nodes[1:]):
        if len(set(a) ^ set(b)) != 1:
            return False
    return True


def _connect_nested(
    inst: SelmerInstance,
    lower: SquarefreeProduct,
    upper: SquarefreeProduct,
    bound: int,
) -> list[SquarefreeProduct]:
    """Heart path between nested products, by divisor descent with a
    fresh-prime detour when every intermediate divisor leaves the heart."""
    if lower == upper:
        return [lower]
    difference = [ell for ell in upper if ell not in lower]
    for ell in difference:
        mid = remove_prime(upper, ell)
        if selmer_group(inst, mid).dim <= 1:
            return _connect_nested(inst, lower, mid, bound) + [upper]

    # every one-step divisor has rank 2, which forces rank(upper) = 1,
    # zero localization on the difference primes, and equality of the two
    # Selmer groups; a fresh prime seen by that common group shortcuts the
    # descent through two rank-0 companions
    s_lower = selmer_group(inst, lower)
    s_upper = selmer_group(inst, upper)
    assert s_upper.dim == 1 and s_lower == s_upper, "descent invariant broke"
    aux = find_fresh_prime(inst, upper, s_lower, SearchMode.SURJECTIVE_UR)
    if len(upper) + 1 > bound:
        raise BoundExceeded(
            f"detour above {upper} needs {len(upper) + 1} primes, bound is {bound}"
        )
    lower_aux = add_prime(inst, lower, aux)
    upper_aux = add_prime(inst, upper, aux)
    drop = difference[0]
    mid_aux = add_prime(inst, remove_prime(upper, drop), aux)
    assert selmer_group(inst, lower_aux).dim == 0, "detour base left the heart"
    assert selmer_group(inst, upper_aux).dim == 0, "detour top left the heart"
    assert selmer_group(inst, mid_aux).dim == 1, "detour middle left the heart"
    return (
        [lower]
        + _connect_nested(inst, lower_aux, mid_aux, bound)
        + [upper_aux, upper]
    )


def connect_path(
    inst: SelmerInstance,
    start: SquarefreeProduct,
    end: SquarefreeProduct,
    bound: int,
) -> Path:
    """Path in the heart from start to end: climb both endpoints to a
    common multiple whose rank has dropped to at most 1, then descend."""
    start = as_product(inst, start)
    end = as_product(inst, end)
    for endpoint in (start, end):
        if selmer_group(inst, endpoint).dim > 1:
            raise ValueError(f"{endpoint} is outside the heart")
    top = as_product(inst, set(start) | set(end))
    if len(top) > bound:
        raise BoundExceeded(
            f"common multiple of {start} and {end} has {len(top)} primes, bound is {bound}"
        )
    while selmer_group(inst, top).dim > 1:
        ell = find_fresh_prime(inst, top, selmer_group(inst, top), SearchMode.SURJECTIVE_UR)
        if len(top) >= bound:
            raise BoundExceeded(
                f"extending {top} past the bound {bound} to reach the heart"
            )
        top = add_prime(inst, top, ell)
    down = _connect_nested(inst, start, top, bound)
    up = _connect_nested(inst, end, top, bound)
    return Path(tuple(down + up[-2::-1]))


def uniqueness_check(
    inst: SelmerInstance, z1: BipartiteSystem, z2: BipartiteSystem
) -> bool:
    """Support-level uniqueness: two verified non-trivial systems must
    vanish at exactly the same indices within the shared bound.  Per-index
    unit scalings are invisible to the laws, so supports are the strongest
    comparable data."""
    bound = min(z1.bound, z2.bound)
    for product in all_products(inst, bound):
        if z1.is_zero_at(inst, product) != z2.is_zero_at(inst, product):
            return False
    return True


@dataclass(frozen=True)
class BasisExtraction:
    """r primes whose one-step-down minus values form a Selmer basis.

    primes is in greedy selection order; classes[i] is the minus value at
    product/primes[i]; matrix[i][j] is the unramified component of
    classes[i] localized at primes[j], diagonal with unit entries."""

    primes: tuple[str, ...]
    product: SquarefreeProduct
    classes: tuple[Vector, ...]
    matrix: tuple[tuple[int, ...], ...]


def basis_extract(inst: SelmerInstance, z: BipartiteSystem) -> BasisExtraction:
    """Greedy rank descent: repeatedly adjoin a fresh prime seen by the
    running Selmer group (each step drops the rank by exactly one), then
    read off the minus values one step below the final product.  Each lies
    in the plain Selmer group and they form a basis, with localization
    matrix the identity up to units.  Requires z non-trivial and verified."""
    empty: SquarefreeProduct = ()
    base = selmer_group(inst, empty)
    rank = base.dim
    if rank > z.bound:
        raise BoundExceeded(f"Selmer rank {rank} exceeds the system bound {z.bound}")
    product = empty
    current = base
    chosen: list[str] = []
    for _ in range(rank):
        ell = find_fresh_prime(inst, product, current, SearchMode.SURJECTIVE_UR)
        chosen.append(ell)
        product = add_prime(inst, product, ell)
        nxt = selmer_group(inst, product)
        assert nxt.dim == current.dim - 1, "surjective localization must drop rank by 1"
        current = nxt
    assert current.dim == 0

    classes: list[Vector] = []
    for ell in chosen:
        vec = z.minus_at(remove_prime(product, ell))
        assert vec is not None, f"system vanishes at {remove_prime(product, ell)}"
        assert gf.contains(base, vec), "extracted class escaped the Selmer group"
        classes.append(vec)
    matrix = tuple(
        tuple(loc(inst, ell_j, vec)[0] for ell_j in chosen) for vec in classes
    )
    for i, row in enumerate(matrix):
        for j, entry in enumerate(row):
            if i == j:
                assert entry != 0, "diagonal localization entry must be a unit"
            else:
                assert entry == 0, "off-diagonal localization entry must vanish"
                assert loc(inst, chosen[j], classes[i])[1] == 0
    return BasisExtraction(
        primes=tuple(chosen), product=product, classes=tuple(classes), matrix=matrix
    )


@dataclass(frozen=True)
class SupportScan:
    """Exhaustive scan of zero/nonzero patterns on the heart."""

    heart: tuple[SquarefreeProduct, ...]
    patterns_checked: int
    consistent_nontrivial: tuple[frozenset[SquarefreeProduct], ...]


def scan_heart_supports(
    inst: SelmerInstance, bound: int, max_patterns: int = 4096
) -> SupportScan:
    """Try every support pattern on the heart (values off the pattern are
    zero; a nonzero minus slot takes the rank-1 generator, a nonzero plus
    slot the scalar 1) and record which patterns satisfy both laws.  On a
    parity-mismatched instance every law-consistent pattern is the empty
    one, which is the checkable form of the parity obstruction."""
    hearts = heart(inst, bound)
    total = 2 ** len(hearts)
    if total > max_patterns:
        raise ValueError(f"{total} patterns exceed the limit {max_patterns}")
    generators: dict[SquarefreeProduct, Vector] = {}
    for product in hearts:
        if sign_class(inst, product) == "-":
            s = selmer_group(inst, product)
            if s.dim == 1:
                generators[product] = s.rows[0]
    consistent = []
    for bits in itertools.product((0, 1), repeat=len(hearts)):
        plus: dict[SquarefreeProduct, int] = {}
        minus: dict[SquarefreeProduct, Vector] = {}
        feasible = True
        for product, bit in zip(hearts, bits):
            if not bit:
                continue
            if sign_class(inst, product) == "+":
                plus[product] = 1
            elif product in generators:
                minus[product] = generators[product]
            else:
                feasible = False  # nonzero minus slot with rank-0 Selmer group
                break
        if not feasible:
            continue
        trial = BipartiteSystem.build(bound, plus, minus)
        if trial.is_trivial():
            continue
        if not verify_rl1(inst, trial) and not verify_rl2(inst, trial):
            consistent.append(frozenset(trial.support))
    return SupportScan(
        heart=hearts,
        patterns_checked=total,
        consistent_nontrivial=tuple(consistent),
    )

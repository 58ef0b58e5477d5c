"""Brute-force oracle: Selmer data by raw vector enumeration.

This is the independent verification path for the whole Selmer layer, so
it deliberately shares no subspace arithmetic with the gf module: no row
reduction, no basis manipulation.  Membership in the Lagrangian uses only
its defining self-duality (v belongs to G exactly when it pairs to zero
with every stored basis row), local conditions are raw coordinate checks,
and dimensions are read off as base-p logarithms of member counts.

Feeding it a corrupted instance (a G that is not actually Lagrangian) makes
the enumerated "G" silently become its orthogonal complement's row span,
and at least one table cell then trips a DualityViolation or disagrees
with the reduction-based computation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import CeilingExceeded, DualityViolation
from .selmer import DichotomyCase, SelmerInstance, SquarefreeProduct, all_products

Vec = tuple[int, ...]

DEFAULT_CEILING = 3 ** 10


def _pairing_rows(inst: SelmerInstance) -> list[Vec]:
    """Basis rows with (u, t) swapped per plane, so membership in G is a
    plain dot product test."""
    out = []
    for row in inst.lagrangian.subspace.rows:
        swapped = list(row)
        for i in range(0, len(swapped), 2):
            swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
        out.append(tuple(swapped))
    return out


def _enumerate_members(inst: SelmerInstance) -> list[Vec]:
    p = inst.p
    n = 2 * inst.m
    rows = _pairing_rows(inst)
    members = []
    for v in itertools.product(range(p), repeat=n):
        for row in rows:
            if sum(a * b for a, b in zip(v, row)) % p:
                break
        else:
            members.append(v)
    return members


def _log_dim(p: int, count: int) -> int:
    d, c = 0, count
    while c > 1 and c % p == 0:
        c //= p
        d += 1
    if c != 1:
        raise DualityViolation(f"member count {count} is not a power of {p}")
    return d


def _count_in_conditions(
    inst: SelmerInstance,
    members: list[Vec],
    product: SquarefreeProduct,
    override: tuple[int, str] | None = None,
) -> int:
    """Members satisfying transverse at the product, unramified elsewhere;
    override replaces the condition at one plane by 'strict'/'relaxed'."""
    in_product = [label in product for label in inst.labels]
    count = 0
    for v in members:
        ok = True
        for i, trans in enumerate(in_product):
            if override is not None and override[0] == i:
                which = override[1]
                if which == "relaxed":
                    continue
                if v[2 * i] or v[2 * i + 1]:  # strict: whole plane must vanish
                    ok = False
                    break
                continue
            if trans:
                if v[2 * i]:  # transverse line: u component vanishes
                    ok = False
                    break
            elif v[2 * i + 1]:  # unramified line: t component vanishes
                ok = False
                break
        if ok:
            count += 1
    return count


@dataclass(frozen=True)
class OracleCell:
    dim_selmer: int
    dim_relaxed: int
    dim_strict: int
    dim_adjoined: int
    case: DichotomyCase


@dataclass(frozen=True)
class OracleTable:
    bound: int
    dims: dict[SquarefreeProduct, int]
    cells: dict[tuple[SquarefreeProduct, str], OracleCell]


def brute_oracle(
    inst: SelmerInstance, bound: int, ceiling: int = DEFAULT_CEILING
) -> OracleTable:
    """Full table of Selmer dimensions and rank dichotomies, by exhaustive
    enumeration of all p^(2m) ambient vectors."""
    p = inst.p
    if p ** (2 * inst.m) > ceiling:
        raise CeilingExceeded(
            f"p^(2m) = {p ** (2 * inst.m)} exceeds the oracle ceiling {ceiling}"
        )
    members = _enumerate_members(inst)
    if len(members) != p ** inst.m:
        raise DualityViolation(
            f"{len(members)} pairing-orthogonal vectors, expected {p ** inst.m}; "
            "the instance is not self-dual"
        )
    dims: dict[SquarefreeProduct, int] = {}
    for product in all_products(inst, min(bound + 1, inst.m)):
        dims[product] = _log_dim(p, _count_in_conditions(inst, members, product))

    cells: dict[tuple[SquarefreeProduct, str], OracleCell] = {}
    for product in all_products(inst, bound):
        for i, ell in enumerate(inst.labels):
            if ell in product:
                continue
            d_sel = dims[product]
            d_adj = dims[tuple(q for q in inst.labels if q in product or q == ell)]
            d_str = _log_dim(
                p, _count_in_conditions(inst, members, product, override=(i, "strict"))
            )
            d_rel = _log_dim(
                p, _count_in_conditions(inst, members, product, override=(i, "relaxed"))
            )
            if d_rel - d_str != 1:
                raise DualityViolation(
                    f"oracle: relaxed/strict gap {d_rel - d_str} != 1 at {product}, {ell!r}"
                )
            transverse_drops = d_adj == d_str and d_sel == d_rel
            unramified_drops = d_adj == d_rel and d_sel == d_str
            if transverse_drops == unramified_drops:
                raise DualityViolation(
                    f"oracle: rank dichotomy failed at {product}, {ell!r}"
                )
            cells[(product, ell)] = OracleCell(
                dim_selmer=d_sel,
                dim_relaxed=d_rel,
                dim_strict=d_str,
                dim_adjoined=d_adj,
                case=(
                    DichotomyCase.TRANSVERSE_DROPS
                    if transverse_drops
                    else DichotomyCase.UNRAMIFIED_DROPS
                ),
            )
    return OracleTable(bound=bound, dims={k: v for k, v in dims.items() if len(k) <= bound}, cells=cells)

"""Selmer structures: condition spaces, the four-group rhombus, parity.

The independent oracle enumerates the Lagrangian's span and filters by raw
coordinate conditions, bypassing every reduction-based code path.
"""

import itertools
import random

import pytest

from selmer_lab import gf
from selmer_lab.errors import (
    DualityViolation,
    PrimeInProduct,
    PrimesExhausted,
    ProfileIncomplete,
    UnknownPrime,
)
from selmer_lab.harness import generate_instance
from selmer_lab.hyperbolic import HyperbolicSpace, Lagrangian, duality_defect, standard_lagrangian
from selmer_lab.selmer import (
    Condition,
    DichotomyCase,
    SearchMode,
    SelmerInstance,
    all_products,
    as_product,
    condition_subspace,
    find_fresh_prime,
    loc,
    parity_class,
    rhombus,
    selmer_group,
    selmer_variant,
    sign_class,
)

from test_gf import enumerate_span


def make_instance(p, m, rows=None, epsilon=0):
    space = HyperbolicSpace(p, m)
    if rows is None:
        lagr = standard_lagrangian(space)
    else:
        lagr = Lagrangian(space, gf.rref(p, rows, 2 * m))
    return SelmerInstance(space, tuple(f"l{i+1}" for i in range(m)), lagr, epsilon)


def selmer_members_oracle(inst, product):
    """All Lagrangian vectors satisfying the local conditions, by raw
    coordinate filtering of the enumerated span."""
    span = enumerate_span(inst.p, inst.lagrangian.subspace.rows, 2 * inst.m)
    members = set()
    for v in span:
        ok = True
        for i, label in enumerate(inst.labels):
            if label in product:
                if v[2 * i]:
                    ok = False
                    break
            elif v[2 * i + 1]:
                ok = False
                break
        if ok:
            members.add(v)
    return members


def dim_of(p, member_count):
    d = 0
    while p ** d < member_count:
        d += 1
    assert p ** d == member_count
    return d


def test_condition_subspace_all_unramified():
    inst = make_instance(3, 3)
    s = condition_subspace(inst, {lab: Condition.UNRAMIFIED for lab in inst.labels})
    assert s.rows == tuple(inst.space.basis_u(i) for i in range(3))


def test_condition_subspace_all_relaxed():
    inst = make_instance(3, 2)
    s = condition_subspace(inst, {lab: Condition.RELAXED for lab in inst.labels})
    assert s == gf.full_space(3, 4)


def test_condition_subspace_mixed():
    inst = make_instance(3, 2)
    s = condition_subspace(inst, {"l1": Condition.TRANSVERSE, "l2": Condition.STRICT})
    assert s.rows == (inst.space.basis_t(0),)


def test_condition_subspace_requires_complete_profile():
    inst = make_instance(3, 2)
    with pytest.raises(ProfileIncomplete):
        condition_subspace(inst, {"l1": Condition.UNRAMIFIED})
    with pytest.raises(ProfileIncomplete):
        condition_subspace(
            inst,
            {"l1": Condition.UNRAMIFIED, "l2": Condition.UNRAMIFIED, "lX": Condition.STRICT},
        )


def test_selmer_group_standard_lagrangian():
    inst = make_instance(5, 4)
    assert selmer_group(inst, ()) == inst.lagrangian.subspace
    assert selmer_group(inst, inst.labels).dim == 0
    # one transverse prime kills exactly one unramified generator
    assert selmer_group(inst, ("l2",)).dim == 3


def test_selmer_group_fixed_split_instance():
    # G spanned by u1+u2 and t1-t2 is Lagrangian; conditions at l1 cut it to 0
    rows = [(1, 0, 1, 0), (0, 1, 0, 2)]
    inst = make_instance(3, 2, rows=rows)
    members = selmer_members_oracle(inst, ("l1",))
    assert selmer_group(inst, ("l1",)).dim == dim_of(3, len(members))
    assert enumerate_span(3, selmer_group(inst, ("l1",)).rows, 4) == members


def test_selmer_group_matches_oracle_on_random_instances():
    for seed in range(10):
        inst = generate_instance(3, 3, "match", seed=seed)
        for product in all_products(inst, 3):
            members = selmer_members_oracle(inst, product)
            s = selmer_group(inst, product)
            assert enumerate_span(3, s.rows, 6) == members


def test_selmer_variant_containments():
    # strict <= unramified, transverse <= relaxed, for every prime and product
    for seed in range(6):
        inst = generate_instance(5, 3, "match", seed=seed)
        for product in all_products(inst, 3):
            for ell in inst.labels:
                if ell in product:
                    continue
                strict = selmer_variant(inst, product, ell, Condition.STRICT)
                relaxed = selmer_variant(inst, product, ell, Condition.RELAXED)
                s_ur = selmer_group(inst, product)
                s_tr = selmer_group(inst, as_product(inst, product + (ell,)))
                for row in strict.rows:
                    assert gf.contains(s_ur, row) and gf.contains(s_tr, row)
                for mid in (s_ur, s_tr):
                    for row in mid.rows:
                        assert gf.contains(relaxed, row)


def test_selmer_variant_standard_dims():
    inst = make_instance(3, 4)
    assert selmer_variant(inst, (), "l1", Condition.RELAXED).dim == 4
    assert selmer_variant(inst, (), "l1", Condition.STRICT).dim == 3


def test_selmer_variant_gap_is_one_via_defect():
    # the relaxed and strict condition spaces are each other's complements,
    # so the rank gap of 1 is the duality defect identity in disguise
    for seed in range(8):
        inst = generate_instance(7, 3, "mismatch", seed=seed)
        for product in all_products(inst, 3):
            for ell in inst.labels:
                if ell in product:
                    continue
                relaxed = selmer_variant(inst, product, ell, Condition.RELAXED)
                strict = selmer_variant(inst, product, ell, Condition.STRICT)
                assert relaxed.dim - strict.dim == 1
                profile = {
                    lab: Condition.TRANSVERSE if lab in product else Condition.UNRAMIFIED
                    for lab in inst.labels
                }
                profile[ell] = Condition.RELAXED
                c_rel = condition_subspace(inst, profile)
                assert duality_defect(inst.lagrangian, c_rel) == c_rel.dim - inst.m


def test_selmer_variant_rejects_dividing_prime():
    inst = make_instance(3, 2)
    with pytest.raises(PrimeInProduct):
        selmer_variant(inst, ("l1",), "l1", Condition.STRICT)
    with pytest.raises(PrimeInProduct):
        rhombus(inst, ("l1",), "l1")


def test_rhombus_standard_lagrangian():
    m = 3
    inst = make_instance(3, m)
    report = rhombus(inst, (), "l2")
    assert (report.dim_selmer, report.dim_relaxed, report.dim_strict, report.dim_adjoined) == (
        m, m, m - 1, m - 1,
    )
    assert report.case is DichotomyCase.TRANSVERSE_DROPS
    assert report.loc_surjective


def test_rhombus_rank_step_is_always_one():
    for seed in range(12):
        inst = generate_instance(5, 4, "match", seed=seed)
        for product in all_products(inst, 4):
            for ell in inst.labels:
                if ell in product:
                    continue
                report = rhombus(inst, product, ell)
                assert abs(report.dim_adjoined - report.dim_selmer) == 1
                assert report.dim_relaxed - report.dim_strict == 1


def test_rhombus_matches_enumeration():
    for seed in range(8):
        inst = generate_instance(3, 3, "match", seed=seed)
        for product in all_products(inst, 3):
            for ell in inst.labels:
                if ell in product:
                    continue
                report = rhombus(inst, product, ell)
                d_sel = dim_of(3, len(selmer_members_oracle(inst, product)))
                d_adj = dim_of(
                    3, len(selmer_members_oracle(inst, as_product(inst, product + (ell,))))
                )
                assert report.dim_selmer == d_sel
                assert report.dim_adjoined == d_adj
                if report.case is DichotomyCase.TRANSVERSE_DROPS:
                    assert d_adj == report.dim_strict and d_sel == report.dim_relaxed
                else:
                    assert d_adj == report.dim_relaxed and d_sel == report.dim_strict


def test_loc_projections():
    inst = make_instance(5, 3)
    w = inst.space
    assert loc(inst, "l1", w.basis_u(0)) == (1, 0)
    assert loc(inst, "l1", w.basis_t(1)) == (0, 0)
    assert loc(inst, "l3", w.basis_t(2)) == (0, 1)
    rng = random.Random(0)
    for _ in range(20):
        v = tuple(rng.randrange(5) for _ in range(6))
        x = tuple(rng.randrange(5) for _ in range(6))
        s = tuple((a + b) % 5 for a, b in zip(v, x))
        for ell in inst.labels:
            lv, lx, ls = loc(inst, ell, v), loc(inst, ell, x), loc(inst, ell, s)
            assert ls == ((lv[0] + lx[0]) % 5, (lv[1] + lx[1]) % 5)
    with pytest.raises(UnknownPrime):
        loc(inst, "l9", w.basis_u(0))


def test_find_fresh_prime_zero_subspace_exhausts():
    inst = make_instance(3, 3)
    with pytest.raises(PrimesExhausted):
        find_fresh_prime(inst, (), gf.zero_subspace(3, 6), SearchMode.SURJECTIVE_UR)


def test_find_fresh_prime_standard_instance():
    inst = make_instance(3, 3)
    g = inst.lagrangian.subspace
    assert find_fresh_prime(inst, (), g, SearchMode.SURJECTIVE_UR) == "l1"
    assert find_fresh_prime(inst, ("l1",), g, SearchMode.NONZERO_ON_SOME) == "l2"


def test_find_fresh_prime_result_rechecked_by_projection():
    hits = 0
    for seed in range(20):
        inst = generate_instance(3, 5, "match", seed=seed)
        s = selmer_group(inst, ())
        if s.dim == 0:
            continue
        try:
            ell = find_fresh_prime(inst, (), s, SearchMode.NONZERO_ON_SOME)
        except PrimesExhausted:
            continue
        hits += 1
        assert any(loc(inst, ell, row) != (0, 0) for row in s.rows)
        ell_u = find_fresh_prime(inst, (), s, SearchMode.SURJECTIVE_UR)
        assert any(loc(inst, ell_u, row)[0] != 0 for row in s.rows)
        # a Selmer subspace localizes on the unramified line at fresh primes,
        # so the two search modes agree there
        assert ell == ell_u
    assert hits > 0


def test_parity_class_standard_lagrangian():
    for m in (2, 3, 4):
        inst = make_instance(3, m)
        report = parity_class(inst, m)
        assert report.constant == m % 2
        assert report.dims[()] == m


def test_parity_class_constant_and_oracle_checked():
    for seed in range(8):
        inst = generate_instance(3, 4, "match", seed=seed)
        report = parity_class(inst, 4)
        values = {(d + len(prod)) % 2 for prod, d in report.dims.items()}
        assert values == {report.constant}
        for product, d in report.dims.items():
            assert d == dim_of(3, len(selmer_members_oracle(inst, product)))
        assert report.matches == (report.constant == (inst.epsilon + 1) % 2)


def test_sign_class_split():
    inst = make_instance(3, 3, epsilon=1)
    assert sign_class(inst, ()) == "+"
    assert sign_class(inst, ("l1",)) == "-"
    flipped = make_instance(3, 3, epsilon=0)
    assert sign_class(flipped, ()) == "-"
    assert sign_class(flipped, ("l1", "l2")) == "-"
    assert sign_class(flipped, ("l3",)) == "+"


def test_largest_allowed_prime():
    # nothing in the pipeline may assume a small field
    inst = generate_instance(65521, 2, "match", seed=3)
    report = parity_class(inst, 2)
    assert report.matches
    for product in all_products(inst, 2):
        for ell in inst.labels:
            if ell not in product:
                rhombus(inst, product, ell)


def test_rank_lower_bound_against_base_rank():
    # adjoining primes can only drop the rank one step at a time
    for seed in range(10):
        inst = generate_instance(5, 4, "match", seed=seed)
        base = selmer_group(inst, ()).dim
        for product in all_products(inst, 4):
            assert selmer_group(inst, product).dim >= base - len(product)

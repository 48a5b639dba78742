import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from heegner_torsion.cache import EnumerationCache
from heegner_torsion.hlattice import (HermitianLattice, LatticeVector, count_norm_coset, coset_norms,
                                      dual_basis, enumerate_norm_coset)
from heegner_torsion.qfield import field_new

from conftest import setup
from oracles import box_counts

F4 = field_new(-4)


def rank_one(field, value=-1):
    return HermitianLattice(field, [[field(value)]])


def test_dual_basis_rank_one_gaussian():
    lat = rank_one(F4)
    duals = dual_basis(lat)
    assert len(duals) == 2
    for y in duals:
        assert lat.in_dual(y)
        assert not lat.in_lattice(y)
        assert lat.inner(y, [F4.one()]).in_inverse_different()
    # the dual is delta^{-1} times the lattice
    spanned = {(y[0] * F4.delta()).in_ring_of_integers() for y in duals}
    assert spanned == {True}


def test_unimodular_dual_is_lattice(unimodular):
    D = unimodular.cusp.D_part
    assert D.discriminant_group.order == 1
    for y in dual_basis(D):
        assert y.in_ring_of_integers()


def test_singular_gram_rejected():
    with pytest.raises(ValueError):
        HermitianLattice(F4, [[F4(-1), F4(-1)], [F4(-1), F4(-1)]])


def test_discriminant_group_rank_one():
    dg = rank_one(F4).discriminant_group
    assert dg.order == 4
    assert sorted(x for x in dg.invariant_factors if x != 1) == [2, 2]
    for i in range(dg.order):
        assert rank_one(F4).in_dual(dg.coset_reps[i])
        assert dg.neg[dg.neg[i]] == i


def test_discriminant_group_direct_sum():
    a = rank_one(F4)
    b = HermitianLattice(F4, [[F4(-1), F4(Fraction(1, 2), Fraction(1, 2))],
                              [F4(Fraction(1, 2), Fraction(-1, 2)), F4(-2)]])
    assert a.direct_sum(b).discriminant_group.order == a.discriminant_group.order * b.discriminant_group.order


def test_negation_is_involution(small):
    dg = small.cusp.L.discriminant_group
    assert all(dg.neg[dg.neg[i]] == i for i in range(dg.order))
    for i in range(dg.order):
        assert dg.add(i, dg.neg[i]) == dg.index_of_z([0] * (2 * small.cusp.L.rank))


def test_fixture_lattices_even_with_expected_signature(small, unimodular):
    for s in (small, unimodular):
        L = s.cusp.L
        assert L.is_integral() and L.is_even()
        assert L.signature() == (1, L.rank - 1)
        assert s.cusp.D_part.signature() == (0, s.cusp.n)


def test_enumeration_examples():
    lat = rank_one(F4)
    vecs = enumerate_norm_coset(lat, 0, -1)
    assert [v[0] for v in vecs] == [F4(-1), F4(0, -1), F4(0, 1), F4(1)]
    assert enumerate_norm_coset(lat, 0, -3) == []
    assert count_norm_coset(lat, 0, -1) == 4
    assert {v[0] for v in enumerate_norm_coset(lat, 0, -2)} == {F4(1, 1), F4(1, -1), F4(-1, 1), F4(-1, -1)}


def test_positive_norm_rejected():
    with pytest.raises(ValueError):
        enumerate_norm_coset(rank_one(F4), 0, 1)
    with pytest.raises(ValueError):
        count_norm_coset(rank_one(F4), 0, 0)


def test_incongruent_norm_gives_zero():
    lat = rank_one(F4)
    # coset 1 has norms in -1/4 + Z
    assert count_norm_coset(lat, 1, -1) == 0
    assert count_norm_coset(lat, 1, Fraction(-1, 3)) == 0


@pytest.mark.parametrize("name", ["gaussian", "eisenstein", "gaussian-rank2", "disc7", "disc8"])
def test_fincke_pohst_matches_box_search(name):
    D = setup(name).cusp.D_part
    dg = D.discriminant_group
    for g in range(dg.order):
        expected = box_counts(D, dg.reps_z[g], 10)
        got = {m: count_norm_coset(D, g, m) for m in coset_norms(D, g, Fraction(10))}
        assert {m: c for m, c in got.items() if c} == dict(expected), (name, g)


def test_enumerated_vectors_are_exact_and_sorted(rank2):
    D = rank2.cusp.D_part
    for g in (0, 5, 17):
        for m in coset_norms(D, g, Fraction(4)):
            vecs = enumerate_norm_coset(D, g, m)
            assert vecs == sorted(vecs, key=LatticeVector.sort_key)
            assert len(set(vecs)) == len(vecs)
            for v in vecs:
                assert D.norm(v) == m
                assert D.discriminant_group.index_of_vector(v) == g


def test_unit_multiples_stay_in_shell(eisenstein):
    D = eisenstein.cusp.D_part
    f = D.field
    units = [f.one(), f.zeta(), f.zeta() - 1]
    for m in coset_norms(D, 0, Fraction(6)):
        shell = set(enumerate_norm_coset(D, 0, m))
        for v in shell:
            for u in units:
                assert v.scale(u) in shell


def test_cache_cold_and_warm_agree(tmp_path, rank2):
    D = rank2.cusp.D_part
    cold = EnumerationCache(tmp_path)
    first = [enumerate_norm_coset(D, g, m, cold) for g in (0, 3) for m in coset_norms(D, g, Fraction(3))]
    warm = EnumerationCache(tmp_path)
    second = [enumerate_norm_coset(D, g, m, warm) for g in (0, 3) for m in coset_norms(D, g, Fraction(3))]
    assert first == second
    assert warm.misses == 0 and warm.hits > 0
    files = list(tmp_path.glob("*.json"))
    assert files and not list(tmp_path.glob(".tmp-*"))
    rec = json.loads(files[0].read_text())
    assert "count" in rec and "key" in rec


def test_count_served_from_cache(tmp_path):
    lat = rank_one(F4)
    cache = EnumerationCache(tmp_path)
    enumerate_norm_coset(lat, 0, -5, cache)
    again = EnumerationCache(tmp_path)
    assert count_norm_coset(lat, 0, -5, again) == 8
    assert again.hits == 1 and again.misses == 0


def test_lattice_hash_depends_on_gram():
    a = rank_one(F4, -1)
    b = rank_one(F4, -2)
    assert a.hash_key != b.hash_key
    assert a.hash_key == rank_one(F4, -1).hash_key


coords = st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=6), min_size=4, max_size=4)


@settings(max_examples=60)
@given(coords, coords)
def test_trace_form_matches_hermitian_form(x, y):
    D = setup("gaussian-rank2").cusp.D_part
    u = D.from_z(x)
    v = D.from_z(y)
    assert D.trace_form_z(x, y) == D.inner(u, v).trace()
    assert D.trace_form_z(x, x) == 2 * D.norm(u)
    if any(x):
        assert D.norm(u) < 0


@settings(max_examples=40)
@given(coords)
def test_pairing_functional_is_linear_form(x):
    D = setup("gaussian-rank2").cusp.D_part
    y = D.from_z([1, 0, Fraction(1, 2), -1])
    fn = D.pairing_functional(y)
    a = sum(xk * ak for xk, (ak, _) in zip(x, fn))
    b = sum(xk * bk for xk, (_, bk) in zip(x, fn))
    assert D.field(a, b) == D.inner(D.from_z(x), y)

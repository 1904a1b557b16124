import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hermcode.code import (
    CharVector,
    CodeCertificate,
    DualMultiset,
    code_member,
    dot,
    fp_nullspace,
    fp_rank,
    fp_transform_echelon,
    hyperplane_vector,
    non_residue_secant_stats,
    rank_fp,
    restrict_certificate,
    to_dual_multiset,
)
from hermcode.errors import IntegrityError, InvalidParameterError
from hermcode.field import field_build
from hermcode.geometry import pg
from hermcode.hermitian import build_hermitian

from oracles import naive_incidence, naive_rank, naive_solvable


@pytest.mark.parametrize("p,h,r,expect", [(2, 1, 2, 4), (2, 2, 2, 10), (3, 2, 2, 37), (3, 1, 2, 7)])
def test_rank_matches_naive_elimination(p, h, r, expect):
    F = field_build(p, h)
    assert naive_rank(naive_incidence(F, r), p) == expect
    assert rank_fp(pg(p, h, r)) == expect


def test_rank_pg34_over_f2():
    g = pg(2, 2, 3)
    assert rank_fp(g) == naive_rank(g.incidence_matrix().astype(int).tolist(), 2) == 17


def test_rank_over_foreign_prime_is_full():
    # over a prime not dividing the order the incidence matrix is invertible
    g = pg(2, 2, 2)
    assert rank_fp(g, 3) == naive_rank(g.incidence_matrix().astype(int).tolist(), 3) == 21


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 5, 7]), st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_fp_rank_random_matrices(p, n, m, seed):
    A = np.random.default_rng(seed).integers(0, p, size=(n, m))
    assert fp_rank(A, p) == naive_rank(A.tolist(), p)
    K = fp_nullspace(A, p)
    assert len(K) == m - naive_rank(A.tolist(), p)
    assert not np.any((A @ K.T) % p)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(1, 7), st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_transform_echelon_identity(p, n, m, seed):
    A = np.random.default_rng(seed).integers(0, p, size=(n, m))
    R, E, piv = fp_transform_echelon(A, p)
    assert np.array_equal((E @ A) % p, R % p)
    assert naive_rank(E.tolist(), p) == n


def test_dot_examples():
    g = pg(2, 2, 2)
    a = CharVector.of_points(g, [0, 1, 2])
    b = CharVector.of_points(g, [1, 2, 3])
    assert dot(a, b) == 0  # two common points, mod 2
    assert dot(a, CharVector.of_points(g, [2, 5])) == 1
    h = pg(3, 2, 2)
    assert dot(CharVector.of_points(h, [0, 1, 2]), CharVector.of_points(h, [0, 1, 2, 3])) == 0


def test_charvector_validation():
    g = pg(2, 2, 2)
    with pytest.raises(InvalidParameterError):
        CharVector(g, 2, np.zeros(5))
    with pytest.raises(InvalidParameterError):
        CharVector.of_points(g, [0]) + CharVector.of_points(pg(3, 1, 2), [0])
    v = CharVector.of_points(g, [0, 4])
    assert (v + v).weight == 0 and v.is_characteristic()


@pytest.mark.parametrize("p,h", [(2, 2), (3, 2)])
def test_hermitian_curve_is_member(p, h):
    g = pg(p, h, 2)
    H = build_hermitian(g)
    v = CharVector.of_points(g, H.members)
    cert = code_member(v)
    assert cert.member and cert.verify(v)
    assert cert.coefficient_sum == 1


@pytest.mark.parametrize("p,h,r", [(2, 2, 3), (3, 2, 2), (2, 2, 2)])
def test_hyperplane_is_member_with_single_coefficient(p, h, r):
    g = pg(p, h, r)
    for j in [0, 17, g.n_hyperplanes - 1]:
        v = hyperplane_vector(g, j)
        cert = code_member(v)
        assert cert.coefficients == {j: 1}
        assert cert.verify(v)


def test_near_hyperplane_sets_go_through_elimination():
    g = pg(2, 2, 3)
    pts = list(g.hyperplane_points(3))
    pts[0] = next(x for x in range(85) if x not in pts)
    v = CharVector.of_points(g, pts)
    res = code_member(v)
    assert res.verify(v)


def test_non_member_has_verified_witness():
    g = pg(2, 2, 2)
    rng = np.random.default_rng(3)
    A = g.incidence_matrix().astype(int).T.tolist()  # rows = hyperplane vectors
    found = 0
    for _ in range(30):
        ids = rng.choice(21, 6, replace=False)
        v = CharVector.of_points(g, ids)
        res = code_member(v)
        assert res.member == naive_solvable(A, v.entries.tolist(), 2)
        if not res.member:
            assert res.verify(v)
            found += 1
    assert found > 0


@pytest.mark.parametrize("p,h", [(2, 2), (3, 1), (3, 2)])
def test_membership_agrees_with_naive_solvability(p, h):
    g = pg(p, h, 2)
    rows = g.incidence_matrix().astype(int).T.tolist()
    rng = np.random.default_rng(p * 10 + h)
    for _ in range(20):
        e = rng.integers(0, p, g.n_points)
        v = CharVector(g, p, e)
        res = code_member(v)
        assert res.member == naive_solvable(rows, v.entries.tolist(), p)
        assert res.verify(v)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 84), st.integers(1, 1)), min_size=1, max_size=6))
def test_hyperplane_combinations_are_members(terms):
    g = pg(2, 2, 3)
    lam = np.zeros(g.n_hyperplanes, dtype=np.int64)
    for j, c in terms:
        lam[j] += c
    e = g.incidence_matrix().astype(np.int64) @ lam
    v = CharVector(g, 2, e)
    cert = code_member(v)
    assert cert.member and cert.verify(v)
    # sum of coefficients is an invariant: each hyperplane has 1 (mod p) points
    assert cert.coefficient_sum == int(lam.sum()) % 2 == v.weight % 2


@settings(max_examples=20, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 90), st.integers(1, 2)), min_size=1, max_size=5))
def test_hyperplane_combinations_are_members_pg29(terms):
    g = pg(3, 2, 2)
    lam = np.zeros(g.n_hyperplanes, dtype=np.int64)
    for j, c in terms:
        lam[j] += c
    v = CharVector(g, 3, g.incidence_matrix().astype(np.int64) @ lam)
    cert = code_member(v)
    assert cert.verify(v)
    assert cert.coefficient_sum == int(lam.sum()) % 3 == int(v.entries.sum()) % 3


def test_certificate_check_raises_on_mismatch():
    g = pg(2, 2, 2)
    cert = CodeCertificate(g, 2, {0: 1})
    cert.check(hyperplane_vector(g, 0))
    with pytest.raises(IntegrityError):
        cert.check(hyperplane_vector(g, 1))
    with pytest.raises(IntegrityError):
        CodeCertificate(g, 2, {21: 1})


def test_restriction_reproduces_every_plane_section():
    g = pg(2, 2, 3)
    H = build_hermitian(g)
    v = CharVector.of_points(g, H.members)
    cert = code_member(v)
    for j in range(g.n_hyperplanes):
        res = restrict_certificate(cert, j)
        assert res.verify(v)
        assert res.certificate.coefficient_sum == cert.coefficient_sum


def test_restriction_of_single_hyperplane():
    g = pg(2, 2, 3)
    cert = CodeCertificate(g, 2, {5: 1})
    for j in [0, 5, 30]:
        res = restrict_certificate(cert, j)
        target = hyperplane_vector(g, 5)
        assert res.verify(target)
        # a different plane cuts H_5 in a line; H_5 itself restricts to the whole plane
        sec = res.pull_back(target)
        assert sec.weight == (21 if j == 5 else 5)


def test_restriction_in_pg4():
    g = pg(2, 2, 4)
    H = build_hermitian(g)
    v = CharVector.of_points(g, H.members)
    cert = code_member(v)
    for j in [0, 100, 340]:
        assert restrict_certificate(cert, j).verify(v)


def test_restriction_rejects_bad_inputs():
    g = pg(2, 2, 3)
    cert = CodeCertificate(g, 2, {1: 1})
    with pytest.raises(IntegrityError):
        restrict_certificate(cert, 85)
    cert.coefficients[1] = 5
    with pytest.raises(IntegrityError):
        restrict_certificate(cert, 0)


def test_dual_multiset_single_line():
    g = pg(2, 2, 2)
    cert = CodeCertificate(g, 2, {3: 1})
    M = to_dual_multiset(cert)
    res = M.line_residues()
    # dual line P meets the multiset {3} iff P lies on line 3
    assert sorted(np.flatnonzero(res)) == sorted(g.hyperplane_points(3))
    delta, per = non_residue_secant_stats(M, 0)
    assert delta == 5
    assert sum(per.values()) == delta * (g.s + 1)
    assert per[3] == 5


def test_dual_multiset_of_hermitian_curve():
    g = pg(2, 2, 2)
    H = build_hermitian(g)
    v = CharVector.of_points(g, H.members)
    M = to_dual_multiset(code_member(v))
    # residues reproduce the characteristic vector of the curve
    assert np.array_equal(M.line_residues(), v.entries)
    delta, per = non_residue_secant_stats(M, 0)
    assert delta == 9
    assert sum(per.values()) == 9 * 5
    delta1, _ = non_residue_secant_stats(M, 1)
    assert delta1 == 12


def test_dual_multiset_empty():
    g = pg(3, 2, 2)
    M = DualMultiset(g.dual_plane(), 3, {})
    delta, per = non_residue_secant_stats(M, 0)
    assert delta == 0 and not any(per.values())


def test_dual_multiset_needs_plane():
    g = pg(2, 2, 3)
    with pytest.raises(InvalidParameterError):
        to_dual_multiset(CodeCertificate(g, 2, {0: 1}))

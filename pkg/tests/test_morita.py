import pytest
import sympy as sp

from fdquant import (AlgebraMismatch, DegenerateModule, LinearFunctional, NotFull, SMESampleSpec, Scalar,
                     compose_bimodules, dual_bases, dual_bimodule, gns, identity_equivalence,
                     matrix_algebra, projected_module, roundtrip_equivalence_test, scalars_algebra,
                     standard_equivalence, trace_functional, verify_sme_axioms)
from fdquant import linalg as la
from oracles import scalar_to_sympy

ORDER = 3


def S(*coeffs, order=ORDER):
    return Scalar.series(coeffs, order)


@pytest.fixture
def C():
    return scalars_algebra(ORDER)


@pytest.fixture
def M2(C):
    return matrix_algebra(C, 2)


def assert_sme(spec):
    report = verify_sme_axioms(spec, SMESampleSpec(count=4, seed=1))
    assert report.ok, report.to_text()
    return report


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("base", ["C", "M2"])
def test_standard_equivalence(n, base, C, M2):
    A = C if base == "C" else M2
    spec = standard_equivalence(A, n)
    assert_sme(spec)
    db = dual_bases(spec)
    assert db.verify(spec, spec.spanning_set()).ok


def test_identity_equivalence(M2):
    spec = identity_equivalence(M2)
    assert_sme(spec)
    H = gns(M2, trace_functional(M2))
    assert roundtrip_equivalence_test(spec, H).ok


def test_projected_module_is_not_full(M2, C):
    P = [[(S(1),), (S(0),)], [(S(0),), (S(0),)]]
    spec = projected_module(C, 2, P)
    report = verify_sme_axioms(spec)
    assert report["left_full"].verdict == "fail"
    assert not report.ok
    with pytest.raises(NotFull):
        dual_bases(spec)


def test_zero_module_fails_nondegeneracy(C):
    P = [[(S(0),), (S(0),)], [(S(0),), (S(0),)]]
    spec = projected_module(C, 2, P)
    report = verify_sme_axioms(spec)
    assert report["right_nondegenerate"].verdict == "fail"
    assert report["left_nondegenerate"].verdict == "fail"
    with pytest.raises(DegenerateModule):
        compose_bimodules(dual_bimodule(standard_equivalence(C, 2)), spec)


def test_roundtrip_for_gns_states(C):
    spec = standard_equivalence(C, 2)
    for w in (S(1), S(1, 1)):
        H = gns(C, LinearFunctional.covector(C, [w]))
        report = roundtrip_equivalence_test(spec, H)
        assert report.ok, report.to_text()
        assert report.data["rank_roundtrip"] == report.data["rank_H"]


def test_dual_and_double_dual(C, M2):
    spec = standard_equivalence(C, 2)
    dual = dual_bimodule(spec)
    assert dual.A == M2 and dual.B == C
    assert_sme(dual)
    back = dual_bimodule(dual)
    assert back.A == C and back.B == M2
    assert_sme(back)
    # the conjugate of the conjugate has the same dimension over the scalars
    assert len(back.spanning_set()) >= 2
    assert la.rank(la.columns_to_matrix([back.module.flat(v) for v in back.spanning_set()])) == 2


def test_dual_inner_products_are_transported(C):
    spec = standard_equivalence(C, 2)
    dual = dual_bimodule(spec)
    for u in spec.spanning_set():
        for v in spec.spanning_set():
            xi, eta = dual.embed(u), dual.embed(v)
            assert spec.equal(dual.element(xi), u)
            # <xi, eta> on the dual side is _B<u, v> of the original
            assert dual.right_inner(xi, eta) == spec.left_inner(u, v)


def test_compose_with_identity_is_the_original(C, M2):
    spec = standard_equivalence(C, 2)
    comp = compose_bimodules(spec, identity_equivalence(C))
    assert comp.module.P == spec.module.P and comp.module.Q == spec.module.Q
    assert comp.bimodule.left_matrices == spec.bimodule.left_matrices
    assert_sme(comp)


def test_compose_mismatch(C, M2):
    with pytest.raises(AlgebraMismatch):
        compose_bimodules(standard_equivalence(C, 2), identity_equivalence(M2))


def test_compose_with_conjugate_is_the_identity_bimodule(C, M2):
    spec = standard_equivalence(C, 2)
    comp = compose_bimodules(spec, dual_bimodule(spec))
    assert comp.A == M2 and comp.B == M2
    assert_sme(comp)
    U = comp.spanning_set()
    # the vectors commuting with M2 form a line spanned by a canonical u0
    cols = []
    for s in U:
        col = []
        for b in M2.basis():
            diff = [M2.sub(l, r) for l, r in zip(comp.act_left(b, s), comp.act_right(s, b))]
            col.extend(scalar_to_sympy(c) for c in comp.module.flat(diff))
        cols.append(col)
    null = sp.Matrix(cols).T.nullspace()
    assert len(null) == 1
    t = [Scalar.constant(sp.Rational(c), ORDER) for c in null[0]]
    u0 = comp.zero()
    for tk, s in zip(t, U):
        u0 = comp.add(u0, comp.scale(tk, s))
    # <u0, u0> is a positive multiple of the unit, and x |-> _B<x, u0> is an isometric bimodule map
    kappa_el = comp.right_inner(u0, u0)
    kappa = kappa_el[0]
    assert M2.equal(kappa_el, M2.scale(kappa, M2.one()))
    assert kappa.real_part() > 0
    images = [comp.left_inner(x, u0) for x in U]
    for x, tx in zip(U, images):
        for y, ty in zip(U, images):
            assert M2.equal(M2.mul(tx, M2.adjoint(ty)), M2.scale(kappa, comp.left_inner(x, y)))
    assert la.rank(la.columns_to_matrix([list(t) for t in images])) == M2.dim


def test_roundtrip_through_matrix_algebras(M2):
    spec = standard_equivalence(M2, 2)
    for omega in (trace_functional(M2), LinearFunctional.covector(M2, [S(1), S(0), S(0), S(0)])):
        report = roundtrip_equivalence_test(spec, gns(M2, omega))
        assert report.ok, report.to_text()

import random

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from fdquant import (BimoduleSpec, DegreeCapExceeded, FunctionAlgebra, InnerProductModule,
                     LinearFunctional, NotAdjointable, NotInModule, NotPositiveFunctional,
                     NotStronglyNondegenerate, PhaseSpaceSignature, PreHilbertModule, Representation,
                     Scalar, StarProductRule, adjoint_of, amat_adjoint, amat_mul, flatten_amat, classical_limit_metric, cp_check,
                     density_functional, direct_sum, gns, kernel_quotient, left_multiplication_matrices,
                     matrix_algebra, module_gram, scalars_algebra, trace_functional, verify_bimodule,
                     verify_representation)
from fdquant import linalg as la
from oracles import at_origin, wick_star, z, zb, lam, scalar_to_sympy

ORDER = 3


def S(*coeffs, order=ORDER):
    return Scalar.series(coeffs, order)


def diag(*entries):
    n = len(entries)
    return [[entries[i] if i == j else S(0) for j in range(n)] for i in range(n)]


@pytest.fixture
def M2():
    return matrix_algebra(scalars_algebra(ORDER), 2)


# -- degeneracy quotients and adjoints -------------------------------------------------

def test_kernel_quotient_examples():
    q1, _ = kernel_quotient(PreHilbertModule(diag(S(1), S(0)), ORDER))
    assert q1.rank == 1
    q2, m = kernel_quotient(PreHilbertModule(diag(S(1), S(0, 1)), ORDER))
    assert q2.rank == 2 and la.equal(q2.gram, diag(S(1), S(0, 1)))
    q0, _ = kernel_quotient(PreHilbertModule(diag(S(0), S(0)), ORDER))
    assert q0.rank == 0


def test_quotient_is_isometric_on_lifts():
    G = [[S(2), S(1, 1)], [S(1, 1), S(1, 2, 1)]]
    q, m = kernel_quotient(PreHilbertModule(G, ORDER))
    for u in ([S(1), S(0)], [S(0), S(1)], [S(3, 1), S(-1)]):
        v = m(u)
        assert q.inner(v, v) == PreHilbertModule(G, ORDER).inner(u, u)


def test_adjoint_needs_inverse_lambda():
    M = PreHilbertModule(diag(S(1), S(0, 1)), ORDER)
    E12 = [[S(0), S(1)], [S(0), S(0)]]
    with pytest.raises(NotAdjointable):
        adjoint_of(E12, M)
    T = [[S(1), S(0)], [S(0), S(2)]]
    assert la.equal(adjoint_of(T, M), T)


# -- GNS ---------------------------------------------------------------------------------

def test_gns_trace_and_vector_state(M2):
    pi = gns(M2, trace_functional(M2))
    assert pi.rank == 4 and verify_representation(pi).ok
    vec = LinearFunctional.covector(M2, [S(1), S(0), S(0), S(0)])
    pi2 = gns(M2, vec)
    assert pi2.rank == 2 and verify_representation(pi2).ok


def test_gns_reproduces_functional(M2):
    rng = random.Random(5)
    rho = la.add(la.identity(2, ORDER), [[S(1), S(1, 1)], [S(1, 1), S(1)]])
    omega = density_functional(M2, rho)
    pi = gns(M2, omega)
    cyclic = pi.vector(M2.one())
    for _ in range(5):
        a = M2.random_element(rng)
        assert pi.inner(cyclic, pi.apply(a, cyclic)) == omega(a)


def test_gns_rejects_non_positive(M2):
    bad = LinearFunctional.covector(M2, [S(1), S(0), S(0), S(-1)])
    with pytest.raises(NotPositiveFunctional):
        gns(M2, bad)


def test_gns_kernel_is_left_ideal(M2):
    vec = LinearFunctional.covector(M2, [S(1), S(0), S(0), S(0)])
    pi = gns(M2, vec)
    # E_12 and E_22 span the Gel'fand ideal of the vector state
    for null in (M2.elementary_matrix(0, 1), M2.elementary_matrix(1, 1)):
        assert all(c.is_zero() for c in pi.vector(null))
        for b in M2.basis():
            assert all(c.is_zero() for c in pi.vector(M2.mul(b, null)))


def test_wick_fock_space():
    A = FunctionAlgebra(StarProductRule.wick(), PhaseSpaceSignature.conjugate(), 4)
    d0 = LinearFunctional.point_evaluation(A, [0, 0])
    pi = gns(A, d0, cap=4)
    assert pi.rank == 5
    psi = [pi.vector(A.monomial((0, k))) for k in range(5)]
    for k in range(5):
        for l in range(5):
            oracle = at_origin(wick_star(z**k, zb**l, 4))
            assert scalar_to_sympy(pi.inner(psi[k], psi[l])) == sp.expand(oracle)
            assert oracle == (sp.factorial(k) * (2 * lam)**k if k == l else 0)
    for k in range(1, 5):
        assert all(c.is_zero() for c in pi.vector(A.monomial((k, 0))))
    with pytest.raises(DegreeCapExceeded):
        pi.vector(A.monomial((0, 5)))


def test_verify_representation_catches_transposed_action(M2):
    regular = left_multiplication_matrices(M2)
    good = Representation(M2, PreHilbertModule(la.identity(4, ORDER), ORDER), actions=regular)
    assert verify_representation(good).ok
    bad = Representation(M2, good.module, actions=[la.transpose(M) for M in regular])
    report = verify_representation(bad)
    assert not report.ok
    assert report["multiplicative"].witness is not None


def test_direct_sum(M2):
    pi = direct_sum(gns(M2, trace_functional(M2)), gns(M2, LinearFunctional.covector(M2, [S(1), S(0), S(0), S(0)])))
    assert pi.rank == 6 and verify_representation(pi).ok


# -- modules ---------------------------------------------------------------------------

def test_module_gram_examples(M2):
    E = InnerProductModule(M2, 2)
    e1, e2 = E.generators()
    G = module_gram([e1, e2], E)
    assert G == [[M2.one(), M2.zero()], [M2.zero(), M2.one()]]
    assert module_gram([e1], E) == [[M2.one()]]
    assert module_gram([e1, e1], E) == [[M2.one()] * 2] * 2


def test_not_in_module(M2):
    P = [[M2.one(), M2.zero()], [M2.zero(), M2.zero()]]
    E = InnerProductModule(M2, 2, projection=P)
    with pytest.raises(NotInModule):
        module_gram([[M2.zero(), M2.one()]], E)


def test_inconsistent_module_rejected(M2):
    P = [[M2.one(), M2.one()], [M2.zero(), M2.one()]]
    with pytest.raises(ValueError):
        InnerProductModule(M2, 2, projection=P)


def test_cp_examples(M2):
    C = scalars_algebra(ORDER)
    # P . A^n with the canonical metric
    P = [[M2.elementary_matrix(0, 0), M2.zero()], [M2.zero(), M2.one()]]
    E = InnerProductModule(M2, 2, projection=P)
    v = cp_check(E, E.generators())
    assert v.is_positive and v.info["via"] == "metric factorization"
    # scalar-valued inner products with a positive metric
    Ec = InnerProductModule(C, 2, metric=[[(S(2),), (S(1),)], [(S(1),), (S(1),)]])
    assert cp_check(Ec, Ec.generators()).is_positive
    neg = InnerProductModule(C, 1, metric=[[(S(-1),)]])
    assert cp_check(neg, neg.generators()).is_not_positive


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_cp_of_random_factorized_metric(seed):
    rng = random.Random(seed)
    M2 = matrix_algebra(scalars_algebra(2), 2)
    R = [[M2.random_element(rng) for _ in range(2)] for _ in range(2)]
    Q = amat_mul(M2, amat_adjoint(M2, R), R)
    E = InnerProductModule(M2, 2, metric=Q)
    xs = [[M2.random_element(rng) for _ in range(2)] for _ in range(3)]
    v = cp_check(E, xs)
    assert v.is_positive
    assert v.certificate.verify(_flat_gram(M2, E, xs))


def _flat_gram(A, E, xs):
    return flatten_amat(A, module_gram(xs, E))


def test_verify_bimodule_standard(M2):
    C = scalars_algebra(ORDER)
    E = InnerProductModule(C, 2)
    spec = BimoduleSpec(E, M2, left_matrices=[[[M2.to_grid(b)[i][j] for j in range(2)] for i in range(2)]
                                              for b in M2.basis()])
    assert verify_bimodule(spec).ok


# -- classical limits ------------------------------------------------------------------

@pytest.fixture
def moyal():
    return FunctionAlgebra(StarProductRule.moyal(), PhaseSpaceSignature.canonical(), 3)


def _const(A, value):
    return A.one().scale(value if isinstance(value, Scalar) else Scalar.constant(value, A.order))


def test_classical_limit_identity(moyal):
    E = InnerProductModule(moyal, 2)
    h0, report = classical_limit_metric(E)
    assert report.ok
    assert h0.Q == E.Q


def test_classical_limit_drops_lambda(moyal):
    one = _const(moyal, 1)
    lam1 = _const(moyal, Scalar.lam(3))
    Q = [[one + lam1, moyal.zero()], [moyal.zero(), one + lam1]]
    _, report = classical_limit_metric(InnerProductModule(moyal, 2, metric=Q))
    assert report.ok
    Q = [[one, lam1], [lam1, one]]
    h0, report = classical_limit_metric(InnerProductModule(moyal, 2, metric=Q))
    assert report.ok and h0.Q == [[one, moyal.zero()], [moyal.zero(), one]]


def test_classical_limit_rejects_degenerate(moyal):
    lam1 = _const(moyal, Scalar.lam(3))
    Q = [[lam1]]
    with pytest.raises(NotStronglyNondegenerate):
        classical_limit_metric(InnerProductModule(moyal, 1, metric=Q))


def test_classical_limit_detects_indefinite_metric(moyal):
    Q = [[_const(moyal, -1)]]
    _, report = classical_limit_metric(InnerProductModule(moyal, 1, metric=Q))
    assert report["h0_hermitian"].passed
    assert report["h0_positive"].verdict == "fail"

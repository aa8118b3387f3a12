import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdquant import (BimoduleSpec, CPCheckFailed, FunctionAlgebra, InnerProductModule, LinearFunctional,
                     PhaseSpaceSignature, Scalar, StarProductRule, density_functional, direct_sum,
                     functoriality, gns, gns_via_induction, identity_equivalence, matrix_algebra,
                     rieffel_induce, scalars_algebra, scalars_representation, standard_equivalence,
                     trace_functional, verify_representation, verify_unitary_intertwiner)
from fdquant import linalg as la

ORDER = 3


def S(*coeffs, order=ORDER):
    return Scalar.series(coeffs, order)


@pytest.fixture
def C():
    return scalars_algebra(ORDER)


@pytest.fixture
def M2(C):
    return matrix_algebra(C, 2)


def vector_state(M2):
    return LinearFunctional.covector(M2, [S(1), S(0), S(0), S(0)])


def test_identity_bimodule_returns_input(M2):
    H = gns(M2, trace_functional(M2))
    E = identity_equivalence(M2).bimodule
    ind = rieffel_induce(E, H)
    assert ind.report.ok
    U = ind.quotient.lift
    assert verify_unitary_intertwiner(U, ind, H).ok


def test_standard_module_block_count(C, M2):
    # A^n inducing from GNS of a state on A gives rank n * rank(H)
    H = gns(C, LinearFunctional.covector(C, [S(1)]))
    ind = rieffel_induce(standard_equivalence(C, 2).bimodule, H)
    assert ind.rank == 2 * H.rank
    assert ind.report.ok
    H2 = gns(M2, trace_functional(M2))
    ind2 = rieffel_induce(standard_equivalence(M2, 3).bimodule, H2)
    assert ind2.rank == 3 * H2.rank
    assert ind2.report.ok


def test_induced_gram_has_certificate(C):
    H = scalars_representation(C, 2, gram=[[S(1), S(0)], [S(0), S(0, 1)]])
    ind = rieffel_induce(standard_equivalence(C, 3).bimodule, H)
    assert ind.report["induced_gram_positive"].passed
    assert ind.rank == 6


def test_cp_failure_is_reported(C):
    E = InnerProductModule(C, 1, metric=[[(S(-1),)]])
    bim = BimoduleSpec(E, C, left_matrices=[[[(S(1),)]]])
    with pytest.raises(CPCheckFailed):
        rieffel_induce(bim, scalars_representation(C))


@pytest.mark.parametrize("state", ["trace", "vector"])
def test_gns_via_induction_finite(M2, state):
    omega = trace_functional(M2) if state == "trace" else vector_state(M2)
    induced, direct, U = gns_via_induction(M2, omega)
    assert induced.rank == direct.rank
    assert verify_unitary_intertwiner(U, induced, direct).ok


def test_gns_via_induction_wick():
    A = FunctionAlgebra(StarProductRule.wick(), PhaseSpaceSignature.conjugate(), 4)
    d0 = LinearFunctional.point_evaluation(A, [0, 0])
    induced, direct, U = gns_via_induction(A, d0, cap=3)
    assert induced.rank == direct.rank == 4
    report = verify_unitary_intertwiner(U, induced, direct)
    assert report.ok, report.to_text()


def test_unitary_check_dimension_failure(M2):
    H4 = gns(M2, trace_functional(M2))
    H2 = gns(M2, vector_state(M2))
    report = verify_unitary_intertwiner(la.zeros(2, 4, ORDER), H4, H2)
    assert report["dimensions"].verdict == "fail"
    assert verify_unitary_intertwiner(la.identity(4, ORDER), H4, H4).ok


def test_non_intertwiner_detected(M2):
    H = gns(M2, trace_functional(M2))
    # a unitary of the Gram that does not commute with the action
    swap = [[S(1 if (i, j) in {(0, 1), (1, 0), (2, 2), (3, 3)} else 0) for j in range(4)] for i in range(4)]
    report = verify_unitary_intertwiner(swap, H, H)
    assert report["isometric"].passed
    assert report["intertwines"].verdict == "fail"


@settings(max_examples=10, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(0, 10_000))
def test_functoriality_for_diagonal_maps(alpha, beta, seed):
    # V = [alpha I; beta I] : H -> H + H intertwines for any alpha, beta
    M2 = matrix_algebra(scalars_algebra(2), 2)
    rng = random.Random(seed)
    R = [[S(rng.randint(-2, 2), rng.randint(-1, 1), order=2) for _ in range(2)] for _ in range(2)]
    rho = la.add(la.matmul(la.adjoint(R), R), la.identity(2, 2))
    H = gns(M2, density_functional(M2, rho))
    H2 = direct_sum(H, H)
    d = H.rank
    V = la.block([[la.scale(S(alpha, order=2), la.identity(d, 2))],
                  [la.scale(S(beta, order=2), la.identity(d, 2))]])
    E = standard_equivalence(M2, 2).bimodule
    report = functoriality(E, V, H, H2)
    assert report.ok, report.to_text()


def test_balanced_relation(M2):
    # x.a (x) phi and x (x) pi(a) phi induce the same vector
    H = gns(M2, trace_functional(M2))
    spec = standard_equivalence(M2, 2)
    ind = rieffel_induce(spec.bimodule, H, verify=False)
    rng = random.Random(2)
    d = H.rank
    for _ in range(3):
        x = [M2.random_element(rng) for _ in range(2)]
        a = M2.random_element(rng)
        phi = [S(rng.randint(-2, 2)) for _ in range(d)]
        left = _simple_tensor(H, spec.act_right(x, a), phi)
        right = _simple_tensor(H, x, la.matvec(H.matrix(a), phi))
        assert ind.quotient(left) == ind.quotient(right)


def _simple_tensor(H, x, phi):
    return [c for xi in x for c in la.matvec(H.matrix(xi), phi)]


def test_induced_representation_verifies(C):
    H = direct_sum(gns(C, LinearFunctional.covector(C, [S(1)])), gns(C, LinearFunctional.covector(C, [S(0, 1)])))
    ind = rieffel_induce(standard_equivalence(C, 2).bimodule, H)
    assert verify_representation(ind.representation).ok
    assert ind.rank == 4

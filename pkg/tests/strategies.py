"""Hypothesis strategies shared by the property tests."""

from fractions import Fraction

from hypothesis import strategies as st

from fdquant import OrderedScalar, Scalar

small_rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def ordered_scalars(order=4):
    return st.lists(small_rationals, min_size=order + 1, max_size=order + 1).map(OrderedScalar)


def scalars(order=4, sparse=False):
    coeff = st.one_of(st.just(Fraction(0)), small_rationals) if sparse else small_rationals
    return st.tuples(st.lists(coeff, min_size=order + 1, max_size=order + 1),
                     st.lists(coeff, min_size=order + 1, max_size=order + 1)).map(lambda t: Scalar(*t))


def hermitian_matrices(n, order=3):
    """Hermitian n x n Scalar matrices."""
    def build(entries):
        diag, off = entries
        H = [[Scalar.zero(order)] * n for _ in range(n)]
        k = 0
        for i in range(n):
            H[i][i] = Scalar(diag[i].re, [0] * (order + 1))
            for j in range(i + 1, n):
                H[i][j] = off[k]
                H[j][i] = off[k].conj()
                k += 1
        return H

    return st.tuples(st.lists(scalars(order, sparse=True), min_size=n, max_size=n),
                     st.lists(scalars(order, sparse=True), min_size=n * (n - 1) // 2,
                              max_size=n * (n - 1) // 2)).map(build)

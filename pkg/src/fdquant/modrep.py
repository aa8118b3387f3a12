"""Pre-Hilbert modules, *-representations, GNS and algebra-valued inner products.

Representations act on C[[lambda]]^d with a Hermitian Gram matrix.  For
function algebras the carrier is a degree-filtered monomial subspace; an
action that leaves it raises ``DegreeCapExceeded`` instead of truncating.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from gmpy2 import mpq

from . import linalg as la
from .errors import (AlgebraMismatch, DegreeCapExceeded, NotAdjointable, NotInModule,
                     NotPositiveFunctional, NotStronglyNondegenerate)
from .positivity import (LinearFunctional, PSDVerdict, formal_psd_check, functional_eval,
                         functional_gram, indeterminate, is_positive_functional, not_positive,
                         positive)
from .report import Report
from .scalars import Scalar, _order_of
from .staralg import FiniteStarAlgebra, FunctionAlgebra, Observable, classical_limit_obs


# -- matrices over an algebra -------------------------------------------------

def amat_zero(A, rows: int, cols: int):
    return [[A.zero() for _ in range(cols)] for _ in range(rows)]


def amat_identity(A, n: int):
    m = amat_zero(A, n, n)
    for i in range(n):
        m[i][i] = A.one()
    return m


def amat_mul(A, X, Y):
    rows, inner_dim = len(X), len(Y)
    cols = len(Y[0]) if Y else 0
    out = amat_zero(A, rows, cols)
    for i in range(rows):
        for k in range(inner_dim):
            x = X[i][k]
            if A.is_zero(x):
                continue
            for j in range(cols):
                y = Y[k][j]
                if not A.is_zero(y):
                    out[i][j] = A.add(out[i][j], A.mul(x, y))
    return out


def amat_adjoint(A, X):
    if not X:
        return []
    return [[A.adjoint(X[i][j]) for i in range(len(X))] for j in range(len(X[0]))]


def amat_add(A, X, Y):
    return [[A.add(x, y) for x, y in zip(rx, ry)] for rx, ry in zip(X, Y)]


def amat_sub(A, X, Y):
    return [[A.sub(x, y) for x, y in zip(rx, ry)] for rx, ry in zip(X, Y)]


def amat_equal(A, X, Y) -> bool:
    return len(X) == len(Y) and all(A.equal(x, y) for rx, ry in zip(X, Y) for x, y in zip(rx, ry))


def amat_apply(A, X, col):
    return [row[0] for row in amat_mul(A, X, [[c] for c in col])]


def amat_from_columns(A, cols):
    if not cols:
        return []
    return [[c[i] for c in cols] for i in range(len(cols[0]))]


def amat_map(f, X):
    return [[f(x) for x in row] for row in X]


def flatten_amat(A: FiniteStarAlgebra, X) -> la.Matrix:
    """Block-flatten a matrix over a matrix-unit algebra into a scalar matrix."""
    if A.positions is None:
        raise TypeError(f"{A.name} cannot be flattened")
    rows = []
    for row in X:
        blocks = [A.flatten(x) for x in row]
        for r in range(A.matrix_size):
            rows.append([v for b in blocks for v in b[r]])
    return rows


def algebra_order(A) -> int:
    return A.order


# -- pre-Hilbert modules over the scalars ----------------------------------------

@dataclass
class PreHilbertModule:
    """C[[lambda]]^d with Hermitian Gram matrix; <u, v> = u* G v."""

    gram: la.Matrix
    order: int = 0

    def __post_init__(self):
        if self.gram:
            self.order = self.gram[0][0].order
        if not la.is_hermitian(self.gram):
            from .errors import NotHermitian
            raise NotHermitian("Gram matrix must be Hermitian")

    @property
    def rank(self) -> int:
        return len(self.gram)

    def inner(self, u, v) -> Scalar:
        return la.inner(u, self.gram, v) if self.gram else Scalar.zero(self.order)

    def zero_vector(self):
        return [Scalar.zero(self.order)] * self.rank


@dataclass
class QuotientMap:
    """Canonical surjection onto the quotient by the radical, and a section of it."""

    projection: la.Matrix  # r x d
    lift: la.Matrix        # d x r
    source_rank: int
    pivots: list = field(default_factory=list)

    def __call__(self, v):
        return la.matvec(self.projection, v) if self.projection else []

    @property
    def rank(self) -> int:
        return len(self.projection)


def kernel_quotient(M: PreHilbertModule, order=None):
    """Quotient by {v : G v = 0}; returns (quotient module, QuotientMap).

    The quotient basis consists of the LDL* pivot directions, so the induced
    Gram is diagonal.  Directions of norm lambda**k are kept (they are positive
    in the ordered ring); only exactly null directions are divided out.
    """
    order = M.order if M.gram else _order_of(order if order is not None else M.order)
    d = M.rank
    if d == 0:
        return PreHilbertModule([], order), QuotientMap([], [], 0)
    res = la.hermitian_ldl(M.gram)
    piv = list(res.pivots)
    proj = [list(res.Winv[p]) for p in piv]
    lift = [[res.W[a][p] for p in piv] for a in range(d)]
    gram = la.zeros(len(piv), len(piv), order)
    for k, p in enumerate(piv):
        gram[k][k] = res.diagonal[p]
    return PreHilbertModule(gram, order), QuotientMap(proj, lift, d, piv)


def _lift(q: QuotientMap, u, order):
    if not q.projection:
        return [Scalar.zero(order)] * q.source_rank
    return la.matvec(q.lift, u)


def adjoint_of(T: la.Matrix, M: PreHilbertModule) -> la.Matrix:
    """The adjoint of T with respect to the Gram of M (unique when M is nondegenerate)."""
    if la.rank(M.gram) != M.rank:
        raise NotAdjointable("module is degenerate; adjoints are not unique")
    return la.adjoint_of(T, M.gram)


# -- representations --------------------------------------------------------------

class Representation:
    """A *-representation of ``algebra`` on a PreHilbertModule.

    Finite algebras carry one action matrix per basis element.  Function
    algebras carry a partial ``applier(a, vector)``; ``vector_map`` (GNS
    only) sends algebra elements to carrier vectors psi_a.
    """

    def __init__(self, algebra, module: PreHilbertModule, actions=None, applier=None,
                 vector_map=None, basis=None, provenance=None):
        self.algebra = algebra
        self.module = module
        self.actions = actions
        self.applier = applier
        self.vector_map = vector_map
        self.basis = basis  # elements whose actions verify_representation samples
        self.provenance = provenance or {}
        if actions is None and applier is None:
            raise ValueError("a representation needs actions or an applier")

    @property
    def rank(self) -> int:
        return self.module.rank

    @property
    def gram(self) -> la.Matrix:
        return self.module.gram

    @property
    def order(self) -> int:
        return self.algebra.order

    def matrix(self, a) -> la.Matrix:
        if self.actions is not None:
            d = self.rank
            out = la.zeros(d, d, self.order)
            for x, M in zip(a, self.actions):
                if not x.is_zero():
                    out = la.add(out, la.scale(x, M))
            return out
        cols = []
        one = Scalar.one(self.order)
        zero = Scalar.zero(self.order)
        for k in range(self.rank):
            e = [one if i == k else zero for i in range(self.rank)]
            cols.append(self.apply(a, e))
        return la.columns_to_matrix(cols) if cols else []

    def apply(self, a, v):
        if self.actions is not None:
            return la.matvec(self.matrix(a), v) if self.rank else []
        return self.applier(a, v)

    def vector(self, a):
        if self.vector_map is None:
            raise TypeError("this representation has no cyclic vector map")
        return self.vector_map(a)

    def inner(self, u, v) -> Scalar:
        return self.module.inner(u, v)

    def sample_elements(self):
        if self.basis is not None:
            return list(self.basis)
        return self.algebra.basis()

    def __repr__(self):
        return f"Representation({self.algebra!r}, rank={self.rank})"


def left_multiplication_matrices(A: FiniteStarAlgebra) -> list:
    """L_s with (L_s)_{u t} = coefficient of e_u in e_s e_t."""
    mats = []
    zero = Scalar.zero(A.order)
    for s in range(A.dim):
        M = [[zero] * A.dim for _ in range(A.dim)]
        for t in range(A.dim):
            for u, c in A.mult[s][t].items():
                M[u][t] = c
        mats.append(M)
    return mats


def gns(A, omega: LinearFunctional, cap: int | None = None, check: bool = True) -> Representation:
    """GNS representation: A / J_omega with <psi_a, psi_b> = omega(a* b), pi(a) psi_b = psi_{ab}."""
    if omega.algebra != A:
        raise AlgebraMismatch("functional lives on a different algebra")
    if isinstance(A, FiniteStarAlgebra):
        basis = A.basis()
    else:
        if cap is None:
            raise ValueError("GNS of a function algebra needs a degree cap")
        exps = A.monomial_basis(cap)
        basis = [A.monomial(e) for e in exps]
    G = functional_gram(omega, basis)
    if check:
        verdict = formal_psd_check(G) if la.is_hermitian(G) else None
        if verdict is None or not verdict.is_positive:
            raise NotPositiveFunctional("GNS needs a positive functional", verdict)
    quotient, q = kernel_quotient(PreHilbertModule(G, A.order))
    order = A.order
    if isinstance(A, FiniteStarAlgebra):
        L = left_multiplication_matrices(A)
        actions = [la.matmul(la.matmul(q.projection, Ls), q.lift) if q.projection else [] for Ls in L]

        def vector_map(a):
            return q(list(a))

        return Representation(A, quotient, actions=actions, vector_map=vector_map,
                              provenance={"kind": "gns", "quotient": q, "basis_gram": G})

    index = {e: k for k, e in enumerate(exps)}

    def coords(f: Observable):
        v = [Scalar.zero(order)] * len(exps)
        for e, c in f.terms.items():
            k = index.get(e)
            if k is None:
                raise DegreeCapExceeded(f"monomial of degree {sum(e)} leaves the degree-{cap} subspace")
            v[k] = c
        return v

    def vector_map(f):
        return q(coords(f))

    def applier(a, v):
        lifted = _lift(q, v, order)
        b = Observable.zero(A.signature, order)
        for c, mono in zip(lifted, basis):
            if not c.is_zero():
                b = b + mono.scale(c)
        return q(coords(A.mul(a, b)))

    return Representation(A, quotient, applier=applier, vector_map=vector_map, basis=basis,
                          provenance={"kind": "gns", "quotient": q, "basis_gram": G, "cap": cap,
                                      "monomials": exps})


def scalars_representation(C: FiniteStarAlgebra, d: int = 1, gram=None) -> Representation:
    """The scalars acting by multiplication on C[[lambda]]^d."""
    order = C.order
    G = gram if gram is not None else la.identity(d, order)
    return Representation(C, PreHilbertModule(G, order), actions=[la.identity(len(G), order)])


def direct_sum(pi1: Representation, pi2: Representation) -> Representation:
    if pi1.algebra != pi2.algebra or pi1.actions is None or pi2.actions is None:
        raise AlgebraMismatch("direct sums need two matrix representations of one algebra")
    order = pi1.order
    d1, d2 = pi1.rank, pi2.rank
    G = la.block([[pi1.gram, la.zeros(d1, d2, order)], [la.zeros(d2, d1, order), pi2.gram]])
    actions = [la.block([[M1, la.zeros(d1, d2, order)], [la.zeros(d2, d1, order), M2]])
               for M1, M2 in zip(pi1.actions, pi2.actions)]
    return Representation(pi1.algebra, PreHilbertModule(G, order), actions=actions)


def _partial(fn):
    try:
        return fn()
    except DegreeCapExceeded:
        return None


def verify_representation(pi: Representation, samples: int | None = None, seed: int = 0) -> Report:
    """Multiplicativity, unit and *-compatibility on pairs of basis elements."""
    A = pi.algebra
    report = Report("verify-representation")
    elems = pi.sample_elements()
    pairs = list(itertools.product(range(len(elems)), repeat=2))
    if samples is not None and len(pairs) > samples:
        pairs = random.Random(seed).sample(pairs, samples)
    d = pi.rank
    order = pi.order
    G = pi.gram
    one, zero = Scalar.one(order), Scalar.zero(order)
    units = [[one if i == k else zero for i in range(d)] for k in range(d)]
    skipped = 0

    if pi.actions is not None:
        mats = [pi.matrix(e) for e in elems]
        with report.timed("multiplicative") as box:
            box["verdict"] = "pass"
            for s, t in pairs:
                if not la.equal(pi.matrix(A.mul(elems[s], elems[t])), la.matmul(mats[s], mats[t])):
                    box.update(verdict="fail", witness=[s, t])
                    break
        with report.timed("unit") as box:
            box["verdict"] = "pass" if la.equal(pi.matrix(A.one()), la.identity(d, order)) else "fail"
        with report.timed("star_compatible") as box:
            box["verdict"] = "pass"
            for s in range(len(elems)):
                lhs = la.matmul(G, pi.matrix(A.adjoint(elems[s])))
                rhs = la.matmul(la.adjoint(mats[s]), G)
                if not la.equal(lhs, rhs):
                    box.update(verdict="fail", witness=[s])
                    break
        return report

    with report.timed("multiplicative") as box:
        box["verdict"] = "pass"
        for s, t in pairs:
            prod = A.mul(elems[s], elems[t])
            for v in units:
                lhs = _partial(lambda: pi.apply(prod, v))
                rhs = _partial(lambda: pi.apply(elems[s], pi.apply(elems[t], v)))
                if lhs is None or rhs is None:
                    skipped += 1
                    continue
                if lhs != rhs:
                    box.update(verdict="fail", witness=[str(elems[s]), str(elems[t])])
                    break
            if box["verdict"] == "fail":
                break
        box["detail"] = f"{skipped} products left the degree-filtered subspace and were skipped"
    with report.timed("unit") as box:
        ok = all(pi.apply(A.one(), v) == v for v in units)
        box["verdict"] = "pass" if ok else "fail"
    with report.timed("star_compatible") as box:
        box["verdict"] = "pass"
        skipped = 0
        for a in elems:
            for u in units:
                for v in units:
                    lhs = _partial(lambda: pi.inner(pi.apply(a, u), v))
                    rhs = _partial(lambda: pi.inner(u, pi.apply(A.adjoint(a), v)))
                    if lhs is None or rhs is None:
                        skipped += 1
                    elif lhs != rhs:
                        box.update(verdict="fail", witness=[str(a)])
                        break
                if box["verdict"] == "fail":
                    break
            if box["verdict"] == "fail":
                break
        box["detail"] = f"{skipped} pairs left the degree-filtered subspace and were skipped"
    return report


# -- inner-product modules P . A^p -------------------------------------------------------

class InnerProductModule:
    """E = P . A^p with <x, y>_A = x* Q y.

    P is idempotent and Q-self-adjoint (Q P = P* Q); with Q = 1 this is the
    usual orthogonal projection.
    """

    def __init__(self, algebra, p: int, projection=None, metric=None, check: bool = True):
        self.algebra = algebra
        self.p = p
        self.P = projection if projection is not None else amat_identity(algebra, p)
        self.Q = metric if metric is not None else amat_identity(algebra, p)
        if len(self.P) != p or len(self.Q) != p:
            raise ValueError("projection/metric size != p")
        if check:
            problems = self.structure_problems()
            if problems:
                raise ValueError("; ".join(problems))

    @property
    def order(self) -> int:
        return self.algebra.order

    def structure_problems(self) -> list:
        A = self.algebra
        out = []
        if not amat_equal(A, amat_mul(A, self.P, self.P), self.P):
            out.append("P is not idempotent")
        if not amat_equal(A, amat_adjoint(A, self.Q), self.Q):
            out.append("Q is not Hermitian")
        if not amat_equal(A, amat_mul(A, self.Q, self.P), amat_mul(A, amat_adjoint(A, self.P), self.Q)):
            out.append("P is not self-adjoint for Q")
        return out

    def contains(self, x) -> bool:
        return all(self.algebra.equal(a, b) for a, b in zip(amat_apply(self.algebra, self.P, x), x))

    def check_element(self, x):
        if len(x) != self.p or not self.contains(x):
            raise NotInModule("column is not fixed by the projection")

    def inner(self, x, y):
        A = self.algebra
        acc = A.zero()
        for i in range(self.p):
            xi = x[i]
            if A.is_zero(xi):
                continue
            xa = A.adjoint(xi)
            for j in range(self.p):
                q = self.Q[i][j]
                if A.is_zero(q) or A.is_zero(y[j]):
                    continue
                acc = A.add(acc, A.mul(A.mul(xa, q), y[j]))
        return acc

    def right_act(self, x, a):
        return [self.algebra.mul(xi, a) for xi in x]

    def generators(self) -> list:
        """Columns of P."""
        return [[self.P[i][j] for i in range(self.p)] for j in range(self.p)]

    def scalar_spanning_set(self) -> list:
        """P (e_i a_t) over all i and basis elements a_t (finite algebras)."""
        A = self.algebra
        out = []
        for j in range(self.p):
            for b in A.basis():
                v = [A.mul(self.P[i][j], b) for i in range(self.p)]
                if not all(A.is_zero(c) for c in v):
                    out.append(v)
        return out

    def flat(self, x) -> list:
        return [c for a in x for c in a]

    def __repr__(self):
        return f"InnerProductModule({self.algebra!r}, p={self.p})"


def module_gram(xs: Sequence, E: InnerProductModule):
    for x in xs:
        E.check_element(x)
    return [[E.inner(x, y) for y in xs] for x in xs]


class BimoduleSpec:
    """A (B, A)-bimodule: an InnerProductModule over A plus a left action of B.

    For finite B the action is a list of p x p matrices over A, one per basis
    element of B; for function algebras B a partial ``left_apply(b, x)`` may be
    given instead.
    """

    def __init__(self, module: InnerProductModule, left_algebra, left_matrices=None, left_apply=None):
        self.module = module
        self.left_algebra = left_algebra
        self.left_matrices = left_matrices
        self.left_apply = left_apply
        if left_matrices is None and left_apply is None:
            raise ValueError("a bimodule needs a left action")

    @property
    def algebra(self):
        return self.module.algebra

    def left_matrix(self, b):
        A = self.algebra
        if self.left_matrices is None:
            raise TypeError("left action is only available pointwise")
        out = amat_zero(A, self.module.p, self.module.p)
        for c, M in zip(b, self.left_matrices):
            if not c.is_zero():
                out = amat_add(A, out, amat_map(lambda a: A.scale(c, a), M))
        return out

    def act(self, b, x):
        if self.left_matrices is None:
            return self.left_apply(b, x)
        return amat_apply(self.algebra, self.left_matrix(b), x)


def verify_bimodule(spec: BimoduleSpec) -> Report:
    """Left action: multiplicative, unital on E, preserves E, adjointable for <.,.>_A."""
    A, B, E = spec.algebra, spec.left_algebra, spec.module
    report = Report("verify-bimodule")
    mats = [spec.left_matrix(b) for b in B.basis()]
    P = E.P
    with report.timed("left_multiplicative") as box:
        box["verdict"] = "pass"
        for s, t in itertools.product(range(B.dim), repeat=2):
            lhs = amat_mul(A, spec.left_matrix(B.mul(B.basis_element(s), B.basis_element(t))), P)
            rhs = amat_mul(A, amat_mul(A, mats[s], mats[t]), P)
            if not amat_equal(A, lhs, rhs):
                box.update(verdict="fail", witness=[B.labels[s], B.labels[t]])
                break
    with report.timed("left_unital") as box:
        box["verdict"] = "pass" if amat_equal(A, amat_mul(A, spec.left_matrix(B.one()), P), P) else "fail"
    with report.timed("preserves_module") as box:
        box["verdict"] = "pass"
        for s in range(B.dim):
            if not amat_equal(A, amat_mul(A, P, amat_mul(A, mats[s], P)), amat_mul(A, mats[s], P)):
                box.update(verdict="fail", witness=[B.labels[s]])
                break
    with report.timed("left_adjointable") as box:
        box["verdict"] = "pass"
        Ph = amat_adjoint(A, P)
        for s in range(B.dim):
            lhs = amat_mul(A, amat_mul(A, Ph, amat_mul(A, amat_adjoint(A, mats[s]), E.Q)), P)
            adj = spec.left_matrix(B.adjoint(B.basis_element(s)))
            rhs = amat_mul(A, amat_mul(A, Ph, amat_mul(A, E.Q, adj)), P)
            if not amat_equal(A, lhs, rhs):
                box.update(verdict="fail", witness=[B.labels[s]])
                break
    return report


# -- complete positivity ---------------------------------------------------------------

def metric_verdict(E: InnerProductModule) -> PSDVerdict:
    A = E.algebra
    if not isinstance(A, FiniteStarAlgebra) or A.positions is None:
        return indeterminate("metric is not over a matrix algebra of scalars")
    return formal_psd_check(flatten_amat(A, E.Q))


def cp_check(E: InnerProductModule, xs: Sequence) -> PSDVerdict:
    """Positivity of the Gram (<x_i, x_j>_A) in M_n(A), flattened to scalars."""
    A = E.algebra
    if not isinstance(A, FiniteStarAlgebra) or A.positions is None:
        return indeterminate("complete positivity needs a matrix algebra over the scalars")
    xs = list(xs)
    gram = module_gram(xs, E)
    if not xs:
        return positive(formal_psd_check([]).certificate, via="empty")
    flat = flatten_amat(A, gram)
    qv = metric_verdict(E)
    if qv.is_positive:
        X = flatten_amat(A, amat_from_columns(A, xs))
        cert = qv.certificate.transform(X)
        if cert.verify(flat):
            return positive(cert, via="metric factorization")
    verdict = formal_psd_check(flat)
    verdict.info["via"] = "direct"
    return verdict


# -- classical limit of module metrics ---------------------------------------------------

def _det(A, M):
    """Determinant of a small matrix over a commutative coefficient ring (Laplace expansion)."""
    n = len(M)
    if n == 0:
        return A.one()
    if n == 1:
        return M[0][0]
    acc = A.zero()
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = A.mul(M[0][j], _det(A, minor))
        acc = A.add(acc, term) if j % 2 == 0 else A.sub(acc, term)
    return acc


class _Pointwise:
    """Commutative pointwise structure on observables (for classical limits)."""

    def __init__(self, signature, order):
        self.signature = signature
        self.order = order

    def zero(self):
        return Observable.zero(self.signature, self.order)

    def one(self):
        return Observable.constant(self.signature, 1, self.order)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def adjoint(self, a):
        return a.conj()

    def is_zero(self, a):
        return a.is_zero()

    def equal(self, a, b):
        return a == b

    def scale(self, c, a):
        return a.scale(c)


def _constant_part(A, a):
    if isinstance(A, FunctionAlgebra):
        return classical_limit_obs(a)
    return tuple(x.constant_term() for x in a)


def classical_limit_metric(E: InnerProductModule, points=None, seed: int = 0, n_points: int = 5):
    """Reduce P and Q modulo lambda and check the classical metric h0.

    Over a function algebra h0 is a matrix of polynomials; it is Hermitian when
    h0* = h0 as polynomials, strongly nondegenerate when the determinant of
    P0* h0 P0 + (1 - P0)*(1 - P0) is a nonzero constant, and its positivity is
    checked by formal PSD tests of h0 at rational sample points.  Over a finite
    matrix algebra the same checks run on the flattened constant matrices.
    Returns (classical module, Report).
    """
    A = E.algebra
    P0 = amat_map(lambda a: _constant_part(A, a), E.P)
    Q0 = amat_map(lambda a: _constant_part(A, a), E.Q)
    report = Report("classical-limit-metric")
    p = E.p
    if isinstance(A, FunctionAlgebra):
        C = _Pointwise(A.signature, A.order)
    else:
        C = A
    I = amat_identity(C, p)
    rest = amat_sub(C, I, P0)
    compressed = amat_add(C, amat_mul(C, amat_adjoint(C, P0), amat_mul(C, Q0, P0)),
                          amat_mul(C, amat_adjoint(C, rest), rest))

    if isinstance(A, FunctionAlgebra):
        det = _det(C, compressed)
        nondeg = det.degree() == 0 and not det.is_zero()
        detail = f"det = {det}"
    elif A.positions is not None:
        flat = flatten_amat(A, compressed)
        nondeg = la.rank(flat) == len(flat)
        detail = f"rank {la.rank(flat)} of {len(flat)}"
    else:
        nondeg, detail = False, "unsupported algebra"
    if not nondeg:
        raise NotStronglyNondegenerate(f"classical metric is not invertible ({detail})")
    report.add("h0_strongly_nondegenerate", "pass", detail=detail)
    report.add("h0_hermitian", amat_equal(C, amat_adjoint(C, Q0), Q0))

    if isinstance(A, FunctionAlgebra):
        rng = random.Random(seed)
        n = A.signature.nvars
        pts = list(points) if points is not None else (
            [[0] * n] + [[mpq(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(n)]
                         for _ in range(n_points - 1)])
        worst = None
        for pt in pts:
            h = [[x.evaluate(pt) for x in row] for row in amat_mul(C, amat_adjoint(C, P0), amat_mul(C, Q0, P0))]
            if not la.is_hermitian(h):
                worst = (pt, "not Hermitian")
                break
            v = formal_psd_check(h)
            if not v.is_positive:
                worst = (pt, str(v.value))
                break
        report.add("h0_positive", worst is None, witness=None if worst is None else [str(c) for c in worst[0]],
                   detail=f"{len(pts)} sample points")
    else:
        h = flatten_amat(A, amat_mul(A, amat_adjoint(A, P0), amat_mul(A, Q0, P0)))
        v = formal_psd_check(h) if la.is_hermitian(h) else None
        report.add("h0_positive", v is not None and v.is_positive)
    classical = InnerProductModule(A, p, P0, Q0, check=False)
    return classical, report


__all__ = [
    "BimoduleSpec", "InnerProductModule", "PreHilbertModule", "QuotientMap", "Representation",
    "adjoint_of", "amat_adjoint", "amat_apply", "amat_identity", "amat_mul", "amat_zero",
    "classical_limit_metric", "cp_check", "direct_sum", "flatten_amat", "gns", "kernel_quotient",
    "left_multiplication_matrices", "metric_verdict", "module_gram", "scalars_representation",
    "verify_bimodule", "verify_representation",
]

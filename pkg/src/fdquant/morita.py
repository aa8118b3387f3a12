"""Strong Morita equivalence bimodules between unital finite-dimensional *-algebras.

An equivalence bimodule is a (B, A)-bimodule E = P . A^p with the right
inner product <x, y>_A = x* Q y and a left B-valued inner product
_B<x, y>.  Fullness and nondegeneracy are decided by exact rank computations
over the scalars; dual bases come from ring solves of the unit equations.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from gmpy2 import mpq

from . import linalg as la
from .errors import AlgebraMismatch, DegenerateModule, NotFull
from .modrep import (BimoduleSpec, InnerProductModule, amat_add, amat_adjoint, amat_identity,
                     amat_mul, amat_zero, cp_check, flatten_amat, verify_bimodule)
from .positivity import formal_psd_check
from .report import Report
from .rieffel import rieffel_induce, verify_unitary_intertwiner
from .scalars import Scalar, Sign, ordered_sign
from .staralg import FiniteStarAlgebra, matrix_algebra


@dataclass
class EquivalenceBimoduleSpec:
    """(B, A)-bimodule with inner products on both sides."""

    bimodule: BimoduleSpec
    left_inner: Callable
    generators: list | None = None
    name: str = "E"
    frame: tuple | None = None  # (vectors, weights) when built as a dual

    def __post_init__(self):
        if self.generators is None:
            self.generators = self.module.generators()

    @property
    def module(self) -> InnerProductModule:
        return self.bimodule.module

    @property
    def A(self) -> FiniteStarAlgebra:
        return self.bimodule.algebra

    @property
    def B(self) -> FiniteStarAlgebra:
        return self.bimodule.left_algebra

    @property
    def order(self) -> int:
        return self.A.order

    def right_inner(self, x, y):
        return self.module.inner(x, y)

    def act_left(self, b, x):
        return self.bimodule.act(b, x)

    def act_right(self, x, a):
        return self.module.right_act(x, a)

    def scale(self, c: Scalar, x):
        return [self.A.scale(c, a) for a in x]

    def add(self, x, y):
        return [self.A.add(a, b) for a, b in zip(x, y)]

    def zero(self):
        return [self.A.zero() for _ in range(self.module.p)]

    def equal(self, x, y) -> bool:
        return all(self.A.equal(a, b) for a, b in zip(x, y))

    def spanning_set(self) -> list:
        return self.module.scalar_spanning_set()

    def __repr__(self):
        return f"EquivalenceBimoduleSpec({self.name}: {self.B.name} ~ {self.A.name}, p={self.module.p})"


# -- standard examples ------------------------------------------------------------

def standard_equivalence(A: FiniteStarAlgebra, n: int) -> EquivalenceBimoduleSpec:
    """A^n between M_n(A) (left, _B<x, y> = x y*) and A (right, <x, y>_A = sum x_i* y_i)."""
    B = matrix_algebra(A, n)
    E = InnerProductModule(A, n)
    mats = []
    for i in range(n):
        for j in range(n):
            for t in range(A.dim):
                X = amat_zero(A, n, n)
                X[i][j] = A.basis_element(t)
                mats.append(X)

    def left_inner(x, y):
        return B.from_grid([[A.mul(x[i], A.adjoint(y[j])) for j in range(n)] for i in range(n)])

    return EquivalenceBimoduleSpec(BimoduleSpec(E, B, left_matrices=mats), left_inner,
                                   name=f"{A.name}^{n}")


def identity_equivalence(A: FiniteStarAlgebra) -> EquivalenceBimoduleSpec:
    """A as an (A, A)-bimodule with _A<x, y> = x y* and <x, y>_A = x* y."""
    E = InnerProductModule(A, 1)
    mats = [[[A.basis_element(t)]] for t in range(A.dim)]

    def left_inner(x, y):
        return A.mul(x[0], A.adjoint(y[0]))

    return EquivalenceBimoduleSpec(BimoduleSpec(E, A, left_matrices=mats), left_inner, name=f"id({A.name})")


def projected_module(A: FiniteStarAlgebra, n: int, P) -> EquivalenceBimoduleSpec:
    """P . A^n with the left inner product x y* valued in all of M_n(A)."""
    B = matrix_algebra(A, n)
    E = InnerProductModule(A, n, projection=P)
    mats = []
    for i in range(n):
        for j in range(n):
            for t in range(A.dim):
                X = amat_zero(A, n, n)
                X[i][j] = A.basis_element(t)
                mats.append(amat_mul(A, P, amat_mul(A, X, P)))

    def left_inner(x, y):
        return B.from_grid([[A.mul(x[i], A.adjoint(y[j])) for j in range(n)] for i in range(n)])

    return EquivalenceBimoduleSpec(BimoduleSpec(E, B, left_matrices=mats), left_inner, name=f"P{A.name}^{n}")


# -- linear algebra over spanning sets ---------------------------------------------------

def _coords_matrix(columns) -> la.Matrix:
    """Columns given as flat Scalar lists -> matrix."""
    return la.columns_to_matrix([list(c) for c in columns]) if columns else []


def _flat(x) -> list:
    return [c for a in x for c in a]


def _span_rank(values) -> int:
    return la.rank(_coords_matrix(values)) if values else 0


def _right_nondegenerate(spec, U) -> tuple[bool, str]:
    dim = _span_rank([_flat(u) for u in U])
    if dim == 0:
        return False, "module is zero"
    cols = [[c for k in U for c in spec.right_inner(k, v)] for v in U]
    r = _span_rank(cols)
    return r == dim, f"rank {r} of module dimension {dim}"


def _left_nondegenerate(spec, U) -> tuple[bool, str]:
    dim = _span_rank([_flat(u) for u in U])
    if dim == 0:
        return False, "module is zero"
    cols = [[c for k in U for c in spec.left_inner(v, k)] for v in U]
    r = _span_rank(cols)
    return r == dim, f"rank {r} of module dimension {dim}"


def _random_element(spec, U, rng):
    x = spec.zero()
    for u in U:
        if rng.random() < 0.6:
            c = Scalar.series([(mpq(rng.randint(-3, 3), rng.randint(1, 2)), mpq(rng.randint(-2, 2), 1)),
                               (mpq(rng.randint(-2, 2), 1), 0)], spec.order)
            x = spec.add(x, spec.scale(c, u))
    return x


@dataclass
class SMESampleSpec:
    count: int = 5
    seed: int = 0


def verify_sme_axioms(spec: EquivalenceBimoduleSpec, sample_spec: SMESampleSpec = SMESampleSpec()) -> Report:
    """Compatibility, fullness, complete positivity and nondegeneracy of both inner products."""
    A, B = spec.A, spec.B
    report = Report("morita")
    report.data = {"seed": sample_spec.seed, "samples": sample_spec.count, "A": A.name, "B": B.name}
    report.extend(verify_bimodule(spec.bimodule), prefix="bimodule_")
    U = spec.spanning_set()
    rng = random.Random(sample_spec.seed)
    triples = [tuple(_random_element(spec, U, rng) for _ in range(3)) for _ in range(sample_spec.count)]
    a_s = [A.random_element(rng) for _ in range(sample_spec.count)]
    b_s = [B.random_element(rng) for _ in range(sample_spec.count)]

    def check(name, predicate):
        with report.timed(name) as box:
            box["verdict"] = "pass"
            for k, (x, y, z) in enumerate(triples):
                if not predicate(k, x, y, z):
                    box.update(verdict="fail", witness={"sample": k})
                    break

    check("right_inner_hermitian", lambda k, x, y, z:
          A.equal(A.adjoint(spec.right_inner(x, y)), spec.right_inner(y, x)))
    check("right_inner_A_linear", lambda k, x, y, z:
          A.equal(spec.right_inner(x, spec.act_right(y, a_s[k])), A.mul(spec.right_inner(x, y), a_s[k])))
    check("left_inner_hermitian", lambda k, x, y, z:
          B.equal(B.adjoint(spec.left_inner(x, y)), spec.left_inner(y, x)))
    check("left_inner_B_linear", lambda k, x, y, z:
          B.equal(spec.left_inner(spec.act_left(b_s[k], x), y), B.mul(b_s[k], spec.left_inner(x, y))))
    check("left_action_adjointable", lambda k, x, y, z:
          A.equal(spec.right_inner(spec.act_left(b_s[k], x), y),
                  spec.right_inner(x, spec.act_left(B.adjoint(b_s[k]), y))))
    check("right_action_adjointable", lambda k, x, y, z:
          B.equal(spec.left_inner(spec.act_right(x, a_s[k]), y),
                  spec.left_inner(x, spec.act_right(y, A.adjoint(a_s[k])))))
    check("inner_products_compatible", lambda k, x, y, z:
          spec.equal(spec.act_left(spec.left_inner(x, y), z), spec.act_right(x, spec.right_inner(y, z))))

    with report.timed("right_full") as box:
        r = _span_rank([spec.right_inner(u, v) for u in U for v in U])
        box.update(verdict="pass" if r == A.dim else "fail", detail=f"span rank {r} of {A.dim}")
    with report.timed("left_full") as box:
        r = _span_rank([spec.left_inner(u, v) for u in U for v in U])
        box.update(verdict="pass" if r == B.dim else "fail", detail=f"span rank {r} of {B.dim}")
    with report.timed("right_cp") as box:
        v = cp_check(spec.module, spec.generators)
        box["verdict"] = v.report_verdict
    with report.timed("left_cp") as box:
        v = left_cp_check(spec)
        box["verdict"] = v.report_verdict
    with report.timed("right_nondegenerate") as box:
        ok, detail = _right_nondegenerate(spec, U)
        box.update(verdict="pass" if ok else "fail", detail=detail)
    with report.timed("left_nondegenerate") as box:
        ok, detail = _left_nondegenerate(spec, U)
        box.update(verdict="pass" if ok else "fail", detail=detail)
    return report


def left_cp_check(spec: EquivalenceBimoduleSpec, xs=None):
    B = spec.B
    xs = spec.generators if xs is None else xs
    gram = [[spec.left_inner(x, y) for y in xs] for x in xs]
    if not xs:
        return formal_psd_check([])
    return formal_psd_check(flatten_amat(B, gram))


# -- dual bases -----------------------------------------------------------------------

@dataclass
class DualBases:
    """x = sum_i xi_i <eta_i, x>_A = sum_j _B<x, y_j> x_j."""

    xi: list = field(default_factory=list)
    eta: list = field(default_factory=list)
    x: list = field(default_factory=list)
    y: list = field(default_factory=list)

    def reconstruct_right(self, spec, v):
        acc = spec.zero()
        for a, b in zip(self.xi, self.eta):
            acc = spec.add(acc, spec.act_right(a, spec.right_inner(b, v)))
        return acc

    def reconstruct_left(self, spec, v):
        acc = spec.zero()
        for a, b in zip(self.x, self.y):
            acc = spec.add(acc, spec.act_left(spec.left_inner(v, b), a))
        return acc

    def verify(self, spec, elements) -> Report:
        report = Report("dual-bases")
        bad_r = [k for k, v in enumerate(elements) if not spec.equal(self.reconstruct_right(spec, v), v)]
        bad_l = [k for k, v in enumerate(elements) if not spec.equal(self.reconstruct_left(spec, v), v)]
        report.add("reconstruct_via_right_inner", not bad_r, witness=bad_r[:1] or None)
        report.add("reconstruct_via_left_inner", not bad_l, witness=bad_l[:1] or None)
        return report


def _solve_unit(values, unit):
    M = _coords_matrix([list(v) for v in values])
    return la.solve(M, list(unit))


def _frame(spec, U, side: str):
    """Weights c over pairs (u_k, u_l) with sum c * inner = 1, diagonal pairs tried first."""
    alg = spec.B if side == "left" else spec.A
    if side == "left":
        inner = spec.left_inner
    else:
        def inner(u, v):
            return spec.right_inner(v, u)
    diag = [(k, k) for k in range(len(U))]
    full = [(k, l) for k in range(len(U)) for l in range(len(U))]
    for pairs in (diag, full):
        c = _solve_unit([inner(U[k], U[l]) for k, l in pairs], alg.one())
        if c is not None:
            return [(k, l, w) for (k, l), w in zip(pairs, c) if not w.is_zero()]
    raise NotFull(f"the unit of {alg.name} is not a combination of {side} inner products")


def dual_bases(spec: EquivalenceBimoduleSpec) -> DualBases:
    U = spec.spanning_set()
    db = DualBases()
    for k, l, w in _frame(spec, U, "left"):
        db.xi.append(spec.scale(w, U[k]))
        db.eta.append(U[l])
    for k, l, w in _frame(spec, U, "right"):
        db.x.append(spec.scale(w, U[k]))
        db.y.append(U[l])
    report = db.verify(spec, U)
    if not report.ok:
        raise NotFull("dual bases failed to reconstruct the module")
    return db


# -- the dual (conjugate) bimodule -------------------------------------------------------------

def positive_frame(spec: EquivalenceBimoduleSpec):
    """Vectors x_j and weights c_j >= 0 with sum_j c_j <x_j, x_j>_A = 1_A."""
    U = spec.spanning_set()
    c = _solve_unit([spec.right_inner(u, u) for u in U], spec.A.one())
    if c is None:
        raise NotFull("no diagonal frame for the right inner product")
    frame = [(u, w) for u, w in zip(U, c) if not w.is_zero()]
    for _, w in frame:
        if not w.is_real() or ordered_sign(w) is Sign.NEGATIVE:
            raise NotFull("frame weights are not positive")
    return [u for u, _ in frame], [w for _, w in frame]


def dual_bimodule(spec: EquivalenceBimoduleSpec) -> EquivalenceBimoduleSpec:
    """The conjugate module as an (A, B)-bimodule, presented as P' . B^m.

    With a frame sum_j c_j <x_j, x_j>_A = 1_A the map u |-> (_B<x_i, u>)_i
    embeds the conjugate module into B^m with image P' B^m, where
    P'_ij = _B<x_i, x_j> c_j, metric Q' = diag(c), and left action
    rho(a)_ij = c_j _B<x_i, x_j a*>.
    """
    A, B = spec.A, spec.B
    xs, cs = positive_frame(spec)
    m = len(xs)
    P = [[B.scale(cs[j], spec.left_inner(xs[i], xs[j])) for j in range(m)] for i in range(m)]
    Q = amat_zero(B, m, m)
    for j in range(m):
        Q[j][j] = B.scale(cs[j], B.one())
    module = InnerProductModule(B, m, projection=P, metric=Q)
    mats = []
    for a in A.basis():
        a_star = A.adjoint(a)
        mats.append([[B.scale(cs[j], spec.left_inner(xs[i], spec.act_right(xs[j], a_star)))
                      for j in range(m)] for i in range(m)])

    def element(xi):
        # x_xi = sum_j c_j xi_j^* . x_j
        acc = spec.zero()
        for j in range(m):
            acc = spec.add(acc, spec.scale(cs[j], spec.act_left(B.adjoint(xi[j]), xs[j])))
        return acc

    def left_inner(xi, eta):
        return spec.right_inner(element(xi), element(eta))

    dual = EquivalenceBimoduleSpec(BimoduleSpec(module, A, left_matrices=mats), left_inner,
                                   name=f"conj({spec.name})", frame=(xs, cs))
    dual.element = element
    dual.embed = lambda u: [spec.left_inner(x, u) for x in xs]
    return dual


# -- composition -----------------------------------------------------------------------

def compose_bimodules(E1: EquivalenceBimoduleSpec, E2: EquivalenceBimoduleSpec) -> EquivalenceBimoduleSpec:
    """E1 (x)_A E2 for a (B, A)-bimodule E1 and an (A, C)-bimodule E2."""
    A = E1.A
    if E2.B != A:
        raise AlgebraMismatch("middle algebras differ")
    C = E2.A
    p1, p2 = E1.module.p, E2.module.p
    n = p1 * p2

    def rho2(X):
        blocks = [[E2.bimodule.left_matrix(x) for x in row] for row in X]
        out = amat_zero(C, n, n)
        for i in range(p1):
            for j in range(p1):
                for r in range(p2):
                    for s in range(p2):
                        out[i * p2 + r][j * p2 + s] = blocks[i][j][r][s]
        return out

    I_P2 = amat_zero(C, n, n)
    I_Q2 = amat_zero(C, n, n)
    for i in range(p1):
        for r in range(p2):
            for s in range(p2):
                I_P2[i * p2 + r][i * p2 + s] = E2.module.P[r][s]
                I_Q2[i * p2 + r][i * p2 + s] = E2.module.Q[r][s]
    P = amat_mul(C, rho2(E1.module.P), I_P2)
    Q = amat_mul(C, amat_adjoint(C, P), amat_mul(C, amat_mul(C, I_Q2, rho2(E1.module.Q)), P))
    module = InnerProductModule(C, n, projection=P, metric=Q)
    mats = [amat_mul(C, rho2(X), P) for X in E1.bimodule.left_matrices]
    B = E1.B
    P1 = E1.module.P
    cols1 = [[P1[r][i] for r in range(p1)] for i in range(p1)]

    def left_inner(Phi, Psi):
        acc = B.zero()
        for i in range(p1):
            phi = Phi[i * p2:(i + 1) * p2]
            if all(C.is_zero(c) for c in phi):
                continue
            for j in range(p1):
                psi = Psi[j * p2:(j + 1) * p2]
                if all(C.is_zero(c) for c in psi):
                    continue
                a = E2.left_inner(phi, psi)
                acc = B.add(acc, E1.left_inner(E1.act_right(cols1[i], a), cols1[j]))
        return acc

    spec = EquivalenceBimoduleSpec(BimoduleSpec(module, B, left_matrices=mats), left_inner,
                                   name=f"{E1.name}*{E2.name}")
    ok, detail = _right_nondegenerate(spec, spec.spanning_set())
    if not ok:
        raise DegenerateModule(f"composed inner product is degenerate ({detail})")
    return spec


# -- round trips -------------------------------------------------------------------------

def roundtrip_equivalence_test(spec: EquivalenceBimoduleSpec, H) -> Report:
    """Induce H along E then along its conjugate and verify the canonical contraction back to H."""
    A = spec.A
    report = Report("roundtrip")
    K = rieffel_induce(spec.bimodule, H, verify=False)
    dual = dual_bimodule(spec)
    L = rieffel_induce(dual.bimodule, K, verify=False)
    xs, cs = dual.frame
    E = spec.module
    d = H.rank
    p = E.p
    order = A.order
    # row operator R_j = [rho_H((x_j^* Q P)_i)]_i : H^p -> H
    QP = amat_mul(A, E.Q, E.P)
    blocks = []
    for x, c in zip(xs, cs):
        row = amat_mul(A, [[A.adjoint(v) for v in x]], QP)[0]
        R = la.block([[H.matrix(a) for a in row]])
        R = la.scale(c, R)
        blocks.append(la.matmul(R, K.quotient.lift) if K.quotient.rank else la.zeros(d, 0, order))
    U_amb = la.block([blocks]) if blocks else []
    if L.quotient.rank:
        U = la.matmul(U_amb, la.matmul(L.tensor.idempotent, L.quotient.lift))
    else:
        U = la.zeros(d, 0, order)
    report.data = {"rank_H": d, "rank_induced": K.rank, "rank_roundtrip": L.rank, "frame_size": len(xs)}
    report.extend(verify_unitary_intertwiner(U, L, H))
    report.add("induced_gram_positive", formal_psd_check(K.gram).is_positive)
    return report


__all__ = [
    "DualBases", "EquivalenceBimoduleSpec", "SMESampleSpec", "compose_bimodules", "dual_bases",
    "dual_bimodule", "identity_equivalence", "left_cp_check", "positive_frame", "projected_module",
    "roundtrip_equivalence_test", "standard_equivalence", "verify_sme_axioms",
]

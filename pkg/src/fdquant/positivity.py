"""Positive functionals and formal positive semidefiniteness over C[[lambda]].

A Hermitian matrix H is positive when v* H v >= 0 in the ordered ring for
every vector v.  ``formal_psd_check`` decides this with a pivoted LDL* that
always eliminates on an entry of minimal lambda-valuation; a positive run
yields a certificate H = sum_j c_j lambda^{m_j} v_j v_j*, a negative run a
vector with negative expectation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from . import linalg as la
from .errors import (DegreeCapExceeded, NotHermitian, NotPositiveFunctional,
                     UnsupportedFunctionalShape)
from .scalars import Scalar, _order_of, scalar_to_json, to_mpq
from .staralg import (AlgebraElement, FiniteStarAlgebra, FunctionAlgebra, Kind, Observable,
                      PhaseSpaceSignature, StarProductRule, Variant, canonical_to_conjugate,
                      conjugate_to_canonical, matrix_algebra, star)


# -- certificates and verdicts ----------------------------------------------

@dataclass
class PositivityCertificate:
    """H = sum_j weights[j] * lambda**powers[j] * vectors[j] vectors[j]^*."""

    weights: list = field(default_factory=list)
    powers: list = field(default_factory=list)
    vectors: list = field(default_factory=list)
    size: int = 0
    order: int = 0

    def __len__(self):
        return len(self.vectors)

    def expand(self) -> la.Matrix:
        n = self.size
        out = la.zeros(n, n, self.order)
        for c, m, v in zip(self.weights, self.powers, self.vectors):
            s = Scalar.lam(self.order, m) * c
            sv = [s * x for x in v]
            cv = [x.conj() for x in v]
            for i in range(n):
                if sv[i].is_zero():
                    continue
                row = out[i]
                for j in range(n):
                    if not cv[j].is_zero():
                        row[j] = row[j] + sv[i] * cv[j]
        return out

    def verify(self, H: la.Matrix) -> bool:
        return (all(c > 0 for c in self.weights) and all(m >= 0 for m in self.powers)
                and la.equal(self.expand(), H))

    def transform(self, X: la.Matrix) -> "PositivityCertificate":
        """Certificate for X* H X given one for H."""
        Xh = la.adjoint(X)
        vectors = [la.matvec(Xh, v) for v in self.vectors]
        return PositivityCertificate(list(self.weights), list(self.powers), vectors, len(Xh), self.order)

    def to_json(self) -> list:
        return [{"weight": str(c), "lambda_power": m, "vector": [scalar_to_json(x) for x in v]}
                for c, m, v in zip(self.weights, self.powers, self.vectors)]


class VerdictKind(enum.Enum):
    POSITIVE = "positive"
    NOT_POSITIVE = "not_positive"
    INDETERMINATE = "indeterminate"


@dataclass
class PSDVerdict:
    kind: VerdictKind
    certificate: PositivityCertificate | None = None
    witness: list | None = None
    value: Scalar | None = None
    reason: str = ""
    info: dict = field(default_factory=dict)

    @property
    def is_positive(self) -> bool:
        return self.kind is VerdictKind.POSITIVE

    @property
    def is_not_positive(self) -> bool:
        return self.kind is VerdictKind.NOT_POSITIVE

    @property
    def report_verdict(self) -> str:
        return {VerdictKind.POSITIVE: "pass", VerdictKind.NOT_POSITIVE: "fail"}.get(self.kind, "indeterminate")

    def to_json(self) -> dict:
        out = {"verdict": self.kind.value}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        if self.witness is not None:
            out["witness"] = [scalar_to_json(x) for x in self.witness]
        if self.value is not None:
            out["value"] = str(self.value)
        if self.reason:
            out["reason"] = self.reason
        if self.info:
            out.update(self.info)
        return out

    def __repr__(self):
        if self.is_positive:
            return f"Positive({len(self.certificate)} squares)"
        if self.is_not_positive:
            return f"NotPositive(value={self.value})"
        return f"Indeterminate({self.reason})"


def positive(cert, **info) -> PSDVerdict:
    return PSDVerdict(VerdictKind.POSITIVE, certificate=cert, info=info)


def not_positive(witness, value, reason="", **info) -> PSDVerdict:
    return PSDVerdict(VerdictKind.NOT_POSITIVE, witness=witness, value=value, reason=reason, info=info)


def indeterminate(reason, **info) -> PSDVerdict:
    return PSDVerdict(VerdictKind.INDETERMINATE, reason=reason, info=info)


def formal_psd_check(H: la.Matrix, ctx=None) -> PSDVerdict:
    """Decide v*Hv >= 0 for all v, with a certificate or a negative witness."""
    n = len(H)
    order = H[0][0].order if n else _order_of(ctx)
    if ctx is not None and n and _order_of(ctx) != order:
        raise ValueError("context order differs from matrix order")
    if not la.is_hermitian(H):
        raise NotHermitian("formal_psd_check needs a Hermitian matrix")
    res = la.hermitian_ldl(H, stop_on_indefinite=True)
    if res.witness is not None:
        return not_positive(res.witness, res.witness_value)
    cert = PositivityCertificate(size=n, order=order)
    for p in res.pivots:
        d = res.diagonal[p]
        m = d.valuation()
        c = d.re[m]
        s = d.unshift(m) * (1 / c)
        root = s.sqrt_real_unit()
        cert.weights.append(c)
        cert.powers.append(m)
        cert.vectors.append([root * x.conj() for x in res.Winv[p]])
    if not cert.verify(H):
        # the congruence is exact, so this signals a bug rather than an input property
        raise AssertionError("positivity certificate failed to re-expand")
    return positive(cert)


# -- linear functionals ---------------------------------------------------------

class LinearFunctional:
    """A scalar-valued linear map on an algebra.

    ``kind`` is ``"covector"`` (finite algebra, coordinates), ``"point"``
    (function algebra, evaluation at ``point`` after the smoothing operator
    exp(s * Delta) with s = ``smoothing`` and Delta = sum_i d_xi^2 + d_pi^2 =
    4 sum_i d_zi d_zbari), or ``"monomial"`` (function algebra, values on
    monomials of degree <= ``cap``).
    """

    def __init__(self, algebra, kind: str, coords=None, point=None, smoothing=None,
                 values=None, cap=None):
        self.algebra = algebra
        self.kind = kind
        self.order = algebra.order
        if kind == "covector":
            if not isinstance(algebra, FiniteStarAlgebra):
                raise UnsupportedFunctionalShape("covector functionals need a finite algebra")
            coords = list(coords)
            if len(coords) != algebra.dim:
                raise ValueError("covector length != algebra dimension")
            self.coords = coords
        elif kind == "point":
            if not isinstance(algebra, FunctionAlgebra):
                raise UnsupportedFunctionalShape("point evaluations need a function algebra")
            pt = [p if isinstance(p, Scalar) else Scalar.constant(p, self.order) for p in point]
            if len(pt) != algebra.signature.nvars:
                raise ValueError("point has the wrong number of coordinates")
            self.point = pt
            self.smoothing = smoothing if smoothing is not None else Scalar.zero(self.order)
        elif kind == "monomial":
            if not isinstance(algebra, FunctionAlgebra):
                raise UnsupportedFunctionalShape("monomial covectors need a function algebra")
            self.values = {tuple(e): v for e, v in values.items()}
            self.cap = cap
        else:
            raise UnsupportedFunctionalShape(f"unknown functional kind {kind!r}")

    @classmethod
    def covector(cls, algebra, coords):
        return cls(algebra, "covector", coords=coords)

    @classmethod
    def point_evaluation(cls, algebra, point, smoothing=None):
        return cls(algebra, "point", point=point, smoothing=smoothing)

    @classmethod
    def on_monomials(cls, algebra, values, cap):
        return cls(algebra, "monomial", values=values, cap=cap)

    def __call__(self, a) -> Scalar:
        return functional_eval(self, a)

    def smooth(self, f: Observable) -> Observable:
        """Apply exp(s * Delta) to f (finite because Delta lowers degree by 2)."""
        if self.smoothing.is_zero():
            return f
        sig = f.signature
        n = sig.dof
        out = f
        term = f
        k = 1
        while not term.is_zero():
            lap = Observable.zero(sig, f.order)
            for i in range(n):
                if sig.kind is Kind.CANONICAL:
                    lap = lap + term.d(i).d(i) + term.d(n + i).d(n + i)
                else:
                    lap = lap + term.d(i).d(n + i) * 4
            term = lap.scale(self.smoothing) * mpq(1, k)
            out = out + term
            k += 1
        return out

    def __repr__(self):
        return f"LinearFunctional({self.kind} on {self.algebra!r})"


def _data(a):
    return a.data if isinstance(a, AlgebraElement) else a


def functional_eval(omega: LinearFunctional, a) -> Scalar:
    a = _data(a)
    if omega.kind == "covector":
        acc = Scalar.zero(omega.order)
        for c, x in zip(omega.coords, a):
            if not c.is_zero() and not x.is_zero():
                acc = acc + c * x
        return acc
    if omega.kind == "point":
        return omega.smooth(a).evaluate(omega.point)
    acc = Scalar.zero(omega.order)
    for e, c in a.terms.items():
        if sum(e) > omega.cap:
            raise DegreeCapExceeded(f"monomial of degree {sum(e)} beyond functional cap {omega.cap}")
        v = omega.values.get(e)
        if v is not None:
            acc = acc + c * v
    return acc


def trace_functional(A: FiniteStarAlgebra, normalized: bool = True) -> LinearFunctional:
    """Trace of the matrix-unit presentation (normalized to a state by default)."""
    if A.positions is None:
        raise UnsupportedFunctionalShape("trace needs a matrix-unit algebra")
    w = Scalar.constant(mpq(1, A.matrix_size) if normalized else 1, A.order)
    z = Scalar.zero(A.order)
    return LinearFunctional.covector(A, [w if r == c else z for r, c in A.positions])


def density_functional(A: FiniteStarAlgebra, rho: la.Matrix) -> LinearFunctional:
    """a |-> tr(rho a) for a matrix-unit algebra."""
    if A.positions is None:
        raise UnsupportedFunctionalShape("density functionals need a matrix-unit algebra")
    return LinearFunctional.covector(A, [rho[c][r] for r, c in A.positions])


def gram_basis(algebra, basis_or_cap):
    """Basis used to test positivity: algebra basis, or monomials up to a cap."""
    if isinstance(algebra, FiniteStarAlgebra):
        return algebra.basis() if basis_or_cap is None or isinstance(basis_or_cap, int) else list(basis_or_cap)
    if isinstance(basis_or_cap, int):
        return [algebra.monomial(e) for e in algebra.monomial_basis(basis_or_cap)]
    if basis_or_cap is None:
        raise ValueError("function algebras need a degree cap")
    return list(basis_or_cap)


def functional_gram(omega: LinearFunctional, basis: list) -> la.Matrix:
    """G_ij = omega(e_i^* e_j) (Hermitian by construction for Hermitian omega)."""
    alg = omega.algebra
    n = len(basis)
    G = la.zeros(n, n, omega.order)
    adj = [alg.adjoint(b) for b in basis]
    for i in range(n):
        for j in range(n):
            G[i][j] = functional_eval(omega, alg.mul(adj[i], basis[j]))
    return G


def is_positive_functional(omega: LinearFunctional, algebra=None, basis_or_cap=None) -> PSDVerdict:
    """Gram test of omega(a^* a) >= 0 on the span of a basis.

    For function algebras the verdict covers arguments of degree <= cap only;
    the cap is recorded in ``info``.
    """
    algebra = algebra or omega.algebra
    basis = gram_basis(algebra, basis_or_cap)
    G = functional_gram(omega, basis)
    info = {"basis_size": len(basis)}
    if isinstance(algebra, FunctionAlgebra):
        info["degree_cap"] = basis_or_cap
    if not la.is_hermitian(G):
        i, j = next((i, j) for i in range(len(G)) for j in range(len(G)) if G[i][j] != G[j][i].conj())
        return PSDVerdict(VerdictKind.NOT_POSITIVE, reason=f"omega is not Hermitian on basis pair ({i}, {j})",
                          info=info)
    verdict = formal_psd_check(G)
    verdict.info.update(info)
    verdict.info["gram"] = G
    return verdict


def witness_element(algebra, basis: list, witness: list):
    """The algebra element sum_i w_i e_i behind a Gram witness vector."""
    acc = algebra.zero()
    for w, b in zip(witness, basis):
        if not w.is_zero():
            acc = algebra.add(acc, algebra.scale(w, b))
    return acc


def require_positive(omega, algebra=None, basis_or_cap=None) -> PSDVerdict:
    verdict = is_positive_functional(omega, algebra, basis_or_cap)
    if not verdict.is_positive:
        raise NotPositiveFunctional("functional is not positive", verdict)
    return verdict


# -- positivity of algebra elements --------------------------------------------------

def _nonreal_witness(M: la.Matrix, order: int):
    n = len(M)
    for i in range(n):
        for j in range(n):
            if M[i][j] != M[j][i].conj():
                candidates = []
                if i == j:
                    candidates.append({i: Scalar.one(order)})
                else:
                    candidates.append({i: Scalar.one(order), j: Scalar.one(order)})
                    candidates.append({i: Scalar.one(order), j: Scalar.i(order)})
                    candidates.append({i: Scalar.one(order)})
                    candidates.append({j: Scalar.one(order)})
                for cand in candidates:
                    v = [cand.get(k, Scalar.zero(order)) for k in range(n)]
                    val = la.inner(v, M, v)
                    if not val.is_real():
                        return v, val
    return None, None


def element_positivity_check(a: AlgebraElement) -> PSDVerdict:
    """Positivity of an element of a matrix algebra over the scalars."""
    alg = a.parent
    if not isinstance(alg, FiniteStarAlgebra) or alg.positions is None:
        return indeterminate("element positivity needs a matrix algebra over the scalars")
    M = alg.flatten(a.data)
    if not la.is_hermitian(M):
        v, val = _nonreal_witness(M, alg.order)
        return not_positive(v, val, reason="element is not Hermitian (non-real expectation value)")
    return formal_psd_check(M)


# -- the decomposition lemma ------------------------------------------------------------

def lemma_decompose(Omega: LinearFunctional, n: int):
    """Representation pi of A and vectors phi_1..phi_n with
    n * Omega(A) = sum_ij <phi_i, pi(a_ij) phi_j> for A in M_n(A).

    Runs GNS on M_n(A); phi_i = sum_j psi_{E_ji}; pi(a) = Pi(a * 1_n).
    """
    from .modrep import Representation, gns

    Mn = Omega.algebra
    if getattr(Mn, "block_n", None) != n:
        raise ValueError(f"functional must live on M_{n}(A) built by matrix_algebra")
    base = Mn.base
    big = gns(Mn, Omega)
    phis = []
    for i in range(n):
        acc = None
        for j in range(n):
            v = big.vector(Mn.elementary_matrix(j, i))
            acc = v if acc is None else [x + y for x, y in zip(acc, v)]
        phis.append(acc)
    actions = [big.matrix(Mn.diagonal_embedding(b)) for b in base.basis()]
    pi = Representation(base, big.module, actions)
    return pi, phis


def functional_from_rep(pi, phis: Sequence[list], n: int) -> LinearFunctional:
    """Omega(A) = (1/n) sum_ij <phi_i, pi(a_ij) phi_j> on M_n(A)."""
    base = pi.algebra
    Mn = matrix_algebra(base, n)
    G = pi.module.gram
    inv_n = Scalar.constant(mpq(1, n), base.order)
    coords = []
    mats = [pi.matrix(b) for b in base.basis()]
    for i in range(n):
        for j in range(n):
            for t in range(base.dim):
                coords.append(la.inner(phis[i], G, la.matvec(mats[t], phis[j])) * inv_n)
    return LinearFunctional.covector(Mn, coords)


# -- positive deformation of point evaluations ------------------------------------------------

def wick_in_canonical(f: Observable, g: Observable) -> Observable:
    """The Wick product transported to canonical coordinates via z = x + i p."""
    return conjugate_to_canonical(star(canonical_to_conjugate(f), canonical_to_conjugate(g),
                                       StarProductRule.wick()))


def smoothing_operator(c, order: int, dof: int = 1):
    """The map f |-> exp(c * lambda * Delta) f on canonical observables."""
    sig = PhaseSpaceSignature.canonical(dof)
    s = Scalar.lam(order) * to_mpq(c) if not isinstance(c, Scalar) else c
    dummy = FunctionAlgebra(StarProductRule.moyal(), sig, order)
    helper = LinearFunctional.point_evaluation(dummy, [0] * sig.nvars, s)
    return helper.smooth


def intertwining_residual(c, f: Observable, g: Observable) -> Observable:
    """S(f *_Moyal g) - S(f) *_Wick S(g) with S = exp(c lambda Delta)."""
    S = smoothing_operator(c, f.order, f.signature.dof)
    return S(star(f, g, StarProductRule.moyal())) - wick_in_canonical(S(f), S(g))


def _test_pairs(dof: int, order: int, degree: int = 3):
    sig = PhaseSpaceSignature.canonical(dof)
    alg = FunctionAlgebra(StarProductRule.moyal(), sig, order)
    monos = [alg.monomial(e) for e in alg.monomial_basis(degree)]
    return [(f, g) for f in monos for g in monos]


def calibrate_smoothing_constant(order: int = 2, dof: int = 1) -> mpq:
    """Solve S(f *_M g) = S(f) *_W S(g) for c, then confirm it on all monomial pairs of degree <= 3.

    On quadratic inputs the residual is affine in c, so two evaluations fix c.
    """
    order = max(order, 2)
    sig = PhaseSpaceSignature.canonical(dof)
    x = Observable.variable(sig, 0, order)
    p = Observable.variable(sig, dof, order)
    i = Scalar.i(order)
    z, zb = x + p.scale(i), x - p.scale(i)
    r0 = intertwining_residual(0, z, zb)
    r1 = intertwining_residual(1, z, zb)
    c = None
    for e in set(r0.terms) | set(r1.terms):
        a = r0.coefficient(e)
        b = r1.coefficient(e)
        for k in range(order + 1):
            a_re, b_re = a.re[k], b.re[k]
            if b_re != a_re:
                c = -a_re / (b_re - a_re)
                break
        if c is not None:
            break
    if c is None:
        raise ArithmeticError("residual does not depend on the smoothing constant")
    for f, g in _test_pairs(dof, order):
        if not intertwining_residual(c, f, g).is_zero():
            raise ArithmeticError(f"no smoothing constant intertwines Moyal and Wick (c={c} fails)")
    return c


_CALIBRATED: dict = {}


def smoothing_constant(dof: int = 1) -> mpq:
    if dof not in _CALIBRATED:
        _CALIBRATED[dof] = calibrate_smoothing_constant(dof=dof)
    return _CALIBRATED[dof]


def deform_classical_functional(omega0: LinearFunctional, rule: StarProductRule = None, ctx=None) -> LinearFunctional:
    """Positive deformation delta_q o exp(c lambda Delta) of a point evaluation on the Moyal algebra."""
    rule = rule or StarProductRule.moyal()
    if omega0.kind != "point" or not omega0.smoothing.is_zero():
        raise UnsupportedFunctionalShape("only undeformed point evaluations can be deformed")
    alg = omega0.algebra
    if rule.variant is Variant.WICK:
        return omega0
    if rule.variant is not Variant.MOYAL or alg.rule.variant is not Variant.MOYAL:
        raise UnsupportedFunctionalShape("positive deformation is implemented for the Moyal rule only")
    order = _order_of(ctx) if ctx is not None else alg.order
    if order != alg.order:
        raise ValueError("context order differs from the algebra order")
    c = smoothing_constant(alg.signature.dof)
    return LinearFunctional.point_evaluation(alg, omega0.point, Scalar.lam(order) * c)


__all__ = [
    "LinearFunctional", "PSDVerdict", "PositivityCertificate", "VerdictKind",
    "calibrate_smoothing_constant", "deform_classical_functional", "density_functional",
    "element_positivity_check", "formal_psd_check", "functional_eval", "functional_from_rep",
    "functional_gram", "intertwining_residual", "is_positive_functional", "lemma_decompose",
    "require_positive", "smoothing_constant", "trace_functional", "wick_in_canonical",
    "witness_element",
]

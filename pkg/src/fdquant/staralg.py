"""Star products on polynomial observables and finite-dimensional *-algebras.

Observables are polynomials on R^{2n} (canonical coordinates x, p) or on C^n
(holomorphic/antiholomorphic coordinates z, zbar) with ``Scalar``
coefficients.  A ``StarProductRule`` supplies, for each lambda-order r, a
finite table of bidifferential terms ``coeff * d^L f * d^R g``; ``star``
sums them up to the truncation order.
"""

from __future__ import annotations

import enum
import itertools
import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from gmpy2 import mpq

from .errors import AlgebraMismatch, RuleSignatureMismatch, SignatureMismatch
from .report import Report
from .scalars import DEFAULT_ORDER, Scalar, TruncationContext, _order_of, to_mpq

_ZERO = mpq(0)


class Kind(enum.Enum):
    CANONICAL = "canonical"
    CONJUGATE = "conjugate"


@dataclass(frozen=True)
class PhaseSpaceSignature:
    """Variables x_1..x_n, p_1..p_n (canonical) or z_1..z_n, zbar_1..zbar_n (conjugate)."""

    kind: Kind
    dof: int

    def __post_init__(self):
        if self.dof < 1:
            raise ValueError("dof must be positive")
        if not isinstance(self.kind, Kind):
            object.__setattr__(self, "kind", Kind(self.kind))

    @classmethod
    def canonical(cls, dof: int = 1) -> "PhaseSpaceSignature":
        return cls(Kind.CANONICAL, dof)

    @classmethod
    def conjugate(cls, dof: int = 1) -> "PhaseSpaceSignature":
        return cls(Kind.CONJUGATE, dof)

    @property
    def nvars(self) -> int:
        return 2 * self.dof

    @property
    def names(self) -> list[str]:
        n = self.dof
        suffix = (lambda i: str(i + 1)) if n > 1 else (lambda i: "")
        if self.kind is Kind.CANONICAL:
            return [f"x{suffix(i)}" for i in range(n)] + [f"p{suffix(i)}" for i in range(n)]
        return [f"z{suffix(i)}" for i in range(n)] + [f"zb{suffix(i)}" for i in range(n)]

    def partner(self, k: int) -> int:
        """Index of the variable that complex conjugation sends variable k to."""
        if self.kind is Kind.CANONICAL:
            return k
        n = self.dof
        return k + n if k < n else k - n


def _monomials_up_to(nvars: int, degree: int):
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for v in combo:
                e[v] += 1
            yield tuple(e)


class Observable:
    """Polynomial with ``Scalar`` coefficients; no zero coefficients are stored."""

    __slots__ = ("signature", "terms", "order")

    def __init__(self, signature: PhaseSpaceSignature, terms: dict | None = None, order=None):
        self.signature = signature
        self.order = _order_of(order)
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(v) for v in e)
            if len(e) != signature.nvars or any(v < 0 for v in e):
                raise ValueError(f"bad exponent vector {e}")
            if not isinstance(c, Scalar):
                c = Scalar.constant(c, self.order)
            elif c.order != self.order:
                raise ValueError(f"coefficient order {c.order} != observable order {self.order}")
            if not c.is_zero():
                clean[e] = clean[e] + c if e in clean else c
        self.terms = {e: c for e, c in clean.items() if not c.is_zero()}

    @classmethod
    def _raw(cls, signature, terms, order):
        o = object.__new__(cls)
        o.signature = signature
        o.terms = terms
        o.order = order
        return o

    # -- constructors ---------------------------------------------------
    @classmethod
    def constant(cls, signature, value, order=None) -> "Observable":
        order = _order_of(order)
        c = value if isinstance(value, Scalar) else Scalar.constant(value, order)
        return cls(signature, {(0,) * signature.nvars: c}, order)

    @classmethod
    def variable(cls, signature, name_or_index, order=None) -> "Observable":
        k = signature.names.index(name_or_index) if isinstance(name_or_index, str) else name_or_index
        e = [0] * signature.nvars
        e[k] = 1
        return cls(signature, {tuple(e): Scalar.one(order)}, order)

    @classmethod
    def monomial(cls, signature, exponents, coeff=1, order=None) -> "Observable":
        return cls(signature, {tuple(exponents): coeff}, order)

    @classmethod
    def zero(cls, signature, order=None) -> "Observable":
        return cls._raw(signature, {}, _order_of(order))

    def generators(self):
        return [Observable.variable(self.signature, k, self.order) for k in range(self.signature.nvars)]

    # -- structure ------------------------------------------------------
    def _check(self, other: "Observable"):
        if other.signature != self.signature:
            raise SignatureMismatch(f"{self.signature} vs {other.signature}")
        if other.order != self.order:
            raise ValueError(f"truncation orders {self.order} and {other.order} differ")

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def coefficient(self, exponents) -> Scalar:
        return self.terms.get(tuple(exponents), Scalar.zero(self.order))

    def __eq__(self, other):
        if not isinstance(other, Observable):
            return NotImplemented
        return self.signature == other.signature and self.order == other.order and self.terms == other.terms

    def __hash__(self):
        return hash((self.signature, frozenset(self.terms.items())))

    # -- linear structure -------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Observable):
            other = Observable.constant(self.signature, other, self.order)
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out[e] + c if e in out else c
            if s.is_zero():
                out.pop(e, None)
            else:
                out[e] = s
        return Observable._raw(self.signature, out, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Observable._raw(self.signature, {e: -c for e, c in self.terms.items()}, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s) -> "Observable":
        if not isinstance(s, Scalar):
            s = Scalar.constant(s, self.order)
        out = {}
        for e, c in self.terms.items():
            v = s * c
            if not v.is_zero():
                out[e] = v
        return Observable._raw(self.signature, out, self.order)

    def __mul__(self, other):
        """Pointwise (commutative) product; scalars scale."""
        if not isinstance(other, Observable):
            return self.scale(other)
        self._check(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = c1 * c2
                out[e] = out[e] + v if e in out else v
        return Observable._raw(self.signature, {e: c for e, c in out.items() if not c.is_zero()}, self.order)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        out = Observable.constant(self.signature, 1, self.order)
        for _ in range(k):
            out = out * self
        return out

    def conj(self) -> "Observable":
        sig = self.signature
        out = {}
        for e, c in self.terms.items():
            if sig.kind is Kind.CONJUGATE:
                n = sig.dof
                e = e[n:] + e[:n]
            out[e] = c.conj()
        return Observable._raw(sig, out, self.order)

    def shift(self, k: int) -> "Observable":
        out = {}
        for e, c in self.terms.items():
            v = c.shift(k)
            if not v.is_zero():
                out[e] = v
        return Observable._raw(self.signature, out, self.order)

    def derivative(self, multi_index) -> "Observable":
        out = {}
        for e, c in self.terms.items():
            f = _falling(e, multi_index)
            if f:
                out[tuple(a - b for a, b in zip(e, multi_index))] = c * f
        return Observable._raw(self.signature, out, self.order)

    def d(self, var) -> "Observable":
        k = self.signature.names.index(var) if isinstance(var, str) else var
        mi = [0] * self.signature.nvars
        mi[k] = 1
        return self.derivative(tuple(mi))

    def evaluate(self, point: Sequence) -> Scalar:
        """Value at a point with Scalar (or rational / (re, im)) coordinates."""
        pt = [p if isinstance(p, Scalar) else Scalar.constant(p, self.order) for p in point]
        acc = Scalar.zero(self.order)
        for e, c in self.terms.items():
            v = c
            for x, k in zip(pt, e):
                for _ in range(k):
                    v = v * x
            acc = acc + v
        return acc

    def classical_limit(self) -> "Observable":
        return classical_limit_obs(self)

    def with_order(self, order: int) -> "Observable":
        out = {}
        for e, c in self.terms.items():
            v = c.with_order(order)
            if not v.is_zero():
                out[e] = v
        return Observable._raw(self.signature, out, order)

    def __repr__(self):
        return f"Observable({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        names = self.signature.names
        parts = []
        for e in sorted(self.terms, key=lambda e: (sum(e), tuple(-v for v in e))):
            mon = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            c = str(self.terms[e])
            if not mon:
                parts.append(c)
            elif c == "1":
                parts.append(mon)
            else:
                parts.append(f"({c})*{mon}")
        return " + ".join(parts)


def _falling(e, mi) -> int:
    f = 1
    for a, b in zip(e, mi):
        if a < b:
            return 0
        for t in range(b):
            f *= a - t
    return f


# -- star-product rules ---------------------------------------------------

class Variant(enum.Enum):
    MOYAL = "moyal"
    WICK = "wick"
    POINTWISE = "pointwise"
    CUSTOM = "custom"


# a bidifferential term: (coeff_re, coeff_im, left multi-index, right multi-index)
Term = tuple


@dataclass(frozen=True)
class StarProductRule:
    variant: Variant
    table: tuple = ()  # CUSTOM only: table[r] = tuple of terms

    @classmethod
    def moyal(cls):
        return cls(Variant.MOYAL)

    @classmethod
    def wick(cls):
        return cls(Variant.WICK)

    @classmethod
    def pointwise(cls):
        return cls(Variant.POINTWISE)

    @classmethod
    def custom(cls, table: Sequence[Sequence]) -> "StarProductRule":
        """``table[r]`` lists ``(coeff, left_multi_index, right_multi_index)``;
        coeff is a rational or an ``(re, im)`` pair."""
        norm = []
        for terms in table:
            row = []
            for coeff, left, right in terms:
                re, im = coeff if isinstance(coeff, tuple) else (coeff, 0)
                row.append((to_mpq(re), to_mpq(im), tuple(left), tuple(right)))
            norm.append(tuple(row))
        return cls(Variant.CUSTOM, tuple(norm))

    def check_signature(self, sig: PhaseSpaceSignature):
        if self.variant is Variant.MOYAL and sig.kind is not Kind.CANONICAL:
            raise RuleSignatureMismatch("the Moyal rule needs canonical (x, p) coordinates")
        if self.variant is Variant.WICK and sig.kind is not Kind.CONJUGATE:
            raise RuleSignatureMismatch("the Wick rule needs conjugate (z, zbar) coordinates")
        if self.variant is Variant.CUSTOM:
            for terms in self.table:
                for t in terms:
                    if len(t[2]) != sig.nvars or len(t[3]) != sig.nvars:
                        raise RuleSignatureMismatch("custom table multi-index length != 2n")

    def terms(self, r: int, sig: PhaseSpaceSignature) -> tuple:
        if self.variant is Variant.MOYAL:
            return _moyal_terms(r, sig.dof)
        if self.variant is Variant.WICK:
            return _wick_terms(r, sig.dof)
        if self.variant is Variant.POINTWISE:
            return ((mpq(1), _ZERO, (0,) * sig.nvars, (0,) * sig.nvars),) if r == 0 else ()
        return self.table[r] if r < len(self.table) else ()


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for k in range(total + 1):
        for rest in _compositions(total - k, parts - 1):
            yield (k,) + rest


def _i_power(r: int) -> tuple:
    return [(1, 0), (0, 1), (-1, 0), (0, -1)][r % 4]


@lru_cache(maxsize=None)
def _moyal_terms(r: int, n: int) -> tuple:
    # C_r = (i/2)^r sum_{|a|+|b|=r} (-1)^{|b|}/(a! b!) d_x^a d_p^b (x) d_p^a d_x^b
    ire, iim = _i_power(r)
    base = mpq(1, 2 ** r)
    out = []
    for split in _compositions(r, 2 * n):
        a, b = split[:n], split[n:]
        w = base * (-1) ** sum(b) / math.prod(math.factorial(k) for k in split)
        left = tuple(a) + tuple(b)
        right = tuple(b) + tuple(a)
        out.append((w * ire, w * iim, left, right))
    return tuple(out)


@lru_cache(maxsize=None)
def _wick_terms(r: int, n: int) -> tuple:
    # C_r = 2^r sum_{|a|=r} 1/a! d_z^a (x) d_zbar^a
    out = []
    for a in _compositions(r, n):
        w = mpq(2 ** r, math.prod(math.factorial(k) for k in a))
        out.append((w, _ZERO, tuple(a) + (0,) * n, (0,) * n + tuple(a)))
    return tuple(out)


def _mul_gauss(s: Scalar, re, im) -> Scalar:
    if not im:
        return s * re
    return Scalar._raw(
        tuple(a * re - b * im for a, b in zip(s.re, s.im)),
        tuple(a * im + b * re for a, b in zip(s.re, s.im)),
    )


def bidifferential(f: Observable, g: Observable, rule: StarProductRule, r: int) -> Observable:
    """The single cochain C_r(f, g) (no lambda**r factor)."""
    f._check(g)
    out: dict = {}
    for re, im, left, right in rule.terms(r, f.signature):
        for e1, c1 in f.terms.items():
            k1 = _falling(e1, left)
            if not k1:
                continue
            for e2, c2 in g.terms.items():
                k2 = _falling(e2, right)
                if not k2:
                    continue
                e = tuple(a - l + b - rr for a, l, b, rr in zip(e1, left, e2, right))
                v = _mul_gauss(c1 * c2 * (k1 * k2), re, im)
                out[e] = out[e] + v if e in out else v
    return Observable._raw(f.signature, {e: c for e, c in out.items() if not c.is_zero()}, f.order)


def star(f: Observable, g: Observable, rule: StarProductRule, ctx=None) -> Observable:
    """f * g = sum_{r=0}^{N} lambda^r C_r(f, g) modulo lambda^{N+1}."""
    f._check(g)
    if ctx is not None and _order_of(ctx) != f.order:
        raise ValueError("context order differs from observable order")
    rule.check_signature(f.signature)
    sig = f.signature
    out: dict = {}
    products: dict = {}
    for r in range(f.order + 1):
        terms = rule.terms(r, sig)
        if not terms:
            continue
        for re, im, left, right in terms:
            for e1, c1 in f.terms.items():
                k1 = _falling(e1, left)
                if not k1:
                    continue
                for e2, c2 in g.terms.items():
                    k2 = _falling(e2, right)
                    if not k2:
                        continue
                    key = (e1, e2)
                    base = products.get(key)
                    if base is None:
                        base = products[key] = c1 * c2
                    v0 = base.valuation()
                    if v0 is None or v0 + r > f.order:
                        continue
                    e = tuple(a - l + b - rr for a, l, b, rr in zip(e1, left, e2, right))
                    v = _mul_gauss(base.shift(r) * (k1 * k2), re, im)
                    out[e] = out[e] + v if e in out else v
    return Observable._raw(sig, {e: c for e, c in out.items() if not c.is_zero()}, f.order)


def poisson_bracket(f: Observable, g: Observable) -> Observable:
    f._check(g)
    sig = f.signature
    n = sig.dof
    acc = Observable.zero(sig, f.order)
    for i in range(n):
        acc = acc + f.d(i) * g.d(i + n) - f.d(i + n) * g.d(i)
    if sig.kind is Kind.CONJUGATE:
        acc = acc.scale(Scalar.constant((0, -2), f.order))
    return acc


def star_commutator(f, g, rule, ctx=None) -> Observable:
    return star(f, g, rule, ctx) - star(g, f, rule, ctx)


def classical_limit_obs(f: Observable) -> Observable:
    """Keep only the lambda^0 coefficients."""
    out = {}
    for e, c in f.terms.items():
        v = c.constant_term()
        if not v.is_zero():
            out[e] = v
    return Observable._raw(f.signature, out, f.order)


# -- Weyl <-> Wick coordinate changes (z = x + i p) -------------------------

def conjugate_to_canonical(f: Observable) -> Observable:
    """Substitute z_k = x_k + i p_k, zbar_k = x_k - i p_k."""
    n = f.signature.dof
    can = PhaseSpaceSignature.canonical(n)
    i = Scalar.i(f.order)
    xs = [Observable.variable(can, k, f.order) for k in range(n)]
    ps = [Observable.variable(can, n + k, f.order) for k in range(n)]
    zs = [x + p.scale(i) for x, p in zip(xs, ps)]
    zbs = [x - p.scale(i) for x, p in zip(xs, ps)]
    return _substitute(f, zs + zbs, can)


def canonical_to_conjugate(f: Observable) -> Observable:
    """Substitute x_k = (z_k + zbar_k)/2, p_k = (z_k - zbar_k)/(2i)."""
    n = f.signature.dof
    conj = PhaseSpaceSignature.conjugate(n)
    zs = [Observable.variable(conj, k, f.order) for k in range(n)]
    zbs = [Observable.variable(conj, n + k, f.order) for k in range(n)]
    half = Scalar.constant(mpq(1, 2), f.order)
    minus_half_i = Scalar.constant((0, mpq(-1, 2)), f.order)
    xs = [(z + zb).scale(half) for z, zb in zip(zs, zbs)]
    ps = [(z - zb).scale(minus_half_i) for z, zb in zip(zs, zbs)]
    return _substitute(f, xs + ps, conj)


def _substitute(f: Observable, images: list, sig) -> Observable:
    acc = Observable.zero(sig, f.order)
    for e, c in f.terms.items():
        term = Observable.constant(sig, c, f.order)
        for img, k in zip(images, e):
            term = term * (img ** k) if k else term
        acc = acc + term
    return acc


# -- verification of star-product axioms --------------------------------------

@dataclass(frozen=True)
class SampleSpec:
    degree: int = 3
    count: int = 10
    seed: int = 0
    lambda_terms: int = 1  # random coefficients get lambda powers below this


def random_observable(sig, rng: random.Random, degree: int, order: int,
                      density: float = 0.5, lambda_terms: int = 1) -> Observable:
    terms = {}
    for e in _monomials_up_to(sig.nvars, degree):
        if rng.random() > density:
            continue
        coeffs = []
        for _ in range(min(lambda_terms, order) + 1):
            coeffs.append((mpq(rng.randint(-3, 3), rng.randint(1, 3)), mpq(rng.randint(-3, 3), rng.randint(1, 3))))
        terms[e] = Scalar.series(coeffs, order)
    return Observable(sig, terms, order)


def _fmt_triple(*obs) -> list:
    return [str(o) for o in obs]


def verify_star_axioms(rule: StarProductRule, signature: PhaseSpaceSignature,
                       ctx=None, sample_spec: SampleSpec = SampleSpec()) -> Report:
    """Check C_0 = fg, unit, C_1 - C_1^op = i{f,g}, Hermiticity, associativity.

    Generators are tested first (so deterministic witnesses such as (x, p)
    surface first), followed by ``sample_spec.count`` random triples.
    Failures are data: each failing axiom carries its first witness.
    """
    rule.check_signature(signature)
    order = _order_of(ctx)
    rng = random.Random(sample_spec.seed)
    gens = [Observable.variable(signature, k, order) for k in range(signature.nvars)]
    one = Observable.constant(signature, 1, order)
    triples = [(a, b, gens[0]) for a in gens for b in gens]
    for _ in range(sample_spec.count):
        triples.append(tuple(random_observable(signature, rng, sample_spec.degree, order,
                                               lambda_terms=sample_spec.lambda_terms)
                             for _ in range(3)))
    i_unit = Scalar.i(order)
    report = Report("star-verify")
    report.data = {"rule": rule.variant.value, "dof": signature.dof, "order": order,
                   "seed": sample_spec.seed, "samples": sample_spec.count,
                   "degree": sample_spec.degree}

    def run(name, check):
        with report.timed(name) as box:
            for t in triples:
                bad = check(*t)
                if bad is not None:
                    box["verdict"] = "fail"
                    box["witness"] = bad
                    return
            box["verdict"] = "pass"

    def c0(f, g, h):
        return None if bidifferential(f, g, rule, 0) == f * g else _fmt_triple(f, g)

    def unit(f, g, h):
        if star(one, f, rule) != f or star(f, one, rule) != f:
            return _fmt_triple(f)
        return None

    def c1(f, g, h):
        lhs = bidifferential(f, g, rule, 1) - bidifferential(g, f, rule, 1)
        return None if lhs == poisson_bracket(f, g).scale(i_unit) else _fmt_triple(f, g)

    def herm(f, g, h):
        return None if star(f, g, rule).conj() == star(g.conj(), f.conj(), rule) else _fmt_triple(f, g)

    def assoc(f, g, h):
        diff = star(star(f, g, rule), h, rule) - star(f, star(g, h, rule), rule)
        if diff.is_zero():
            return None
        first = min(c.valuation() for c in diff.terms.values())
        return {"triple": _fmt_triple(f, g, h), "first_violated_order": first}

    run("C0_pointwise", c0)
    run("unit", unit)
    run("C1_poisson", c1)
    run("hermitian", herm)
    run("associativity", assoc)
    return report


# -- abstract finite-dimensional *-algebras ------------------------------------

class FiniteStarAlgebra:
    """Unital *-algebra over the scalars given by structure constants.

    ``mult[s][t]`` is a sparse dict ``{u: Scalar}`` with e_s e_t = sum_u c_u e_u;
    ``involution[s]`` likewise gives e_s^*.  The involution is extended
    conjugate-linearly.  Elements are tuples of ``Scalar`` coordinates.
    Algebras whose basis consists of matrix units carry ``positions`` (the
    (row, col) of each unit inside a ``matrix_size`` square matrix) and can
    be flattened to plain scalar matrices.
    """

    def __init__(self, dim: int, mult, involution, unit, order=None, labels=None,
                 positions=None, matrix_size=None, name=None):
        self.dim = dim
        self.order = _order_of(order)
        self.mult = [[{u: c for u, c in cell.items() if not c.is_zero()} for cell in row] for row in mult]
        self.involution = [{u: c for u, c in d.items() if not c.is_zero()} for d in involution]
        self.unit = tuple(unit)
        self.labels = list(labels) if labels else [f"e{s}" for s in range(dim)]
        self.positions = positions
        self.matrix_size = matrix_size
        self.name = name or f"A{dim}"
        self.block_n = None
        self.base = None
        self._zero = Scalar.zero(self.order)
        self._one = Scalar.one(self.order)
        if len(self.unit) != dim or len(self.mult) != dim or len(self.involution) != dim:
            raise ValueError("structure data does not match dim")

    # elements are coordinate tuples
    def zero(self):
        return (self._zero,) * self.dim

    def one(self):
        return self.unit

    def basis_element(self, s: int):
        v = [self._zero] * self.dim
        v[s] = self._one
        return tuple(v)

    def basis(self):
        return [self.basis_element(s) for s in range(self.dim)]

    def add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple(x - y for x, y in zip(a, b))

    def neg(self, a):
        return tuple(-x for x in a)

    def scale(self, c: Scalar, a):
        return tuple(c * x for x in a)

    def is_zero(self, a) -> bool:
        return all(x.is_zero() for x in a)

    def equal(self, a, b) -> bool:
        return tuple(a) == tuple(b)

    def mul(self, a, b):
        out = [self._zero] * self.dim
        for s, x in enumerate(a):
            if x.is_zero():
                continue
            row = self.mult[s]
            for t, y in enumerate(b):
                if y.is_zero():
                    continue
                cell = row[t]
                if not cell:
                    continue
                xy = x * y
                for u, c in cell.items():
                    out[u] = out[u] + (xy if c == self._one else xy * c)
        return tuple(out)

    def adjoint(self, a):
        out = [self._zero] * self.dim
        for s, x in enumerate(a):
            if x.is_zero():
                continue
            cx = x.conj()
            for u, c in self.involution[s].items():
                out[u] = out[u] + (cx if c == self._one else cx * c)
        return tuple(out)

    def element(self, coords) -> "AlgebraElement":
        return AlgebraElement(self, tuple(coords))

    def random_element(self, rng: random.Random, lambda_terms: int = 1, density: float = 0.7):
        out = []
        for _ in range(self.dim):
            if rng.random() > density:
                out.append(self._zero)
                continue
            coeffs = [(mpq(rng.randint(-3, 3), rng.randint(1, 2)), mpq(rng.randint(-3, 3), rng.randint(1, 2)))
                      for _ in range(min(lambda_terms, self.order) + 1)]
            out.append(Scalar.series(coeffs, self.order))
        return tuple(out)

    @property
    def is_matrix_algebra(self) -> bool:
        return self.positions is not None

    def flatten(self, a):
        """Element of a matrix-unit algebra as a plain square matrix of Scalars."""
        if self.positions is None:
            raise TypeError(f"{self.name} has no matrix-unit presentation")
        k = self.matrix_size
        m = [[self._zero] * k for _ in range(k)]
        for s, x in enumerate(a):
            if not x.is_zero():
                r, c = self.positions[s]
                m[r][c] = m[r][c] + x
        return m

    def unflatten(self, m):
        if self.positions is None:
            raise TypeError(f"{self.name} has no matrix-unit presentation")
        index = {pos: s for s, pos in enumerate(self.positions)}
        out = [self._zero] * self.dim
        for r, row in enumerate(m):
            for c, x in enumerate(row):
                if not x.is_zero():
                    out[index[(r, c)]] = x
        return tuple(out)

    def with_order(self, order: int) -> "FiniteStarAlgebra":
        mult = [[{u: c.with_order(order) for u, c in cell.items()} for cell in row] for row in self.mult]
        inv = [{u: c.with_order(order) for u, c in d.items()} for d in self.involution]
        alg = FiniteStarAlgebra(self.dim, mult, inv, [c.with_order(order) for c in self.unit], order,
                                self.labels, self.positions, self.matrix_size, self.name)
        if self.block_n is not None:
            alg.block_n = self.block_n
            alg.base = self.base.with_order(order)
        return alg

    def __eq__(self, other):
        return (isinstance(other, FiniteStarAlgebra) and self.dim == other.dim
                and self.order == other.order and self.mult == other.mult
                and self.involution == other.involution and self.unit == other.unit)

    def __hash__(self):
        return hash((self.dim, self.order, self.name))

    def __repr__(self):
        return f"FiniteStarAlgebra({self.name}, dim={self.dim}, order={self.order})"

    # -- matrix-algebra helpers (valid when built by matrix_algebra) --------
    def to_grid(self, x):
        n, base = self.block_n, self.base
        m = base.dim
        return [[tuple(x[(i * n + j) * m:(i * n + j + 1) * m]) for j in range(n)] for i in range(n)]

    def from_grid(self, grid):
        return tuple(c for row in grid for entry in row for c in entry)

    def elementary_matrix(self, i: int, j: int, entry=None):
        """E_ij, or ``entry`` placed at (i, j) when given."""
        n, base = self.block_n, self.base
        grid = [[base.zero() for _ in range(n)] for _ in range(n)]
        grid[i][j] = base.one() if entry is None else tuple(entry)
        return self.from_grid(grid)

    def diagonal_embedding(self, a):
        """a * 1_n for a in the base algebra."""
        n, base = self.block_n, self.base
        grid = [[tuple(a) if i == j else base.zero() for j in range(n)] for i in range(n)]
        return self.from_grid(grid)


def scalars_algebra(order=None) -> FiniteStarAlgebra:
    """The scalars C[[lambda]] as a one-dimensional *-algebra."""
    order = _order_of(order)
    one = Scalar.one(order)
    return FiniteStarAlgebra(1, [[{0: one}]], [{0: one}], [one], order, ["1"],
                             positions=[(0, 0)], matrix_size=1, name="C")


def matrix_algebra(A: FiniteStarAlgebra, n: int) -> FiniteStarAlgebra:
    """M_n(A) with (E_ij (x) b)(E_kl (x) c) = delta_jk E_il (x) bc and (E_ij (x) b)* = E_ji (x) b*."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = A.dim
    dim = n * n * m

    def idx(i, j, t):
        return (i * n + j) * m + t

    mult = [[{} for _ in range(dim)] for _ in range(dim)]
    for i, j, k, l in itertools.product(range(n), repeat=4):
        if j != k:
            continue
        for t in range(m):
            for u in range(m):
                cell = A.mult[t][u]
                if cell:
                    mult[idx(i, j, t)][idx(k, l, u)] = {idx(i, l, w): c for w, c in cell.items()}
    involution = []
    for i in range(n):
        for j in range(n):
            for t in range(m):
                involution.append({idx(j, i, w): c for w, c in A.involution[t].items()})
    unit = [Scalar.zero(A.order)] * dim
    for i in range(n):
        for t in range(m):
            unit[idx(i, i, t)] = A.unit[t]
    positions = None
    size = None
    if A.positions is not None:
        k = A.matrix_size
        size = n * k
        positions = []
        for i in range(n):
            for j in range(n):
                for t in range(m):
                    r, c = A.positions[t]
                    positions.append((i * k + r, j * k + c))
    labels = [f"E{i + 1}{j + 1}({A.labels[t]})" if m > 1 else f"E{i + 1}{j + 1}"
              for i in range(n) for j in range(n) for t in range(m)]
    alg = FiniteStarAlgebra(dim, mult, involution, unit, A.order, labels, positions, size,
                            name=f"M{n}({A.name})")
    alg.block_n = n
    alg.base = A
    return alg


def diagonal_algebra(n: int, order=None) -> FiniteStarAlgebra:
    """Commutative algebra C^n of diagonal matrices (basis of minimal projections)."""
    order = _order_of(order)
    one = Scalar.one(order)
    mult = [[({s: one} if s == t else {}) for t in range(n)] for s in range(n)]
    inv = [{s: one} for s in range(n)]
    return FiniteStarAlgebra(n, mult, inv, [one] * n, order, [f"P{s + 1}" for s in range(n)],
                             positions=[(s, s) for s in range(n)], matrix_size=n, name=f"D{n}")


class FunctionAlgebra:
    """(Pol(M)[[lambda]], star) for a built-in rule; elements are Observables."""

    def __init__(self, rule: StarProductRule, signature: PhaseSpaceSignature, order=None):
        rule.check_signature(signature)
        self.rule = rule
        self.signature = signature
        self.order = _order_of(order)
        self.name = f"{rule.variant.value}[{signature.kind.value},{signature.dof}]"

    def zero(self):
        return Observable.zero(self.signature, self.order)

    def one(self):
        return Observable.constant(self.signature, 1, self.order)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def scale(self, c, a):
        return a.scale(c)

    def mul(self, a, b):
        return star(a, b, self.rule)

    def adjoint(self, a):
        return a.conj()

    def is_zero(self, a):
        return a.is_zero()

    def equal(self, a, b):
        return a == b

    def variable(self, name):
        return Observable.variable(self.signature, name, self.order)

    def monomial(self, exponents):
        return Observable.monomial(self.signature, exponents, 1, self.order)

    def monomial_basis(self, cap: int) -> list:
        return list(_monomials_up_to(self.signature.nvars, cap))

    def element(self, obs) -> "AlgebraElement":
        return AlgebraElement(self, obs)

    def random_element(self, rng, degree=2, lambda_terms=1):
        return random_observable(self.signature, rng, degree, self.order, lambda_terms=lambda_terms)

    def __eq__(self, other):
        return (isinstance(other, FunctionAlgebra) and self.rule == other.rule
                and self.signature == other.signature and self.order == other.order)

    def __hash__(self):
        return hash((self.rule, self.signature, self.order))

    def __repr__(self):
        return f"FunctionAlgebra({self.name}, order={self.order})"


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """An element together with its parent algebra."""

    parent: object
    data: object

    def _check(self, other):
        if not isinstance(other, AlgebraElement) or other.parent is not self.parent and other.parent != self.parent:
            raise AlgebraMismatch("elements belong to different algebras")

    def __mul__(self, other):
        if isinstance(other, Scalar):
            return AlgebraElement(self.parent, self.parent.scale(other, self.data))
        self._check(other)
        return AlgebraElement(self.parent, self.parent.mul(self.data, other.data))

    def __rmul__(self, other):
        if isinstance(other, Scalar):
            return AlgebraElement(self.parent, self.parent.scale(other, self.data))
        return NotImplemented

    def __add__(self, other):
        self._check(other)
        return AlgebraElement(self.parent, self.parent.add(self.data, other.data))

    def __sub__(self, other):
        self._check(other)
        return AlgebraElement(self.parent, self.parent.sub(self.data, other.data))

    def __neg__(self):
        return AlgebraElement(self.parent, self.parent.neg(self.data))

    def adjoint(self):
        return AlgebraElement(self.parent, self.parent.adjoint(self.data))

    def __eq__(self, other):
        return (isinstance(other, AlgebraElement) and (other.parent is self.parent or other.parent == self.parent)
                and self.parent.equal(self.data, other.data))

    def __hash__(self):
        return hash(id(self.parent))


def alg_mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a * b


def alg_involution(a: AlgebraElement) -> AlgebraElement:
    return a.adjoint()


def verify_algebra(A: FiniteStarAlgebra, max_triples: int | None = None, seed: int = 0) -> Report:
    """Associativity, anti-multiplicative period-2 involution and two-sided unit on the basis."""
    report = Report("verify-algebra")
    basis = A.basis()
    triples = list(itertools.product(range(A.dim), repeat=3))
    if max_triples is not None and len(triples) > max_triples:
        triples = random.Random(seed).sample(triples, max_triples)
    with report.timed("associativity") as box:
        box["verdict"] = "pass"
        for s, t, u in triples:
            if A.mul(A.mul(basis[s], basis[t]), basis[u]) != A.mul(basis[s], A.mul(basis[t], basis[u])):
                box.update(verdict="fail", witness=[A.labels[s], A.labels[t], A.labels[u]])
                break
    with report.timed("involution_antimultiplicative") as box:
        box["verdict"] = "pass"
        for s, t in itertools.product(range(A.dim), repeat=2):
            lhs = A.adjoint(A.mul(basis[s], basis[t]))
            rhs = A.mul(A.adjoint(basis[t]), A.adjoint(basis[s]))
            if lhs != rhs:
                box.update(verdict="fail", witness=[A.labels[s], A.labels[t]])
                break
    with report.timed("involution_period_two") as box:
        bad = [A.labels[s] for s in range(A.dim) if A.adjoint(A.adjoint(basis[s])) != basis[s]]
        box.update(verdict="fail" if bad else "pass", witness=bad[:1] or None)
    with report.timed("unit") as box:
        bad = [A.labels[s] for s in range(A.dim)
               if A.mul(A.unit, basis[s]) != basis[s] or A.mul(basis[s], A.unit) != basis[s]]
        box.update(verdict="fail" if bad else "pass", witness=bad[:1] or None)
    return report


__all__ = [
    "AlgebraElement", "FiniteStarAlgebra", "FunctionAlgebra", "Kind", "Observable",
    "PhaseSpaceSignature", "SampleSpec", "StarProductRule", "Variant", "alg_involution",
    "alg_mul", "bidifferential", "canonical_to_conjugate", "classical_limit_obs",
    "conjugate_to_canonical", "diagonal_algebra", "matrix_algebra", "poisson_bracket",
    "random_observable", "scalars_algebra", "star", "star_commutator", "verify_algebra",
    "verify_star_axioms", "DEFAULT_ORDER", "TruncationContext",
]

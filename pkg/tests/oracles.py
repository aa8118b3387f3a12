"""Independent reference computations built on sympy.

Nothing here imports the package's arithmetic: series are sympy
polynomials in ``lam`` truncated by hand, star products are expanded from
their closed formulas with sympy derivatives.
"""

from fractions import Fraction
from math import factorial

import sympy as sp

lam = sp.Symbol("lam")
x, p, z, zb = sp.symbols("x p z zb")


def truncate(expr, order):
    poly = sp.Poly(sp.expand(expr), lam)
    return sp.expand(sum(c * lam**k for (k,), c in poly.terms() if k <= order))


def scalar_to_sympy(s):
    """Package Scalar -> sympy expression in lam (read-only use of its coefficients)."""
    return sp.expand(sum((sp.Rational(int(a.numerator), int(a.denominator))
                          + sp.I * sp.Rational(int(b.numerator), int(b.denominator))) * lam**k
                         for k, (a, b) in enumerate(zip(s.re, s.im))))


def observable_to_sympy(f):
    names = [sp.Symbol(n) for n in f.signature.names]
    out = 0
    for e, c in f.terms.items():
        mono = 1
        for v, k in zip(names, e):
            mono *= v**k
        out += scalar_to_sympy(c) * mono
    return sp.expand(out)


def moyal_star(f, g, order):
    """sum_r lam^r / r! (i/2)^r (d_x d_p' - d_p d_x')^r f g' evaluated on the diagonal."""
    x2, p2 = sp.symbols("x2 p2")
    g2 = g.subs({x: x2, p: p2}, simultaneous=True)
    total = 0
    term = f * g2
    for r in range(order + 1):
        total += lam**r / factorial(r) * (sp.I / 2)**r * term
        term = sp.diff(term, x, p2) - sp.diff(term, p, x2)
    return truncate(total.subs({x2: x, p2: p}, simultaneous=True), order)


def wick_star(f, g, order):
    """sum_r (2 lam)^r / r! d_z^r f d_zb^r g."""
    total = 0
    for r in range(order + 1):
        total += (2 * lam)**r / factorial(r) * sp.diff(f, z, r) * sp.diff(g, zb, r)
    return truncate(total, order)


def at_origin(expr):
    return sp.expand(expr.subs({x: 0, p: 0, z: 0, zb: 0}))


def series_sign(coeffs):
    for c in coeffs:
        if c:
            return 1 if c > 0 else -1
    return 0


def fraction_series_mul(a, b):
    n = len(a)
    return [sum((a[i] * b[k - i] for i in range(k + 1)), Fraction(0)) for k in range(n)]

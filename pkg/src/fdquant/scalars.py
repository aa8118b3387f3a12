"""Truncated formal power series in the deformation parameter lambda.

``OrderedScalar`` models R[[lambda]] (R replaced by the rationals) with the
order "positive iff the first nonzero coefficient is positive".  ``Scalar``
models the complexification C[[lambda]] with Gaussian-rational coefficients.
All arithmetic is carried out modulo lambda**(N+1) where N is the truncation
order carried by every value.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

from gmpy2 import mpq

from .errors import ContextMismatch, NotUnit

DEFAULT_ORDER = 6

_ZERO = mpq(0)
_ONE = mpq(1)


@dataclass(frozen=True)
class TruncationContext:
    """All series arithmetic happens modulo lambda**(order + 1)."""

    order: int = DEFAULT_ORDER

    def __post_init__(self):
        if not isinstance(self.order, int) or self.order < 0:
            raise ValueError(f"truncation order must be a non-negative int, got {self.order!r}")

    @property
    def length(self) -> int:
        return self.order + 1


class Sign(enum.Enum):
    POSITIVE = 1
    NEGATIVE = -1
    ZERO = 0


def to_mpq(value) -> mpq:
    if isinstance(value, type(_ZERO)):
        return value
    if isinstance(value, (int, Fraction)):
        return mpq(value)
    if isinstance(value, Rational):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        return mpq(Fraction(value))
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def _order_of(ctx) -> int:
    if ctx is None:
        return DEFAULT_ORDER
    if isinstance(ctx, TruncationContext):
        return ctx.order
    return int(ctx)


class OrderedScalar:
    """Element of the ordered ring Q[[lambda]] truncated at order N."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        self.coeffs = tuple(to_mpq(c) for c in coeffs)
        if not self.coeffs:
            raise ValueError("a series needs at least one coefficient")

    @classmethod
    def series(cls, coeffs: Sequence, order=None) -> "OrderedScalar":
        n = _order_of(order) + 1
        c = list(coeffs)[:n]
        return cls(c + [0] * (n - len(c)))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def _check(self, other):
        if len(other.coeffs) != len(self.coeffs):
            raise ContextMismatch(f"orders {self.order} and {other.order} differ")

    def _coerce(self, other):
        if isinstance(other, OrderedScalar):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, Rational, type(_ZERO))):
            return OrderedScalar.series([other], self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return OrderedScalar(a + b for a, b in zip(self.coeffs, other.coeffs))

    __radd__ = __add__

    def __neg__(self):
        return OrderedScalar(-a for a in self.coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return OrderedScalar(a - b for a, b in zip(self.coeffs, other.coeffs))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = len(self.coeffs)
        out = [_ZERO] * n
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j in range(n - i):
                b = other.coeffs[j]
                if b:
                    out[i + j] += a * b
        return OrderedScalar(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(("OrderedScalar", self.coeffs))

    def sign(self) -> Sign:
        return ordered_sign(self)

    def __lt__(self, other):
        return (self - other).sign() is Sign.NEGATIVE

    def __le__(self, other):
        return (self - other).sign() is not Sign.POSITIVE

    def __gt__(self, other):
        return (self - other).sign() is Sign.POSITIVE

    def __ge__(self, other):
        return (self - other).sign() is not Sign.NEGATIVE

    def to_scalar(self) -> "Scalar":
        return Scalar(self.coeffs, (_ZERO,) * len(self.coeffs))

    def __repr__(self):
        return f"OrderedScalar({format_series(self.coeffs, None)})"


def ordered_sign(a) -> Sign:
    """Sign of the first nonzero coefficient; accepts a real ``Scalar`` too."""
    coeffs = a.coeffs if isinstance(a, OrderedScalar) else a.re
    for c in coeffs:
        if c > 0:
            return Sign.POSITIVE
        if c < 0:
            return Sign.NEGATIVE
    return Sign.ZERO


class Scalar:
    """Element of C[[lambda]] = Q(i)[[lambda]] truncated at order N.

    Immutable; ``re[r]`` and ``im[r]`` are the real and imaginary parts of the
    coefficient of lambda**r.  Conjugation fixes lambda.
    """

    __slots__ = ("re", "im")

    def __init__(self, re: Iterable, im: Iterable | None = None):
        self.re = tuple(to_mpq(c) for c in re)
        if im is None:
            self.im = (_ZERO,) * len(self.re)
        else:
            self.im = tuple(to_mpq(c) for c in im)
        if len(self.re) != len(self.im) or not self.re:
            raise ValueError("real and imaginary coefficient lists must be non-empty and equal length")

    # -- constructors -------------------------------------------------
    @classmethod
    def _raw(cls, re, im) -> "Scalar":
        s = object.__new__(cls)
        s.re = re
        s.im = im
        return s

    @classmethod
    def zero(cls, order=None) -> "Scalar":
        n = _order_of(order) + 1
        z = (_ZERO,) * n
        return cls._raw(z, z)

    @classmethod
    def one(cls, order=None) -> "Scalar":
        return cls.constant(1, order)

    @classmethod
    def constant(cls, value, order=None) -> "Scalar":
        return cls.series([value], order)

    @classmethod
    def lam(cls, order=None, power: int = 1) -> "Scalar":
        n = _order_of(order) + 1
        re = [_ZERO] * n
        if power < n:
            re[power] = _ONE
        return cls._raw(tuple(re), (_ZERO,) * n)

    @classmethod
    def i(cls, order=None) -> "Scalar":
        return cls.constant((0, 1), order)

    @classmethod
    def series(cls, coeffs: Sequence, order=None) -> "Scalar":
        """Build from coefficients; each is a rational or a ``(re, im)`` pair."""
        n = _order_of(order) + 1
        re = [_ZERO] * n
        im = [_ZERO] * n
        for k, c in enumerate(list(coeffs)[:n]):
            if isinstance(c, complex):
                raise TypeError("floating complex numbers are not exact; use (re, im) pairs")
            if isinstance(c, tuple):
                re[k], im[k] = to_mpq(c[0]), to_mpq(c[1])
            else:
                re[k] = to_mpq(c)
        return cls._raw(tuple(re), tuple(im))

    # -- structure ----------------------------------------------------
    @property
    def order(self) -> int:
        return len(self.re) - 1

    @property
    def context(self) -> TruncationContext:
        return TruncationContext(self.order)

    def is_zero(self) -> bool:
        return not any(self.re) and not any(self.im)

    def __bool__(self):
        return not self.is_zero()

    def is_real(self) -> bool:
        return not any(self.im)

    def valuation(self) -> int | None:
        """Lowest lambda-power with a nonzero coefficient (None for zero)."""
        for k, (a, b) in enumerate(zip(self.re, self.im)):
            if a or b:
                return k
        return None

    def leading(self) -> tuple[mpq, mpq]:
        v = self.valuation()
        if v is None:
            return _ZERO, _ZERO
        return self.re[v], self.im[v]

    def coefficient(self, k: int) -> tuple[mpq, mpq]:
        return self.re[k], self.im[k]

    def real_part(self) -> OrderedScalar:
        return OrderedScalar(self.re)

    def imag_part(self) -> OrderedScalar:
        return OrderedScalar(self.im)

    def constant_term(self) -> "Scalar":
        n = len(self.re)
        z = (_ZERO,) * (n - 1)
        return Scalar._raw((self.re[0],) + z, (self.im[0],) + z)

    def with_order(self, order: int) -> "Scalar":
        """Re-truncate (or zero-pad) to another order."""
        n = order + 1
        pad = (_ZERO,) * max(0, n - len(self.re))
        return Scalar._raw(self.re[:n] + pad, self.im[:n] + pad)

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Scalar):
            if len(other.re) != len(self.re):
                raise ContextMismatch(f"orders {self.order} and {other.order} differ")
            return other
        if isinstance(other, OrderedScalar):
            if len(other.coeffs) != len(self.re):
                raise ContextMismatch(f"orders {self.order} and {other.order} differ")
            return other.to_scalar()
        if isinstance(other, (int, Fraction, type(_ZERO))) or isinstance(other, Rational):
            return Scalar.constant(other, self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Scalar._raw(
            tuple(a + b for a, b in zip(self.re, other.re)),
            tuple(a + b for a, b in zip(self.im, other.im)),
        )

    __radd__ = __add__

    def __neg__(self):
        return Scalar._raw(tuple(-a for a in self.re), tuple(-a for a in self.im))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Scalar._raw(
            tuple(a - b for a, b in zip(self.re, other.re)),
            tuple(a - b for a, b in zip(self.im, other.im)),
        )

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, type(_ZERO))) or (
            isinstance(other, Rational) and not isinstance(other, bool)
        ):
            q = to_mpq(other)
            return Scalar._raw(tuple(a * q for a in self.re), tuple(a * q for a in self.im))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        ar, ai, br, bi = self.re, self.im, other.re, other.im
        n = len(ar)
        rr = [_ZERO] * n
        ri = [_ZERO] * n
        b_real = not any(bi)
        for i in range(n):
            x, y = ar[i], ai[i]
            if not x and not y:
                continue
            for j in range(n - i):
                u = br[j]
                if b_real:
                    if not u:
                        continue
                    rr[i + j] += x * u
                    ri[i + j] += y * u
                else:
                    v = bi[j]
                    if not u and not v:
                        continue
                    rr[i + j] += x * u - y * v
                    ri[i + j] += x * v + y * u
        return Scalar._raw(tuple(rr), tuple(ri))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Scalar):
            return self * other.inverse()
        q = to_mpq(other)
        if not q:
            raise ZeroDivisionError("division by zero")
        return self * (1 / q)

    def conj(self) -> "Scalar":
        return Scalar._raw(self.re, tuple(-a for a in self.im))

    def abs2(self) -> OrderedScalar:
        """conj(s) * s, which is real."""
        return (self.conj() * self).real_part()

    def shift(self, k: int) -> "Scalar":
        """Multiply by lambda**k (k >= 0)."""
        if k == 0:
            return self
        n = len(self.re)
        z = (_ZERO,) * min(k, n)
        return Scalar._raw((z + self.re)[:n], (z + self.im)[:n])

    def unshift(self, k: int) -> "Scalar":
        """Divide by lambda**k; requires valuation >= k.  Top k slots are zero-filled."""
        if k == 0:
            return self
        v = self.valuation()
        if v is not None and v < k:
            raise NotUnit(f"series of valuation {v} is not divisible by lambda^{k}")
        z = (_ZERO,) * k
        return Scalar._raw(self.re[k:] + z, self.im[k:] + z)

    def inverse(self) -> "Scalar":
        """Multiplicative inverse modulo lambda**(N+1); requires a nonzero constant term."""
        a0r, a0i = self.re[0], self.im[0]
        norm = a0r * a0r + a0i * a0i
        if not norm:
            raise NotUnit("constant term is zero, series is not a unit")
        inv0 = Scalar.constant((a0r / norm, -a0i / norm), self.order)
        n = len(self.re)
        # b_k = -inv0 * sum_{j=1..k} a_j b_{k-j}
        b_re = [_ZERO] * n
        b_im = [_ZERO] * n
        ir, ii = inv0.re[0], inv0.im[0]
        b_re[0], b_im[0] = ir, ii
        for k in range(1, n):
            sr = si = _ZERO
            for j in range(1, k + 1):
                ar, ai = self.re[j], self.im[j]
                if not ar and not ai:
                    continue
                br, bi = b_re[k - j], b_im[k - j]
                sr += ar * br - ai * bi
                si += ar * bi + ai * br
            b_re[k] = -(ir * sr - ii * si)
            b_im[k] = -(ir * si + ii * sr)
        return Scalar._raw(tuple(b_re), tuple(b_im))

    def divide_by(self, other: "Scalar") -> "Scalar":
        """Quotient q with q * other == self mod lambda**(N+1).

        Needs valuation(self) >= valuation(other); the undetermined top
        coefficients of q are set to zero.
        """
        v = other.valuation()
        if v is None:
            raise ZeroDivisionError("division by the zero series")
        return self.unshift(v) * other.unshift(v).inverse()

    def sqrt_real_unit(self) -> "Scalar":
        """Square root of a real series with constant term 1 (rational coefficients)."""
        if not self.is_real() or self.re[0] != 1:
            raise ValueError("sqrt_real_unit needs a real series with constant term 1")
        n = len(self.re)
        s = [_ZERO] * n
        s[0] = _ONE
        for k in range(1, n):
            acc = self.re[k]
            for j in range(1, k):
                acc -= s[j] * s[k - j]
            s[k] = acc / 2
        return Scalar._raw(tuple(s), (_ZERO,) * n)

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.re == other.re and self.im == other.im
        try:
            other = self._coerce(other)
        except ContextMismatch:
            return False
        if other is NotImplemented:
            return False
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"Scalar({format_series(self.re, self.im)})"

    def __str__(self):
        return format_series(self.re, self.im)


def _fmt_q(q) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _fmt_i(q) -> str:
    if q == 1:
        return "i"
    if q == -1:
        return "-i"
    return f"{_fmt_q(q)}*i"


def format_series(re, im=None) -> str:
    """Render a series as a polynomial string in lambda (``lam``)."""
    parts = []
    im = im if im is not None else (_ZERO,) * len(re)
    for k, (a, b) in enumerate(zip(re, im)):
        if not a and not b:
            continue
        if b and a:
            c = f"({_fmt_q(a)}{'+' if b > 0 else '-'}{_fmt_i(abs(b))})"
        elif b:
            c = _fmt_i(b)
        else:
            c = _fmt_q(a)
        if k == 0:
            parts.append(c)
        else:
            mon = "lam" if k == 1 else f"lam^{k}"
            parts.append(mon if c == "1" else f"-{mon}" if c == "-1" else f"{c}*{mon}")
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out


# -- functional interface -----------------------------------------------

def _check_ctx(ctx, *values):
    if ctx is None:
        return
    n = _order_of(ctx)
    for v in values:
        if v.order != n:
            raise ContextMismatch(f"value has order {v.order}, context requires {n}")


def scalar_mul(a: Scalar, b: Scalar, ctx: TruncationContext | None = None) -> Scalar:
    _check_ctx(ctx, a, b)
    return a * b


def scalar_conj(a: Scalar) -> Scalar:
    return a.conj()


def scalar_invert(a: Scalar, ctx: TruncationContext | None = None) -> Scalar:
    _check_ctx(ctx, a)
    return a.inverse()


# -- JSON ----------------------------------------------------------------

def scalar_to_json(s: Scalar) -> list:
    return [[int(a.numerator), int(a.denominator), int(b.numerator), int(b.denominator)]
            for a, b in zip(s.re, s.im)]


def scalar_from_json(data, order=None) -> Scalar:
    """Parse ``[[re_num, re_den, im_num, im_den], ...]``.

    Fractions must be in lowest terms with positive denominators.  When
    ``order`` is given the series is truncated or zero-padded to it.
    """
    if not isinstance(data, list) or not data:
        raise ValueError("Scalar JSON must be a non-empty array")
    re, im = [], []
    for entry in data:
        if (not isinstance(entry, list) or len(entry) != 4
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in entry)):
            raise ValueError(f"bad Scalar coefficient {entry!r}")
        rn, rd, inn, ind = entry
        for num, den in ((rn, rd), (inn, ind)):
            if den <= 0:
                raise ValueError(f"denominator must be positive in {entry!r}")
            q = mpq(num, den)
            if q.numerator != num or q.denominator != den:
                raise ValueError(f"fraction {num}/{den} not in lowest terms")
        re.append(mpq(rn, rd))
        im.append(mpq(inn, ind))
    s = Scalar(re, im)
    return s if order is None else s.with_order(_order_of(order))

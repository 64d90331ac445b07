"""Arbitrary-precision complex scalars.

The complex type wraps a pair of binary floats whose significand lengths
may differ; the effective precision of a value is the larger of the two.
Binary operations round once, to nearest/even, at the maximum precision
of all operands ("best precision carries over"), so narrowing never
happens silently.  Formatting and parsing are decimal scientific
notation, built to round-trip.
"""

from __future__ import annotations

import math
import re
from typing import Union

import gmpy2
from gmpy2 import mpc, mpfr

from .precision import (
    MIN_PRECISION,
    context_for,
    get_default_precision,
    get_output_digits,
)

__all__ = [
    "MpComplex",
    "MpReal",
    "ParseError",
    "conj",
    "cos",
    "exp",
    "format_complex",
    "format_real",
    "log",
    "mpreal",
    "parse_complex",
    "precision_of",
    "sin",
    "sqrt",
]

MpReal = mpfr

Number = Union["MpComplex", mpc, mpfr, int, float, complex]


class ParseError(ValueError):
    """Malformed numeric text; carries the offending position."""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


def precision_of(x: Number) -> int:
    """Effective significand length of a value, in bits.

    Exact integers carry no precision of their own (they vote 0 in the
    max-precision rule); Python floats vote their 53 bits.
    """
    if isinstance(x, MpComplex):
        return max(x._z.precision)
    if isinstance(x, mpc):
        return max(x.precision)
    if isinstance(x, mpfr):
        return x.precision
    if isinstance(x, int):
        return 0
    if isinstance(x, (float, complex)):
        return 53
    raise TypeError(f"not a numeric value: {type(x).__name__}")


def mpreal(x, prec: int | None = None) -> mpfr:
    """A real scalar at the given (or default) precision."""
    p = get_default_precision() if prec is None else prec
    if p < MIN_PRECISION:
        raise ValueError(f"precision must be >= {MIN_PRECISION} bits, got {p}")
    return mpfr(x, p)


def _as_mpc_operand(x) -> tuple[object, int]:
    """Map an operand to something gmpy2 can consume plus its precision vote."""
    if isinstance(x, MpComplex):
        return x._z, max(x._z.precision)
    if isinstance(x, mpc):
        return x, max(x.precision)
    if isinstance(x, mpfr):
        return x, x.precision
    if isinstance(x, int):
        return x, 0
    if isinstance(x, float):
        return x, 53
    if isinstance(x, complex):
        return x, 53
    return None, -1


class MpComplex:
    """A complex number with explicit per-part significand lengths."""

    __slots__ = ("_z",)

    def __init__(self, real=0, imag=0, prec: int | None = None):
        if isinstance(real, str):
            parsed = parse_complex(real, prec=prec)
            if imag != 0:
                raise ValueError("cannot combine a string literal with a separate imaginary part")
            self._z = parsed._z
            return
        if isinstance(real, MpComplex):
            real = real._z
        if isinstance(real, (complex, mpc)):
            if imag != 0:
                raise ValueError("cannot combine a complex value with a separate imaginary part")
            real, imag = real.real, real.imag
        p = get_default_precision() if prec is None else prec
        if p < MIN_PRECISION:
            raise ValueError(f"precision must be >= {MIN_PRECISION} bits, got {p}")
        self._z = mpc(real, imag, precision=(p, p))

    @classmethod
    def _wrap(cls, z: mpc) -> "MpComplex":
        obj = object.__new__(cls)
        obj._z = z
        return obj

    # -- structure ---------------------------------------------------------

    @property
    def real(self) -> mpfr:
        return self._z.real

    @property
    def imag(self) -> mpfr:
        return self._z.imag

    @property
    def precision(self) -> int:
        """Effective precision: the larger of the two part precisions."""
        return max(self._z.precision)

    @property
    def precisions(self) -> tuple[int, int]:
        return self._z.precision

    def is_zero(self) -> bool:
        return self._z == 0

    def to_complex(self) -> complex:
        return complex(self._z)

    def __complex__(self) -> complex:
        return complex(self._z)

    def __bool__(self) -> bool:
        return self._z != 0

    # -- arithmetic --------------------------------------------------------

    def _binary(self, other, forward: bool, op: str):
        oz, op_prec = _as_mpc_operand(other)
        if oz is None:
            return NotImplemented
        p = max(self.precision, op_prec, MIN_PRECISION)
        ctx = context_for(p)
        a, b = (self._z, oz) if forward else (oz, self._z)
        return MpComplex._wrap(getattr(ctx, op)(a, b))

    def __add__(self, other):
        return self._binary(other, True, "add")

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, True, "sub")

    def __rsub__(self, other):
        return self._binary(other, False, "sub")

    def __mul__(self, other):
        return self._binary(other, True, "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        oz, _ = _as_mpc_operand(other)
        if oz is not None and oz == 0:
            raise ZeroDivisionError("complex division by zero")
        return self._binary(other, True, "div")

    def __rtruediv__(self, other):
        oz, _ = _as_mpc_operand(other)
        if oz is None:
            return NotImplemented
        if self._z == 0:
            raise ZeroDivisionError("complex division by zero")
        return self._binary(other, False, "div")

    def __neg__(self):
        ctx = context_for(self.precision)
        return MpComplex._wrap(ctx.mul(self._z, -1))

    def __pos__(self):
        return self

    def __abs__(self) -> mpfr:
        with context_for(self.precision):
            return abs(self._z)

    def conjugate(self) -> "MpComplex":
        z = self._z
        pre, pim = z.precision
        with context_for(pim):
            neg_im = -z.imag
        return MpComplex._wrap(mpc(z.real, neg_im, precision=(pre, pim)))

    def norm(self) -> mpfr:
        """Squared modulus, |z|^2, as a real scalar."""
        return context_for(self.precision).norm(self._z)

    # -- comparison / hashing ----------------------------------------------

    def __eq__(self, other):
        oz, _ = _as_mpc_operand(other)
        if oz is None:
            return NotImplemented
        return self._z == oz

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash(self._z)

    # -- text --------------------------------------------------------------

    def __str__(self) -> str:
        return format_complex(self)

    def __repr__(self) -> str:
        digits = math.ceil(self.precision * math.log10(2)) + 2
        return f"MpComplex('{format_complex(self, digits)}')"


# ---------------------------------------------------------------------------
# transcendental functions
# ---------------------------------------------------------------------------


def _unary(z: Number, op: str, check=None) -> MpComplex:
    zz, p = _as_mpc_operand(z)
    if zz is None:
        raise TypeError(f"not a numeric value: {type(z).__name__}")
    if check is not None:
        check(zz)
    p = max(p, MIN_PRECISION) if p > 0 else get_default_precision()
    ctx = context_for(p)
    # Promote to complex up front so e.g. sqrt(-1) lands on the principal
    # branch instead of a real-domain NaN.
    val = zz if isinstance(zz, mpc) else mpc(zz, precision=(p, p))
    return MpComplex._wrap(mpc(getattr(ctx, op)(val), precision=(p, p)))


def sqrt(z: Number) -> MpComplex:
    """Principal square root, correctly rounded at the operand precision."""
    return _unary(z, "sqrt")


def exp(z: Number) -> MpComplex:
    return _unary(z, "exp")


def log(z: Number) -> MpComplex:
    """Principal natural logarithm; exact zero is a domain error."""

    def check(v):
        if v == 0:
            raise ValueError("log of zero")

    return _unary(z, "log", check)


def sin(z: Number) -> MpComplex:
    return _unary(z, "sin")


def cos(z: Number) -> MpComplex:
    return _unary(z, "cos")


def conj(z: Number) -> MpComplex:
    if not isinstance(z, MpComplex):
        zz, p = _as_mpc_operand(z)
        if zz is None:
            raise TypeError(f"not a numeric value: {type(z).__name__}")
        p = p if p > 0 else get_default_precision()
        z = MpComplex._wrap(mpc(zz, precision=(p, p)))
    return z.conjugate()


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------


def format_real(x, digits: int | None = None) -> str:
    """Scientific notation with a fixed count of significant decimal digits."""
    d = get_output_digits() if digits is None else digits
    if d < 1:
        raise ValueError(f"need at least 1 significant digit, got {d}")
    if isinstance(x, int):
        x = mpfr(x, max(MIN_PRECISION, x.bit_length()))
    elif isinstance(x, float):
        x = mpfr(x, 53)
    elif not isinstance(x, mpfr):
        raise TypeError(f"not a real value: {type(x).__name__}")
    if gmpy2.is_nan(x):
        return "nan"
    if gmpy2.is_infinite(x):
        return "-inf" if x < 0 else "inf"
    if x == 0:
        mant = "0" if d == 1 else "0." + "0" * (d - 1)
        return mant + "e+00"
    if d >= 2:
        s, e10, _ = x.digits(10, d)
    else:
        # MPFR's string conversion wants >= 2 digits; round the second away.
        s, e10, _ = x.digits(10, 2)
        sign = "-" if s.startswith("-") else ""
        body = s.lstrip("-")
        if body[1] >= "5":
            first = str(int(body[0]) + 1)
            if len(first) == 2:  # 9 rounded up
                first, e10 = first[0], e10 + 1
        else:
            first = body[0]
        s = sign + first
    neg = s.startswith("-")
    body = s.lstrip("-")
    mant = body[0] if d == 1 else body[0] + "." + body[1:]
    return f"{'-' if neg else ''}{mant}e{e10 - 1:+03d}"


def format_complex(z: Number, digits: int | None = None) -> str:
    """Format a complex value; pure-real values print a single part."""
    if not isinstance(z, MpComplex):
        zz, p = _as_mpc_operand(z)
        if zz is None:
            raise TypeError(f"not a numeric value: {type(z).__name__}")
        p = p if p > 0 else get_default_precision()
        z = MpComplex._wrap(mpc(zz, precision=(p, p)))
    im = z.imag
    if im == 0:
        return format_real(z.real, digits)
    sign = "-" if im < 0 else "+"
    with context_for(im.precision):
        mag = abs(im)
    return f"{format_real(z.real, digits)}{sign}{format_real(mag, digits)}i"


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_NUM_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_LOG2_10 = math.log2(10)


def _literal_precision(literal: str, base: int) -> int:
    """Bits needed to hold every given decimal digit of a literal."""
    mantissa = literal.lstrip("+-").split("e")[0].split("E")[0].replace(".", "")
    digits = len(mantissa.lstrip("0")) or 1
    needed = math.ceil(digits * _LOG2_10) + 4
    return max(base, needed, MIN_PRECISION)


def _parse_real_literal(literal: str, base: int) -> mpfr:
    return mpfr(literal, _literal_precision(literal, base))


def parse_complex(text: str, prec: int | None = None) -> MpComplex:
    """Parse `a`, `a+b*I`, `a+bi`, or `a+bj` (scientific literals allowed).

    Values are read at the default precision, raised as needed so every
    given digit of a literal is represented exactly.
    """
    if not isinstance(text, str):
        raise TypeError(f"expected str, got {type(text).__name__}")
    s = text.strip()
    base = get_default_precision() if prec is None else prec
    m1 = _NUM_RE.match(s)
    if m1 is None or m1.start() != 0:
        raise ParseError("expected a numeric literal", text, 0)
    pos = m1.end()
    if pos == len(s):
        re_part = _parse_real_literal(m1.group(), base)
        return MpComplex._wrap(mpc(re_part, mpfr(0, base), precision=(re_part.precision, base)))

    def imaginary_tail(at: int) -> int | None:
        """Length of an [*]<i|j|I|J> suffix ending the string, or None."""
        k = at
        if k < len(s) and s[k] == "*":
            k += 1
        if k < len(s) and s[k] in "iIjJ" and k + 1 == len(s):
            return k + 1
        return None

    if imaginary_tail(pos) is not None:
        im_part = _parse_real_literal(m1.group(), base)
        return MpComplex._wrap(mpc(mpfr(0, base), im_part, precision=(base, im_part.precision)))

    if s[pos] not in "+-":
        raise ParseError("expected '+', '-', or an imaginary suffix", text, pos)
    m2 = _NUM_RE.match(s, pos)
    if m2 is None:
        raise ParseError("expected an imaginary-part literal", text, pos)
    end2 = imaginary_tail(m2.end())
    if end2 is None:
        raise ParseError("expected an imaginary suffix ('i', 'j', or '*I')", text, m2.end())
    re_part = _parse_real_literal(m1.group(), base)
    im_part = _parse_real_literal(m2.group(), base)
    return MpComplex._wrap(mpc(re_part, im_part, precision=(re_part.precision, im_part.precision)))

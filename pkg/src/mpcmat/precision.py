"""Process-wide precision and output-digit settings.

Every scalar in this package carries its own significand length (MPFR
semantics: the stored significand is exactly ``precision`` bits, and all
basic operations round to nearest, ties to even).  Values constructed
without an explicit precision receive the default in force at
construction time; changing the default later never re-rounds existing
values.
"""

from __future__ import annotations

import gmpy2

MIN_PRECISION = 2

_default_bits = 256
_default_output_digits = 10

# Context objects are immutable in our usage (we never flip traps or
# rounding modes), so they are cached and shared per bit count.
_context_cache: dict[int, gmpy2.context] = {}


def context_for(bits: int) -> gmpy2.context:
    """Return a cached gmpy2 context rounding to ``bits`` significand bits."""
    ctx = _context_cache.get(bits)
    if ctx is None:
        if bits < MIN_PRECISION:
            raise ValueError(f"precision must be >= {MIN_PRECISION} bits, got {bits}")
        ctx = gmpy2.context(precision=bits)
        _context_cache[bits] = ctx
    return ctx


def set_default_precision(bits: int) -> None:
    """Set the default significand length, in bits, for new values."""
    if not isinstance(bits, int) or bits < MIN_PRECISION:
        raise ValueError(f"precision must be an integer >= {MIN_PRECISION} bits, got {bits!r}")
    global _default_bits
    _default_bits = bits


def get_default_precision() -> int:
    return _default_bits


def set_output_digits(digits: int) -> None:
    """Set the default number of significant decimal digits for printing."""
    if not isinstance(digits, int) or digits < 1:
        raise ValueError(f"output digits must be a positive integer, got {digits!r}")
    global _default_output_digits
    _default_output_digits = digits


def get_output_digits() -> int:
    return _default_output_digits

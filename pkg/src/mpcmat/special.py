"""Bernoulli numbers and the complex gamma function.

Bernoulli numbers are kept as exact rationals in a process-wide cache that
grows contiguously, so asking for B_40 after B_10 only pays for the gap.
``gamma`` evaluates via the asymptotic log-gamma series after shifting the
argument far enough from the origin that the series' smallest term is below
the target accuracy, with a reflection step for the left half-plane.
"""

from __future__ import annotations

import math
import threading

from gmpy2 import bincoef, mpc, mpfr, mpq

from .precision import context_for, get_default_precision
from .scalar import MpComplex, exp, log, precision_of, sin

__all__ = ["bernoulli", "bernoulli_akiyama_tanigawa", "gamma"]


class _BernoulliCache:
    """Contiguous B_0..B_n cache (B_1 = +1/2 convention), recurrence-grown."""

    def __init__(self) -> None:
        self._values: list[mpq] = [mpq(1)]
        self._lock = threading.Lock()

    def get(self, m: int) -> mpq:
        if m < 0:
            raise ValueError(f"Bernoulli index must be >= 0, got {m}")
        with self._lock:
            values = self._values
            while len(values) <= m:
                # B_m = 1 - sum_{k<m} C(m, k) B_k / (m - k + 1)
                n = len(values)
                acc = mpq(0)
                for k, bk in enumerate(values):
                    if bk:
                        acc += bincoef(n, k) * bk / (n - k + 1)
                values.append(1 - acc)
            return values[m]


_CACHE = _BernoulliCache()


def bernoulli(m: int) -> mpq:
    """Exact Bernoulli number B_m (B_1 = +1/2)."""
    return _CACHE.get(m)


def bernoulli_akiyama_tanigawa(m: int) -> mpq:
    """B_m by the Akiyama-Tanigawa triangle; independent of the cache."""
    if m < 0:
        raise ValueError(f"Bernoulli index must be >= 0, got {m}")
    row: list[mpq] = []
    for i in range(m + 1):
        row.append(mpq(1, i + 1))
        for j in range(i, 0, -1):
            row[j - 1] = j * (row[j - 1] - row[j])
    return row[0]


def _is_pole(z: MpComplex) -> bool:
    if z.imag != 0:
        return False
    r = z.real
    return r <= 0 and r == int(r)


def _stirling_terms(absw: mpfr, prec: int) -> int:
    """Smallest series length whose tail bound clears 2^-(prec+16)."""
    # |B_2L| / (2L - 1) * |w|^(1 - 2L) <= 2^-(prec+16), checked in low
    # precision: only the magnitude matters.
    ctx = context_for(64)
    threshold = mpfr(2, 64) ** -(prec + 16)
    w64 = mpfr(absw, 64)
    for terms in range(1, prec + 1):
        b = bernoulli(2 * terms)
        bound = ctx.div(abs(mpfr(b, 64)), (2 * terms - 1) * w64 ** (2 * terms - 1))
        if bound <= threshold:
            return terms
    raise RuntimeError(
        f"gamma series did not reach 2^-{prec + 16} within {prec} terms"
    )


_SHIFT_RADIUS = 1 << 10


def gamma(z, prec: int | None = None) -> MpComplex:
    """Gamma function of a complex argument.

    Args:
        z: anything :class:`MpComplex` accepts.
        prec: working/result precision in bits; defaults to the precision
            the argument carries, or to the ambient setting for bare Python
            numbers.

    Raises:
        ValueError: at the poles (zero and the negative integers).
    """
    if prec is not None:
        p = int(prec)
    elif isinstance(z, (MpComplex, mpfr, mpc)):
        p = precision_of(z)
    else:
        p = get_default_precision()
    gprec = p + 16
    z = MpComplex(z, prec=gprec) if not isinstance(z, MpComplex) else MpComplex(z.real, z.imag, prec=gprec)
    if _is_pole(z):
        raise ValueError(f"gamma pole at {z.real}")

    ctx = context_for(gprec)
    if z.real < 0:
        # Reflect into the right half-plane: poles were already excluded,
        # so sin(-pi z) cannot vanish here.
        pi = MpComplex(ctx.const_pi(), 0, prec=gprec)
        refl = gamma(-z, prec=gprec)
        denom = -z * refl * sin(-pi * z)
        out = -pi / denom
        return MpComplex(out.real, out.imag, prec=p)

    # Shift until the asymptotic series converges quickly enough.
    shift = MpComplex(1, 0, prec=gprec)
    w = z
    while abs(w) < _SHIFT_RADIUS:
        shift = shift * w
        w = w + 1

    terms = _stirling_terms(abs(w), p)
    half = MpComplex(mpfr("0.5", gprec), 0, prec=gprec)
    logw = log(w)
    two_pi = MpComplex(ctx.const_pi(), 0, prec=gprec) * 2
    s = (w - half) * logw - w + half * log(two_pi)
    winv2 = MpComplex(1, prec=gprec) / (w * w)
    wpow = MpComplex(1, prec=gprec) / w  # w^(1-2l) running power
    for l in range(1, terms + 1):
        c = mpfr(mpq(bernoulli(2 * l), (2 * l) * (2 * l - 1)), gprec)
        s = s + MpComplex(c, 0, prec=gprec) * wpow
        wpow = wpow * winv2

    out = exp(s) / shift
    return MpComplex(out.real, out.imag, prec=p)

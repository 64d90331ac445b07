"""Bernoulli numbers and gamma.

The frozen gamma reference values below were produced by an independent
arbitrary-precision implementation (mpmath at 360 bits) and pasted in as
decimal literals with ~90 significant digits.
"""

from __future__ import annotations

import gmpy2
import pytest
from gmpy2 import mpfr, mpq

from mpcmat import MpComplex
from mpcmat.special import bernoulli, bernoulli_akiyama_tanigawa, gamma

# B_0 .. B_12, B_1 = +1/2 convention
BERNOULLI_TABLE = [
    mpq(1),
    mpq(1, 2),
    mpq(1, 6),
    mpq(0),
    mpq(-1, 30),
    mpq(0),
    mpq(1, 42),
    mpq(0),
    mpq(-1, 30),
    mpq(0),
    mpq(5, 66),
    mpq(0),
    mpq(-691, 2730),
]

GAMMA_REFERENCE = [
    # (re(z), im(z), re(gamma), im(gamma)) — external oracle, see module docstring
    ("1.5", "-2.25",
     "0.0986827185779808889490006670307692750351458717755942119986256019135007754812393898604171108",
     "-0.136682918299336817257358109240467372791025370525632499772688693619980824156483927565732529"),
    ("-3.5", "0.5",
     "0.0852267646677367178761861313925234451250191023380437067635689347082076515290999487624325014",
     "0.0711630543707076496732516209314670602702789794804485651594365448043989067306317016764223984"),
    ("0.125", "0",
     "7.53394159879761190469922984121513362461041958814907594098312789777666365719890641283352863",
     "0.0"),
]


def test_bernoulli_low_order_table():
    for m, want in enumerate(BERNOULLI_TABLE):
        assert bernoulli(m) == want


def test_bernoulli_known_high_values():
    assert bernoulli(20) == mpq(-174611, 330)
    assert bernoulli(30) == mpq(8615841276005, 14322)


def test_bernoulli_odd_indices_vanish():
    assert all(bernoulli(m) == 0 for m in range(3, 61, 2))


def test_akiyama_tanigawa_matches_recurrence():
    for m in range(61):
        assert bernoulli_akiyama_tanigawa(m) == bernoulli(m)


def test_bernoulli_negative_index_rejected():
    with pytest.raises(ValueError):
        bernoulli(-1)
    with pytest.raises(ValueError):
        bernoulli_akiyama_tanigawa(-2)


def test_bernoulli_out_of_order_access():
    # cache must tolerate arbitrary access order
    assert bernoulli(40) == bernoulli_akiyama_tanigawa(40)
    assert bernoulli(4) == mpq(-1, 30)


# ---------------------------------------------------------------------------
# gamma
# ---------------------------------------------------------------------------


def _rel_err(got: MpComplex, want_re: mpfr, want_im: mpfr) -> mpfr:
    ctx = gmpy2.context(precision=700)
    scale = max(abs(want_re), abs(want_im))
    err = max(abs(ctx.sub(got.real, want_re)), abs(ctx.sub(got.imag, want_im)))
    return ctx.div(err, scale)


def test_gamma_integer_values_exact_to_tolerance():
    for n, want in [(1, 1), (2, 1), (5, 24), (8, 5040)]:
        got = gamma(n, prec=256)
        assert _rel_err(got, mpfr(want, 700), mpfr(0, 700)) <= mpfr(2) ** -248
        assert got.precision == 256


def test_gamma_half_squares_to_pi():
    g = gamma(MpComplex("0.5"), prec=256)
    pi = gmpy2.const_pi(700)
    assert _rel_err(g * g, pi, mpfr(0, 700)) <= mpfr(2) ** -247


@pytest.mark.parametrize("zre,zim,gre,gim", GAMMA_REFERENCE)
def test_gamma_against_frozen_oracle(zre, zim, gre, gim):
    want_re, want_im = mpfr(gre, 700), mpfr(gim, 700)
    got = gamma(MpComplex(mpfr(zre, 300), mpfr(zim, 300)), prec=256)
    assert _rel_err(got, want_re, want_im) <= mpfr(2) ** -248


@pytest.mark.parametrize("prec", [256, 512])
def test_gamma_recurrence_identity(prec):
    # gamma(z + 1) = z * gamma(z)
    z = MpComplex("2.75-1.5i", prec=prec)
    lhs = gamma(z + 1, prec=prec)
    rhs = z * gamma(z, prec=prec)
    assert _rel_err(lhs, mpfr(rhs.real, 700), mpfr(rhs.imag, 700)) <= mpfr(2) ** -(prec - 8)


@pytest.mark.parametrize("prec", [256, 512])
def test_gamma_reflection_identity(prec):
    # gamma(z) gamma(1 - z) sin(pi z) = pi
    ctx = gmpy2.context(precision=prec + 30)
    z = MpComplex(mpfr("0.3", prec), mpfr("0.6", prec))
    prod = gamma(z, prec=prec) * gamma(MpComplex(1, prec=prec) - z, prec=prec)
    from mpcmat import sin

    pi = MpComplex(ctx.const_pi(), 0, prec=prec + 30)
    lhs = prod * sin(pi * z)
    assert _rel_err(lhs, gmpy2.const_pi(700), mpfr(0, 700)) <= mpfr(2) ** -(prec - 8)


def test_gamma_matches_doubled_precision_self_oracle():
    z = "3.21-7.89i"
    lo = gamma(MpComplex(z, prec=256), prec=256)
    hi = gamma(MpComplex(z, prec=512), prec=512)
    assert _rel_err(lo, mpfr(hi.real, 700), mpfr(hi.imag, 700)) <= mpfr(2) ** -248


@pytest.mark.parametrize("pole", [0, -1, -2, -17])
def test_gamma_pole_raises(pole):
    with pytest.raises(ValueError):
        gamma(pole, prec=128)


def test_gamma_near_pole_is_finite_and_large():
    g = gamma(MpComplex(mpfr("-4.000001", 256), 0), prec=256)
    assert abs(g) > 1e4

"""Discrete Fourier transforms and observable time series under unitary evolution.

The forward transform is the unnormalized sum X_k = sum_n x_n e^{-2pi i nk/N}.
Twiddle factors are derived from the reduced fraction (nk mod N)/N, so equal
angles round identically regardless of the transform length they came from;
together with the decimation-in-frequency splitting this makes
``dft(zero_padding(s, 2N))`` reproduce ``dft(s)`` bit-for-bit on even bins.
"""

from __future__ import annotations

import math
from functools import lru_cache

import gmpy2
from gmpy2 import mpc, mpfr

from .eigen import diag_h
from .matrix import Matrix, ShapeError
from .precision import context_for
from .scalar import MpComplex, format_real, mpreal, precision_of

__all__ = [
    "SampleSeries",
    "dft",
    "gp_1d_print",
    "rec_evol",
    "unp2",
    "zero_padding",
]


class SampleSeries:
    """Uniformly spaced samples: complex values plus the spacing between them.

    ``step`` is dt for a time series and df for a spectrum.
    """

    __slots__ = ("samples", "step")

    def __init__(self, samples, step):
        samples = list(samples)
        if not samples:
            raise ValueError("a series needs at least one sample")
        st = mpreal(step)
        if not st > 0:
            raise ValueError(f"step must be positive, got {st}")
        self.samples = [
            s if isinstance(s, MpComplex) else MpComplex(s) for s in samples
        ]
        self.step = st

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, k: int) -> MpComplex:
        return self.samples[k]

    def __iter__(self):
        return iter(self.samples)

    def __repr__(self) -> str:
        return f"SampleSeries(n={len(self.samples)}, step={self.step})"


@lru_cache(maxsize=None)
def _twiddle(num: int, den: int, gprec: int) -> mpc:
    """e^{-2pi i num/den} for a reduced fraction num/den."""
    ctx = context_for(gprec)
    ang = ctx.div(ctx.mul(ctx.const_pi(), -2 * num), den)
    return mpc(ctx.cos(ang), ctx.sin(ang), precision=(gprec, gprec))


def _angle(num: int, den: int, gprec: int) -> mpc:
    g = math.gcd(num, den)
    return _twiddle(num // g, den // g, gprec)


def _fft_dif(x: list[mpc], ctx, gprec: int) -> list[mpc]:
    """In-place radix-2 decimation in frequency; returns naturally ordered bins."""
    n = len(x)
    m = n
    while m > 1:
        half = m // 2
        for base in range(0, n, m):
            for j in range(half):
                a = x[base + j]
                b = x[base + j + half]
                x[base + j] = ctx.add(a, b)
                diff = ctx.sub(a, b)
                x[base + j + half] = (
                    ctx.mul(diff, _angle(j, m, gprec)) if j else diff
                )
        m = half
    # outputs land in bit-reversed positions
    bits = n.bit_length() - 1
    out = [None] * n
    for i in range(n):
        out[int(f"{i:0{bits}b}"[::-1], 2) if bits else 0] = x[i]
    return out


def dft(s: SampleSeries) -> SampleSeries:
    """Unnormalized forward transform; output spacing is 1/(N·dt)."""
    n = len(s)
    prec = max(v.precision for v in s.samples)
    # the guard width is deliberately independent of n: padding a series to
    # twice its length then reads even bins through the exact same sequence
    # of rounded operations, which is what makes the identity bit-exact
    gprec = prec + 32
    ctx = context_for(gprec)
    x = [mpc(v._z, precision=(gprec, gprec)) for v in s.samples]

    if n & (n - 1) == 0:
        bins = _fft_dif(x, ctx, gprec)
    else:
        bins = []
        for k in range(n):
            acc = mpc(0, precision=(gprec, gprec))
            for i in range(n):
                acc = ctx.fma(x[i], _angle((i * k) % n, n, gprec), acc)
            bins.append(acc)

    out = [MpComplex._wrap(mpc(b, precision=(prec, prec))) for b in bins]
    sprec = precision_of(s.step)
    sctx = context_for(sprec)
    return SampleSeries(out, sctx.div(1, sctx.mul(n, s.step)))


def zero_padding(s: SampleSeries, new_len: int) -> SampleSeries:
    """Append zeros up to ``new_len``; sample spacing is unchanged."""
    n = len(s)
    if new_len < n:
        raise ValueError(f"cannot pad length {n} down to {new_len}")
    prec = max(v.precision for v in s.samples)
    zero = MpComplex(0, 0, prec=prec)
    return SampleSeries(list(s.samples) + [zero] * (new_len - n), s.step)


def unp2(x) -> int:
    """Smallest power of two >= x."""
    v = mpreal(x)
    if not v > 0:
        raise ValueError(f"unp2 needs a positive input, got {v}")
    if v <= 1:
        return 1
    m = int(gmpy2.ceil(v))
    return 1 << (m - 1).bit_length()


def _hermitian_gap(m: Matrix) -> mpfr:
    return (m - m.adjoint()).frobenius_norm() / 2


def _require_hermitian(m: Matrix, prec: int, name: str) -> None:
    from .eigen import NonHermitianError

    bound = mpfr(2, 60) ** -(prec - 8) * m.frobenius_norm()
    gap = _hermitian_gap(m)
    if gap > bound and gap > 0:
        raise NonHermitianError(f"{name} is not Hermitian (gap {gap:.3a})")


def rec_evol(rho: Matrix, h: Matrix, obs: Matrix, dt, n: int) -> SampleSeries:
    """Record Re Tr(rho_k·obs) for k = 0..n-1 under U = exp(-2pi i H dt).

    H is diagonalized once; the state and observable are rotated into its
    eigenbasis, where each step is an elementwise phase multiplication.
    """
    dim = rho.rows
    for name, m in (("rho", rho), ("H", h), ("obs", obs)):
        if m.rows != m.cols:
            raise ShapeError(f"{name} must be square, got {m.rows}x{m.cols}")
        if m.rows != dim:
            raise ShapeError(
                f"dimension mismatch: rho is {dim}x{dim}, {name} is {m.rows}x{m.cols}"
            )
    if n < 1:
        raise ValueError(f"need at least one step, got {n}")
    step = mpreal(dt)
    prec = max(
        rho.max_precision(), h.max_precision(), obs.max_precision(), precision_of(step)
    )
    _require_hermitian(rho, prec, "rho")
    _require_hermitian(obs, prec, "obs")

    es = diag_h(h)  # enforces Hermiticity of H itself
    vt = es.vectors.adjoint()
    rho_e = vt * rho * es.vectors
    obs_e = vt * obs * es.vectors

    # phase accumulation is multiplicative over n steps, so run the loop a
    # further guard level above the eigensolver's working precision
    pprec = prec + 24 + max(n.bit_length(), 8)
    ctx = context_for(pprec)
    cur = [
        [mpc(rho_e[i, j]._z, precision=(pprec, pprec)) for j in range(dim)]
        for i in range(dim)
    ]
    ot = [
        [mpc(obs_e[i, j]._z, precision=(pprec, pprec)) for j in range(dim)]
        for i in range(dim)
    ]
    lam = [mpfr(v, pprec) for v in es.values]
    two_pi_dt = ctx.mul(ctx.mul(ctx.const_pi(), -2), mpfr(step, pprec))
    phase = [
        [None] * dim for _ in range(dim)
    ]  # phase[i][j] = e^{-2pi i (lam_i - lam_j) dt}
    for i in range(dim):
        for j in range(dim):
            ang = ctx.mul(two_pi_dt, ctx.sub(lam[i], lam[j]))
            phase[i][j] = mpc(ctx.cos(ang), ctx.sin(ang), precision=(pprec, pprec))

    scale = max(1.0, float(rho.frobenius_norm()) * float(obs.frobenius_norm()))
    residue_cap = mpfr(2, 60) ** -(prec - 16) * scale
    samples: list[MpComplex] = []
    for _ in range(n):
        acc = mpc(0, precision=(pprec, pprec))
        for i in range(dim):
            row = cur[i]
            for j in range(dim):
                acc = ctx.fma(row[j], ot[j][i], acc)
        if ctx.abs(acc.imag) > residue_cap:
            raise RuntimeError(
                f"imaginary residue {acc.imag:.3a} exceeds tolerance; "
                "inputs are not consistently Hermitian"
            )
        samples.append(MpComplex(mpfr(acc.real, prec), 0, prec=prec))
        for i in range(dim):
            row = cur[i]
            prow = phase[i]
            for j in range(dim):
                row[j] = ctx.mul(row[j], prow[j])
    return SampleSeries(samples, step)


def gp_1d_print(s: SampleSeries, path, digits: int | None = None) -> None:
    """Write ``x value`` lines (x = k·step) with a # comment header."""
    sprec = precision_of(s.step)
    ctx = context_for(sprec + 64)
    with open(path, "w") as fh:
        fh.write("# x y\n")
        for k, v in enumerate(s.samples):
            x = ctx.mul(k, s.step)
            xs = str(int(x)) if x.is_integer() else format_real(x, digits)
            fh.write(f"{xs} {format_real(v.real, digits)}\n")

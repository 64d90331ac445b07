"""Hermitian eigensolver suite: invariants, exact-spectrum recovery, exp_h, svd.

The recovery tests build their matrices from dyadic Householder reflections
(I - v.vT/8 with v a +-1 pattern of sixteen entries), so the product is exactly
representable at working precision and its spectrum is known without any
reference solver.
"""

from __future__ import annotations

import random

import gmpy2
import pytest
from gmpy2 import mpfr

from mpcmat import (
    ConvergenceError,
    EigenSystem,
    Matrix,
    MpComplex,
    NonHermitianError,
    ShapeError,
    diag_h,
    eigenvalues_h,
    exp_h,
    svd,
)

WIDE = gmpy2.context(precision=1200)


def random_hermitian(n: int, prec: int, seed: int, scale: float = 1.0) -> Matrix:
    rng = random.Random(seed)
    m = Matrix(n, n)
    for i in range(n):
        m[i, i] = MpComplex(mpfr(rng.uniform(-scale, scale), prec), 0, prec=prec)
        for j in range(i + 1, n):
            z = MpComplex(
                mpfr(rng.uniform(-scale, scale), prec),
                mpfr(rng.uniform(-scale, scale), prec),
                prec=prec,
            )
            m[i, j] = z
            m[j, i] = z.conjugate()
    return m


def exact_spectrum_matrix(
    values: list[mpfr], rng: random.Random, prec: int = 256, reflections: int = 3
) -> Matrix:
    """Dyadic-reflector conjugation of diag(values); spectrum is exact."""
    n = len(values)
    weight = 1 << min(4, n.bit_length() - 1)  # largest power of two <= min(16, n)
    a = Matrix.diag([MpComplex(v, 0, prec=prec) for v in values])
    for _ in range(reflections):
        v = Matrix(n, 1)
        for p in rng.sample(range(n), weight):
            v[p, 0] = rng.choice([-1, 1])
        # ||v||^2 = weight, a power of two, so H is exact and exactly unitary
        h = Matrix.identity(n, prec=prec) - (v * v.adjoint()) / (weight // 2)
        a = h * a * h
    return a


def dyadic_values(n: int, rng: random.Random, prec: int = 256) -> list[mpfr]:
    return [
        mpfr(rng.randrange(-(2**40), 2**40), prec) / mpfr(2**35, prec)
        for _ in range(n)
    ]


def ortho_gap(v: Matrix) -> mpfr:
    return (v.adjoint() * v - Matrix.identity(v.cols)).frobenius_norm()


# ---------------------------------------------------------------------------
# invariant suite
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("prec", [256, 512])
@pytest.mark.parametrize("n", [2, 5, 12])
def test_diag_h_invariants(prec, n):
    a = random_hermitian(n, prec, seed=1000 + 7 * n + prec)
    es = diag_h(a)
    bound = mpfr(2, 60) ** -(prec - 16)
    normf = a.frobenius_norm()

    assert float(ortho_gap(es.vectors)) <= bound * n
    lam = Matrix.diag([MpComplex(x, 0, prec=prec + 24) for x in es.values])
    resid = (a * es.vectors - es.vectors * lam).frobenius_norm()
    recon = (es.vectors * lam * es.vectors.adjoint() - a).frobenius_norm()
    assert resid <= bound * normf
    assert recon <= bound * normf


def test_diag_h_n30_contract_limit():
    # largest size in the contract; one representative run
    a = random_hermitian(30, 256, seed=303)
    es = diag_h(a)
    bound = mpfr(2, 60) ** -240
    assert float(ortho_gap(es.vectors)) <= bound * 30
    lam = Matrix.diag([MpComplex(x, 0, prec=280) for x in es.values])
    assert (a * es.vectors - es.vectors * lam).frobenius_norm() <= bound * a.frobenius_norm()


@pytest.mark.parametrize("n", [3, 8])
def test_eigenvalues_descending(n):
    a = random_hermitian(n, 256, seed=40 + n)
    vals = eigenvalues_h(a)
    assert all(vals[i] >= vals[i + 1] for i in range(n - 1))
    es = diag_h(a)
    assert all(es.values[i] >= es.values[i + 1] for i in range(n - 1))


def test_trace_equals_eigenvalue_sum():
    a = random_hermitian(9, 256, seed=88)
    vals = eigenvalues_h(a)
    s = WIDE.fsum(vals)
    gap = abs(WIDE.sub(a.trace()._z.real, s))
    assert gap <= mpfr(2, 60) ** -240 * a.frobenius_norm()


# ---------------------------------------------------------------------------
# exact-spectrum recovery
# ---------------------------------------------------------------------------


def test_recovery_exact_spectrum_20x20():
    rng = random.Random(808)
    target = sorted(dyadic_values(20, rng), reverse=True)
    a = exact_spectrum_matrix(sorted(target, reverse=True), rng)
    es = diag_h(a)
    qr_vals = eigenvalues_h(a)

    s_diag = WIDE.fsum(abs(WIDE.sub(l, d)) for l, d in zip(es.values, target))
    s_qr = WIDE.fsum(abs(WIDE.sub(l, d)) for l, d in zip(qr_vals, target))
    assert s_diag <= mpfr("1e-70")
    assert s_qr <= mpfr("1e-25")
    # the refined values must beat the raw QR values
    assert s_diag < s_qr


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_recovery_refinement_strictly_better_each_seed(seed):
    rng = random.Random(9100 + seed)
    target = sorted(dyadic_values(20, rng), reverse=True)
    a = exact_spectrum_matrix(target, rng)
    s_diag = WIDE.fsum(
        abs(WIDE.sub(l, d)) for l, d in zip(diag_h(a).values, target)
    )
    s_qr = WIDE.fsum(
        abs(WIDE.sub(l, d)) for l, d in zip(eigenvalues_h(a), target)
    )
    assert s_diag < s_qr


def test_identity_full_degeneracy():
    es = diag_h(Matrix.identity(6))
    assert all(abs(WIDE.sub(v, 1)) < mpfr("1e-70") for v in es.values)
    assert float(ortho_gap(es.vectors)) < 1e-70


def test_two_fold_degenerate_spectrum():
    rng = random.Random(515)
    base = dyadic_values(10, rng)
    target = sorted([v for v in base for _ in (0, 1)], reverse=True)
    a = exact_spectrum_matrix(target, rng)
    es = diag_h(a)
    assert float(ortho_gap(es.vectors)) < 1e-70
    s = WIDE.fsum(abs(WIDE.sub(l, d)) for l, d in zip(es.values, target))
    assert s <= mpfr("1e-70")


def test_near_degenerate_cluster_resolved():
    # six eigenvalues packed within 2^-200 of 1/2: inverse iteration must
    # still deliver an orthonormal basis and per-value error below the pack
    rng = random.Random(77)
    half = mpfr("0.5", 256)
    vals = [half + mpfr(i, 256) * mpfr(2, 256) ** -200 for i in range(6)]
    vals += dyadic_values(8, rng)
    target = sorted(vals, reverse=True)
    a = exact_spectrum_matrix(target, rng)
    es = diag_h(a)
    assert float(ortho_gap(es.vectors)) < 1e-70
    worst = max(abs(WIDE.sub(l, d)) for l, d in zip(es.values, target))
    assert worst < mpfr(2, 60) ** -240


def test_rank_deficient_psd():
    rng = random.Random(660)
    vals = [mpfr(rng.randrange(1, 2**30), 256) / mpfr(2**30, 256) for _ in range(8)]
    vals += [mpfr(0, 256)] * 8
    target = sorted(vals, reverse=True)
    a = exact_spectrum_matrix(target, rng)
    es = diag_h(a)
    assert float(ortho_gap(es.vectors)) < 1e-70
    s = WIDE.fsum(abs(WIDE.sub(l, d)) for l, d in zip(es.values, target))
    assert s <= mpfr("1e-70")


# ---------------------------------------------------------------------------
# error contracts
# ---------------------------------------------------------------------------


def test_non_hermitian_rejected():
    m = Matrix.from_rows([["1", "2"], ["3", "4"]])
    with pytest.raises(NonHermitianError):
        diag_h(m)
    with pytest.raises(NonHermitianError):
        eigenvalues_h(m)


def test_slightly_non_hermitian_rejected():
    # perturbation just above the 2^-(prec-8).|A|_F gate
    a = random_hermitian(4, 256, seed=5)
    bump = a.frobenius_norm() * mpfr(2, 60) ** -246
    a[1, 2] = a[1, 2] + MpComplex(bump, 0, prec=256)
    with pytest.raises(NonHermitianError):
        diag_h(a)


def test_hermitian_within_gate_accepted():
    a = random_hermitian(4, 256, seed=5)
    tiny = a.frobenius_norm() * mpfr(2, 60) ** -252
    a[1, 2] = a[1, 2] + MpComplex(tiny, 0, prec=256)
    diag_h(a)  # must not raise


def test_non_square_rejected():
    with pytest.raises(ShapeError):
        diag_h(Matrix(2, 3))


def test_convergence_error_carries_index():
    err = ConvergenceError(4, "eigenpair 4 did not settle")
    assert isinstance(err, RuntimeError)
    assert err.index == 4


def test_eigensystem_fields():
    es = diag_h(Matrix.identity(3))
    assert isinstance(es, EigenSystem)
    assert len(es.values) == 3
    assert es.vectors.rows == es.vectors.cols == 3


# ---------------------------------------------------------------------------
# exp_h
# ---------------------------------------------------------------------------


def taylor_exp(a: Matrix, terms: int = 30) -> Matrix:
    out = Matrix.identity(a.rows, prec=a.max_precision() + 64)
    term = Matrix.identity(a.rows, prec=a.max_precision() + 64)
    for k in range(1, terms + 1):
        term = term * a / k
        out = out + term
    return out


# norm chosen so the 30-term truncation error |A|^31/31! sits safely below
# the 2^-(prec-24) acceptance bound at each precision
@pytest.mark.parametrize("prec,scale", [(256, 0.01), (512, 1e-5)])
def test_exp_h_matches_taylor(prec, scale):
    a = random_hermitian(5, prec, seed=21, scale=scale)
    gap = (exp_h(a) - taylor_exp(a)).frobenius_norm()
    assert gap <= mpfr(2, 60) ** -(prec - 24)


def test_exp_h_zero_is_identity():
    z = Matrix(4, 4)
    gap = (exp_h(z) - Matrix.identity(4)).frobenius_norm()
    assert gap <= mpfr(2, 60) ** -232


def test_exp_h_diagonal():
    d = Matrix.diag([MpComplex(1, 0), MpComplex(-2, 0)])
    e = exp_h(d)
    ctx = gmpy2.context(precision=300)
    assert abs(WIDE.sub(e[0, 0]._z.real, ctx.exp(mpfr(1, 300)))) < mpfr("1e-70")
    assert abs(WIDE.sub(e[1, 1]._z.real, ctx.exp(mpfr(-2, 300)))) < mpfr("1e-70")
    assert abs(e[0, 1]._z) < mpfr("1e-70")


def test_exp_h_inverse_pairing():
    # exp(A).exp(-A) == I for Hermitian A
    a = random_hermitian(4, 256, seed=33, scale=0.5)
    gap = (exp_h(a) * exp_h(-a) - Matrix.identity(4)).frobenius_norm()
    assert gap <= mpfr(2, 60) ** -232 * 16


# ---------------------------------------------------------------------------
# svd
# ---------------------------------------------------------------------------


def random_rect(rows: int, cols: int, prec: int, seed: int) -> Matrix:
    rng = random.Random(seed)
    m = Matrix(rows, cols)
    for i in range(rows):
        for j in range(cols):
            m[i, j] = MpComplex(
                mpfr(rng.uniform(-1, 1), prec),
                mpfr(rng.uniform(-1, 1), prec),
                prec=prec,
            )
    return m


@pytest.mark.parametrize("shape", [(4, 4), (6, 3), (3, 6)])
def test_svd_reconstruction(shape):
    a = random_rect(*shape, prec=256, seed=11 * shape[0] + shape[1])
    res = svd(a)
    k = min(shape)
    smat = Matrix(shape[0], shape[1])
    for i, s in enumerate(res.s):
        smat[i, i] = MpComplex(s, 0, prec=280)
    gap = (res.u * smat * res.v.adjoint() - a).frobenius_norm()
    assert gap <= mpfr(2, 60) ** -128 * a.frobenius_norm()
    assert len(res.s) == k
    assert all(res.s[i] >= res.s[i + 1] for i in range(k - 1))
    assert all(s >= 0 for s in res.s)
    assert float(ortho_gap(res.u)) < 1e-35
    assert float(ortho_gap(res.v)) < 1e-35


def test_svd_rank_deficient_completion():
    # rank-1 4x4: three null singular directions must still come back
    # orthonormal (Gram-Schmidt completion path)
    u = random_rect(4, 1, 256, seed=3)
    v = random_rect(4, 1, 256, seed=4)
    a = u * v.adjoint()
    res = svd(a)
    assert float(ortho_gap(res.u)) < 1e-35
    assert float(ortho_gap(res.v)) < 1e-35
    assert res.s[0] > 0
    for s in res.s[1:]:
        assert s < mpfr(2, 60) ** -100 * res.s[0]
    smat = Matrix(4, 4)
    smat[0, 0] = MpComplex(res.s[0], 0, prec=280)
    gap = (res.u * smat * res.v.adjoint() - a).frobenius_norm()
    assert gap <= mpfr(2, 60) ** -128 * a.frobenius_norm()


def test_svd_singular_values_match_eigenvalues():
    a = random_hermitian(5, 256, seed=99)
    es = eigenvalues_h(a)
    res = svd(a)
    mods = sorted((WIDE.abs(v) for v in es), reverse=True)
    for s, m in zip(res.s, mods):
        assert abs(WIDE.sub(s, m)) < mpfr("1e-35")

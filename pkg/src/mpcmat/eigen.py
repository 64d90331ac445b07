"""Hermitian eigendecomposition and derived factorizations.

Pipeline: Householder reduction to real symmetric tridiagonal form (a
diagonal phase similarity absorbs the complex off-diagonals), implicit
Wilkinson-shift QR for the eigenvalues, then inverse iteration on the
*original* matrix for each wanted eigenvector, with Rayleigh-quotient
refinement of the eigenvalue, deflation of already-found directions by a
rank-one shift, and explicit re-orthogonalization when neighbouring
eigenvalues are close.

Transforms are never accumulated during the QR phase; eigenvectors are a
separate second phase so callers that only need a few of them (bond
truncation keeps the top block of a density spectrum) can skip the rest.
"""

from __future__ import annotations

import random as _pyrandom

from gmpy2 import mpc, mpfr

from .linsolve import _lu_raw, _substitute
from .matrix import Matrix, ShapeError
from .precision import context_for
from .scalar import MpComplex

__all__ = [
    "EigenSystem",
    "SvdResult",
    "NonHermitianError",
    "ConvergenceError",
    "diag_h",
    "eigenvalues_h",
    "exp_h",
    "svd",
]

GUARD_BITS = 24
_QR_SWEEP_CAP = 64
_CONTINUE_ROUNDS = 4
_RESTART_ROUNDS = 4


class NonHermitianError(ValueError):
    """Input drifted too far from Hermitian for a Hermitian-only solver."""


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted; `index` names the eigenpair that failed."""

    def __init__(self, index: int, message: str):
        super().__init__(message)
        self.index = index


class EigenSystem:
    """Eigenvalues in descending order; eigenvectors as matrix columns."""

    __slots__ = ("values", "vectors")

    def __init__(self, values: list[mpfr], vectors: Matrix):
        self.values = values
        self.vectors = vectors


class SvdResult:
    __slots__ = ("u", "s", "v")

    def __init__(self, u: Matrix, s: list[mpfr], v: Matrix):
        self.u = u
        self.s = s
        self.v = v


# ---------------------------------------------------------------------------
# raw helpers (lists of mpc, explicit context everywhere)
# ---------------------------------------------------------------------------


def _raw_at(a: Matrix, gprec: int) -> list[list[mpc]]:
    # widening is lossless; mpc(x, precision=...) re-rounds explicitly
    return [
        [mpc(a._e[i * a.cols + j]._z, precision=(gprec, gprec)) for j in range(a.cols)]
        for i in range(a.rows)
    ]


def _conj(z: mpc, ctx, gprec: int) -> mpc:
    # .conjugate() on a raw mpc rounds at the *thread* context; negate the
    # imaginary part explicitly at the working precision instead
    return mpc(z.real, ctx.minus(z.imag), precision=(gprec, gprec))


def _frob(rows: list[list[mpc]], ctx, gprec: int) -> mpfr:
    acc = mpfr(0, gprec)
    for row in rows:
        for z in row:
            acc = ctx.add(acc, ctx.norm(z))
    return ctx.sqrt(acc)


def _matvec(rows, v, ctx):
    out = []
    for ri in rows:
        acc = ctx.mul(ri[0], v[0])
        for j in range(1, len(v)):
            acc = ctx.fma(ri[j], v[j], acc)
        out.append(acc)
    return out


def _dot(u, v, ctx):
    # <u, v> with conjugation on u
    g = ctx.precision
    acc = ctx.mul(_conj(u[0], ctx, g), v[0])
    for j in range(1, len(u)):
        acc = ctx.fma(_conj(u[j], ctx, g), v[j], acc)
    return acc


def _norm2(v, ctx, gprec: int) -> mpfr:
    acc = mpfr(0, gprec)
    for z in v:
        acc = ctx.add(acc, ctx.norm(z))
    return ctx.sqrt(acc)


def _hermiticity_gap(rows, ctx, gprec: int) -> mpfr:
    """Frobenius norm of the anti-Hermitian part (A - A^dagger)/2."""
    n = len(rows)
    acc = mpfr(0, gprec)
    for i in range(n):
        for j in range(i, n):
            diff = ctx.sub(rows[i][j], _conj(rows[j][i], ctx, gprec))
            contrib = ctx.norm(diff)
            if i != j:
                contrib = ctx.mul(contrib, 2)
            acc = ctx.add(acc, contrib)
    return ctx.div(ctx.sqrt(acc), 2)


# ---------------------------------------------------------------------------
# phase 1: tridiagonalize + QR eigenvalues
# ---------------------------------------------------------------------------


def _tridiagonalize(b: list[list[mpc]], ctx, gprec: int) -> tuple[list[mpfr], list[mpfr]]:
    """Householder reduction in place; returns (diagonal, |offdiagonal|)."""
    n = len(b)
    for k in range(n - 2):
        m = n - k - 1  # trailing block size
        sigma = mpfr(0, gprec)
        for i in range(k + 1, n):
            sigma = ctx.add(sigma, ctx.norm(b[i][k]))
        normx = ctx.sqrt(sigma)
        if normx == 0:
            continue  # column already tridiagonal here
        x0 = b[k + 1][k]
        if x0 == 0:
            phase = mpc(1, 0, precision=(gprec, gprec))
        else:
            phase = ctx.div(x0, ctx.abs(x0))
        alpha = ctx.mul(phase, ctx.minus(normx))
        v = [b[i][k] for i in range(k + 1, n)]
        v[0] = ctx.sub(v[0], alpha)
        vnorm2 = ctx.add(ctx.sub(sigma, ctx.norm(x0)), ctx.norm(v[0]))
        if vnorm2 == 0:
            continue
        tau = ctx.div(mpfr(2, gprec), vnorm2)
        # p = tau * B v on the trailing block
        p = []
        for i in range(k + 1, n):
            bi = b[i]
            acc = ctx.mul(bi[k + 1], v[0])
            for j in range(1, m):
                acc = ctx.fma(bi[k + 1 + j], v[j], acc)
            p.append(ctx.mul(acc, tau))
        # w = p - (tau/2) (v^dagger p) v
        vp = _dot(v, p, ctx)
        c = ctx.mul(ctx.div(tau, 2), vp)
        w = [ctx.sub(p[i], ctx.mul(c, v[i])) for i in range(m)]
        # B -= v w^dagger + w v^dagger
        for i in range(m):
            bi = b[k + 1 + i]
            vi, wi = v[i], w[i]
            for j in range(m):
                upd = ctx.add(
                    ctx.mul(vi, _conj(w[j], ctx, gprec)),
                    ctx.mul(wi, _conj(v[j], ctx, gprec)),
                )
                bi[k + 1 + j] = ctx.sub(bi[k + 1 + j], upd)
        b[k + 1][k] = alpha
        b[k][k + 1] = _conj(alpha, ctx, gprec)
        for i in range(k + 2, n):
            b[i][k] = mpc(0, 0, precision=(gprec, gprec))
            b[k][i] = mpc(0, 0, precision=(gprec, gprec))
    d = [mpfr(b[i][i].real, gprec) for i in range(n)]
    e = [ctx.abs(b[i + 1][i]) for i in range(n - 1)]
    return d, e


def _qr_eigenvalues(d: list[mpfr], e: list[mpfr], prec: int, gprec: int) -> None:
    """Implicit Wilkinson-shift QR on a symmetric tridiagonal, in place."""
    ctx = context_for(gprec)
    n = len(d)
    if n < 2:
        return
    eps = mpfr(2, gprec) ** (-prec)
    hi = n - 1
    sweeps_here = 0
    while hi > 0:
        if ctx.abs(e[hi - 1]) <= ctx.mul(
            eps, ctx.add(ctx.abs(d[hi - 1]), ctx.abs(d[hi]))
        ):
            e[hi - 1] = mpfr(0, gprec)
            hi -= 1
            sweeps_here = 0
            continue
        lo = hi - 1
        while lo > 0 and ctx.abs(e[lo - 1]) > ctx.mul(
            eps, ctx.add(ctx.abs(d[lo - 1]), ctx.abs(d[lo]))
        ):
            lo -= 1
        sweeps_here += 1
        if sweeps_here > _QR_SWEEP_CAP:
            raise ConvergenceError(
                hi, f"eigenvalue {hi} did not deflate within {_QR_SWEEP_CAP} QR sweeps"
            )
        # Wilkinson shift from the trailing 2x2 of the active window
        delta = ctx.div(ctx.sub(d[hi - 1], d[hi]), 2)
        bb = e[hi - 1]
        if delta == 0:
            mu = ctx.sub(d[hi], ctx.abs(bb))
        else:
            denom = ctx.add(ctx.abs(delta), ctx.hypot(delta, bb))
            corr = ctx.div(ctx.square(bb), denom)
            mu = ctx.add(d[hi], corr) if delta < 0 else ctx.sub(d[hi], corr)
        # bulge-chasing sweep
        x = ctx.sub(d[lo], mu)
        z = e[lo]
        for k in range(lo, hi):
            r = ctx.hypot(x, z)
            if r == 0:
                c, s = mpfr(1, gprec), mpfr(0, gprec)
            else:
                c, s = ctx.div(x, r), ctx.div(z, r)
            if k > lo:
                e[k - 1] = r
            t1, t2, t3 = d[k], d[k + 1], e[k]
            cc, ss = ctx.square(c), ctx.square(s)
            cs = ctx.mul(c, s)
            cs_t3_2 = ctx.mul(ctx.mul(cs, t3), 2)
            d[k] = ctx.add(ctx.add(ctx.mul(cc, t1), cs_t3_2), ctx.mul(ss, t2))
            d[k + 1] = ctx.add(ctx.sub(ctx.mul(ss, t1), cs_t3_2), ctx.mul(cc, t2))
            e[k] = ctx.add(ctx.mul(ctx.sub(cc, ss), t3), ctx.mul(cs, ctx.sub(t2, t1)))
            if k < hi - 1:
                z = ctx.mul(s, e[k + 1])
                e[k + 1] = ctx.mul(c, e[k + 1])
                x = e[k]


# ---------------------------------------------------------------------------
# phase 2: inverse iteration
# ---------------------------------------------------------------------------


def _seeded_unit_vector(n: int, seed: int, gprec: int, ctx) -> list[mpc]:
    rng = _pyrandom.Random(seed)
    v = [
        mpc(rng.uniform(-1, 1), rng.uniform(-1, 1), precision=(gprec, gprec))
        for _ in range(n)
    ]
    nrm = _norm2(v, ctx, gprec)
    return [ctx.div(z, nrm) for z in v]


class _HermitianSolver:
    """Two-phase solver over raw gprec arrays.

    Construction runs phase 1 (eigenvalues, descending). `vectors_for_top(k)`
    runs inverse iteration for the first k eigenpairs; it may only be called
    once, with deflation applied in computation order.
    """

    def __init__(self, a: Matrix, prec: int, seed: int = 0x5EED):
        if a.rows != a.cols:
            raise ShapeError(f"eigendecomposition needs a square matrix, got {a.rows}x{a.cols}")
        self.n = a.rows
        self.prec = prec
        self.gprec = prec + GUARD_BITS
        self.seed = seed
        ctx = self.ctx = context_for(self.gprec)
        rows = _raw_at(a, self.gprec)
        self.normf = _frob(rows, ctx, self.gprec)
        gap = _hermiticity_gap(rows, ctx, self.gprec)
        if gap > ctx.mul(mpfr(2, self.gprec) ** -(prec - 8), self.normf):
            raise NonHermitianError(
                f"matrix is not Hermitian to working precision: "
                f"anti-Hermitian part {gap:.3e} vs norm {self.normf:.3e}"
            )
        self.a0 = rows
        if self.normf == 0:
            self.values = [mpfr(0, self.gprec)] * self.n
            return
        scratch = [row[:] for row in rows]
        d, e = _tridiagonalize(scratch, ctx, self.gprec)
        _qr_eigenvalues(d, e, prec, self.gprec)
        self.values = sorted(d, reverse=True)

    # -- phase 2 ---------------------------------------------------------

    def vectors_for_top(self, count: int) -> tuple[list[mpfr], list[list[mpc]]]:
        """Eigenvectors for the `count` largest eigenvalues.

        Returns (refined values, vectors), both in descending eigenvalue
        order after a final stable re-sort.
        """
        n, ctx, gprec = self.n, self.ctx, self.gprec
        if self.normf == 0:
            basis = [
                [
                    mpc(1 if i == j else 0, 0, precision=(gprec, gprec))
                    for i in range(n)
                ]
                for j in range(count)
            ]
            return [mpfr(0, gprec)] * count, basis

        tol = ctx.mul(mpfr(2, gprec) ** -(self.prec - 6), self.normf)
        pivot_floor = ctx.mul(mpfr(2, gprec) ** -(gprec - 4), self.normf)
        ortho_gate = mpfr(2, gprec) ** -(self.prec // 2)
        shift = ctx.mul(self.normf, 2)

        w = [row[:] for row in self.a0]  # deflated copy
        accepted_vals: list[mpfr] = []
        accepted_vecs: list[list[mpc]] = []
        for idx in range(count):
            lam = mpfr(self.values[idx], gprec)
            vec = None
            converged = False
            for round_no in range(_CONTINUE_ROUNDS + _RESTART_ROUNDS):
                if vec is None or round_no >= _CONTINUE_ROUNDS:
                    vec = _seeded_unit_vector(
                        n, self.seed ^ (idx * 0x9E3779B1 + round_no), gprec, ctx
                    )
                m_rows = [
                    [
                        ctx.sub(w[i][j], lam) if i == j else w[i][j]
                        for j in range(n)
                    ]
                    for i in range(n)
                ]
                perm, _ = _lu_raw(m_rows, gprec, self.normf, pivot_floor=pivot_floor)
                (y,) = _substitute(m_rows, perm, [vec], gprec)
                nrm = _norm2(y, ctx, gprec)
                if nrm == 0:
                    vec = None
                    continue
                y = [ctx.div(z, nrm) for z in y]
                # Rayleigh quotient against the clean matrix refines lambda
                ay = _matvec(self.a0, y, ctx)
                lam_new = mpfr(_dot(y, ay, ctx).real, gprec)
                resid = _norm2(
                    [ctx.sub(ay[i], ctx.mul(y[i], lam_new)) for i in range(n)],
                    ctx,
                    gprec,
                )
                if resid <= tol:
                    if accepted_vecs and any(
                        ctx.abs(_dot(u, y, ctx)) > ortho_gate for u in accepted_vecs
                    ):
                        for u in accepted_vecs:
                            ov = _dot(u, y, ctx)
                            y = [ctx.sub(y[i], ctx.mul(ov, u[i])) for i in range(n)]
                        nrm = _norm2(y, ctx, gprec)
                        if nrm == 0:
                            vec = None
                            continue
                        y = [ctx.div(z, nrm) for z in y]
                        ay = _matvec(self.a0, y, ctx)
                        lam_new = mpfr(_dot(y, ay, ctx).real, gprec)
                        resid = _norm2(
                            [ctx.sub(ay[i], ctx.mul(y[i], lam_new)) for i in range(n)],
                            ctx,
                            gprec,
                        )
                        if resid > tol:
                            lam = lam_new
                            vec = y
                            continue
                    # final Rayleigh quotient at an extra guard level: the
                    # converged vector pins the eigenvalue far more tightly
                    # than the QR phase's arithmetic floor
                    ctx_hi = context_for(gprec + GUARD_BITS)
                    ay_hi = _matvec(self.a0, y, ctx_hi)
                    num = _dot(y, ay_hi, ctx_hi).real
                    den = _dot(y, y, ctx_hi).real
                    accepted_vals.append(
                        mpfr(ctx_hi.div(num, den), gprec + GUARD_BITS)
                    )
                    accepted_vecs.append(y)
                    converged = True
                    break
                lam = lam_new
                vec = y
            if not converged:
                raise ConvergenceError(
                    idx,
                    f"eigenvector {idx} (eigenvalue near {float(self.values[idx]):.6e}) "
                    f"did not converge in {_CONTINUE_ROUNDS + _RESTART_ROUNDS} rounds",
                )
            # push the found direction far away before hunting the next one
            v = accepted_vecs[-1]
            for i in range(n):
                wi = w[i]
                svi = ctx.mul(shift, v[i])
                for j in range(n):
                    wi[j] = ctx.add(wi[j], ctx.mul(svi, _conj(v[j], ctx, gprec)))

        order = sorted(range(count), key=lambda i: accepted_vals[i], reverse=True)
        return [accepted_vals[i] for i in order], [accepted_vecs[i] for i in order]


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------


def _columns_to_matrix(cols: list[list[mpc]], n: int) -> Matrix:
    out = Matrix.__new__(Matrix)
    out.rows, out.cols = n, len(cols)
    wrap = MpComplex._wrap
    out._e = [wrap(cols[j][i]) for i in range(n) for j in range(len(cols))]
    return out


def diag_h(a: Matrix) -> EigenSystem:
    """Full eigendecomposition of a Hermitian matrix.

    Returned eigenvalues are inverse-iteration refined (Rayleigh quotients of
    the converged vectors), which is noticeably tighter than the raw QR
    output; see `eigenvalues_h` for the cheap values-only path.
    """
    solver = _HermitianSolver(a, a.max_precision())
    vals, vecs = solver.vectors_for_top(solver.n)
    return EigenSystem(vals, _columns_to_matrix(vecs, solver.n))


def eigenvalues_h(a: Matrix) -> list[mpfr]:
    """Eigenvalues only (descending), straight from the QR phase."""
    return list(_HermitianSolver(a, a.max_precision()).values)


def exp_h(a: Matrix) -> Matrix:
    """Matrix exponential of a Hermitian matrix via its eigensystem."""
    es = diag_h(a)
    n = a.rows
    gprec = a.max_precision() + GUARD_BITS
    ctx = context_for(gprec)
    exps = [ctx.exp(v) for v in es.values]
    cols = [[es.vectors._e[i * n + j]._z for i in range(n)] for j in range(n)]
    out = Matrix.__new__(Matrix)
    out.rows, out.cols = n, n
    wrap = MpComplex._wrap
    elems = []
    for i in range(n):
        for j in range(n):
            acc = mpc(0, 0, precision=(gprec, gprec))
            for k in range(n):
                term = ctx.mul(cols[k][i], _conj(cols[k][j], ctx, gprec))
                acc = ctx.fma(term, exps[k], acc)
            elems.append(wrap(acc))
    out._e = elems
    return out


def svd(a: Matrix) -> SvdResult:
    """Singular value decomposition through the Hermitian eigenproblem of A†A."""
    m, n = a.rows, a.cols
    prec = a.max_precision()
    gprec = prec + GUARD_BITS
    ctx = context_for(gprec)

    gram = a.adjoint() * a
    es = diag_h(gram)
    svals: list[mpfr] = []
    for lam in es.values[: min(m, n)]:
        svals.append(ctx.sqrt(lam) if lam > 0 else mpfr(0, gprec))

    araw = _raw_at(a, gprec)
    vcols = [
        [es.vectors._e[i * n + j]._z for i in range(n)] for j in range(n)
    ]
    smax = svals[0] if svals else mpfr(0, gprec)
    cutoff = ctx.mul(mpfr(2, gprec) ** -(prec // 2), smax)

    ucols: list[list[mpc]] = []
    for j, s in enumerate(svals):
        if smax == 0 or s < cutoff or s == 0:
            break
        av = _matvec(araw, vcols[j], ctx)
        ucols.append([ctx.div(z, s) for z in av])

    # complete U to a full orthonormal basis (rank-deficient or m > n case)
    k = 0
    while len(ucols) < m:
        if k < m:
            cand = [mpc(1 if i == k else 0, 0, precision=(gprec, gprec)) for i in range(m)]
            k += 1
        else:
            cand = _seeded_unit_vector(m, 0xC0BA + k, gprec, ctx)
            k += 1
        for u in ucols:
            ov = _dot(u, cand, ctx)
            cand = [ctx.sub(cand[i], ctx.mul(ov, u[i])) for i in range(m)]
        nrm = _norm2(cand, ctx, gprec)
        if nrm > mpfr("0.125", gprec):
            ucols.append([ctx.div(z, nrm) for z in cand])

    return SvdResult(
        _columns_to_matrix(ucols, m),
        svals,
        _columns_to_matrix(vcols, n),
    )

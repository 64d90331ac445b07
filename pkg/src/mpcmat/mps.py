"""Matrix-product-state simulation of n-qubit circuits at arbitrary precision.

State layout: site tensors ``Q[s][i][u][v]`` (physical index i, bond indices
u, v) interleaved with bond vectors ``V[s]`` of Schmidt coefficients, so the
amplitude of |i_0...i_{n-1}> is the chain product
Q_0[i_0] . diag(V_0) . Q_1[i_1] . diag(V_1) ... Q_{n-1}[i_{n-1}].
The left blocks and right blocks read off this form are orthonormal Schmidt
bases at every bond, which is what lets a gate update work on one or two
density matrices of size 2m instead of the full state.

Gate updates diagonalize reduced density matrices with the Hermitian
eigensolver; Schmidt spectra are truncated below ``trunc_eps`` (and at the
``m_trunc`` cap when set) before any division by a Schmidt coefficient, then
renormalized.  All tensor arithmetic runs on raw gmpy2 values at a guard
precision 24 bits above the state's nominal precision.
"""

from __future__ import annotations

import random
from typing import NamedTuple

from gmpy2 import mpc, mpfr

from .eigen import _HermitianSolver
from .matrix import Matrix, ShapeError
from .precision import context_for, get_default_precision
from .scalar import MpComplex

__all__ = [
    "GateMatrix",
    "MeasureResult",
    "MpsState",
    "ccnot_gate",
    "cnot_gate",
    "cswap_gate",
    "hadamard_gate",
    "new_mps",
    "pauli_x_gate",
    "permutation_gate",
    "swap_gate",
]


class MeasureResult(NamedTuple):
    outcome: int
    probability: mpfr


class GateMatrix:
    """A unitary of dimension 2, 4, or 8 tagged with its qubit arity."""

    __slots__ = ("u", "arity")

    def __init__(self, u: Matrix):
        if u.rows != u.cols or u.rows not in (2, 4, 8):
            raise ShapeError(f"gate must be 2x2, 4x4, or 8x8, got {u.rows}x{u.cols}")
        self.u = u
        self.arity = u.rows.bit_length() - 1


def _as_gate(u, dim: int) -> Matrix:
    m = u.u if isinstance(u, GateMatrix) else u
    if m.rows != dim or m.cols != dim:
        raise ShapeError(f"expected a {dim}x{dim} gate, got {m.rows}x{m.cols}")
    return m


def permutation_gate(images: list[int], prec: int | None = None) -> Matrix:
    """Unitary sending basis state x to basis state images[x]."""
    dim = len(images)
    if sorted(images) != list(range(dim)):
        raise ValueError(f"not a permutation of 0..{dim - 1}: {images}")
    p = prec if prec is not None else get_default_precision()
    m = Matrix(dim, dim)
    for x, y in enumerate(images):
        m[y, x] = MpComplex(1, 0, prec=p)
    return m


def pauli_x_gate(prec: int | None = None) -> Matrix:
    return permutation_gate([1, 0], prec)


def hadamard_gate(prec: int | None = None) -> Matrix:
    p = prec if prec is not None else get_default_precision()
    s = context_for(p).sqrt(mpfr("0.5", p))
    h = MpComplex(s, 0, prec=p)
    m = Matrix(2, 2)
    m[0, 0] = h
    m[0, 1] = h
    m[1, 0] = h
    m[1, 1] = -h
    return m


def cnot_gate(prec: int | None = None) -> Matrix:
    # control is the first (higher-order) qubit
    return permutation_gate([0, 1, 3, 2], prec)


def swap_gate(prec: int | None = None) -> Matrix:
    return permutation_gate([0, 2, 1, 3], prec)


def ccnot_gate(prec: int | None = None) -> Matrix:
    return permutation_gate([0, 1, 2, 3, 4, 5, 7, 6], prec)


def cswap_gate(prec: int | None = None) -> Matrix:
    return permutation_gate([0, 1, 2, 3, 4, 6, 5, 7], prec)


def _permute_bits(u: Matrix, order: list[int], gprec: int) -> list[list[mpc]]:
    """Raw rows of u re-indexed so caller bit order[j] becomes position j."""
    k = len(order)
    dim = 1 << k
    remap = [0] * dim
    for x in range(dim):
        y = 0
        for j in range(k):
            bit = (x >> (k - 1 - order[j])) & 1
            y |= bit << (k - 1 - j)
        remap[x] = y
    rows = [[None] * dim for _ in range(dim)]
    for r in range(dim):
        for c in range(dim):
            z = u._e[r * dim + c]._z
            rows[remap[r]][remap[c]] = mpc(z, precision=(gprec, gprec))
    return rows


def new_mps(n: int, prec: int | None = None, rng_seed: int | None = None) -> "MpsState":
    return MpsState(n, prec=prec, rng_seed=rng_seed)


class MpsState:
    """Mutable n-qubit state in canonical MPS form, initialized to |0...0>."""

    def __init__(self, n: int, prec: int | None = None, rng_seed: int | None = None):
        if n < 1:
            raise ValueError(f"need at least one qubit, got {n}")
        self.n = n
        self.precision = prec if prec is not None else get_default_precision()
        self.gprec = self.precision + 24
        ctx = context_for(self.gprec)
        one = mpc(1, precision=(self.gprec, self.gprec))
        zero = mpc(0, precision=(self.gprec, self.gprec))
        # Q[s][i][u][v]; every bond starts at dimension 1
        self.Q = [[[[one]], [[zero]]] for _ in range(n)]
        self.V = [[mpfr(1, self.gprec)] for _ in range(n - 1)]
        self.m_trunc = 0
        self.trunc_eps = mpfr(2, 64) ** -(self.precision - 20)
        self._m_maxmax = 1
        self.rng_seed = rng_seed
        self._rng = random.Random(rng_seed)
        self._ctx = ctx

    # -- diagnostics ------------------------------------------------------

    def get_m(self, s: int) -> int:
        if not 0 <= s < self.n - 1:
            raise IndexError(f"bond index {s} out of range for {self.n} qubits")
        return len(self.V[s])

    def get_m_max(self) -> int:
        return max((len(v) for v in self.V), default=1)

    def get_m_maxmax(self) -> int:
        return self._m_maxmax

    def coeff(self, s: int, i: int) -> mpfr:
        if not 0 <= s < self.n - 1:
            raise IndexError(f"bond index {s} out of range for {self.n} qubits")
        if not 0 <= i < len(self.V[s]):
            raise IndexError(f"coefficient {i} out of range (bond {s} has {len(self.V[s])})")
        return mpfr(self.V[s][i], self.precision)

    def set_m_trunc(self, cap: int) -> None:
        if cap < 0:
            raise ValueError(f"cap must be nonnegative, got {cap}")
        self.m_trunc = cap

    def _bump_mmax(self) -> None:
        m = self.get_m_max()
        if m > self._m_maxmax:
            self._m_maxmax = m

    def _check_qubit(self, q: int) -> None:
        if not 0 <= q < self.n:
            raise IndexError(f"qubit {q} out of range for {self.n} qubits")

    def _check_unitary(self, u: Matrix) -> None:
        dim = u.rows
        gap = (u.adjoint() * u - Matrix.identity(dim)).frobenius_norm()
        if gap > mpfr(2, 64) ** -(self.precision - 16) * dim:
            raise ValueError(f"gate is not unitary (deviation {gap:.3a})")

    # -- single-site gate -------------------------------------------------

    def apply_u2(self, u, q: int) -> None:
        """Mix the physical index of site q; bond data cannot change."""
        self._check_qubit(q)
        um = _as_gate(u, 2)
        self._check_unitary(um)
        ctx = self._ctx
        g = self.gprec
        rows = [
            [mpc(um._e[i * 2 + k]._z, precision=(g, g)) for k in range(2)]
            for i in range(2)
        ]
        old = self.Q[q]
        ml = len(old[0])
        mr = len(old[0][0])
        new = [
            [
                [
                    ctx.fma(
                        rows[i][0],
                        old[0][a][b],
                        ctx.mul(rows[i][1], old[1][a][b]),
                    )
                    for b in range(mr)
                ]
                for a in range(ml)
            ]
            for i in range(2)
        ]
        self.Q[q] = new

    # -- two-site update --------------------------------------------------

    def _left_weights(self, l: int) -> list[mpfr]:
        return self.V[l - 1] if l > 0 else [mpfr(1, self.gprec)]

    def _right_weights(self, r: int) -> list[mpfr]:
        return self.V[r] if r < self.n - 1 else [mpfr(1, self.gprec)]

    def _kept_spectrum(self, lam: list, rank_cap: int) -> int:
        keep = 0
        for i, x in enumerate(lam):
            if i >= rank_cap:
                break
            if x >= self.trunc_eps:
                keep += 1
            else:
                break
        keep = max(keep, 1)
        if self.m_trunc:
            keep = min(keep, self.m_trunc)
        return keep

    def _update_two(self, urows: list[list[mpc]], l: int) -> None:
        """Adjacent two-site update at (l, l+1) from raw 4x4 gate rows."""
        ctx = self._ctx
        g = self.gprec
        ql, qr = self.Q[l], self.Q[l + 1]
        vl = self._left_weights(l)
        vm = self.V[l]
        vr = self._right_weights(l + 1)
        ml, mm, mr = len(vl), len(vm), len(vr)
        zero = mpc(0, precision=(g, g))

        # pre[i,j][u][w] = sum_v Ql[i][u][v] Vm[v] Qr[j][v][w]   (gate not yet applied)
        pre = [[[zero] * mr for _ in range(ml)] for _ in range(4)]
        for i in range(2):
            for u in range(ml):
                rowq = ql[i][u]
                scaled = [ctx.mul(rowq[v], vm[v]) for v in range(mm)]
                for j in range(2):
                    dst = pre[i * 2 + j][u]
                    for v in range(mm):
                        sv = scaled[v]
                        if sv == 0:
                            continue
                        qrow = qr[j][v]
                        for w in range(mr):
                            dst[w] = ctx.fma(sv, qrow[w], dst[w])
        # theta[p][u][w] = sum_q u[p][q] pre[q][u][w]
        theta = [[[zero] * mr for _ in range(ml)] for _ in range(4)]
        for p in range(4):
            urow = urows[p]
            tp = theta[p]
            for q in range(4):
                coef = urow[q]
                if coef == 0:
                    continue
                src = pre[q]
                for u in range(ml):
                    tu = tp[u]
                    su = src[u]
                    for w in range(mr):
                        tu[w] = ctx.fma(coef, su[w], tu[w])

        # density matrix of the left half in the (i, u) product basis
        wr2 = [ctx.square(x) for x in vr]
        dim = 2 * ml
        rho = Matrix(dim, dim)
        wrap = MpComplex._wrap
        for i in range(2):
            for u in range(ml):
                r1 = i * ml + u
                for i2 in range(2):
                    for u2 in range(ml):
                        r2 = i2 * ml + u2
                        if r2 < r1:
                            continue
                        acc = zero
                        for j in range(2):
                            t1 = theta[i * 2 + j][u]
                            t2 = theta[i2 * 2 + j][u2]
                            for w in range(mr):
                                prod = ctx.mul(t1[w], _conj_raw(t2[w], ctx, g))
                                acc = ctx.fma(prod, wr2[w], acc)
                        acc = ctx.mul(acc, ctx.mul(vl[u], vl[u2]))
                        rho[r1, r2] = wrap(acc)
                        if r2 != r1:
                            rho[r2, r1] = wrap(_conj_raw(acc, ctx, g))

        solver = _HermitianSolver(rho, g)
        keep = self._kept_spectrum(solver.values, min(dim, 2 * mr))
        lam, vecs = solver.vectors_for_top(keep)
        raw = [ctx.sqrt(x) if x > 0 else mpfr(2, g) ** -(2 * g) for x in lam]
        total = ctx.fsum(lam)
        vnew = [ctx.sqrt(ctx.div(x, total)) for x in lam]

        # Q_l <- C / V_{l-1}
        qlnew = [
            [
                [ctx.div(vecs[nu][i * ml + u], vl[u]) for nu in range(keep)]
                for u in range(ml)
            ]
            for i in range(2)
        ]
        # Q_{l+1}[j][nu][w] = (sum_{i,u} conj(C[iu,nu]) V_{l-1}[u] theta[ij][u][w]) / raw[nu]
        qrnew = [[[zero] * mr for _ in range(keep)] for _ in range(2)]
        for nu in range(keep):
            col = vecs[nu]
            for j in range(2):
                dst = qrnew[j][nu]
                for i in range(2):
                    tij = theta[i * 2 + j]
                    for u in range(ml):
                        coef = ctx.mul(_conj_raw(col[i * ml + u], ctx, g), vl[u])
                        if coef == 0:
                            continue
                        tu = tij[u]
                        for w in range(mr):
                            dst[w] = ctx.fma(coef, tu[w], dst[w])
                inv = ctx.div(mpfr(1, g), raw[nu])
                for w in range(mr):
                    dst[w] = ctx.mul(dst[w], inv)

        self.Q[l] = qlnew
        self.Q[l + 1] = qrnew
        self.V[l] = vnew
        self._bump_mmax()

    def _swap_adjacent(self, l: int) -> None:
        self._update_two(self._swap_rows(), l)

    def _swap_rows(self) -> list[list[mpc]]:
        g = self.gprec
        one = mpc(1, precision=(g, g))
        zero = mpc(0, precision=(g, g))
        return [
            [one, zero, zero, zero],
            [zero, zero, one, zero],
            [zero, one, zero, zero],
            [zero, zero, zero, one],
        ]

    def apply_u4(self, u, a: int, b: int) -> None:
        """Two-qubit gate; non-adjacent pairs are routed by swap chains."""
        self._check_qubit(a)
        self._check_qubit(b)
        if a == b:
            raise ValueError(f"need two distinct qubits, got {a} and {b}")
        um = _as_gate(u, 4)
        self._check_unitary(um)
        lo, hi = (a, b) if a < b else (b, a)
        order = [0, 1] if a < b else [1, 0]
        urows = _permute_bits(um, order, self.gprec)
        # climb lo up next to hi, apply, undo
        for pos in range(lo, hi - 1):
            self._swap_adjacent(pos)
        self._update_two(urows, hi - 1)
        for pos in range(hi - 2, lo - 1, -1):
            self._swap_adjacent(pos)

    # -- three-site update ------------------------------------------------

    def _update_three(self, urows: list[list[mpc]], l: int) -> None:
        """Adjacent three-site update at (l, l+1, l+2) from raw 8x8 gate rows."""
        ctx = self._ctx
        g = self.gprec
        qa, qb, qc = self.Q[l], self.Q[l + 1], self.Q[l + 2]
        vl = self._left_weights(l)
        v1 = self.V[l]
        v2 = self.V[l + 1]
        vr = self._right_weights(l + 2)
        ml, m1, m2, mr = len(vl), len(v1), len(v2), len(vr)
        zero = mpc(0, precision=(g, g))

        # s1[(k1,k2)][u][v2] = sum_v1 Qa[k1][u][v1] V1[v1] Qb[k2][v1][v2]
        s1 = [[[zero] * m2 for _ in range(ml)] for _ in range(4)]
        for k1 in range(2):
            for u in range(ml):
                row = qa[k1][u]
                scaled = [ctx.mul(row[v], v1[v]) for v in range(m1)]
                for k2 in range(2):
                    dst = s1[k1 * 2 + k2][u]
                    for v in range(m1):
                        sv = scaled[v]
                        if sv == 0:
                            continue
                        qrow = qb[k2][v]
                        for w in range(m2):
                            dst[w] = ctx.fma(sv, qrow[w], dst[w])
        # s2[(k1,k2,k3)][u][w] = sum_v2 s1[(k1,k2)][u][v2] V2[v2] Qc[k3][v2][w]
        s2 = [[[zero] * mr for _ in range(ml)] for _ in range(8)]
        for kk in range(4):
            for u in range(ml):
                src = s1[kk][u]
                scaled = [ctx.mul(src[v], v2[v]) for v in range(m2)]
                for k3 in range(2):
                    dst = s2[kk * 2 + k3][u]
                    for v in range(m2):
                        sv = scaled[v]
                        if sv == 0:
                            continue
                        qrow = qc[k3][v]
                        for w in range(mr):
                            dst[w] = ctx.fma(sv, qrow[w], dst[w])
        # theta[p][u][w] = sum_q u[p][q] s2[q][u][w]
        theta = [[[zero] * mr for _ in range(ml)] for _ in range(8)]
        for p in range(8):
            urow = urows[p]
            tp = theta[p]
            for q in range(8):
                coef = urow[q]
                if coef == 0:
                    continue
                src = s2[q]
                for u in range(ml):
                    tu = tp[u]
                    su = src[u]
                    for w in range(mr):
                        tu[w] = ctx.fma(coef, su[w], tu[w])

        wl2 = [ctx.square(x) for x in vl]
        wr2 = [ctx.square(x) for x in vr]
        wrap = MpComplex._wrap

        # left density matrix over (i, u)
        diml = 2 * ml
        rho_l = Matrix(diml, diml)
        for i in range(2):
            for u in range(ml):
                r1 = i * ml + u
                for i2 in range(2):
                    for u2 in range(ml):
                        r2 = i2 * ml + u2
                        if r2 < r1:
                            continue
                        acc = zero
                        for jk in range(4):
                            t1 = theta[i * 4 + jk][u]
                            t2 = theta[i2 * 4 + jk][u2]
                            for w in range(mr):
                                prod = ctx.mul(t1[w], _conj_raw(t2[w], ctx, g))
                                acc = ctx.fma(prod, wr2[w], acc)
                        acc = ctx.mul(acc, ctx.mul(vl[u], vl[u2]))
                        rho_l[r1, r2] = wrap(acc)
                        if r2 != r1:
                            rho_l[r2, r1] = wrap(_conj_raw(acc, ctx, g))

        solver_l = _HermitianSolver(rho_l, g)
        keep_l = self._kept_spectrum(solver_l.values, min(diml, 4 * mr))
        lam_l, vecs_l = solver_l.vectors_for_top(keep_l)
        raw_l = [ctx.sqrt(x) if x > 0 else mpfr(2, g) ** -(2 * g) for x in lam_l]
        tot_l = ctx.fsum(lam_l)
        vnew_l = [ctx.sqrt(ctx.div(x, tot_l)) for x in lam_l]

        # right density matrix over (k, w)
        dimr = 2 * mr
        rho_r = Matrix(dimr, dimr)
        for k in range(2):
            for w in range(mr):
                r1 = k * mr + w
                for k2 in range(2):
                    for w2 in range(mr):
                        r2 = k2 * mr + w2
                        if r2 < r1:
                            continue
                        acc = zero
                        for ij in range(4):
                            t1 = theta[ij * 2 + k]
                            t2 = theta[ij * 2 + k2]
                            for u in range(ml):
                                prod = ctx.mul(t1[u][w], _conj_raw(t2[u][w2], ctx, g))
                                acc = ctx.fma(prod, wl2[u], acc)
                        acc = ctx.mul(acc, ctx.mul(vr[w], vr[w2]))
                        rho_r[r1, r2] = wrap(acc)
                        if r2 != r1:
                            rho_r[r2, r1] = wrap(_conj_raw(acc, ctx, g))

        solver_r = _HermitianSolver(rho_r, g)
        keep_r = self._kept_spectrum(solver_r.values, min(dimr, 4 * ml))
        lam_r, vecs_r = solver_r.vectors_for_top(keep_r)
        raw_r = [ctx.sqrt(x) if x > 0 else mpfr(2, g) ** -(2 * g) for x in lam_r]
        tot_r = ctx.fsum(lam_r)
        vnew_r = [ctx.sqrt(ctx.div(x, tot_r)) for x in lam_r]

        qanew = [
            [
                [ctx.div(vecs_l[nu][i * ml + u], vl[u]) for nu in range(keep_l)]
                for u in range(ml)
            ]
            for i in range(2)
        ]
        qcnew = [
            [
                [ctx.div(vecs_r[mu][k * mr + w], vr[w]) for w in range(mr)]
                for mu in range(keep_r)
            ]
            for k in range(2)
        ]

        # middle tensor by double projection:
        # first fold theta against the left eigenvectors, then the right ones
        # half[j,k][nu][w] = sum_{i,u} conj(C_l[iu,nu]) V_{l-1}[u] theta[ijk][u][w]
        half = [[[zero] * mr for _ in range(keep_l)] for _ in range(4)]
        for nu in range(keep_l):
            col = vecs_l[nu]
            for i in range(2):
                for u in range(ml):
                    coef = ctx.mul(_conj_raw(col[i * ml + u], ctx, g), vl[u])
                    if coef == 0:
                        continue
                    for jk in range(4):
                        src = theta[i * 4 + jk][u]
                        dst = half[jk][nu]
                        for w in range(mr):
                            dst[w] = ctx.fma(coef, src[w], dst[w])
        qbnew = [[[zero] * keep_r for _ in range(keep_l)] for _ in range(2)]
        for mu in range(keep_r):
            col = vecs_r[mu]
            for k in range(2):
                for w in range(mr):
                    coef = ctx.mul(_conj_raw(col[k * mr + w], ctx, g), vr[w])
                    if coef == 0:
                        continue
                    for j in range(2):
                        src = half[j * 2 + k]
                        for nu in range(keep_l):
                            qbnew[j][nu][mu] = ctx.fma(coef, src[nu][w], qbnew[j][nu][mu])
        for nu in range(keep_l):
            for mu in range(keep_r):
                denom = ctx.mul(raw_l[nu], raw_r[mu])
                for j in range(2):
                    qbnew[j][nu][mu] = ctx.div(qbnew[j][nu][mu], denom)

        self.Q[l] = qanew
        self.Q[l + 1] = qbnew
        self.Q[l + 2] = qcnew
        self.V[l] = vnew_l
        self.V[l + 1] = vnew_r
        self._bump_mmax()

    def apply_u8(self, u, a: int, b: int, c: int) -> None:
        """Three-qubit gate; sites are routed to a consecutive block first."""
        for q in (a, b, c):
            self._check_qubit(q)
        if len({a, b, c}) != 3:
            raise ValueError(f"need three distinct qubits, got {a}, {b}, {c}")
        um = _as_gate(u, 8)
        self._check_unitary(um)
        qs = [a, b, c]
        order = sorted(range(3), key=lambda t: qs[t])
        urows = _permute_bits(um, order, self.gprec)
        p1, p2, p3 = sorted(qs)
        # climb p2 then p1 up under p3, gathering the block there; record to undo
        moves: list[int] = []
        for pos in range(p2, p3 - 1):
            self._swap_adjacent(pos)
            moves.append(pos)
        for pos in range(p1, p3 - 2):
            self._swap_adjacent(pos)
            moves.append(pos)
        self._update_three(urows, p3 - 2)
        for pos in reversed(moves):
            self._swap_adjacent(pos)

    # -- named gates -------------------------------------------------------

    def swap(self, a: int, b: int) -> None:
        self.apply_u4(swap_gate(self.precision), a, b)

    def ccnot(self, a: int, b: int, t: int) -> None:
        self.apply_u8(ccnot_gate(self.precision), a, b, t)

    def cswap(self, c: int, p: int, q: int) -> None:
        self.apply_u8(cswap_gate(self.precision), c, p, q)

    # -- reduced density operators ----------------------------------------

    def rdo_block(self, a: int, b: int) -> Matrix:
        """Density operator of the consecutive qubits a..b (inclusive)."""
        self._check_qubit(a)
        self._check_qubit(b)
        if a > b:
            raise ValueError(f"need a <= b, got a={a}, b={b}")
        ctx = self._ctx
        g = self.gprec
        vl = self._left_weights(a)
        vr = self._right_weights(b)
        ml, mr = len(vl), len(vr)
        zero = mpc(0, precision=(g, g))

        # cur[p][u][w]: block amplitudes, built left to right
        cur = [[row[:] for row in self.Q[a][i]] for i in range(2)]
        for s in range(a + 1, b + 1):
            vs = self.V[s - 1]
            qn = self.Q[s]
            mv = len(vs)
            mw = len(qn[0][0])
            nxt = []
            for p in range(len(cur)):
                base = cur[p]
                for i in range(2):
                    acc = [[zero] * mw for _ in range(ml)]
                    for u in range(ml):
                        row = base[u]
                        dst = acc[u]
                        for v in range(mv):
                            sv = ctx.mul(row[v], vs[v])
                            if sv == 0:
                                continue
                            qrow = qn[i][v]
                            for w in range(mw):
                                dst[w] = ctx.fma(sv, qrow[w], dst[w])
                    nxt.append(acc)
            cur = nxt  # block index ordering: new site's bit is least significant
        dim = len(cur)
        wl2 = [ctx.square(x) for x in vl]
        wr2 = [ctx.square(x) for x in vr]
        p0 = self.precision
        rho = Matrix(dim, dim)
        wrap = MpComplex._wrap
        for p in range(dim):
            cp = cur[p]
            for p2 in range(p, dim):
                cq = cur[p2]
                acc = zero
                for u in range(ml):
                    r1 = cp[u]
                    r2 = cq[u]
                    wu = wl2[u]
                    inner = zero
                    for w in range(mr):
                        prod = ctx.mul(r1[w], _conj_raw(r2[w], ctx, g))
                        inner = ctx.fma(prod, wr2[w], inner)
                    acc = ctx.fma(inner, wu, acc)
                rho[p, p2] = wrap(mpc(acc, precision=(p0, p0)))
                if p2 != p:
                    rho[p2, p] = wrap(mpc(_conj_raw(acc, ctx, g), precision=(p0, p0)))
        return rho

    def rdo(self, qubits: list[int]) -> Matrix:
        """Density operator of arbitrary qubits, in the listed order."""
        qs = list(qubits)
        if len(set(qs)) != len(qs):
            raise ValueError(f"duplicate qubit indices: {qs}")
        for q in qs:
            self._check_qubit(q)
        if len(qs) == 1:
            return self.rdo_block(qs[0], qs[0])
        base = min(qs)
        # walk each listed qubit into place with adjacent swaps, tracking
        # where previous moves displaced the others
        pos = {q: q for q in qs}
        moves: list[int] = []

        def site_holder(site: int):
            for k, v in pos.items():
                if v == site:
                    return k
            return None

        for slot, q in enumerate(qs):
            target = base + slot
            cur_pos = pos[q]
            while cur_pos > target:
                self._swap_adjacent(cur_pos - 1)
                moves.append(cur_pos - 1)
                other = site_holder(cur_pos - 1)
                if other is not None:
                    pos[other] = cur_pos
                pos[q] = cur_pos - 1
                cur_pos -= 1
            while cur_pos < target:
                self._swap_adjacent(cur_pos)
                moves.append(cur_pos)
                other = site_holder(cur_pos + 1)
                if other is not None:
                    pos[other] = cur_pos
                pos[q] = cur_pos + 1
                cur_pos += 1
        rho = self.rdo_block(base, base + len(qs) - 1)
        for l in reversed(moves):
            self._swap_adjacent(l)
        return rho

    # -- measurement --------------------------------------------------------

    def measure(self, q: int, rng: random.Random | None = None) -> MeasureResult:
        """Projective single-qubit measurement; collapses and re-canonicalizes."""
        self._check_qubit(q)
        gen = rng if rng is not None else self._rng
        ctx = self._ctx
        g = self.gprec
        p0 = self.rdo_block(q, q)[0, 0]._z.real
        if p0 < 0:
            p0 = mpfr(0, g)
        if p0 > 1:
            p0 = mpfr(1, g)
        outcome = 0 if gen.random() < float(p0) else 1
        p_out = p0 if outcome == 0 else ctx.sub(mpfr(1, g), p0)

        scale = ctx.div(mpfr(1, g), ctx.sqrt(p_out))
        site = self.Q[q]
        kept = [
            [ctx.mul(z, scale) for z in row] for row in site[outcome]
        ]
        dead = [[mpc(0, precision=(g, g))] * len(site[0][0]) for _ in site[0]]
        self.Q[q] = [kept, dead] if outcome == 0 else [dead, kept]

        # restore canonical form: sweep away from the collapsed site
        ident = self._identity_rows()
        for l in range(q - 1, -1, -1):
            self._update_two(ident, l)
        for l in range(q, self.n - 1):
            self._update_two(ident, l)
        return MeasureResult(outcome, mpfr(p_out, self.precision))

    def _identity_rows(self) -> list[list[mpc]]:
        g = self.gprec
        one = mpc(1, precision=(g, g))
        zero = mpc(0, precision=(g, g))
        return [[one if i == j else zero for j in range(4)] for i in range(4)]

    # -- dense expansion -----------------------------------------------------

    def state_vector(self) -> list[MpComplex]:
        """Full amplitude array, site 0 as the most significant bit."""
        if self.n > 20:
            raise ValueError(f"state vector limited to 20 qubits, have {self.n}")
        ctx = self._ctx
        g = self.gprec
        p0 = self.precision
        zero = mpc(0, precision=(g, g))
        # amp[x][v]: partial contraction over the first s sites
        amp = [self.Q[0][0][0][:], self.Q[0][1][0][:]]
        for s in range(1, self.n):
            vs = self.V[s - 1]
            qn = self.Q[s]
            mv = len(vs)
            mw = len(qn[0][0])
            nxt = []
            for row in amp:
                scaled = [ctx.mul(row[v], vs[v]) for v in range(mv)]
                for i in range(2):
                    acc = [zero] * mw
                    for v in range(mv):
                        sv = scaled[v]
                        if sv == 0:
                            continue
                        qrow = qn[i][v]
                        for w in range(mw):
                            acc[w] = ctx.fma(sv, qrow[w], acc[w])
                    nxt.append(acc)
            amp = nxt
        wrap = MpComplex._wrap
        return [wrap(mpc(row[0], precision=(p0, p0))) for row in amp]


def _conj_raw(z: mpc, ctx, gprec: int) -> mpc:
    return mpc(z.real, ctx.minus(z.imag), precision=(gprec, gprec))

"""LU factorization, Gaussian solve, inversion, determinant.

One raw elimination engine serves two callers with different failure
policies: the public API raises on pivots that are zero to working
precision, while the eigensolver's inverse iteration deliberately solves
near-singular shifted systems and instead clamps tiny pivots to a floor
(the resulting solution direction is exactly what inverse iteration
amplifies).
"""

from __future__ import annotations

from gmpy2 import mpc, mpfr

from .matrix import Matrix, ShapeError
from .precision import context_for
from .scalar import MpComplex

__all__ = [
    "LuDecomposition",
    "SingularMatrixError",
    "lu_decompose",
    "solve_gauss",
    "inv",
    "det",
]


class SingularMatrixError(ValueError):
    """Pivot vanished to working precision; `column` is where it happened."""

    def __init__(self, column: int, message: str):
        super().__init__(message)
        self.column = column


class LuDecomposition:
    """Packed LU with row permutation.

    `lu` holds unit-lower L strictly below the diagonal and U on and above
    it; `perm[i]` is the input row sitting at position i after pivoting;
    `parity` is the sign of the permutation.
    """

    __slots__ = ("perm", "lu", "parity")

    def __init__(self, perm: list[int], lu: Matrix, parity: int):
        self.perm = perm
        self.lu = lu
        self.parity = parity


def _raw_rows(a: Matrix) -> list[list[mpc]]:
    return [[a._e[i * a.cols + j]._z for j in range(a.cols)] for i in range(a.rows)]


def _frobenius_raw(rows: list[list[mpc]], prec: int) -> mpfr:
    ctx = context_for(prec)
    acc = mpfr(0, prec)
    for row in rows:
        for z in row:
            acc = ctx.add(acc, ctx.norm(z))
    return ctx.sqrt(acc)


def _lu_raw(
    rows: list[list[mpc]],
    prec: int,
    normf: mpfr,
    pivot_floor: mpfr | None = None,
) -> tuple[list[int], int]:
    """In-place elimination. Returns (perm, parity).

    A pivot is singular when it is exactly zero or negligible against the
    *remaining* submatrix. Scaling by the live submatrix rather than the
    whole input matters: a tiny but honest final pivot (the hallmark of an
    ill-conditioned system at low precision) must survive and produce the
    correspondingly inaccurate answer, not an exception.
    """
    ctx = context_for(prec)
    n = len(rows)
    perm = list(range(n))
    parity = 1
    rel = mpfr(2, prec) ** -(prec - 4) if pivot_floor is None else None
    for k in range(n):
        best = mpfr(-1)
        best_i = k
        for i in range(k, n):
            m = ctx.norm(rows[i][k])
            if m > best:  # strict: ties keep the lowest row index
                best, best_i = m, i
        if best_i != k:
            rows[k], rows[best_i] = rows[best_i], rows[k]
            perm[k], perm[best_i] = perm[best_i], perm[k]
            parity = -parity
        pivot_mod = ctx.sqrt(best)
        if pivot_floor is not None:
            if pivot_mod < pivot_floor:
                rows[k][k] = mpc(pivot_floor, 0, precision=(prec, prec))
        else:
            sub = mpfr(0, prec)
            for i in range(k, n):
                ri = rows[i]
                for j in range(k, n):
                    sub = ctx.add(sub, ctx.norm(ri[j]))
            if pivot_mod == 0 or pivot_mod < ctx.mul(rel, ctx.sqrt(sub)):
                raise SingularMatrixError(
                    k, f"matrix is singular to working precision at column {k}"
                )
        piv = rows[k][k]
        rk = rows[k]
        for i in range(k + 1, n):
            ri = rows[i]
            f = ctx.div(ri[k], piv)
            ri[k] = f
            for j in range(k + 1, n):
                ri[j] = ctx.sub(ri[j], ctx.mul(f, rk[j]))
    return perm, parity


def _substitute(
    rows: list[list[mpc]],
    perm: list[int],
    rhs_cols: list[list[mpc]],
    prec: int,
) -> list[list[mpc]]:
    """Forward/back substitution through the packed factors, column by column."""
    ctx = context_for(prec)
    n = len(rows)
    out = []
    for col in rhs_cols:
        y = [col[perm[i]] for i in range(n)]
        for i in range(n):
            ri = rows[i]
            acc = y[i]
            for j in range(i):
                acc = ctx.sub(acc, ctx.mul(ri[j], y[j]))
            y[i] = acc
        for i in range(n - 1, -1, -1):
            ri = rows[i]
            acc = y[i]
            for j in range(i + 1, n):
                acc = ctx.sub(acc, ctx.mul(ri[j], y[j]))
            y[i] = ctx.div(acc, ri[i])
        out.append(y)
    return out


def _require_square(a: Matrix, op: str) -> None:
    if a.rows != a.cols:
        raise ShapeError(f"{op} needs a square matrix, got {a.rows}x{a.cols}")


def lu_decompose(a: Matrix) -> LuDecomposition:
    _require_square(a, "LU decomposition")
    prec = a.max_precision()
    rows = _raw_rows(a)
    normf = _frobenius_raw(rows, prec)
    if normf == 0:
        raise SingularMatrixError(0, "matrix is singular to working precision at column 0")
    perm, parity = _lu_raw(rows, prec, normf)
    packed = Matrix.from_rows(
        [[MpComplex._wrap(z) for z in row] for row in rows]
    )
    return LuDecomposition(perm, packed, parity)


def solve_gauss(a: Matrix, b: Matrix) -> Matrix:
    """Solve A·X = B by Gaussian elimination with partial pivoting."""
    _require_square(a, "solve")
    if b.rows != a.rows:
        raise ShapeError(
            f"cannot solve {a.rows}x{a.cols} system with {b.rows}x{b.cols} right-hand side"
        )
    prec = max(a.max_precision(), b.max_precision())
    rows = _raw_rows(a)
    normf = _frobenius_raw(rows, prec)
    if normf == 0:
        raise SingularMatrixError(0, "matrix is singular to working precision at column 0")
    perm, _ = _lu_raw(rows, prec, normf)
    rhs_cols = [
        [b._e[i * b.cols + j]._z for i in range(b.rows)] for j in range(b.cols)
    ]
    sol_cols = _substitute(rows, perm, rhs_cols, prec)
    out = Matrix.__new__(Matrix)
    out.rows, out.cols = a.rows, b.cols
    wrap = MpComplex._wrap
    out._e = [
        wrap(sol_cols[j][i]) for i in range(a.rows) for j in range(b.cols)
    ]
    return out


def inv(a: Matrix) -> Matrix:
    """Matrix inverse via Gaussian solve against the identity."""
    _require_square(a, "inversion")
    return solve_gauss(a, Matrix.identity(a.rows, prec=a.max_precision()))


def det(a: Matrix) -> MpComplex:
    """Determinant as pivot product times permutation parity."""
    _require_square(a, "determinant")
    prec = a.max_precision()
    rows = _raw_rows(a)
    normf = _frobenius_raw(rows, prec)
    if normf == 0:
        return MpComplex(0, prec=prec)
    try:
        perm, parity = _lu_raw(rows, prec, normf)
    except SingularMatrixError:
        return MpComplex(0, prec=prec)
    ctx = context_for(prec)
    acc = mpc(parity, 0, precision=(prec, prec))
    for i in range(len(rows)):
        acc = ctx.mul(acc, rows[i][i])
    return MpComplex._wrap(acc)

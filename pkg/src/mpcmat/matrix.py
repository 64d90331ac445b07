"""Dense complex matrices with per-element precision tracking.

Storage is a flat row-major list of :class:`MpComplex`. Arithmetic follows
the same rule as scalars: every result element is computed at the largest
precision among the operand elements that feed it, so mixing a 64-bit matrix
into a 256-bit computation never silently truncates the wider side.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from gmpy2 import mpfr

from .precision import context_for, get_default_precision, get_output_digits
from .scalar import MpComplex, ParseError, format_complex, parse_complex

__all__ = [
    "Matrix",
    "ShapeError",
    "parse_matrix",
    "matrix_to_string",
    "tensorprod",
    "trace_out",
    "str_dirac",
]


class ShapeError(ValueError):
    """Dimension mismatch; the message names both offending shapes."""


def _coerce(value, prec=None) -> MpComplex:
    if isinstance(value, MpComplex):
        return value
    return MpComplex(value, prec=prec)


class Matrix:
    __slots__ = ("rows", "cols", "_e")

    def __init__(self, rows: int, cols: int, fill=0, prec: int | None = None):
        if rows < 1 or cols < 1:
            raise ShapeError(f"matrix shape must be positive, got {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        z = _coerce(fill, prec)
        self._e = [z] * (rows * cols)

    # -- construction --------------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Iterable], prec: int | None = None) -> "Matrix":
        data = [[_coerce(v, prec) for v in row] for row in rows]
        if not data or not data[0]:
            raise ShapeError("matrix literal must have at least one row and column")
        width = len(data[0])
        for i, row in enumerate(data):
            if len(row) != width:
                raise ShapeError(
                    f"ragged rows: row 0 has {width} entries, row {i} has {len(row)}"
                )
        m = cls.__new__(cls)
        m.rows, m.cols = len(data), width
        m._e = [v for row in data for v in row]
        return m

    @classmethod
    def identity(cls, n: int, prec: int | None = None) -> "Matrix":
        m = cls(n, n, 0, prec=prec)
        one = MpComplex(1, prec=prec)
        e = list(m._e)
        for i in range(n):
            e[i * n + i] = one
        m._e = e
        return m

    @classmethod
    def diag(cls, values: Sequence, prec: int | None = None) -> "Matrix":
        n = len(values)
        m = cls(n, n, 0, prec=prec)
        e = list(m._e)
        for i, v in enumerate(values):
            e[i * n + i] = _coerce(v, prec)
        m._e = e
        return m

    def copy(self) -> "Matrix":
        m = Matrix.__new__(Matrix)
        m.rows, m.cols, m._e = self.rows, self.cols, list(self._e)
        return m

    # -- element access -------------------------------------------------------

    def __getitem__(self, key) -> MpComplex:
        i, j = key
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"({i}, {j}) out of range for {self.rows}x{self.cols}")
        return self._e[i * self.cols + j]

    def __setitem__(self, key, value) -> None:
        i, j = key
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"({i}, {j}) out of range for {self.rows}x{self.cols}")
        self._e[i * self.cols + j] = _coerce(value)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def max_precision(self) -> int:
        return max(x.precision for x in self._e)

    # -- arithmetic -----------------------------------------------------------

    def _same_shape(self, other: "Matrix", op: str) -> None:
        if self.shape != other.shape:
            raise ShapeError(
                f"cannot {op} {self.rows}x{self.cols} and {other.rows}x{other.cols}"
            )

    def __add__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        self._same_shape(other, "add")
        return self._zip(other, "add")

    def __sub__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        self._same_shape(other, "subtract")
        return self._zip(other, "sub")

    def _zip(self, other: "Matrix", op: str) -> "Matrix":
        out = Matrix.__new__(Matrix)
        out.rows, out.cols = self.rows, self.cols
        elems = []
        for a, b in zip(self._e, other._e):
            ctx = context_for(max(a.precision, b.precision))
            elems.append(MpComplex._wrap(getattr(ctx, op)(a._z, b._z)))
        out._e = elems
        return out

    def __mul__(self, other):
        if isinstance(other, Matrix):
            return self._matmul(other)
        return self._scale(other)

    def __rmul__(self, other):
        if isinstance(other, Matrix):
            return NotImplemented
        return self._scale(other)

    def __truediv__(self, other):
        if isinstance(other, Matrix):
            return NotImplemented
        s = _coerce(other)
        out = Matrix.__new__(Matrix)
        out.rows, out.cols = self.rows, self.cols
        out._e = [x / s for x in self._e]
        return out

    def __neg__(self):
        out = Matrix.__new__(Matrix)
        out.rows, out.cols = self.rows, self.cols
        out._e = [-x for x in self._e]
        return out

    def _scale(self, scalar) -> "Matrix":
        s = _coerce(scalar)
        out = Matrix.__new__(Matrix)
        out.rows, out.cols = self.rows, self.cols
        out._e = [x * s for x in self._e]
        return out

    def _matmul(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ShapeError(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
            )
        n, k, m = self.rows, self.cols, other.cols
        a = self._e
        b = other._e
        # plain O(n^3) triple loop; accumulation at the max precision of the
        # row/column pair that feeds each output element
        row_prec = [
            max(a[i * k + t].precision for t in range(k)) for i in range(n)
        ]
        col_prec = [
            max(b[t * m + j].precision for t in range(k)) for j in range(m)
        ]
        out_e = []
        wrap = MpComplex._wrap
        for i in range(n):
            arow = [a[i * k + t]._z for t in range(k)]
            rp = row_prec[i]
            for j in range(m):
                ctx = context_for(max(rp, col_prec[j]))
                fma = ctx.fma
                acc = ctx.mul(arow[0], b[j]._z)
                for t in range(1, k):
                    acc = fma(arow[t], b[t * m + j]._z, acc)
                out_e.append(wrap(acc))
        out = Matrix.__new__(Matrix)
        out.rows, out.cols = n, m
        out._e = out_e
        return out

    def adjoint(self) -> "Matrix":
        out = Matrix.__new__(Matrix)
        out.rows, out.cols = self.cols, self.rows
        e = self._e
        out._e = [
            e[i * self.cols + j].conjugate()
            for j in range(self.cols)
            for i in range(self.rows)
        ]
        return out

    def trace(self) -> MpComplex:
        if self.rows != self.cols:
            raise ShapeError(f"trace needs a square matrix, got {self.rows}x{self.cols}")
        acc = self._e[0]
        for i in range(1, self.rows):
            acc = acc + self._e[i * self.cols + i]
        return acc

    def frobenius_norm(self) -> mpfr:
        p = self.max_precision()
        ctx = context_for(p)
        acc = mpfr(0, p)
        for x in self._e:
            acc = ctx.add(acc, ctx.norm(x._z))
        return ctx.sqrt(acc)

    # -- comparison / rendering ------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and all(
            x == y for x, y in zip(self._e, other._e)
        )

    __hash__ = None  # mutable

    def __str__(self) -> str:
        return matrix_to_string(self)

    def __repr__(self) -> str:
        return f"Matrix({self.rows}x{self.cols}, {matrix_to_string(self)})"

    def str_dirac(self, digits: int | None = None) -> str:
        return str_dirac(self, digits)


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------


def parse_matrix(text: str, prec: int | None = None) -> Matrix:
    """Parse a bracketed matrix literal like ``"[0, 1; 1, 0]"``."""
    s = text.strip()
    if not s.startswith("[") or not s.endswith("]"):
        raise ParseError("matrix literal must be enclosed in [ ]", text, 0)
    body = s[1:-1]
    rows = [
        [parse_complex(entry, prec=prec) for entry in row.split(",")]
        for row in body.split(";")
    ]
    return Matrix.from_rows(rows)


def matrix_to_string(a: Matrix, digits: int | None = None) -> str:
    d = get_output_digits() if digits is None else digits
    rows = [
        ", ".join(format_complex(a[i, j], d) for j in range(a.cols))
        for i in range(a.rows)
    ]
    return "[" + "; ".join(rows) + "]"


def tensorprod(a: Matrix, b: Matrix) -> Matrix:
    out = Matrix.__new__(Matrix)
    out.rows, out.cols = a.rows * b.rows, a.cols * b.cols
    e = [None] * (out.rows * out.cols)
    for i in range(a.rows):
        for j in range(a.cols):
            aij = a[i, j]
            base_r, base_c = i * b.rows, j * b.cols
            for k in range(b.rows):
                dst = (base_r + k) * out.cols + base_c
                brow = k * b.cols
                for l in range(b.cols):
                    e[dst + l] = aij * b._e[brow + l]
    out._e = e
    return out


def trace_out(rho: Matrix, subsystem_dims: Sequence[int], which: int) -> Matrix:
    """Partial trace removing one subsystem from a composite density matrix.

    `subsystem_dims` lists the tensor factors left to right; `which` names the
    factor to trace over.
    """
    if rho.rows != rho.cols:
        raise ShapeError(f"partial trace needs a square matrix, got {rho.rows}x{rho.cols}")
    total = 1
    for d in subsystem_dims:
        if d < 1:
            raise ShapeError(f"subsystem dimensions must be positive, got {list(subsystem_dims)}")
        total *= d
    if total != rho.rows:
        raise ShapeError(
            f"subsystem dims {list(subsystem_dims)} multiply to {total}, "
            f"but the matrix is {rho.rows}x{rho.cols}"
        )
    if not (0 <= which < len(subsystem_dims)):
        raise IndexError(f"subsystem {which} out of range for {len(subsystem_dims)} factors")

    d_t = subsystem_dims[which]
    pre = 1
    for d in subsystem_dims[:which]:
        pre *= d
    post = total // (pre * d_t)
    m = pre * post

    out = Matrix.__new__(Matrix)
    out.rows = out.cols = m
    e = []
    wrap = MpComplex._wrap
    re = rho._e
    n = rho.rows
    for p1 in range(pre):
        for s1 in range(post):
            for p2 in range(pre):
                for s2 in range(post):
                    zs = [
                        re[((p1 * d_t + t) * post + s1) * n + (p2 * d_t + t) * post + s2]
                        for t in range(d_t)
                    ]
                    ctx = context_for(max(z.precision for z in zs))
                    acc = zs[0]._z
                    for z in zs[1:]:
                        acc = ctx.add(acc, z._z)
                    e.append(wrap(acc))
    out._e = e
    return out


def str_dirac(rho: Matrix, digits: int | None = None) -> str:
    """Density matrix as a sum of |b><b'| terms with binary labels.

    Row-major term order; entries below 10^-(digits+2) in modulus are
    dropped; the empty sum renders as "0".
    """
    if rho.rows != rho.cols:
        raise ShapeError(f"Dirac form needs a square matrix, got {rho.rows}x{rho.cols}")
    n = rho.rows
    width = n.bit_length() - 1
    if 1 << width != n:
        raise ShapeError(f"Dirac form needs a power-of-two dimension, got {n}")
    d = get_output_digits() if digits is None else digits
    threshold = mpfr(10, 64) ** -(d + 2)
    terms = []
    for i in range(n):
        for j in range(n):
            c = rho[i, j]
            # parts below the print threshold are rounding residue: snap them
            # to zero so a kept coefficient prints without a noise tail
            re, im = c.real, c.imag
            if -threshold < re < threshold:
                re = mpfr(0, 2)
            if -threshold < im < threshold:
                im = mpfr(0, 2)
            if re == 0 and im == 0:
                continue
            c = MpComplex(re, im)
            terms.append(f"{format_complex(c, d)}|{i:0{width}b}><{j:0{width}b}|")
    return "+".join(terms) if terms else "0"

"""Arbitrary-precision complex matrices and a matrix-product-state circuit simulator."""

from .precision import (
    get_default_precision,
    get_output_digits,
    set_default_precision,
    set_output_digits,
)
from .scalar import (
    MpComplex,
    MpReal,
    ParseError,
    conj,
    cos,
    exp,
    format_complex,
    format_real,
    log,
    mpreal,
    parse_complex,
    precision_of,
    sin,
    sqrt,
)
from .matrix import (
    Matrix,
    ShapeError,
    matrix_to_string,
    parse_matrix,
    str_dirac,
    tensorprod,
    trace_out,
)
from .special import bernoulli, bernoulli_akiyama_tanigawa, gamma
from .linsolve import (
    LuDecomposition,
    SingularMatrixError,
    det,
    inv,
    lu_decompose,
    solve_gauss,
)
from .eigen import (
    ConvergenceError,
    EigenSystem,
    NonHermitianError,
    SvdResult,
    diag_h,
    eigenvalues_h,
    exp_h,
    svd,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "EigenSystem",
    "LuDecomposition",
    "Matrix",
    "NonHermitianError",
    "SingularMatrixError",
    "SvdResult",
    "det",
    "inv",
    "lu_decompose",
    "solve_gauss",
    "MpComplex",
    "MpReal",
    "ParseError",
    "ShapeError",
    "bernoulli",
    "bernoulli_akiyama_tanigawa",
    "conj",
    "cos",
    "diag_h",
    "eigenvalues_h",
    "exp",
    "exp_h",
    "format_complex",
    "format_real",
    "gamma",
    "get_default_precision",
    "get_output_digits",
    "log",
    "matrix_to_string",
    "mpreal",
    "parse_complex",
    "parse_matrix",
    "precision_of",
    "set_default_precision",
    "set_output_digits",
    "sin",
    "sqrt",
    "str_dirac",
    "svd",
    "tensorprod",
    "trace_out",
]

"""Canned experiments behind the command-line front end.

Each ``run_*`` function is a pure driver over the library API: it takes a
DemoConfig plus its own parameters, and returns either a transcript string,
a report object, or the path of a data file it wrote.  Nothing here keeps
global state, so every run is reproducible byte for byte.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from gmpy2 import mpfr

from .eigen import exp_h
from .linsolve import SingularMatrixError, inv, solve_gauss
from .matrix import Matrix, parse_matrix, str_dirac, tensorprod
from .mps import (
    MpsState,
    ccnot_gate,
    cnot_gate,
    hadamard_gate,
    new_mps,
    pauli_x_gate,
    permutation_gate,
)
from .precision import context_for
from .scalar import MpComplex, format_complex, format_real, mpreal, parse_complex, sqrt
from .special import gamma
from .spectral import SampleSeries, dft, gp_1d_print, rec_evol, unp2, zero_padding

# Two-spin liquid-state system: a proton and a carbon-13 line, J-coupled.
# SI units throughout.
PROTON_FREQ = "4.0e8"  # [Hz]
CARBON_FREQ = "1.25e8"  # [Hz]
J_COUPLING = "1.4e5"  # [Hz]
BOLTZMANN_CONST = "1.3806504e-23"  # [J/K]
PLANCK_CONST = "6.62606896e-34"  # [J s]
SAMPLE_FACTOR = "0.43"  # dt = SAMPLE_FACTOR / proton frequency; any value < 1/2 works


@dataclass
class DemoConfig:
    precision: int = 256
    output_dir: Path = Path(".")
    output_digits: int = 8
    seed: int | None = None

    def __post_init__(self):
        if self.precision < 2:
            raise ValueError(f"precision must be at least 2, got {self.precision}")
        self.output_dir = Path(self.output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        if not os.access(self.output_dir, os.W_OK):
            raise ValueError(f"output directory {self.output_dir} is not writable")


# -- ill-conditioned 2x2 solve, swept over precision ------------------------

_CLASSIC_SYSTEM = "[64919121, -159018721; 41869520.5, -102558961]"


def _classic_rows(prec: int, prec_max: int, method) -> list[str]:
    digits = 10  # full double-width column so the low-precision garbage is visible
    lines = ["# prec x y"]
    for prec in range(prec, prec_max + 1):
        a = parse_matrix(_CLASSIC_SYSTEM, prec)
        b = Matrix(2, 1, prec=prec)
        b[0, 0] = MpComplex(1, 0, prec=prec)
        try:
            x = method(a, b)
        except SingularMatrixError:
            # a few low precisions round the last pivot to exactly zero;
            # keep the row so the x column stays aligned with `prec`
            lines.append(f"{prec} nan nan")
            continue
        lines.append(
            f"{prec} {format_complex(x[0, 0], digits)} {format_complex(x[1, 0], digits)}"
        )
    return lines


def run_classic(
    config: DemoConfig, prec_min: int = 32, prec_max: int = 256
) -> tuple[Path, Path]:
    """Solve the same 2x2 system at every precision in [prec_min, prec_max].

    Two output files, one per solving method, each a gnuplot-ready table of
    the computed solution against working precision.
    """
    if not 2 <= prec_min <= prec_max:
        raise ValueError(f"need 2 <= prec_min <= prec_max, got {prec_min}..{prec_max}")
    out = []
    for name, method in (
        ("classic_inverse.dat", lambda a, b: inv(a) * b),
        ("classic_gauss.dat", solve_gauss),
    ):
        path = config.output_dir / name
        rows = _classic_rows(prec_min, prec_max, method)
        path.write_text("\n".join(rows) + "\n")
        out.append(path)
    return out[0], out[1]


# -- simulated NMR free-induction-decay spectrum -----------------------------


def run_nmr(config: DemoConfig, temperature="300") -> Path:
    """Thermal-state FID of the J-coupled two-spin system; writes |DFT|."""
    p = config.precision
    ctx = context_for(p)
    t_kelvin = mpreal(str(temperature), p)
    if t_kelvin <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")

    ident = Matrix.identity(2, prec=p)
    x_spin = parse_matrix("[0, 1; 1, 0]", p)
    z_half = parse_matrix("[1, 0; 0, -1]", p) / 2
    s = sqrt(MpComplex("0.5", prec=p))
    y90 = Matrix(2, 2, prec=p)
    y90[0, 0] = s
    y90[0, 1] = s
    y90[1, 0] = -s
    y90[1, 1] = s

    w1 = MpComplex(PROTON_FREQ, prec=p)
    w2 = MpComplex(CARBON_FREQ, prec=p)
    j12 = MpComplex(J_COUPLING, prec=p)
    hamil = (
        w1 * tensorprod(z_half, ident)
        + w2 * tensorprod(ident, z_half)
        + j12 * tensorprod(z_half, z_half)
    )

    # full Boltzmann weights: no high-temperature linearization anywhere
    beta = -(MpComplex(PLANCK_CONST, prec=p) / MpComplex(BOLTZMANN_CONST, prec=p)) / (
        MpComplex(t_kelvin, 0, prec=p)
    )
    rho = exp_h(beta * hamil)
    rho = rho / rho.trace()

    dt = ctx.div(mpreal(SAMPLE_FACTOR, p), mpreal(PROTON_FREQ, p))
    n = unp2(ctx.div(ctx.div(mpreal(8, p), dt), mpreal(J_COUPLING, p)))

    x1 = tensorprod(x_spin, ident)
    y90_1 = tensorprod(y90, ident)
    rho = y90_1 * rho * y90_1.adjoint()

    fid = rec_evol(rho, hamil, x1, dt, n)
    spectrum = dft(zero_padding(fid, 2 * n))
    magnitudes = SampleSeries([abs(v) for v in spectrum.samples], spectrum.step)
    path = config.output_dir / "nmr_spectrum.dat"
    gp_1d_print(magnitudes, path, digits=config.output_digits)
    return path


# -- balanced-function query circuit ----------------------------------------
#
# The function is f(y_0 .. y_{k-1}) = XOR_i g(y_i) over 4-bit bundles y_i,
# with g(x0 x1 x2 x3) = (x0 & x1) | (x1 & x2) | (x2 & x3).  f is balanced for
# every bundle count, so the all-zeros readout probability of each bundle is
# exactly 0; anything else is numerical error.
#
# Layout: bundle i owns qubits 9i..9i+8 as [x0 x1 x2 x3, a1 a2 a3, d1, gt];
# qubit 9k is the running parity line, qubit 9k+1 the phase-kickback target.


def _g_block(base: int) -> list[tuple]:
    x0, x1, x2, x3, a1, a2, a3, d1, gt = range(base, base + 9)
    return [
        ("ccnot", x0, x1, a1),
        ("ccnot", x1, x2, a2),
        ("ccnot", x2, x3, a3),
        ("x", a1),
        ("x", a2),
        ("ccnot", a1, a2, d1),
        ("x", d1),
        ("x", a1),
        ("x", a2),
        ("x", d1),
        ("x", a3),
        ("ccnot", d1, a3, gt),
        ("x", gt),
        ("x", d1),
        ("x", a3),
    ]


def balanced_query_circuit(bundles: int) -> list[tuple]:
    """Gate list for the single-query balanced-vs-constant test, 9k+2 qubits."""
    if bundles < 1:
        raise ValueError(f"need at least one bundle, got {bundles}")
    parity = 9 * bundles
    kick = parity + 1
    ops: list[tuple] = [("x", kick), ("h", kick)]
    ops += [("h", 9 * i + j) for i in range(bundles) for j in range(4)]
    for i in range(bundles):
        ops += _g_block(9 * i)
    for i in range(bundles):
        ops.append(("cnot", 9 * i + 8, parity))
    ops.append(("cnot", parity, kick))
    for i in range(bundles):
        ops.append(("cnot", 9 * i + 8, parity))
    for i in range(bundles):
        ops += reversed(_g_block(9 * i))  # every gate is self-inverse
    ops += [("h", 9 * i + j) for i in range(bundles) for j in range(4)]
    return ops


def apply_circuit(state: MpsState, ops: list[tuple]) -> None:
    p = state.precision
    x = pauli_x_gate(p)
    h = hadamard_gate(p)
    cx = cnot_gate(p)
    ccx = ccnot_gate(p)
    for op in ops:
        kind = op[0]
        if kind == "x":
            state.apply_u2(x, op[1])
        elif kind == "h":
            state.apply_u2(h, op[1])
        elif kind == "cnot":
            state.apply_u4(cx, op[1], op[2])
        elif kind == "ccnot":
            state.apply_u8(ccx, op[1], op[2], op[3])
        else:
            raise ValueError(f"unknown op {op!r}")


@dataclass
class BalancedQueryReport:
    bundles: int
    qubits: int
    probabilities: list[mpfr]  # all-zeros readout per bundle; 0 when exact
    errors: list[mpfr]  # |probability - 0|
    max_error: mpfr
    m_maxmax: int


def run_dj(config: DemoConfig, bundles: int = 7, m_trunc: int = 0) -> BalancedQueryReport:
    """Run the balanced-function query and report per-bundle readout error."""
    p = config.precision
    ctx = context_for(p)
    state = new_mps(9 * bundles + 2, prec=p, rng_seed=config.seed)
    state.set_m_trunc(m_trunc)
    apply_circuit(state, balanced_query_circuit(bundles))
    probs = []
    errors = []
    for i in range(bundles):
        val = state.rdo_block(9 * i, 9 * i + 3)[0, 0].real
        probs.append(val)
        errors.append(ctx.abs(val))
    return BalancedQueryReport(
        bundles=bundles,
        qubits=state.n,
        probabilities=probs,
        errors=errors,
        max_error=max(errors),
        m_maxmax=state.get_m_maxmax(),
    )


def render_dj_report(report: BalancedQueryReport, digits: int = 8) -> str:
    lines = [f"qubits={report.qubits} bundles={report.bundles}"]
    for i, (prob, err) in enumerate(zip(report.probabilities, report.errors)):
        lines.append(
            f"bundle {i}: Prob(0_0 0_1 0_2 0_3)={format_real(prob, digits)}"
            f" error={format_real(err, digits)}"
        )
    lines.append(f"m_maxmax={report.m_maxmax}")
    lines.append(f"max_error={format_real(report.max_error, digits)}")
    return "\n".join(lines)


# -- two-qubit search with one marked item ----------------------------------


def grover_gates(prec: int) -> tuple[Matrix, Matrix]:
    """The marking and diffusion unitaries on (2 data + 1 flag) qubits."""
    # marking: flip the flag qubit exactly on data value 01
    mark = permutation_gate([0, 1, 3, 2, 4, 5, 6, 7], prec)
    # diffusion: conjugate a data-value-00 flag flip by H on both data lines
    flip00 = permutation_gate([1, 0, 2, 3, 4, 5, 6, 7], prec)
    h = hadamard_gate(prec)
    hhi = tensorprod(tensorprod(h, h), Matrix.identity(2, prec=prec))
    return mark, hhi * flip00 * hhi


def run_grover(config: DemoConfig, iterations: int = 8) -> str:
    """Transcript of the search success probability per iteration."""
    if iterations < 1:
        raise ValueError(f"need at least one iteration, got {iterations}")
    p = config.precision
    digits = config.output_digits
    state = new_mps(3, prec=p, rng_seed=config.seed)
    h = hadamard_gate(p)
    state.apply_u2(h, 0)
    state.apply_u2(h, 1)
    state.apply_u2(pauli_x_gate(p), 2)
    state.apply_u2(h, 2)
    mark, diffuse = grover_gates(p)

    def prob01() -> str:
        return format_complex(state.rdo_block(0, 1)[1, 1], digits)

    lines = [f"Initially, Prob(01)={prob01()}", "Go into Grover's iteration..."]
    for k in range(1, iterations + 1):
        state.apply_u8(mark, 0, 1, 2)
        state.apply_u8(diffuse, 0, 1, 2)
        lines.append(f"After {k} times iteration, Prob(01)={prob01()}")
    return "\n".join(lines)


# -- three-qubit walk-through, printed in bra-ket form ------------------------


def run_simple(config: DemoConfig) -> str:
    p = config.precision
    digits = config.output_digits
    state = new_mps(3, prec=p, rng_seed=config.seed)
    lines = [
        "The initial state is ",
        str_dirac(state.rdo_block(0, 2), digits),
        "Now we apply H to the 0th qubit.",
    ]
    state.apply_u2(hadamard_gate(p), 0)
    lines.append("Now we apply CNOT to the qubits 0 and 2.")
    state.apply_u4(cnot_gate(p), 0, 2)
    lines.append("At this point, the reduced density matrix of the qubits 0 and 2 is ")
    lines.append(str_dirac(state.rdo([0, 2]), digits))
    return "\n".join(lines)


# -- gamma-function spot check ------------------------------------------------


def run_gamma(config: DemoConfig, z_text: str) -> str:
    z = parse_complex(z_text, config.precision)
    return f"gamma({z_text}) = {format_complex(gamma(z), config.output_digits)}"

"""Acceptance gate: one test per shipping criterion, at the stated tolerance.

``pytest -v tests/test_acceptance.py`` yields one verdict line per criterion.
The full-size Deutsch-Jozsa runs (criteria 4-6) and the 200-circuit oracle
sweep (criterion 7) carry the ``slow`` marker; everything else finishes in
seconds.  Runtime budgets are asserted alongside the numerics.
"""

from __future__ import annotations

import random
import time

import gmpy2
import pytest
from gmpy2 import mpfr

from mpcmat import Matrix, MpComplex, diag_h, eigenvalues_h, inv, solve_gauss
from mpcmat.matrix import parse_matrix
from mpcmat.mps import (
    ccnot_gate,
    cnot_gate,
    cswap_gate,
    hadamard_gate,
    new_mps,
    pauli_x_gate,
    swap_gate,
)
from mpcmat.scalar import sin
from mpcmat.special import gamma
from mpcmat.demos import DemoConfig, run_dj, run_grover, run_nmr, run_simple
from mpcmat.eigen import ConvergenceError

from dense_sim import DenseSim, aligned_max_err
from test_eigen import dyadic_values, exact_spectrum_matrix, ortho_gap
from test_mps import random_unitary

WIDE = gmpy2.context(precision=600)

ILL_CONDITIONED_SYSTEM = "[64919121, -159018721; 41869520.5, -102558961]"
EXACT_X = 205117922
EXACT_Y = 83739041


def _classic_solution(prec: int, method):
    a = parse_matrix(ILL_CONDITIONED_SYSTEM, prec)
    b = Matrix(2, 1, prec=prec)
    b[0, 0] = MpComplex(1, 0, prec=prec)
    x = method(a, b)
    return x[0, 0], x[1, 0]


def test_criterion_1_classic_solve_exact_at_256_wrong_at_53():
    t0 = time.monotonic()
    for method in (lambda a, b: inv(a) * b, solve_gauss):
        x, y = _classic_solution(256, method)
        assert float(abs((x - EXACT_X) / EXACT_X)) < 1e-20
        assert float(abs((y - EXACT_Y) / EXACT_Y)) < 1e-20
        x53, _ = _classic_solution(53, method)
        assert float(abs((x53 - EXACT_X) / EXACT_X)) > 1e-3
    assert time.monotonic() - t0 < 1.0


def test_criterion_2_grover_probability_sequence(tmp_path):
    t0 = time.monotonic()
    lines = run_grover(DemoConfig(precision=256, output_dir=tmp_path)).splitlines()
    assert float(lines[0].split("=")[1]) == pytest.approx(0.25, abs=1e-8)
    want = [1, 0.25, 0.25, 1, 0.25, 0.25, 1, 0.25]
    got = [float(line.split("=")[1]) for line in lines[2:]]
    assert len(got) == 8
    for g, w in zip(got, want):
        assert g == pytest.approx(w, abs=1e-8)
    assert time.monotonic() - t0 < 5.0


def test_criterion_3_density_operator_strings_byte_identical(tmp_path):
    t0 = time.monotonic()
    lines = run_simple(DemoConfig(output_dir=tmp_path)).splitlines()
    assert lines[1] == "1.0000000e+00|000><000|"
    assert lines[5] == (
        "5.0000000e-01|00><00|+5.0000000e-01|00><11|"
        "+5.0000000e-01|11><00|+5.0000000e-01|11><11|"
    )
    assert time.monotonic() - t0 < 1.0


@pytest.mark.slow
def test_criterion_4_dj_seven_bundles_rank_28_prob_below_1e50(tmp_path):
    t0 = time.monotonic()
    report = run_dj(DemoConfig(precision=256, output_dir=tmp_path), bundles=7)
    assert report.m_maxmax == 28
    assert float(report.max_error) <= 1e-50
    assert time.monotonic() - t0 <= 1800


def test_criterion_4_fast_variant_two_bundles(tmp_path):
    t0 = time.monotonic()
    report = run_dj(DemoConfig(precision=256, output_dir=tmp_path), bundles=2)
    assert float(report.max_error) <= 1e-50
    assert time.monotonic() - t0 <= 120


@pytest.mark.slow
def test_criterion_5_truncation_at_27_is_destructive(tmp_path):
    report = run_dj(DemoConfig(precision=256, output_dir=tmp_path), bundles=7, m_trunc=27)
    assert float(report.max_error) >= 1e-3


@pytest.mark.slow
def test_criterion_5_truncation_at_28_is_harmless(tmp_path):
    report = run_dj(DemoConfig(precision=256, output_dir=tmp_path), bundles=7, m_trunc=28)
    assert float(report.max_error) <= 1e-30


@pytest.mark.slow
def test_criterion_6_starved_precision_raises_convergence_failure(tmp_path):
    # A 53-bit run must abort with the eigensolver's failure error rather
    # than return an answer.  Known open gap: this solver keeps converging
    # (and is accurate) at 53 bits, so the expected abort does not occur.
    with pytest.raises(ConvergenceError):
        run_dj(DemoConfig(precision=53, output_dir=tmp_path), bundles=7)


@pytest.mark.slow
def test_criterion_7_200_random_circuits_match_dense_oracle():
    t0 = time.monotonic()
    prec = 256
    fixed = {
        "x": pauli_x_gate(prec),
        "h": hadamard_gate(prec),
        "cnot": cnot_gate(prec),
        "swap": swap_gate(prec),
        "ccnot": ccnot_gate(prec),
        "cswap": cswap_gate(prec),
    }
    worst = 0.0
    for idx in range(200):
        rng = random.Random(1_000_003 * (idx + 1))
        n = rng.randint(2, 8)
        st = new_mps(n, prec=prec)
        ref = DenseSim(n, prec=prec)
        kinds = ["u2", "u4", "x", "h", "cnot", "swap"]
        if n >= 3:
            kinds += ["u8", "ccnot", "cswap"]
        for _ in range(rng.randint(5, 30)):
            kind = rng.choice(kinds)
            if kind == "u2":
                u, qs = random_unitary(2, rng.randrange(2**31), prec), (rng.randrange(n),)
                st.apply_u2(u, *qs)
            elif kind == "u4":
                u, qs = random_unitary(4, rng.randrange(2**31), prec), tuple(rng.sample(range(n), 2))
                st.apply_u4(u, *qs)
            elif kind == "u8":
                u, qs = random_unitary(8, rng.randrange(2**31), prec), tuple(rng.sample(range(n), 3))
                st.apply_u8(u, *qs)
            else:
                u = fixed[kind]
                qs = tuple(rng.sample(range(n), {"x": 1, "h": 1, "cnot": 2, "swap": 2}.get(kind, 3)))
                if kind in ("x", "h"):
                    st.apply_u2(u, *qs)
                elif kind == "cnot":
                    st.apply_u4(u, *qs)
                elif kind == "swap":
                    st.swap(*qs)
                elif kind == "ccnot":
                    st.ccnot(*qs)
                else:
                    st.cswap(*qs)
            ref.apply(u, qs)
        worst = max(worst, float(aligned_max_err(st.state_vector(), ref.amps)))
    assert worst <= 2.0**-232
    assert time.monotonic() - t0 < 600


def test_criterion_8_eigensolver_recovery_and_strict_ordering():
    unitary_tol = 2.0 ** -(256 - 16) * 20
    for seed in range(6):
        rng = random.Random(40_000 + seed)
        target = sorted(dyadic_values(20, rng), reverse=True)
        a = exact_spectrum_matrix(target, rng)
        es = diag_h(a)
        qr_vals = eigenvalues_h(a)
        s_diag = WIDE.fsum(abs(WIDE.sub(l, d)) for l, d in zip(es.values, target))
        s_qr = WIDE.fsum(abs(WIDE.sub(l, d)) for l, d in zip(qr_vals, target))
        assert s_diag <= mpfr("1e-70")
        assert s_qr <= mpfr("1e-25")
        assert s_diag < s_qr  # strict, every seed
        assert float(ortho_gap(es.vectors)) <= unitary_tol
    # full degeneracy: identity, then a 2-fold repeated spectrum
    es = diag_h(Matrix.identity(20, prec=256))
    assert all(v == 1 for v in es.values)
    assert float(ortho_gap(es.vectors)) <= unitary_tol
    rng = random.Random(40_777)
    half = dyadic_values(10, rng)
    doubled = sorted(half + half, reverse=True)
    es = diag_h(exact_spectrum_matrix(doubled, rng))
    s = WIDE.fsum(abs(WIDE.sub(l, d)) for l, d in zip(es.values, doubled))
    assert s <= mpfr("1e-70")
    assert float(ortho_gap(es.vectors)) <= unitary_tol


@pytest.mark.parametrize("prec", [256, 512])
def test_criterion_9_gamma_oracle_and_identities(prec):
    t0 = time.monotonic()
    bound = 2.0 ** -(prec - 8)
    rng = random.Random(424242)
    one = MpComplex(1, 0, prec=prec)
    pi = MpComplex(gmpy2.context(precision=prec).const_pi(), 0, prec=prec)
    for _ in range(100):
        while True:
            a, b = rng.uniform(-10, 10), rng.uniform(-10, 10)
            if abs(b) >= 0.1 or abs(a - round(a)) >= 0.1:
                break  # keep clear of the pole lattice (and its reflection)
        z = MpComplex(a, b, prec=prec)
        g = gamma(z)
        oracle = gamma(MpComplex(a, b, prec=2 * prec))
        assert float(abs((g - oracle) / oracle)) <= bound
        lhs = g * gamma(one - z)
        rhs = pi / sin(pi * z)
        assert float(abs((lhs - rhs) / rhs)) <= bound
        assert float(abs(gamma(z + one) / (z * g) - one)) <= bound
    assert time.monotonic() - t0 < 60


def test_criterion_10_nmr_doublet_position_and_dominance(tmp_path):
    t0 = time.monotonic()
    path = run_nmr(DemoConfig(precision=280, output_dir=tmp_path), temperature="300")
    rows = [line.split() for line in path.read_text().splitlines()[1:]]
    mags = [float(m) for _, m in rows]
    dt = 0.43 / 4.0e8
    df = 1.0 / (len(mags) * dt)
    nyquist = len(mags) // 2
    first, second = sorted(sorted(range(nyquist), key=lambda i: mags[i])[-2:])
    # peak centres within one bin of w1 -/+ J12/2
    assert abs(first - (4.0e8 - 0.7e5) / df) <= 1.0
    assert abs(second - (4.0e8 + 0.7e5) / df) <= 1.0
    # exactly two dominant peaks: 5x everything below Nyquist outside the
    # two peaks' own leakage shoulders (+-3 bins)
    rest = max(
        m
        for i, m in enumerate(mags[:nyquist])
        if abs(i - first) > 3 and abs(i - second) > 3
    )
    assert min(mags[first], mags[second]) >= 5 * rest
    assert time.monotonic() - t0 < 120


def test_criterion_11_invariant_suites_stand_in_for_wall_clock_tables():
    # Timing tables are hardware-bound and deliberately not reproduced;
    # the structural invariants stand in for them and must stay present.
    import test_linsolve
    import test_mps
    import test_spectral

    assert hasattr(test_spectral, "test_parseval")
    assert hasattr(test_linsolve, "test_lu_reconstruction_random")
    assert hasattr(test_mps, "test_schmidt_coefficients_normalized_and_sorted")

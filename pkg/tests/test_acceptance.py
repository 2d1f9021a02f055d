"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and repeated in the terminal summary.
"""

import json
import math
import time

import numpy as np
import pytest

from conftest import haar_unitary, random_density, random_hermitian, record_acceptance
from entbreak import cli
from entbreak.channels import (
    apply_local,
    depolarizing,
    phase_damping,
    qutrit_filter,
    random_channel,
)
from entbreak.core import DensityMatrix, hermitian_eigen
from entbreak.measures import (
    binary_entropy,
    concurrence,
    entanglement_of_formation,
    negativity,
)
from entbreak.scenarios import (
    LAMBDA_1,
    fig2_data,
    g_rho2_in,
    qutrit_example,
    rho1_in,
    rho2_bell_basis,
    rho2_in,
    rho3_in,
)

SEED = 20240611
CASES = 1000


def run_cli(capsys, *argv):
    start = time.perf_counter()
    code = cli.main([str(a) for a in argv])
    elapsed = time.perf_counter() - start
    out, _ = capsys.readouterr()
    return code, out, elapsed


# ----------------------------------------------------------------------
# randomized property suites; each returns one error figure per case
# ----------------------------------------------------------------------


def completeness_suite(seed, n=CASES):
    rng = np.random.default_rng(seed)
    errs = []
    for _ in range(n):
        kind = rng.integers(4)
        if kind == 0:
            ch = random_channel(rng, int(rng.integers(2, 4)), int(rng.integers(1, 5)))
        elif kind == 1:
            ch = phase_damping(rng.uniform())
        elif kind == 2:
            ch = depolarizing(rng.uniform(), int(rng.integers(2, 4)))
        else:
            ch = qutrit_filter(rng.uniform(1e-9, 1 - 1e-9))
        # recompute sum K^dagger K here rather than trusting the channel's own check
        s = sum(k.conj().T @ k for k in ch.ops)
        errs.append(float(np.max(np.abs(s - np.eye(ch.dim_in)))))
    return np.array(errs)


def preservation_suite(seed, n=CASES):
    rng = np.random.default_rng(seed)
    dims = [(2, 2), (2, 3), (3, 2), (3, 3)]
    trace_err, min_eig = [], []
    for _ in range(n):
        da, db = dims[rng.integers(4)]
        side = "AB"[rng.integers(2)]
        d_side = da if side == "A" else db
        ch = random_channel(rng, d_side, int(rng.integers(1, 5)))
        rho = DensityMatrix(da, db, random_density(rng, da * db, int(rng.integers(1, da * db + 1))))
        out = apply_local(ch, rho, side).mat
        trace_err.append(abs(np.trace(out) - 1.0))
        min_eig.append(np.linalg.eigvalsh(out)[0])
    return np.array(trace_err), np.array(min_eig)


def invariance_suite(seed, n=CASES):
    """Drift of N, C and E_f under random local unitaries on generic (full-rank) states."""
    rng = np.random.default_rng(seed)
    drift = np.zeros((n, 3))
    for i in range(n):
        rho = DensityMatrix(2, 2, random_density(rng, 4))
        u = np.kron(haar_unitary(rng, 2), haar_unitary(rng, 2))
        rot = rho.with_matrix(u @ rho.mat @ u.conj().T)
        c0, c1 = concurrence(rho), concurrence(rot)
        drift[i] = (
            abs(negativity(rho)[0] - negativity(rot)[0]),
            abs(c0 - c1),
            abs(entanglement_of_formation(rho) - entanglement_of_formation(rot)),
        )
    return drift


def eigen_suite(seed, n=CASES):
    rng = np.random.default_rng(seed)
    recon, trace = [], []
    for d in (4, 9):
        mats = np.stack([random_hermitian(rng, d) for _ in range(n)])
        w, v = hermitian_eigen(mats)
        r = v @ (w[..., None] * np.swapaxes(v, -1, -2).conj())
        recon.append(np.max(np.abs(r - mats), axis=(1, 2)))
        trace.append(np.abs(np.trace(mats, axis1=1, axis2=2).real - w.sum(axis=1)))
    return np.concatenate(recon), np.concatenate(trace)


# ----------------------------------------------------------------------
# criteria
# ----------------------------------------------------------------------


def test_criterion_01_lambda_1(capsys):
    code, out, elapsed = run_cli(capsys, "solve", "lambda-sep", "--state", "rho2_in")
    value = json.loads(out)["value"]
    err = abs(value - (-16 + 12 * math.sqrt(2)))
    ok = code == 0 and err <= 1e-9 and elapsed < 1.0
    record_acceptance(1, "lambda_1 reproduction", ok, f"value={value:.13f} err={err:.1e} time={elapsed:.2f}s")


def test_criterion_02_residual_negativity():
    n, _ = negativity(apply_local(phase_damping(LAMBDA_1), rho1_in()))
    err = abs(n - 2 * (3 - 2 * math.sqrt(2)) / 3)
    record_acceptance(2, "residual negativity at lambda_1", err <= 1e-10, f"N={n:.12f} err={err:.1e}")


def test_criterion_03_closed_forms():
    start = time.perf_counter()
    worst = 0.0
    for t in (1 / 3, 0.1, 0.6):
        worst = max(worst, max(fig2_data(t, 101)["closed_form_residuals"].values()))
    elapsed = time.perf_counter() - start
    # fig2_data also solves lambda_1 once per call; the grid itself is the bulk of the cost
    ok = worst <= 1e-10 and elapsed < 1.0
    record_acceptance(3, "closed-form negativity equivalence", ok, f"max err={worst:.1e} time={elapsed:.2f}s")


def test_criterion_04_g_bound():
    g = g_rho2_in()
    err_g = abs(g - (1 - binary_entropy(1 / 6)))
    diag = np.sort(np.diag(rho2_bell_basis().conj().T @ rho2_in().mat @ rho2_bell_basis()).real)
    err_d = float(np.max(np.abs(diag - np.array([0, 0, 1 / 6, 5 / 6]))))
    # the rotated basis is a genuine Bell basis
    gram = rho2_bell_basis().conj().T @ rho2_bell_basis()
    ok = err_g <= 1e-12 and err_d <= 1e-12 and np.allclose(gram, np.eye(4), atol=1e-14)
    record_acceptance(4, "g bound of rho2_in", ok, f"g={g:.12f} err={err_g:.1e} diag err={err_d:.1e}")


def test_criterion_05_strict_window(capsys):
    code, out, _ = run_cli(capsys, "solve", "t-threshold")
    rep = json.loads(out)
    t_star = rep["value"]
    g = 1 - binary_entropy(1 / 6)
    holds = {t: entanglement_of_formation(rho3_in(t)) < g for t in (0.1, 0.3, 0.49, 0.6)}
    ok = (code == 0 and math.floor(1000 * t_star) == 495 and abs(rep["residual"]) <= 1e-12
          and holds[0.1] and holds[0.3] and holds[0.49] and not holds[0.6])
    record_acceptance(5, "strict window t*", ok,
                      f"t*={t_star:.12f} residual={rep['residual']:.1e} samples={holds}")


def test_criterion_06_certificates(capsys):
    c1, o1, _ = run_cli(capsys, "certify", "seb", "--t", 0.3333)
    c2, o2, _ = run_cli(capsys, "certify", "strong-seb")
    c3, o3, _ = run_cli(capsys, "certify", "seb", "--t", 0.6667)
    r1, r2, r3 = json.loads(o1), json.loads(o2), json.loads(o3)
    ok = (c1 == 0 and r1["valid"] and c2 == 0 and r2["valid"]
          and c3 == 1 and r3["failed_piece"] == "strict_input_inequality")
    record_acceptance(6, "certificates", ok,
                      f"exits=({c1},{c2},{c3}) t=0.6667 failed_piece={r3['failed_piece']}")


def test_criterion_07_qutrit():
    details = []
    ok = True
    for q in (0.1, 0.25, 0.5):
        rep = qutrit_example(q)
        schmidt = max(b["schmidt_error"] for b in rep.branches)
        good = (rep.out1_separability == "Separable" and rep.out1_decomposition_error <= 1e-12
                and rep.out2_residual <= 1e-14 and rep.filter_completeness_error <= 1e-15
                and schmidt <= 1e-12 and rep.chain.passed)
        ok &= good
        details.append(f"q={q}: out2 {rep.out2_residual:.0e}, filter {rep.filter_completeness_error:.0e}, "
                       f"schmidt {schmidt:.0e}")
    record_acceptance(7, "qutrit example", ok, "; ".join(details))


@pytest.mark.slow
def test_criterion_08_pure_state_nogo(capsys):
    c1, o1, t1 = run_cli(capsys, "scan-nogo", "--trials", 1000, "--seed", 42)
    c2, o2, t2 = run_cli(capsys, "search", "--state", "phi_plus", "--format", "json")
    scan, search = json.loads(o1), json.loads(o2)
    max_gap = max(r["gap"] for r in search["records"])
    ok = (c1 == 0 and scan["counterexamples"] == [] and c2 == 0
          and len(search["records"]) == 16**3 and max_gap <= 1e-9 and t1 + t2 < 60)
    record_acceptance(8, "pure-state no-go", ok,
                      f"separable={scan['separableOutputs']} eb={scan['ebConfirmed']} "
                      f"counterexamples={len(scan['counterexamples'])} max gap={max_gap:.1e} "
                      f"time={t1 + t2:.1f}s")


@pytest.mark.slow
def test_criterion_09_search_recovers_rotation(capsys):
    code, out, elapsed = run_cli(capsys, "search", "--state", "rho1_in", "--format", "json")
    top = json.loads(out)["records"][0]
    err = abs(top["gap"] - (1 - LAMBDA_1))
    cell = 2 * math.pi / 16

    def circ(a, b):
        d = abs(a - b) % (2 * math.pi)
        return min(d, 2 * math.pi - d)

    near = abs(top["theta"] - math.pi / 2) <= math.pi / 16 and circ(top["phi"], 0) <= cell and circ(top["psi"], 0) <= cell
    ok = code == 0 and err <= 1e-6 and near
    record_acceptance(9, "search recovers the Y rotation", ok,
                      f"gap={top['gap']:.9f} err={err:.1e} at ({top['theta']:.4f}, {top['phi']:.4f}, "
                      f"{top['psi']:.4f}) time={elapsed:.1f}s")


@pytest.mark.slow
def test_criterion_10_property_suites():
    comp = completeness_suite(SEED)
    trace_err, min_eig = preservation_suite(SEED)
    drift = invariance_suite(SEED)
    recon, trace = eigen_suite(SEED)

    # determinism: a rerun with the same seed reproduces the leading cases bit for bit
    det = (np.array_equal(completeness_suite(SEED, 25), comp[:25])
           and np.array_equal(preservation_suite(SEED, 25)[1], min_eig[:25])
           and np.array_equal(invariance_suite(SEED, 25), drift[:25])
           and np.array_equal(eigen_suite(SEED, 25)[0][:25], recon[:25]))

    sizes = (comp.size, trace_err.size, drift.shape[0], recon.size // 2)
    ok = (min(sizes) >= 1000 and comp.max() <= 1e-12 and trace_err.max() <= 1e-12
          and min_eig.min() >= -1e-10 and drift.max() <= 1e-10
          and recon.max() <= 1e-10 and trace.max() <= 1e-10 and det)
    record_acceptance(10, "property suites", ok,
                      f"completeness {comp.max():.1e}; trace {trace_err.max():.1e}, min eig {min_eig.min():.1e}; "
                      f"LU drift N/C/Ef {drift[:, 0].max():.1e}/{drift[:, 1].max():.1e}/{drift[:, 2].max():.1e}; "
                      f"eigen recon {recon.max():.1e}, trace {trace.max():.1e}; deterministic={det}")

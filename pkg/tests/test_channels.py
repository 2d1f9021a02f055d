import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import haar_unitary, pt_oracle, random_density, random_state
from entbreak import (
    DensityMatrix,
    KrausChannel,
    apply_local,
    choi_matrix,
    is_entanglement_breaking,
    local_unitary,
    phase_damping,
    phase_damping_family,
    qutrit_dephase,
    qutrit_filter,
    replace_with_00,
)
from entbreak.channels import (
    ChannelFamily,
    apply_kraus_branch,
    apply_local_batch,
    depolarizing,
    identity_channel,
    random_channel,
    random_qubit_channel,
)
from entbreak.exceptions import (
    DimensionMismatch,
    IncompleteChannel,
    NotUnitary,
    ParameterOutOfRange,
    UnsupportedDimension,
)
from entbreak.scenarios import LAMBDA_1, y_rotation, rho1_in, rho2_in

unit = st.floats(0.0, 1.0, allow_nan=False)


def rho1_out_expected(lam):
    s = math.sqrt(1 - lam)
    return np.array([[2, 0, 0, s], [0, 0, 0, 0], [0, 0, 0, 0], [s, 0, 0, 1]]) / 3


def rho2_out_expected(lam):
    s = math.sqrt(1 - lam)
    return np.array([
        [2, -1, 2 * s, s],
        [-1, 1, -s, -s],
        [2 * s, -s, 2, 1],
        [s, -s, 1, 1],
    ]) / 6


# ----------------------------------------------------------------------
# construction
# ----------------------------------------------------------------------


def test_phase_damping_endpoints():
    np.testing.assert_array_equal(phase_damping(0).ops[0], np.eye(2))
    np.testing.assert_array_equal(phase_damping(0).ops[1], np.zeros((2, 2)))
    np.testing.assert_array_equal(phase_damping(1).ops[0], np.diag([1.0, 0.0]))
    np.testing.assert_array_equal(phase_damping(1).ops[1], np.diag([0.0, 1.0]))
    assert phase_damping(LAMBDA_1).completeness_error() <= 1e-15


def test_phase_damping_rejects_out_of_range():
    for bad in (-0.01, 1.01, float("nan")):
        with pytest.raises(ParameterOutOfRange):
            phase_damping(bad)


def test_incomplete_channel_rejected():
    with pytest.raises(IncompleteChannel):
        KrausChannel(np.stack([np.eye(2), np.eye(2)]))
    with pytest.raises(IncompleteChannel):
        KrausChannel(np.diag([1.0, 1.0 + 1e-9])[None])
    with pytest.raises(DimensionMismatch):
        KrausChannel(np.zeros((0, 2, 2)))


def test_qutrit_channels():
    d = qutrit_dephase()
    assert d.completeness_error() == 0.0
    for q in (0.1, 0.25, 0.5, 0.9):
        assert qutrit_filter(q).completeness_error() <= 1e-15
    for bad in (0.0, 1.0):
        with pytest.raises(ParameterOutOfRange):
            qutrit_filter(bad)


def test_channel_family_validate():
    family = phase_damping_family()
    assert family.validate(101) <= 1e-15
    assert family.grid(5).tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(ParameterOutOfRange):
        family(1.5)
    # vectorized stack agrees with the per-value constructor
    vals = family.grid(11)
    np.testing.assert_allclose(family.batch_ops(vals), np.stack([phase_damping(v).ops for v in vals]), atol=0)
    dep = ChannelFamily("depolarizing", "p", (0.0, 1.0), depolarizing)
    assert dep.validate(21) <= 1e-14


# ----------------------------------------------------------------------
# application
# ----------------------------------------------------------------------


@settings(max_examples=50, deadline=None)
@given(unit)
def test_apply_local_matches_expected_outputs(lam):
    ch = phase_damping(lam)
    np.testing.assert_allclose(apply_local(ch, rho1_in(), "A").mat, rho1_out_expected(lam), atol=1e-14)
    np.testing.assert_allclose(apply_local(ch, rho2_in(), "A").mat, rho2_out_expected(lam), atol=1e-14)


def test_local_unitary_reproduces_rho2_in():
    u = y_rotation()
    np.testing.assert_allclose(u, np.array([[1, -1], [1, 1]]) / math.sqrt(2), atol=1e-15)
    np.testing.assert_allclose(local_unitary(rho1_in(), u, "A").mat, rho2_in().mat, atol=1e-15)
    with pytest.raises(NotUnitary):
        local_unitary(rho1_in(), 2 * np.eye(2))


def test_replace_with_00():
    out = replace_with_00(rho1_in(), 0.25)
    expected = 0.75 * rho1_in().mat
    expected[0, 0] += 0.25
    np.testing.assert_allclose(out.mat, expected, atol=1e-15)
    with pytest.raises(ParameterOutOfRange):
        replace_with_00(rho1_in(), 1.5)


def test_apply_local_side_b_and_dimension_checks(rng):
    rho = random_state(rng, 2, 3)
    out = apply_local(qutrit_dephase(), rho, "B")
    assert out.dims == (2, 3)
    with pytest.raises(DimensionMismatch):
        apply_local(qutrit_dephase(), rho, "A")


def test_apply_local_batch_matches_apply_local(rng):
    mats = np.stack([random_density(rng, 4) for _ in range(20)])
    ch = random_qubit_channel(rng)
    for side in "AB":
        batch = apply_local_batch(ch.ops, mats, 2, 2, side)
        for m, b in zip(mats, batch):
            np.testing.assert_allclose(b, apply_local(ch, DensityMatrix(2, 2, m), side).mat, atol=1e-14)


def test_kraus_branch_probabilities_sum_to_one(rng):
    rho = random_state(rng, 3, 3)
    filt = qutrit_filter(0.3)
    probs = [apply_kraus_branch(k, rho, "A")[0] for k in filt.ops]
    assert sum(probs) == pytest.approx(1.0, abs=1e-14)


def test_channel_on_a_commutes_with_filter_on_b(rng):
    # a channel on A and a (non trace-preserving) filter on B act on different factors
    for _ in range(50):
        m = random_density(rng, 4)
        ch = random_qubit_channel(rng)
        f = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        f /= np.linalg.norm(f, 2)
        fb = np.kron(np.eye(2), f)
        first = apply_local_batch(ch.ops, (fb @ m @ fb.conj().T)[None], 2, 2, "A")[0]
        a_out = apply_local_batch(ch.ops, m[None], 2, 2, "A")[0]
        np.testing.assert_allclose(first, fb @ a_out @ fb.conj().T, atol=1e-14)


# ----------------------------------------------------------------------
# Choi state and entanglement breaking
# ----------------------------------------------------------------------


def test_choi_of_identity_and_phase_damping():
    choi = choi_matrix(identity_channel(2))
    np.testing.assert_allclose(choi.mat, np.outer([1, 0, 0, 1], [1, 0, 0, 1]) / 2, atol=1e-15)
    for lam in np.linspace(0, 1, 11):
        c = choi_matrix(phase_damping(lam))
        mu = np.linalg.eigvalsh(pt_oracle(c.mat, 2, 2))[0]
        assert -2 * mu == pytest.approx(math.sqrt(1 - lam), abs=1e-14)


def test_entanglement_breaking_examples():
    assert not is_entanglement_breaking(identity_channel(2)).entanglement_breaking
    assert is_entanglement_breaking(phase_damping(1.0)).entanglement_breaking
    assert not is_entanglement_breaking(phase_damping(0.999)).entanglement_breaking
    assert is_entanglement_breaking(depolarizing(1.0)).entanglement_breaking
    # depolarizing breaks entanglement exactly from p = 2/3 on
    assert is_entanglement_breaking(depolarizing(2 / 3)).entanglement_breaking
    assert not is_entanglement_breaking(depolarizing(0.66)).entanglement_breaking


def test_entanglement_breaking_qubits_only():
    with pytest.raises(UnsupportedDimension):
        is_entanglement_breaking(qutrit_dephase())
    assert choi_matrix(qutrit_dephase()).dims == (3, 3)


def test_measure_and_prepare_channel_is_entanglement_breaking(rng):
    for _ in range(20):
        u = haar_unitary(rng, 2)
        ops = [np.outer(u[:, k], u[:, k].conj()) for k in range(2)]
        assert is_entanglement_breaking(KrausChannel(np.stack(ops))).entanglement_breaking


def test_random_channels_are_complete(rng):
    for d in (2, 3):
        for rank in (1, 2, 4):
            ch = random_channel(rng, d, rank)
            assert ch.completeness_error() <= 1e-12
            assert ch.ops.shape == (rank, d, d)

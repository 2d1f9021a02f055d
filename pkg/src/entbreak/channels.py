"""Kraus channels acting on one side of a bipartite state."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import tolerances as tol
from .core import DensityMatrix, _check_side, as_matrix, hermitian_eigvals, kron, pt_array
from .exceptions import (
    DimensionMismatch,
    IncompleteChannel,
    NotUnitary,
    ParameterOutOfRange,
    UnsupportedDimension,
)

__all__ = [
    "ChannelFamily",
    "EBWitness",
    "KrausChannel",
    "apply_kraus_branch",
    "apply_local",
    "apply_local_batch",
    "choi_matrix",
    "depolarizing",
    "identity_channel",
    "is_entanglement_breaking",
    "local_unitary",
    "phase_damping",
    "phase_damping_family",
    "qutrit_dephase",
    "qutrit_filter",
    "random_channel",
    "random_qubit_channel",
    "replace_with_00",
]


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Channel rho -> sum_k K_k rho K_k^dagger with K_k of shape (dim_out, dim_in).

    Construction fails with ``IncompleteChannel`` unless
    ``max |sum K^dagger K - I| <= TOL_COMPLETENESS``.
    """

    ops: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        ops = np.asarray(self.ops, dtype=np.complex128)
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[0] == 0:
            raise DimensionMismatch(f"Kraus operators must stack to (k, dout, din), got {ops.shape}")
        if not np.all(np.isfinite(ops)):
            raise IncompleteChannel("Kraus operators have non-finite entries")
        ops = ops.copy()
        ops.flags.writeable = False
        object.__setattr__(self, "ops", ops)
        err = self.completeness_error()
        if err > tol.TOL_COMPLETENESS:
            raise IncompleteChannel(
                f"sum K^dagger K deviates from identity by {err:.3e} > {tol.TOL_COMPLETENESS:g}"
            )

    @property
    def dim_in(self):
        return self.ops.shape[2]

    @property
    def dim_out(self):
        return self.ops.shape[1]

    @property
    def rank(self):
        return self.ops.shape[0]

    def completeness_error(self):
        s = np.einsum("kji,kjl->il", self.ops.conj(), self.ops)
        return float(np.max(np.abs(s - np.eye(self.dim_in))))

    def __iter__(self):
        return iter(self.ops)

    def __call__(self, rho, side="A"):
        return apply_local(self, rho, side)


class ChannelFamily:
    """One-parameter family of channels on a closed interval.

    ``generator`` must be deterministic; ``validate`` scans a grid and checks
    every generated channel (construction already enforces completeness).
    """

    def __init__(self, name, parameter_name, domain, generator: Callable[[float], KrausChannel]):
        lo, hi = float(domain[0]), float(domain[1])
        if not lo < hi:
            raise ValueError(f"empty domain [{lo}, {hi}]")
        self.name = name
        self.parameter_name = parameter_name
        self.domain = (lo, hi)
        self.generator = generator

    def __call__(self, value):
        lo, hi = self.domain
        if not lo <= value <= hi:
            raise ParameterOutOfRange(f"{self.parameter_name}={value} outside [{lo}, {hi}]")
        return self.generator(value)

    def batch_ops(self, values):
        """Kraus stacks for many parameter values, shape (B, k, dout, din)."""
        return np.stack([self(float(v)).ops for v in np.ravel(values)])

    def grid(self, points=101):
        return np.linspace(self.domain[0], self.domain[1], points)

    def validate(self, points=101):
        """Return the largest completeness error over a ``points`` grid."""
        return max(self(float(x)).completeness_error() for x in self.grid(points))

    def __repr__(self):
        return f"ChannelFamily({self.name!r}, {self.parameter_name}={self.domain})"


# --------------------------------------------------------------------------
# concrete channels
# --------------------------------------------------------------------------


def _check_unit_interval(name, value, open_=False):
    value = float(value)
    ok = (0.0 < value < 1.0) if open_ else (0.0 <= value <= 1.0)
    if not ok or math.isnan(value):
        bounds = "(0, 1)" if open_ else "[0, 1]"
        raise ParameterOutOfRange(f"{name}={value} outside {bounds}")
    return value


def phase_damping(lam):
    """Qubit phase damping: E0 = diag(1, sqrt(1-lam)), E1 = diag(0, sqrt(lam))."""
    lam = _check_unit_interval("lambda", lam)
    e0 = np.diag([1.0, math.sqrt(1.0 - lam)])
    e1 = np.array([[0.0, 0.0], [0.0, math.sqrt(lam)]])
    return KrausChannel(np.stack([e0, e1]), label=f"phase_damping({lam!r})")


class _PhaseDampingFamily(ChannelFamily):
    def __init__(self):
        super().__init__("phase-damping", "lambda", (0.0, 1.0), phase_damping)

    def batch_ops(self, values):
        lam = np.asarray(values, dtype=float).ravel()
        if np.any((lam < 0.0) | (lam > 1.0)):
            raise ParameterOutOfRange("lambda outside [0, 1]")
        ops = np.zeros((lam.size, 2, 2, 2), dtype=np.complex128)
        ops[:, 0, 0, 0] = 1.0
        ops[:, 0, 1, 1] = np.sqrt(1.0 - lam)
        ops[:, 1, 1, 1] = np.sqrt(lam)
        return ops


def phase_damping_family():
    return _PhaseDampingFamily()


def identity_channel(d=2):
    return KrausChannel(np.eye(d)[None], label=f"identity({d})")


def depolarizing(p, d=2):
    """rho -> (1-p) rho + p I/d, Kraus form from the Weyl (clock/shift) operators."""
    p = _check_unit_interval("p", p)
    omega = np.exp(2j * np.pi / d)
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(omega ** np.arange(d))
    ops = []
    for a in range(d):
        for b in range(d):
            w = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            weight = (1.0 - p + p / d**2) if (a, b) == (0, 0) else p / d**2
            ops.append(math.sqrt(weight) * w)
    return KrausChannel(np.stack(ops), label=f"depolarizing({p!r}, d={d})")


def qutrit_dephase():
    """Projectors M0 = |0><0| + |1><1| and M1 = |2><2| on a qutrit."""
    m0 = np.diag([1.0, 1.0, 0.0])
    m1 = np.diag([0.0, 0.0, 1.0])
    return KrausChannel(np.stack([m0, m1]), label="qutrit_dephase")


def qutrit_filter(q):
    """Two-outcome qutrit filter.

    A0 = diag(1, sqrt(1-q), sqrt(q)), A1 = diag(0, sqrt(q), sqrt(1-q)).
    """
    q = _check_unit_interval("q", q, open_=True)
    a0 = np.diag([1.0, math.sqrt(1.0 - q), math.sqrt(q)])
    a1 = np.diag([0.0, math.sqrt(q), math.sqrt(1.0 - q)])
    return KrausChannel(np.stack([a0, a1]), label=f"qutrit_filter({q!r})")


def random_channel(rng, d=2, kraus_rank=4):
    """Random channel on C^d from a Haar-random isometry C^d -> C^d (x) C^rank.

    The isometry is the Q factor of a complex Ginibre matrix with the phases
    of R's diagonal absorbed, sliced into ``kraus_rank`` d x d blocks.
    """
    g = rng.standard_normal((d * kraus_rank, d)) + 1j * rng.standard_normal((d * kraus_rank, d))
    q, r = np.linalg.qr(g)
    ph = np.diagonal(r)
    q = q * (ph / np.abs(ph))[None, :]
    return KrausChannel(q.reshape(kraus_rank, d, d), label=f"random_channel(d={d}, rank={kraus_rank})")


def random_qubit_channel(rng, kraus_rank=4):
    return random_channel(rng, 2, kraus_rank)


# --------------------------------------------------------------------------
# application
# --------------------------------------------------------------------------


def _local_ops(ops, rho, side):
    d_in = rho.dim_a if side == "A" else rho.dim_b
    if ops.shape[-1] != d_in:
        raise DimensionMismatch(
            f"operator input dimension {ops.shape[-1]} does not match subsystem {side} "
            f"dimension {d_in}"
        )
    if side == "A":
        return [kron(k, np.eye(rho.dim_b)) for k in ops]
    return [kron(np.eye(rho.dim_a), k) for k in ops]


def _out_dims(rho, side, d_out):
    return (d_out, rho.dim_b) if side == "A" else (rho.dim_a, d_out)


def apply_local(channel, rho, side="A"):
    """Apply ``channel`` to subsystem ``side`` of ``rho`` (the other side untouched)."""
    side = _check_side(side)
    big = _local_ops(channel.ops, rho, side)
    out = sum(k @ rho.mat @ k.conj().T for k in big)
    out = 0.5 * (out + out.conj().T)
    da, db = _out_dims(rho, side, channel.dim_out)
    return DensityMatrix(da, db, out)


def apply_local_batch(ops, mats, dim_a, dim_b, side="A"):
    """Vectorized local channel application on raw matrices.

    ``ops`` has shape (B, k, dout, din) (one channel per state) or
    (k, dout, din) (shared); ``mats`` has shape (B, d, d). No validation.
    """
    mats = np.asarray(mats, dtype=np.complex128)
    nb = mats.shape[0]
    ops = np.asarray(ops, dtype=np.complex128)
    if ops.ndim == 3:
        ops = np.broadcast_to(ops, (nb,) + ops.shape)
    t = mats.reshape(nb, dim_a, dim_b, dim_a, dim_b)
    if side == "A":
        out = np.einsum("bkia,baxcy,bkjc->bixjy", ops, t, ops.conj(), optimize=True)
        da, db = ops.shape[2], dim_b
    else:
        out = np.einsum("bkxa,biajc,bkyc->bixjy", ops, t, ops.conj(), optimize=True)
        da, db = dim_a, ops.shape[2]
    return out.reshape(nb, da * db, da * db)


def apply_kraus_branch(op, rho, side="A"):
    """Apply a single Kraus operator (one filter outcome).

    Returns ``(probability, post_state)``; ``post_state`` is None when the
    outcome has zero probability.
    """
    side = _check_side(side)
    op = as_matrix(op, "Kraus operator")
    (big,) = _local_ops(op[None], rho, side)
    out = big @ rho.mat @ big.conj().T
    p = float(np.trace(out).real)
    if p <= 0.0:
        return 0.0, None
    out = out / p
    da, db = _out_dims(rho, side, op.shape[0])
    return p, DensityMatrix(da, db, 0.5 * (out + out.conj().T))


def check_unitary(u, name="u"):
    u = as_matrix(u, name)
    if u.shape[0] != u.shape[1]:
        raise NotUnitary(f"{name} is not square: {u.shape}")
    err = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if err > tol.TOL_UNITARY:
        raise NotUnitary(f"{name} is not unitary: max |U^dagger U - I| = {err:.3e}")
    return u


def local_unitary(rho, u, side="A"):
    """(U (x) I) rho (U (x) I)^dagger, or the I (x) U form for ``side='B'``."""
    side = _check_side(side)
    u = check_unitary(u)
    (big,) = _local_ops(u[None], rho, side)
    out = big @ rho.mat @ big.conj().T
    return rho.with_matrix(0.5 * (out + out.conj().T))


def replace_with_00(rho, epsilon):
    """Replace the two-qubit state by |00> with probability ``epsilon``.

    This is a two-sided LOCC map, not a Kraus channel on one subsystem.
    """
    epsilon = _check_unit_interval("epsilon", epsilon)
    if rho.dims != (2, 2):
        raise DimensionMismatch(f"replace_with_00 needs a two-qubit state, got dims {rho.dims}")
    ket00 = np.zeros((4, 4), dtype=np.complex128)
    ket00[0, 0] = 1.0
    return rho.with_matrix((1.0 - epsilon) * rho.mat + epsilon * ket00)


# --------------------------------------------------------------------------
# Choi matrices and entanglement breaking
# --------------------------------------------------------------------------


def maximally_entangled(d):
    v = np.zeros(d * d, dtype=np.complex128)
    v[[i * d + i for i in range(d)]] = 1.0 / math.sqrt(d)
    return DensityMatrix(d, d, np.outer(v, v.conj()))


def choi_matrix(channel):
    """Normalized Choi state (E (x) id)(|Phi_d><Phi_d|)."""
    if channel.dim_in != channel.dim_out:
        raise DimensionMismatch(
            f"Choi matrix needs dim_in == dim_out, got {channel.dim_in} -> {channel.dim_out}"
        )
    if channel.dim_in > 3:
        raise DimensionMismatch(f"Choi matrix only supported for d <= 3, got {channel.dim_in}")
    return apply_local(channel, maximally_entangled(channel.dim_in), "A")


class EBWitness(NamedTuple):
    entanglement_breaking: bool
    min_pt_eigenvalue: float


def is_entanglement_breaking(channel):
    """Decide whether a qubit channel is entanglement breaking.

    Uses the Choi state: for 2 (x) 2 it is separable exactly when its
    partial transpose is positive (threshold ``-TOL_PSD``).

    Raises
    ------
    UnsupportedDimension
        For channels on qudits with d >= 3, where a PPT Choi state does not
        certify separability.
    """
    if channel.dim_in != 2 or channel.dim_out != 2:
        raise UnsupportedDimension(
            f"entanglement-breaking test only decides qubit channels, got "
            f"{channel.dim_in} -> {channel.dim_out}"
        )
    choi = choi_matrix(channel)
    mu = float(hermitian_eigvals(pt_array(choi.mat, 2, 2, "B"))[0])
    return EBWitness(mu >= -tol.TOL_PSD, mu)

"""Dense complex linear algebra for small bipartite systems.

Index convention: a bipartite basis vector |i>_A |j>_B sits at position
``i * dim_b + j``. Every routine below (partial transpose, partial trace,
local operators) relies on this ordering.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass, field
from typing import NamedTuple

import numpy as np

from . import tolerances as tol
from .exceptions import (
    DimensionMismatch,
    InvalidState,
    NotConverged,
    NotHermitian,
    NotUnitaryBasis,
    UnsupportedDimension,
)

__all__ = [
    "DensityMatrix",
    "EigenResult",
    "PureState",
    "as_matrix",
    "bell_basis",
    "local_bell_basis",
    "change_basis",
    "hermitian_eigen",
    "hermitian_eigvals",
    "kron",
    "partial_trace",
    "partial_transpose",
]


def as_matrix(m, name="matrix"):
    """Coerce ``m`` to a finite 2-D complex128 array."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidState(f"{name} has non-finite entries")
    return arr


def _frozen(arr):
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.flags.writeable = False
    return arr


def _check_side(side):
    s = str(side).upper()
    if s not in ("A", "B"):
        raise ValueError(f"subsystem must be 'A' or 'B', got {side!r}")
    return s


# --------------------------------------------------------------------------
# states
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Bipartite density matrix on C^dim_a (x) C^dim_b.

    The constructor validates hermiticity (``TOL_HERM``), unit trace
    (``TOL_TRACE``) and positivity (minimum eigenvalue >= ``-TOL_PSD``).
    Pass ``check=False`` only for matrices produced by trusted internal
    routines.
    """

    dim_a: int
    dim_b: int
    mat: np.ndarray = field(repr=False)
    check: InitVar[bool] = True

    def __post_init__(self, check):
        mat = as_matrix(self.mat, "density matrix")
        d = self.dim_a * self.dim_b
        if self.dim_a < 1 or self.dim_b < 1:
            raise DimensionMismatch("local dimensions must be positive")
        if mat.shape != (d, d):
            raise DimensionMismatch(
                f"matrix shape {mat.shape} does not match dims ({self.dim_a}, {self.dim_b})"
            )
        object.__setattr__(self, "mat", _frozen(mat))
        if check:
            self.validate()

    def validate(self):
        m = self.mat
        herm_err = float(np.max(np.abs(m - m.conj().T)))
        if herm_err > tol.TOL_HERM:
            raise InvalidState(
                f"hermiticity violated: max |m_ij - conj(m_ji)| = {herm_err:.3e} > {tol.TOL_HERM:g}"
            )
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > tol.TOL_TRACE:
            raise InvalidState(f"trace violated: |tr - 1| = {abs(tr - 1.0):.3e} > {tol.TOL_TRACE:g}")
        lmin = float(hermitian_eigvals(m)[0])
        if lmin < -tol.TOL_PSD:
            raise InvalidState(f"positivity violated: min eigenvalue {lmin:.3e} < -{tol.TOL_PSD:g}")

    @property
    def dims(self):
        return (self.dim_a, self.dim_b)

    @property
    def dim(self):
        return self.dim_a * self.dim_b

    def with_matrix(self, mat, check=True):
        return DensityMatrix(self.dim_a, self.dim_b, mat, check=check)

    def allclose(self, other, atol=tol.TOL_STATE_MATCH):
        if isinstance(other, DensityMatrix):
            if other.dims != self.dims:
                return False
            other = other.mat
        return bool(np.max(np.abs(self.mat - np.asarray(other))) <= atol)

    def spectrum(self):
        return hermitian_eigvals(self.mat)

    @classmethod
    def from_pure(cls, psi):
        if not isinstance(psi, PureState):
            raise TypeError("expected a PureState")
        v = psi.amplitudes
        return cls(psi.dim_a, psi.dim_b, np.outer(v, v.conj()))

    @classmethod
    def product(cls, rho_a, rho_b):
        rho_a = as_matrix(rho_a, "rho_a")
        rho_b = as_matrix(rho_b, "rho_b")
        return cls(rho_a.shape[0], rho_b.shape[0], kron(rho_a, rho_b))

    @classmethod
    def maximally_mixed(cls, dim_a, dim_b):
        d = dim_a * dim_b
        return cls(dim_a, dim_b, np.eye(d) / d)


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized bipartite pure state, amplitudes in the product basis."""

    dim_a: int
    dim_b: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=np.complex128).ravel()
        if v.size != self.dim_a * self.dim_b:
            raise DimensionMismatch(
                f"{v.size} amplitudes for dims ({self.dim_a}, {self.dim_b})"
            )
        if not np.all(np.isfinite(v)):
            raise InvalidState("amplitudes have non-finite entries")
        norm2 = float(np.vdot(v, v).real)
        if abs(norm2 - 1.0) > tol.TOL_NORM:
            raise InvalidState(f"squared norm {norm2!r} differs from 1 by more than {tol.TOL_NORM:g}")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "amplitudes", v)

    @classmethod
    def from_terms(cls, dim_a, dim_b, terms):
        """Build from ``{(i, j): amplitude}``; no renormalization."""
        v = np.zeros(dim_a * dim_b, dtype=np.complex128)
        for (i, j), amp in terms.items():
            v[i * dim_b + j] += amp
        return cls(dim_a, dim_b, v)

    def density_matrix(self):
        return DensityMatrix.from_pure(self)

    def coefficient_matrix(self):
        return self.amplitudes.reshape(self.dim_a, self.dim_b)

    def schmidt_coefficients(self):
        """Schmidt coefficients in decreasing order (length min(dim_a, dim_b))."""
        reduced = partial_trace(self.density_matrix(), keep="A")
        w = np.clip(hermitian_eigvals(reduced), 0.0, None)[::-1]
        return np.sqrt(w[: min(self.dim_a, self.dim_b)])


# --------------------------------------------------------------------------
# eigensolver
# --------------------------------------------------------------------------


class EigenResult(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _jacobi(a, want_vectors):
    """Cyclic complex Jacobi on a stack of Hermitian matrices, shape (B, n, n)."""
    a = np.array(a, dtype=np.complex128, copy=True)
    nb, n, _ = a.shape
    v = np.broadcast_to(np.eye(n, dtype=np.complex128), a.shape).copy() if want_vectors else None
    if n == 1:
        return a[:, 0, 0].real.reshape(nb, 1), v

    offmask = ~np.eye(n, dtype=bool)
    thresh = tol.JACOBI_OFF_TOL * np.maximum(1.0, np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2))))
    idx = np.arange(nb)
    for _ in range(tol.JACOBI_MAX_SWEEPS):
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        pending = off > thresh
        if not pending.any():
            break
        # converged members of the batch are left alone
        if not pending.all():
            sub = idx[pending]
            a_s = a[sub]
            v_s = v[sub] if want_vectors else None
        else:
            sub, a_s, v_s = None, a, v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a_s[:, p, q]
                r = np.abs(apq)
                active = r > 0.0
                rs = np.where(active, r, 1.0)
                phase = np.where(active, apq / rs, 1.0)
                theta = (a_s[:, q, q].real - a_s[:, p, p].real) / (2.0 * rs)
                sgn = np.where(theta >= 0.0, 1.0, -1.0)
                t = np.where(active, sgn / (np.abs(theta) + np.sqrt(theta * theta + 1.0)), 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ph = phase.conj()
                jpp, jpq = c, s
                jqp, jqq = -s * ph, c * ph
                colp = a_s[:, :, p].copy()
                colq = a_s[:, :, q]
                a_s[:, :, p] = colp * jpp[:, None] + colq * jqp[:, None]
                a_s[:, :, q] = colp * jpq[:, None] + colq * jqq[:, None]
                rowp = a_s[:, p, :].copy()
                rowq = a_s[:, q, :]
                a_s[:, p, :] = rowp * jpp[:, None] + rowq * np.conj(jqp)[:, None]
                a_s[:, q, :] = rowp * jpq[:, None] + rowq * np.conj(jqq)[:, None]
                a_s[:, p, q] = 0.0
                a_s[:, q, p] = 0.0
                a_s[:, p, p] = a_s[:, p, p].real
                a_s[:, q, q] = a_s[:, q, q].real
                if want_vectors:
                    vp = v_s[:, :, p].copy()
                    vq = v_s[:, :, q]
                    v_s[:, :, p] = vp * jpp[:, None] + vq * jqp[:, None]
                    v_s[:, :, q] = vp * jpq[:, None] + vq * jqq[:, None]
        if sub is not None:
            a[sub] = a_s
            if want_vectors:
                v[sub] = v_s
    else:
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        if np.any(off > thresh):
            raise NotConverged(
                f"Jacobi iteration did not converge in {tol.JACOBI_MAX_SWEEPS} sweeps "
                f"(max off-diagonal norm {off.max():.3e})"
            )
    return np.real(np.diagonal(a, axis1=1, axis2=2)).copy(), v


def _prepare_hermitian(m):
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim < 2 or arr.shape[-1] != arr.shape[-2]:
        raise DimensionMismatch(f"expected square matrices, got shape {arr.shape}")
    n = arr.shape[-1]
    if n > tol.MAX_DIM:
        raise UnsupportedDimension(f"dimension {n} exceeds the supported maximum {tol.MAX_DIM}")
    if not np.all(np.isfinite(arr)):
        raise InvalidState("matrix has non-finite entries")
    ah = np.swapaxes(arr, -1, -2).conj()
    if arr.size:
        err = float(np.max(np.abs(arr - ah)))
        if err > tol.TOL_HERM_INPUT:
            raise NotHermitian(f"matrix is not Hermitian: max asymmetry {err:.3e}")
    return 0.5 * (arr + ah)


def hermitian_eigen(m):
    """Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Accepts a single ``(n, n)`` matrix or a stack ``(..., n, n)``; the stack is
    diagonalized in one vectorized pass.

    Returns
    -------
    EigenResult
        Eigenvalues ascending; eigenvector ``k`` is column ``k``.

    Raises
    ------
    NotHermitian
        If ``max |m - m^H| > TOL_HERM_INPUT``.
    NotConverged
        If the sweep cap is hit.
    """
    arr = _prepare_hermitian(m)
    lead, n = arr.shape[:-2], arr.shape[-1]
    w, v = _jacobi(arr.reshape(-1, n, n), want_vectors=True)
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return EigenResult(w.reshape(*lead, n), v.reshape(*lead, n, n))


def hermitian_eigvals(m):
    """Eigenvalues only (ascending); same solver, no eigenvector accumulation."""
    arr = _prepare_hermitian(m)
    lead, n = arr.shape[:-2], arr.shape[-1]
    w, _ = _jacobi(arr.reshape(-1, n, n), want_vectors=False)
    return np.sort(w, axis=1).reshape(*lead, n)


# --------------------------------------------------------------------------
# products, partial operations, basis changes
# --------------------------------------------------------------------------


def kron(a, b):
    """Kronecker product ``a (x) b``."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    ra, ca = a.shape
    rb, cb = b.shape
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(ra * rb, ca * cb)


def pt_array(mats, dim_a, dim_b, subsystem="B"):
    """Partial transpose of raw matrices, shape (..., d, d) with d = dim_a*dim_b."""
    mats = np.asarray(mats)
    lead = mats.shape[:-2]
    t = mats.reshape(*lead, dim_a, dim_b, dim_a, dim_b)
    k = len(lead)
    axes = list(range(k + 4))
    if subsystem == "A":
        axes[k + 0], axes[k + 2] = k + 2, k + 0
    else:
        axes[k + 1], axes[k + 3] = k + 3, k + 1
    return t.transpose(axes).reshape(*lead, dim_a * dim_b, dim_a * dim_b)


def partial_transpose(rho, subsystem="B"):
    """Transpose the indices of one subsystem of ``rho``.

    The result is a plain matrix; it need not be positive.
    """
    side = _check_side(subsystem)
    return pt_array(rho.mat, rho.dim_a, rho.dim_b, side).copy()


def partial_trace(rho, keep="A"):
    """Reduced state of subsystem ``keep``."""
    side = _check_side(keep)
    t = rho.mat.reshape(rho.dim_a, rho.dim_b, rho.dim_a, rho.dim_b)
    if side == "A":
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijil->jl", t)


def change_basis(m, basis):
    """Return ``basis^H @ m @ basis``; the columns of ``basis`` must be orthonormal."""
    m = as_matrix(m, "m")
    basis = as_matrix(basis, "basis")
    if basis.shape[0] != m.shape[1] or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"basis shape {basis.shape} incompatible with matrix {m.shape}")
    gram = basis.conj().T @ basis
    err = float(np.max(np.abs(gram - np.eye(basis.shape[1]))))
    if err > tol.TOL_BASIS:
        raise NotUnitaryBasis(f"basis columns are not orthonormal (max Gram error {err:.3e})")
    return basis.conj().T @ m @ basis


BELL_LABELS = ("phi+", "phi-", "psi+", "psi-")


def bell_basis():
    """Two-qubit Bell basis as columns, ordered Phi+, Phi-, Psi+, Psi-."""
    s = 1.0 / np.sqrt(2.0)
    return np.array(
        [
            [s, s, 0, 0],
            [0, 0, s, s],
            [0, 0, s, -s],
            [s, -s, 0, 0],
        ],
        dtype=np.complex128,
    )


def local_bell_basis(u_a=None, u_b=None):
    """Bell basis rotated by local unitaries: columns (U_a (x) U_b)|B_x>.

    Any such basis is maximally entangled and orthonormal; quantities that
    are invariant under local unitaries may be evaluated in any of them.
    """
    u_a = np.eye(2) if u_a is None else as_matrix(u_a, "u_a")
    u_b = np.eye(2) if u_b is None else as_matrix(u_b, "u_b")
    return kron(u_a, u_b) @ bell_basis()

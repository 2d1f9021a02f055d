"""Entanglement quantities for bipartite states.

Logarithms are base 2 throughout, so a maximally entangled two-qubit state
carries one ebit. Distillable entanglement and entanglement cost are not
computed here; only the bounds ``g <= E_D`` and ``E_C <= E_f`` are.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from . import tolerances as tol
from .core import DensityMatrix, bell_basis, change_basis, hermitian_eigen, hermitian_eigvals, pt_array
from .exceptions import DimensionMismatch, ParameterOutOfRange, UnsupportedDimension

__all__ = [
    "MeasureReport",
    "PPTVerdict",
    "ProductTerm",
    "SeparabilityVerdict",
    "bell_diagonal",
    "binary_entropy",
    "concurrence",
    "concurrence_to_eof",
    "entanglement_of_formation",
    "g_lower_bound",
    "measure_report",
    "min_pt_eigenvalue",
    "min_pt_eigenvalues",
    "negativity",
    "ppt_separability",
    "diagonal_product_decomposition",
    "verify_product_decomposition",
]


class PPTVerdict(str, enum.Enum):
    PPT = "PPT"
    NPT = "NPT"


class SeparabilityVerdict(str, enum.Enum):
    SEPARABLE = "Separable"
    ENTANGLED = "Entangled"
    UNDECIDED = "Undecided"


# --------------------------------------------------------------------------
# partial-transpose quantities
# --------------------------------------------------------------------------


def min_pt_eigenvalue(rho):
    """Smallest eigenvalue of the partial transpose (on B; the spectrum is side-independent)."""
    return float(hermitian_eigvals(pt_array(rho.mat, rho.dim_a, rho.dim_b, "B"))[0])


def min_pt_eigenvalues(mats, dim_a, dim_b, chunk=8192):
    """Batched ``mu_min`` for raw matrices of shape (B, d, d)."""
    mats = np.asarray(mats)
    out = np.empty(mats.shape[0])
    for start in range(0, mats.shape[0], chunk):
        block = pt_array(mats[start : start + chunk], dim_a, dim_b, "B")
        out[start : start + chunk] = hermitian_eigvals(block)[:, 0]
    return out


def negativity(rho):
    """Return ``(N, mu_min)`` with ``N = max(0, -2 mu_min)``."""
    mu = min_pt_eigenvalue(rho)
    return max(0.0, -2.0 * mu), mu


# --------------------------------------------------------------------------
# separability
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductTerm:
    """One term ``weight * |a><a| (x) |b><b|`` of a separable decomposition."""

    weight: float
    a: np.ndarray
    b: np.ndarray


def verify_product_decomposition(rho, terms: Sequence[ProductTerm], atol=tol.TOL_STATE_MATCH):
    """Check that ``terms`` is a valid separable decomposition of ``rho``.

    Weights must be non-negative and sum to one, local vectors must be
    normalized, and the reconstruction must match ``rho`` entry-wise.
    Returns the max-norm reconstruction error, or ``inf`` if a term is
    malformed.
    """
    if not terms:
        return math.inf
    total = np.zeros_like(rho.mat)
    wsum = 0.0
    for term in terms:
        a = np.asarray(term.a, dtype=np.complex128).ravel()
        b = np.asarray(term.b, dtype=np.complex128).ravel()
        if term.weight < 0 or a.size != rho.dim_a or b.size != rho.dim_b:
            return math.inf
        if abs(np.vdot(a, a).real - 1) > atol or abs(np.vdot(b, b).real - 1) > atol:
            return math.inf
        v = np.kron(a, b)
        total += term.weight * np.outer(v, v.conj())
        wsum += term.weight
    if abs(wsum - 1.0) > atol:
        return math.inf
    return float(np.max(np.abs(total - rho.mat)))


def diagonal_product_decomposition(rho, atol=tol.TOL_STATE_MATCH):
    """Product-basis decomposition of a state that is diagonal in that basis.

    Returns None when an off-diagonal entry exceeds ``atol``.
    """
    m = rho.mat
    if np.max(np.abs(m - np.diag(np.diag(m)))) > atol:
        return None
    terms = []
    for k, p in enumerate(np.diag(m).real):
        if p > atol:
            i, j = divmod(k, rho.dim_b)
            terms.append(ProductTerm(float(p), np.eye(rho.dim_a)[i], np.eye(rho.dim_b)[j]))
    return terms


def ppt_separability(rho, decomposition=None, threshold=tol.TOL_PSD):
    """Three-valued separability verdict.

    PPT is decided by ``mu_min >= -threshold``. For ``dim_a * dim_b <= 6``
    PPT and separability coincide. Above that, NPT still means entangled but
    PPT alone leaves the question open, unless ``decomposition`` is a
    verified product decomposition.

    Returns
    -------
    (SeparabilityVerdict, PPTVerdict, mu_min)
    """
    mu = min_pt_eigenvalue(rho)
    ppt = PPTVerdict.PPT if mu >= -threshold else PPTVerdict.NPT
    if ppt is PPTVerdict.NPT:
        return SeparabilityVerdict.ENTANGLED, ppt, mu
    if decomposition is not None and verify_product_decomposition(rho, decomposition) <= tol.TOL_STATE_MATCH:
        return SeparabilityVerdict.SEPARABLE, ppt, mu
    if rho.dim_a * rho.dim_b <= 6:
        return SeparabilityVerdict.SEPARABLE, ppt, mu
    return SeparabilityVerdict.UNDECIDED, ppt, mu


# --------------------------------------------------------------------------
# two-qubit measures
# --------------------------------------------------------------------------


def _require_two_qubits(rho, what):
    if rho.dims != (2, 2):
        raise UnsupportedDimension(f"{what} is defined for two-qubit states only, got dims {rho.dims}")


_SYSY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


def concurrence(rho):
    """Two-qubit concurrence ``max(0, s1 - s2 - s3 - s4)``.

    The ``s_i`` are square roots of the spectrum of ``R = sqrt(rho) rho~ sqrt(rho)``
    with ``rho~ = (Y (x) Y) conj(rho) (Y (x) Y)``. ``R`` is Hermitian and shares
    its spectrum with ``rho rho~``, so both steps stay within the Hermitian
    eigensolver.
    """
    _require_two_qubits(rho, "concurrence")
    w, v = hermitian_eigen(rho.mat)
    sqrt_rho = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    flipped = _SYSY @ rho.mat.conj() @ _SYSY
    r = sqrt_rho @ flipped @ sqrt_rho
    r = 0.5 * (r + r.conj().T)
    s = np.sqrt(np.clip(hermitian_eigvals(r), 0.0, None))[::-1]
    return float(min(1.0, max(0.0, s[0] - s[1] - s[2] - s[3])))


def binary_entropy(p):
    """H(p) = -p log2 p - (1-p) log2(1-p), with 0 log 0 = 0."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ParameterOutOfRange(f"p={p} outside [0, 1]")
    return _xlog2x_neg(p) + _xlog2x_neg(1.0 - p)


def _xlog2x_neg(x):
    return 0.0 if x <= 0.0 else -x * math.log2(x)


def concurrence_to_eof(c):
    c = min(1.0, max(0.0, float(c)))
    return binary_entropy(0.5 * (1.0 + math.sqrt(1.0 - c * c)))


def entanglement_of_formation(rho):
    """E_f of a two-qubit state via its concurrence."""
    return concurrence_to_eof(concurrence(rho))


def bell_diagonal(rho, basis=None):
    """Diagonal of ``rho`` in a Bell basis (default: Phi+, Phi-, Psi+, Psi-)."""
    _require_two_qubits(rho, "Bell-basis diagonal")
    return change_basis(rho.mat, bell_basis() if basis is None else basis).diagonal().real.copy()


def g_lower_bound(rho, basis=None):
    """Hashing-type lower bound ``g = 1 + sum_x p_x log2 p_x`` on distillable entanglement.

    ``p_x`` are the diagonal entries of ``rho`` in ``basis``, which must be a
    Bell basis, possibly rotated by local unitaries (see
    ``core.local_bell_basis``); each choice gives a valid bound. The value is
    not clamped at 0; the usable bound is ``max(0, g)``.
    """
    _require_two_qubits(rho, "g bound")
    diag = bell_diagonal(rho, basis)
    return 1.0 - sum(_xlog2x_neg(p) for p in diag)


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasureReport:
    negativity: float
    min_pt_eigenvalue: float
    ppt: PPTVerdict
    separability: SeparabilityVerdict
    concurrence: Optional[float] = None
    entanglement_of_formation: Optional[float] = None
    g_bound: Optional[float] = None

    def to_dict(self):
        d = asdict(self)
        d["ppt"] = self.ppt.value
        d["separability"] = self.separability.value
        return d


def measure_report(rho, decomposition=None):
    if not isinstance(rho, DensityMatrix):
        raise DimensionMismatch("measure_report expects a DensityMatrix")
    sep, ppt, mu = ppt_separability(rho, decomposition)
    c = ef = g = None
    if rho.dims == (2, 2):
        c = concurrence(rho)
        ef = concurrence_to_eof(c)
        g = g_lower_bound(rho)
    return MeasureReport(max(0.0, -2.0 * mu), mu, ppt, sep, c, ef, g)

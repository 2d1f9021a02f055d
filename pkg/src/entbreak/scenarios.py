"""Worked two-qubit and qutrit constructions, critical constants, ordering certificates and searches.

The two-qubit example lives in a one-parameter family of inputs

    rho3_in(t) = t |Phi+><Phi+| + (1 - t) |00><00|,   rho1_in = rho3_in(2/3),

together with rho2_in, the image of rho1_in under a pi/2 rotation about Y on
qubit A. Under phase damping on A, rho2_in loses its entanglement at
lambda_1 = -16 + 12 sqrt(2) while every rho3_in(t > 0) stays entangled up to
lambda = 1.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import tolerances as tol
from .channels import (
    KrausChannel,
    apply_kraus_branch,
    apply_local,
    apply_local_batch,
    check_unitary,
    is_entanglement_breaking,
    local_unitary,
    phase_damping,
    phase_damping_family,
    qutrit_dephase,
    qutrit_filter,
    random_qubit_channel,
    replace_with_00,
)
from .core import DensityMatrix, PureState, _check_side, kron, local_bell_basis
from .exceptions import (
    CertificateFailure,
    DimensionMismatch,
    NoSignChange,
    ParameterOutOfRange,
    UnknownStateRef,
)
from .measures import (
    SeparabilityVerdict,
    diagonal_product_decomposition,
    entanglement_of_formation,
    g_lower_bound,
    min_pt_eigenvalue,
    min_pt_eigenvalues,
    negativity,
    ppt_separability,
    verify_product_decomposition,
)

LAMBDA_1 = -16.0 + 12.0 * math.sqrt(2.0)
T_INPUT_MAX = 2.0 / 3.0

# --------------------------------------------------------------------------
# states and unitaries
# --------------------------------------------------------------------------


def _ket(*amps):
    return np.asarray(amps, dtype=np.complex128)


def phi_plus():
    return DensityMatrix.from_pure(PureState(2, 2, _ket(1, 0, 0, 1) / math.sqrt(2.0)))


def ket00():
    m = np.zeros((4, 4))
    m[0, 0] = 1.0
    return DensityMatrix(2, 2, m)


def rho3_in(t):
    """t |Phi+><Phi+| + (1 - t) |00><00| for 0 <= t <= 1."""
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ParameterOutOfRange(f"t={t} outside [0, 1]")
    return DensityMatrix(2, 2, t * phi_plus().mat + (1.0 - t) * ket00().mat)


def rho1_in():
    return DensityMatrix(2, 2, (2.0 / 3.0) * phi_plus().mat + (1.0 / 3.0) * ket00().mat)


def ry(theta):
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz(phi):
    return np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])


def euler_unitary(theta, phi, psi):
    """U = Rz(phi) Ry(theta) Rz(psi)."""
    return rz(phi) @ ry(theta) @ rz(psi)


def y_rotation():
    """Rotation by pi/2 about Y: (1/sqrt 2) [[1, -1], [1, 1]]."""
    return ry(math.pi / 2.0)


def rho2_in():
    return local_unitary(rho1_in(), y_rotation(), "A")


def qutrit_psi1():
    return PureState.from_terms(3, 3, {(1, 1): 1 / math.sqrt(2.0), (2, 2): 1 / math.sqrt(2.0)})


def qutrit_psi2(q):
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ParameterOutOfRange(f"q={q} outside (0, 1)")
    return PureState.from_terms(3, 3, {(0, 0): math.sqrt(q), (1, 1): math.sqrt(1.0 - q)})


def _parse_param(ref, name):
    base, _, arg = ref.partition(":")
    key, _, val = arg.partition("=")
    if key != name or not val:
        raise UnknownStateRef(f"{base} needs a parameter, e.g. '{base}:{name}=0.25'")
    try:
        return float(val)
    except ValueError:
        raise UnknownStateRef(f"cannot parse {name} in {ref!r}") from None


BUILTIN_STATES = (
    "rho1_in",
    "rho2_in",
    "rho3_in:t=<v>",
    "phi_plus",
    "ket00",
    "maximally_mixed",
    "qutrit_psi1",
    "qutrit_psi2:q=<v>",
)


def builtin_state(ref):
    """Resolve a built-in state reference to a DensityMatrix."""
    base = ref.split(":", 1)[0]
    if base == "rho1_in":
        return rho1_in()
    if base == "rho2_in":
        return rho2_in()
    if base == "rho3_in":
        return rho3_in(_parse_param(ref, "t"))
    if base == "phi_plus":
        return phi_plus()
    if base == "ket00":
        return ket00()
    if base == "maximally_mixed":
        return DensityMatrix.maximally_mixed(2, 2)
    if base == "qutrit_psi1":
        return qutrit_psi1().density_matrix()
    if base == "qutrit_psi2":
        return qutrit_psi2(_parse_param(ref, "q")).density_matrix()
    raise UnknownStateRef(f"unknown state reference {ref!r}; built-ins: {', '.join(BUILTIN_STATES)}")


# --------------------------------------------------------------------------
# closed forms for the two-qubit example
# --------------------------------------------------------------------------


def n_rho1_out_closed(lam):
    return (2.0 / 3.0) * np.sqrt(1.0 - np.asarray(lam, dtype=float))


def n_rho2_out_closed(lam):
    lam = np.asarray(lam, dtype=float)
    s = np.sqrt(1.0 - lam)
    return np.maximum(0.0, (-3.0 + 3.0 * s + np.sqrt(10.0 + 6.0 * s - 5.0 * lam)) / 6.0)


def n_rho3_out_closed(lam, t):
    return t * np.sqrt(1.0 - np.asarray(lam, dtype=float))


def negativity_curve(rho, family, values, side="A"):
    """Negativity of ``family(v)`` applied to ``rho`` for each ``v``, via partial transpose."""
    values = np.asarray(values, dtype=float).ravel()
    mats = np.broadcast_to(rho.mat, (values.size,) + rho.mat.shape)
    return np.maximum(0.0, -2.0 * _mu_batch(family, mats, values, rho.dims, _check_side(side)))


# --------------------------------------------------------------------------
# critical noise: lambda_sep
# --------------------------------------------------------------------------


@dataclass
class RootResult:
    value: float
    bracket: tuple
    iterations: int
    residual: float
    mu_lo: float
    mu_hi: float

    def to_dict(self):
        d = asdict(self)
        d["bracket"] = list(self.bracket)
        return d


def _mu_batch(family, mats, values, dims, side):
    ops = family.batch_ops(values)
    out = apply_local_batch(ops, mats, dims[0], dims[1], side)
    d_out = ops.shape[2]
    return min_pt_eigenvalues(out, *((d_out, dims[1]) if side == "A" else (dims[0], d_out)))


def lambda_sep_batch(family, mats, dims, side="A", scan_points=33,
                     threshold=tol.TOL_PSD, tol_root=tol.TOL_ROOT):
    """Vectorized critical-noise search over a stack of input matrices.

    For each input, the first point of a ``scan_points`` grid on the family's
    domain at which the output is PPT (``mu_min >= -threshold``) brackets the
    smallest root together with its predecessor; bisection on the sign of
    ``mu_min`` then narrows the bracket to ``tol_root``. The tolerance band
    only decides the PPT verdicts of the scan, so exact zeros such as
    product states at the domain start are not misread as NPT.

    Returns a dict of arrays: ``value`` (NaN where there is no sign change),
    ``lo``, ``hi``, ``mu_lo``, ``mu_hi``, ``iterations``, ``status``
    (0 ok, 1 separable at the domain start, 2 never separable).
    """
    mats = np.asarray(mats, dtype=np.complex128)
    nb = mats.shape[0]
    grid = np.linspace(family.domain[0], family.domain[1], scan_points)
    rep = np.repeat(mats, scan_points, axis=0)
    mus = _mu_batch(family, rep, np.tile(grid, nb), dims, side).reshape(nb, scan_points)
    ppt = mus >= -threshold
    status = np.zeros(nb, dtype=int)
    status[ppt[:, 0]] = 1
    status[~ppt.any(axis=1)] = 2
    ok = status == 0
    first = np.argmax(ppt, axis=1)
    first = np.where(ok, first, 1)
    lo = grid[first - 1].copy()
    hi = grid[first].copy()
    mu_lo = mus[np.arange(nb), first - 1].copy()
    mu_hi = mus[np.arange(nb), first].copy()
    iterations = 0
    idx = np.flatnonzero(ok)
    while idx.size and iterations < tol.BISECTION_MAX_ITER:
        width = hi[idx] - lo[idx]
        idx = idx[width > tol_root]
        if not idx.size:
            break
        mid = 0.5 * (lo[idx] + hi[idx])
        mu = _mu_batch(family, mats[idx], mid, dims, side)
        npt = mu < 0.0
        lo[idx[npt]] = mid[npt]
        mu_lo[idx[npt]] = mu[npt]
        hi[idx[~npt]] = mid[~npt]
        mu_hi[idx[~npt]] = mu[~npt]
        iterations += 1
    value = np.where(ok, hi, np.nan)
    return {
        "value": value,
        "lo": lo,
        "hi": hi,
        "mu_lo": mu_lo,
        "mu_hi": mu_hi,
        "iterations": iterations,
        "status": status,
        "endpoints": (mus[:, 0], mus[:, -1]),
    }


def solve_lambda_sep(family, rho, side="A", scan_points=33,
                     threshold=tol.TOL_PSD, tol_root=tol.TOL_ROOT):
    """Smallest noise parameter at which ``family(lambda)`` on ``side`` makes ``rho`` PPT.

    Bisection runs on the minimum partial-transpose eigenvalue, not on the
    clamped negativity, which is flat past the root.

    Raises
    ------
    NoSignChange
        If the output is already PPT at the start of the domain, or stays NPT
        over the whole domain.
    """
    if rho.dims != (2, 2):
        raise DimensionMismatch(f"lambda_sep is defined for two-qubit states, got {rho.dims}")
    side = _check_side(side)
    res = lambda_sep_batch(family, rho.mat[None], rho.dims, side, scan_points, threshold, tol_root)
    status = int(res["status"][0])
    if status:
        mu0, mu1 = float(res["endpoints"][0][0]), float(res["endpoints"][1][0])
        lo, hi = family.domain

        def verdict(mu):
            return "PPT" if mu >= -threshold else "NPT"

        endpoints = {lo: (mu0, verdict(mu0)), hi: (mu1, verdict(mu1))}
        why = "output is PPT at the start of the domain" if status == 1 else "output never becomes PPT"
        raise NoSignChange(f"no sign change of mu_min on [{lo}, {hi}]: {why}", endpoints)
    return RootResult(
        value=float(res["value"][0]),
        bracket=(float(res["lo"][0]), float(res["hi"][0])),
        iterations=int(res["iterations"]),
        residual=float(res["mu_hi"][0]),
        mu_lo=float(res["mu_lo"][0]),
        mu_hi=float(res["mu_hi"][0]),
    )


# --------------------------------------------------------------------------
# strict-ordering threshold in t
# --------------------------------------------------------------------------


def rho2_bell_basis():
    """Bell basis rotated by the Y rotation on A; rho2_in is Bell-diagonal-dominant in it."""
    return local_bell_basis(y_rotation())


def g_rho2_in():
    return g_lower_bound(rho2_in(), rho2_bell_basis())


def solve_t_threshold(tol_root=tol.TOL_ROOT):
    """Solve ``E_f(rho3_in(t)) = g(rho2_in)`` for t in (0, 1) by bisection.

    Below the root the formation entanglement of ``rho3_in(t)`` is strictly
    smaller than the distillability bound of ``rho2_in``.
    """
    target = g_rho2_in()

    def f(t):
        return entanglement_of_formation(rho3_in(t)) - target

    lo, hi = 0.0, 1.0
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo < 0.0 < f_hi):
        raise NoSignChange("E_f(rho3_in(t)) - g(rho2_in) does not change sign on [0, 1]",
                           {0.0: (f_lo, ""), 1.0: (f_hi, "")})
    it = 0
    while hi - lo > tol_root and it < tol.BISECTION_MAX_ITER:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm < 0.0:
            lo, f_lo = mid, fm
        else:
            hi, f_hi = mid, fm
        it += 1
    value = 0.5 * (lo + hi)
    return RootResult(value, (lo, hi), it, f(value), f_lo, f_hi)


# --------------------------------------------------------------------------
# LOCC chains
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalUnitaryStep:
    u: np.ndarray
    side: str = "A"

    def apply(self, rho):
        return local_unitary(rho, self.u, self.side)

    def describe(self):
        return {"type": "local_unitary", "side": self.side, "u": _matrix_to_list(self.u)}


@dataclass(frozen=True)
class ReplaceWith00Step:
    epsilon: float

    def apply(self, rho):
        return replace_with_00(rho, self.epsilon)

    def describe(self):
        return {"type": "replace_with_00", "epsilon": self.epsilon}


@dataclass(frozen=True)
class LocalFilterStep:
    """Local filter on ``side`` whose outcome is broadcast, then a product
    unitary correction ``corrections[k] = (U_A, U_B)`` per outcome ``k``."""

    filter: KrausChannel
    corrections: tuple
    side: str = "A"

    def apply(self, rho):
        out = np.zeros_like(rho.mat)
        for k, op in enumerate(self.filter.ops):
            p, post = apply_kraus_branch(op, rho, self.side)
            if post is None:
                continue
            ua, ub = self.corrections[k]
            big = kron(check_unitary(ua), check_unitary(ub))
            out += p * (big @ post.mat @ big.conj().T)
        d_out = self.filter.dim_out
        dims = (d_out, rho.dim_b) if self.side == "A" else (rho.dim_a, d_out)
        return DensityMatrix(*dims, out)

    def describe(self):
        return {
            "type": "local_filter",
            "side": self.side,
            "kraus": [_matrix_to_list(k) for k in self.filter.ops],
            "corrections": [[_matrix_to_list(a), _matrix_to_list(b)] for a, b in self.corrections],
        }


ALLOWED_STEPS = (LocalUnitaryStep, ReplaceWith00Step, LocalFilterStep)


def _matrix_to_list(m):
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


@dataclass
class ChainEvidence:
    passed: bool
    steps: list
    residual: float
    reason: str = ""

    def to_dict(self):
        return asdict(self)


def verify_chain(chain, omega1, omega2, atol=tol.TOL_STATE_MATCH):
    """Check that ``chain`` maps ``omega1`` to ``omega2`` using only whitelisted LOCC steps."""
    names = []
    rho = omega1
    for step in chain:
        if not isinstance(step, ALLOWED_STEPS):
            return ChainEvidence(False, names, math.inf, f"step {type(step).__name__} is not an allowed LOCC primitive")
        names.append(step.describe()["type"])
        try:
            rho = step.apply(rho)
        except (ValueError, ArithmeticError) as exc:
            return ChainEvidence(False, names, math.inf, f"step {len(names) - 1} ({names[-1]}) invalid: {exc}")
    if rho.dims != omega2.dims:
        return ChainEvidence(False, names, math.inf, f"chain output dims {rho.dims} != target {omega2.dims}")
    residual = float(np.max(np.abs(rho.mat - omega2.mat)))
    if residual > atol:
        return ChainEvidence(False, names, residual, f"chain output differs from target by {residual:.3e}")
    return ChainEvidence(True, names, residual)


# --------------------------------------------------------------------------
# selective entanglement breaking certificates
# --------------------------------------------------------------------------

MEASURE_NOTE = (
    "Ordering holds for every LOCC-monotone measure because the input pair is "
    "linked by an explicit LOCC chain and one output is separable; strictness "
    "is witnessed by the negativity. Measures are not enumerated."
)

SEB_PIECES = ("strict_input_inequality", "locc_chain", "output_separable", "output_entangled")


@dataclass
class OrderingCertificate:
    strict_input: dict
    input_order: ChainEvidence
    output_separable: dict
    output_entangled: dict
    strict_window: Optional[dict] = None
    failed_piece: Optional[str] = None
    failed_pieces: list = field(default_factory=list)
    note: str = MEASURE_NOTE

    @property
    def valid(self):
        return self.failed_piece is None

    def to_dict(self):
        return {
            "kind": "selective_entanglement_breaking",
            "valid": self.valid,
            "failed_piece": self.failed_piece,
            "failed_pieces": list(self.failed_pieces),
            "pieces": {
                "strict_input_inequality": self.strict_input,
                "locc_chain": self.input_order.to_dict(),
                "output_separable": self.output_separable,
                "output_entangled": self.output_entangled,
            },
            "strict_window": self.strict_window,
            "note": self.note,
        }


def certify_selective_breaking(channel, omega1, omega2, chain, side="A",
                               strict_window=None, raise_on_failure=True):
    """Certify that ``channel`` on ``side`` selectively breaks ``omega1`` against ``omega2``.

    Pieces, evaluated in order:

    * ``strict_input_inequality``: N(omega1) > N(omega2);
    * ``locc_chain``: ``chain`` maps omega1 to omega2 with allowed LOCC steps;
    * ``output_separable``: the output of omega1 is certified separable;
    * ``output_entangled``: the output of omega2 has mu_min < 0.

    All pieces are evaluated; the first failing one is named. With
    ``raise_on_failure`` a failure raises ``CertificateFailure`` carrying the
    certificate.
    """
    n1, _ = negativity(omega1)
    n2, _ = negativity(omega2)
    strict = {
        "negativity_omega1": n1,
        "negativity_omega2": n2,
        "passed": bool(n1 - n2 > tol.TOL_PSD),
    }
    evidence = verify_chain(chain, omega1, omega2)
    out1 = apply_local(channel, omega1, side)
    out2 = apply_local(channel, omega2, side)
    sep, ppt, mu1 = ppt_separability(out1, diagonal_product_decomposition(out1))
    out_sep = {"min_pt_eigenvalue": mu1, "ppt": ppt.value, "verdict": sep.value,
               "passed": sep is SeparabilityVerdict.SEPARABLE}
    n_out2, mu2 = negativity(out2)
    out_ent = {"min_pt_eigenvalue": mu2, "negativity": n_out2, "passed": bool(mu2 < -tol.TOL_PSD)}
    status = dict(zip(SEB_PIECES, (strict["passed"], evidence.passed, out_sep["passed"], out_ent["passed"])))
    failed = [name for name in SEB_PIECES if not status[name]]
    cert = OrderingCertificate(strict, evidence, out_sep, out_ent, strict_window,
                               failed[0] if failed else None, failed)
    if failed and raise_on_failure:
        raise CertificateFailure(failed[0], cert)
    return cert


def reference_chain(t):
    """LOCC chain rho2_in -> rho3_in(t): undo the Y rotation, then replace by |00>."""
    epsilon = 1.0 - 1.5 * float(t)
    return [LocalUnitaryStep(y_rotation().conj().T, "A"), ReplaceWith00Step(epsilon)]


def strict_window(t, t_star=None):
    if t_star is None:
        t_star = solve_t_threshold().value
    return {"lower": 0.0, "lower_open": True, "upper": t_star, "upper_open": False,
            "contains_t": bool(0.0 < t <= t_star)}


def reference_instance(t=1.0 / 3.0, lam=LAMBDA_1):
    """(channel, omega1, omega2, chain) of the two-qubit example."""
    return phase_damping(lam), rho2_in(), rho3_in(t), reference_chain(t)


def certify_reference_instance(t=1.0 / 3.0, lam=LAMBDA_1, raise_on_failure=True):
    channel, w1, w2, chain = reference_instance(t, lam)
    return certify_selective_breaking(channel, w1, w2, chain, strict_window=strict_window(t),
                                      raise_on_failure=raise_on_failure)


STRONG_PIECES = ("a_monotone_sequence", "b_outputs_entangled", "c_formation_vanishes", "d_output_separable")


@dataclass
class StrongCertificate:
    pieces: dict
    ts: list
    failed_piece: Optional[str] = None
    failed_pieces: list = field(default_factory=list)
    note: str = MEASURE_NOTE

    @property
    def valid(self):
        return self.failed_piece is None

    def to_dict(self):
        return {
            "kind": "strong_selective_entanglement_breaking",
            "valid": self.valid,
            "failed_piece": self.failed_piece,
            "failed_pieces": list(self.failed_pieces),
            "t_sequence": list(self.ts),
            "pieces": self.pieces,
            "note": self.note,
        }


def geometric_sequence(t0=1.0 / 3.0, count=21):
    """t_j = t0 * 2**-j for j = 0 .. count-1."""
    return [t0 * 2.0**-j for j in range(count)]


def certify_strong_selective_breaking(channel, omega1, ts, undo_unitary=None, side="A",
                                      ef_limit=1e-6, raise_on_failure=True):
    """Certify strong selective breaking against the sequence rho3_in(t_j).

    ``undo_unitary`` maps ``omega1`` back to rho1_in on ``side`` (defaults to
    the inverse Y rotation). Checks (a) each sequence state is reachable from
    its predecessor by the allowed LOCC steps and negativity is
    non-increasing, (b) N(omega1) > N(omega_2) and every output of the
    sequence is NPT, (c) E_f at the last sample is below ``ef_limit``,
    (d) the output of omega1 is separable.
    """
    ts = [float(t) for t in ts]
    if not ts:
        raise ValueError("empty t sequence")
    if any(not 0.0 < t < T_INPUT_MAX for t in ts):
        raise ParameterOutOfRange("sequence values must lie in (0, 2/3)")
    if undo_unitary is None:
        undo_unitary = y_rotation().conj().T
    seq = [rho3_in(t) for t in ts]

    # (a)
    links = [verify_chain([LocalUnitaryStep(undo_unitary, side), ReplaceWith00Step(1.0 - 1.5 * ts[0])],
                          omega1, seq[0])]
    for prev_t, prev, t, cur in zip(ts, seq, ts[1:], seq[1:]):
        if t > prev_t:
            links.append(ChainEvidence(False, [], math.inf, f"t increases from {prev_t} to {t}"))
        else:
            links.append(verify_chain([ReplaceWith00Step(1.0 - t / prev_t)], prev, cur))
    n_in = [negativity(omega1)[0]] + [negativity(s)[0] for s in seq]
    monotone = all(b <= a + tol.TOL_PSD for a, b in zip(n_in, n_in[1:]))
    piece_a = {"links_passed": all(e.passed for e in links), "negativity_monotone": monotone,
               "input_negativities": n_in,
               "failed_links": [i for i, e in enumerate(links) if not e.passed]}
    piece_a["passed"] = piece_a["links_passed"] and monotone

    # (b)
    mu_outs = [negativity(apply_local(channel, s, side))[1] for s in seq]
    piece_b = {"strict_input": bool(n_in[0] - n_in[1] > tol.TOL_PSD),
               "output_min_pt_eigenvalues": mu_outs,
               "all_outputs_entangled": all(mu < -tol.TOL_PSD for mu in mu_outs)}
    piece_b["passed"] = piece_b["strict_input"] and piece_b["all_outputs_entangled"]

    # (c)
    ef_last = entanglement_of_formation(seq[-1])
    piece_c = {"formation_last": ef_last, "limit": ef_limit, "passed": bool(ef_last < ef_limit)}

    # (d)
    out1 = apply_local(channel, omega1, side)
    sep, _, mu1 = ppt_separability(out1, diagonal_product_decomposition(out1))
    piece_d = {"min_pt_eigenvalue": mu1, "verdict": sep.value,
               "passed": sep is SeparabilityVerdict.SEPARABLE}

    pieces = dict(zip(STRONG_PIECES, (piece_a, piece_b, piece_c, piece_d)))
    failed = [k for k in STRONG_PIECES if not pieces[k]["passed"]]
    cert = StrongCertificate(pieces, ts, failed[0] if failed else None, failed)
    if failed and raise_on_failure:
        raise CertificateFailure(failed[0], cert)
    return cert


# --------------------------------------------------------------------------
# qutrit example
# --------------------------------------------------------------------------

# level permutations (as unitaries) taking each filtered branch onto psi2
_QUTRIT_CORRECTIONS = (
    np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]], dtype=np.complex128),  # swap 0 <-> 2
    np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=np.complex128),  # 1 -> 0, 2 -> 1, 0 -> 2
)


@dataclass
class QutritReport:
    q: float
    negativity_out1: float
    out1_separability: str
    out1_decomposition_error: float
    out2_residual: float
    negativity_out2: float
    filter_completeness_error: float
    branches: list
    chain: ChainEvidence

    def to_dict(self):
        return asdict(self)


def qutrit_example(q):
    """Build the two-qutrit example and check every claim about it."""
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ParameterOutOfRange(f"q={q} outside (0, 1)")
    psi1 = qutrit_psi1()
    psi2 = qutrit_psi2(q)
    channel = qutrit_dephase()
    rho_psi1 = psi1.density_matrix()
    rho_psi2 = psi2.density_matrix()

    out1 = apply_local(channel, rho_psi1, "A")
    out2 = apply_local(channel, rho_psi2, "A")
    decomposition = diagonal_product_decomposition(out1)
    sep, _, _ = ppt_separability(out1, decomposition)
    dec_err = verify_product_decomposition(out1, decomposition) if decomposition else math.inf

    filt = qutrit_filter(q)
    target = np.sort(np.array([math.sqrt(q), math.sqrt(1.0 - q)]))[::-1]
    branches = []
    for k, op in enumerate(filt.ops):
        v = kron(op, np.eye(3)) @ psi1.amplitudes
        p = float(np.vdot(v, v).real)
        post = PureState(3, 3, v / math.sqrt(p))
        u = _QUTRIT_CORRECTIONS[k]
        corrected = kron(u, u) @ post.amplitudes
        overlap = abs(np.vdot(psi2.amplitudes, corrected))
        schmidt = post.schmidt_coefficients()[:2]
        branches.append({
            "outcome": k,
            "probability": p,
            "schmidt": [float(x) for x in schmidt],
            "schmidt_error": float(np.max(np.abs(schmidt - target))),
            "overlap_with_psi2": float(overlap),
        })
    chain = verify_chain([LocalFilterStep(filt, tuple((u, u) for u in _QUTRIT_CORRECTIONS), "A")],
                         rho_psi1, rho_psi2)
    return QutritReport(
        q=q,
        negativity_out1=negativity(out1)[0],
        out1_separability=sep.value,
        out1_decomposition_error=dec_err,
        out2_residual=float(np.max(np.abs(out2.mat - rho_psi2.mat))),
        negativity_out2=negativity(out2)[0],
        filter_completeness_error=filt.completeness_error(),
        branches=branches,
        chain=chain,
    )


# --------------------------------------------------------------------------
# pure-state no-go scan
# --------------------------------------------------------------------------


def pure_input(alpha):
    """alpha |00> + beta |11> with beta = sqrt(1 - alpha^2)."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ParameterOutOfRange(f"alpha={alpha} outside (0, 1)")
    beta = math.sqrt(1.0 - alpha * alpha)
    return PureState(2, 2, _ket(alpha, 0, 0, beta)).density_matrix()


def has_full_local_rank(psi, atol=tol.TOL_PSD):
    """True when both reduced states of the pure state ``psi`` have full rank.

    For qudits this is the hypothesis under which the qubit no-go extends:
    a local channel that makes such a state separable is entanglement
    breaking. Only the rank condition is checked here; there is no d > 2
    scan, because the Choi test above decides qubit channels only.
    """
    schmidt = psi.schmidt_coefficients()
    return bool(psi.dim_a == psi.dim_b and np.sum(schmidt**2 > atol) == psi.dim_a)


def check_nogo_instance(channel, alpha):
    """Return (output_separable, entanglement_breaking, mu_out, mu_choi)."""
    out = apply_local(channel, pure_input(alpha), "A")
    mu_out = min_pt_eigenvalue(out)
    separable = mu_out >= -tol.TOL_PSD
    eb = is_entanglement_breaking(channel)
    return separable, eb.entanglement_breaking, mu_out, eb.min_pt_eigenvalue


def _nogo_trial(seed, index, kraus_rank):
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))
    alpha = 0.0
    while not 0.0 < alpha < 1.0:
        alpha = float(rng.uniform(0.0, 1.0))
    channel = random_qubit_channel(rng, kraus_rank)
    sep, eb, mu_out, mu_choi = check_nogo_instance(channel, alpha)
    return channel, alpha, sep, eb, mu_out, mu_choi


def pure_state_nogo_scan(trials, seed=42, kraus_rank=4):
    """Random check that a qubit channel breaking a pure entangled state is entanglement breaking.

    Trial ``i`` draws its channel and ``alpha`` from a generator seeded by
    ``(seed, i)``, so results do not depend on execution order.
    """
    trials = int(trials)
    if trials < 1:
        raise ParameterOutOfRange("trials must be >= 1")
    separable = eb_confirmed = 0
    counterexamples = []
    for i in range(trials):
        channel, alpha, sep, eb, mu_out, mu_choi = _nogo_trial(seed, i, kraus_rank)
        if not sep:
            continue
        separable += 1
        if eb:
            eb_confirmed += 1
        else:
            counterexamples.append({
                "seed": seed, "trial": i, "alpha": alpha,
                "min_pt_eigenvalue_output": mu_out, "min_pt_eigenvalue_choi": mu_choi,
                "kraus": [_matrix_to_list(k) for k in channel.ops],
            })
    return {
        "trials": trials,
        "seed": seed,
        "kraus_rank": kraus_rank,
        "separableOutputs": separable,
        "ebConfirmed": eb_confirmed,
        "counterexamples": counterexamples,
    }


# --------------------------------------------------------------------------
# unitary-orbit search
# --------------------------------------------------------------------------


@dataclass
class SearchRecord:
    seed: int
    theta: float
    phi: float
    psi: float
    lambda_sep_base: float
    lambda_sep: float
    gap: float
    state: DensityMatrix = field(repr=False, compare=False)

    @property
    def unitary_params(self):
        return (self.theta, self.phi, self.psi)

    @property
    def candidate(self):
        return self.gap > 1e-6


def euler_grid(n):
    """theta in {k pi / n}, phi and psi in {2 k pi / n}, k = 0 .. n-1."""
    thetas = np.arange(n) * math.pi / n
    angles = np.arange(n) * 2.0 * math.pi / n
    return thetas, angles, angles


def orbit_search(rho, family=None, grid=16, side="A", scan_points=33, sort_decimals=9):
    """Critical noise of every rotated state ``U rho U^dagger`` on an Euler-angle grid.

    Records are sorted by gap (rounded to ``sort_decimals``) descending, ties
    broken by grid index. Returns an empty list when the unrotated state never
    changes PPT verdict on the family's domain.
    """
    if family is None:
        family = phase_damping_family()
    side = _check_side(side)
    try:
        base = solve_lambda_sep(family, rho, side, scan_points).value
    except NoSignChange:
        return []
    thetas, phis, psis = euler_grid(grid)
    params, mats = [], []
    eye = np.eye(2)
    for i, th in enumerate(thetas):
        for j, ph in enumerate(phis):
            for k, ps in enumerate(psis):
                u = euler_unitary(th, ph, ps)
                big = kron(u, eye) if side == "A" else kron(eye, u)
                m = big @ rho.mat @ big.conj().T
                params.append((i, j, k, th, ph, ps))
                mats.append(0.5 * (m + m.conj().T))
    res = lambda_sep_batch(family, np.stack(mats), rho.dims, side, scan_points)
    records = []
    for n, (i, j, k, th, ph, ps) in enumerate(params):
        if res["status"][n]:
            continue
        lam = float(res["value"][n])
        records.append(((i, j, k), SearchRecord(
            seed=n, theta=float(th), phi=float(ph), psi=float(ps),
            lambda_sep_base=base, lambda_sep=lam, gap=abs(lam - base),
            state=DensityMatrix(2, 2, mats[n], check=False),
        )))
    records.sort(key=lambda r: (-round(r[1].gap, sort_decimals), r[0]))
    return [r for _, r in records]


# --------------------------------------------------------------------------
# figure data
# --------------------------------------------------------------------------


def fig2_data(t=1.0 / 3.0, grid_points=101):
    """Negativities of the three output states on a lambda grid, plus closed-form residuals."""
    t = float(t)
    if not 0.0 < t < T_INPUT_MAX:
        raise ParameterOutOfRange(f"t={t} outside (0, 2/3)")
    if grid_points < 2:
        raise ParameterOutOfRange("grid_points must be >= 2")
    family = phase_damping_family()
    lam = np.linspace(0.0, 1.0, grid_points)
    n1 = negativity_curve(rho1_in(), family, lam)
    n2 = negativity_curve(rho2_in(), family, lam)
    n3 = negativity_curve(rho3_in(t), family, lam)
    root = solve_lambda_sep(family, rho2_in())
    residuals = {
        "N_rho1_out": float(np.max(np.abs(n1 - n_rho1_out_closed(lam)))),
        "N_rho2_out": float(np.max(np.abs(n2 - n_rho2_out_closed(lam)))),
        "N_rho3_out": float(np.max(np.abs(n3 - n_rho3_out_closed(lam, t)))),
    }
    return {
        "lambda": lam,
        "N_rho1_out": n1,
        "N_rho2_out": n2,
        "N_rho3_out": n3,
        "t": t,
        "grid_points": grid_points,
        "lambda_1": root.value,
        "lambda_1_closed_form": LAMBDA_1,
        "lambda_1_error": abs(root.value - LAMBDA_1),
        "closed_form_residuals": residuals,
    }

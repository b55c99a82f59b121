"""Off-diagonal mixed-state phases, qubit closed forms, nodes and the projection phase.

The order-``l`` phase of an ordered set of family members is

    gamma = Phi[Tr(U rho_{j_1}^(1/l) U rho_{j_2}^(1/l) ... U rho_{j_l}^(1/l))]

with ``Phi[z] = z/|z|``. It is undefined where the trace vanishes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import bisect

from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    NotBlockStructured,
    ValidationError,
)
from .linalg import (
    DEFAULT_TOLERANCES,
    SIGMA_Z,
    PhaseResult,
    ToleranceConfig,
    as_unitary,
    exp_hermitian,
    matrix_root,
    phase_factor,
    trace_product,
)
from .perm import SequenceSpec, decompose, fast_trace
from .states import OrthogonalFamily, bures_fidelity
from .transport import Propagator, qubit_descriptor, transport_residual

METHODS = ("auto", "dense", "perm")


def dense_trace(u, family: OrthogonalFamily, seq,
                tol: ToleranceConfig = DEFAULT_TOLERANCES) -> complex:
    """The order-``l`` trace by explicit matrix roots and products."""
    spec = SequenceSpec.parse(seq, family.dim)
    factors = []
    for j in spec.indexes:
        factors += [u, matrix_root(family.member(j).matrix, spec.l, tol)]
    return trace_product(factors)


def _verify_transport(p: Propagator, family: OrthogonalFamily, tol: ToleranceConfig) -> bool:
    # the path must transport the family's own eigenvectors, up to phases
    overlap = np.abs(p.path.basis.conj().T @ family.basis)
    if np.max(np.abs(overlap - np.eye(family.dim))) > tol.isospectral:
        return False
    return transport_residual(p, 64, tol) <= 10 * tol.transport


def gamma(u, family: OrthogonalFamily, seq, *, method: str = "auto",
          tol: ToleranceConfig = DEFAULT_TOLERANCES) -> PhaseResult:
    """Order-``l`` off-diagonal phase of ``family`` members ``seq`` under ``u``.

    ``u`` is either a unitary matrix in the computational basis or a
    :class:`~mixedphase.transport.Propagator`; with a propagator the
    endpoint is used and parallel transport of the family basis is checked
    and recorded in ``transport_verified``. A plain matrix is evaluated all
    the same but reported as unverified.

    ``method="auto"`` uses the permutation-block engine whenever the
    unitary decomposes and the dense trace otherwise; ``"perm"`` demands the
    engine and propagates :class:`NotBlockStructured`.
    """
    if method not in METHODS:
        raise ValidationError(f"method must be one of {METHODS}")
    verified = False
    if isinstance(u, Propagator):
        verified = _verify_transport(u, family, tol)
        u = u.endpoint
    u = as_unitary(u, tol)
    if u.shape[0] != family.dim:
        raise DimensionMismatch(f"unitary is {u.shape[0]}-dimensional, family is {family.dim}")
    spec = SequenceSpec.parse(seq, family.dim)
    used = "dense"
    if method != "dense":
        try:
            d = decompose(u, family.basis, tol)
            value = fast_trace(d, family, spec)
            used = "perm-engine"
        except NotBlockStructured:
            if method == "perm":
                raise
    if used == "dense":
        value = dense_trace(u, family, spec, tol)
    return phase_factor(value, tol).with_metadata(method=used, transport_verified=verified)


# --- qubit closed forms ---------------------------------------------------

@dataclass(frozen=True)
class QubitPathDescriptor:
    """``(eta, Omega)`` of a parallel-transporting SU(2) map with the family fidelity."""

    eta: float
    omega: float
    fidelity: float

    def __post_init__(self):
        if not 0 <= self.eta <= 1 + 1e-12:
            raise ValidationError(f"eta={self.eta} outside [0, 1]")
        if not 0 <= self.fidelity <= 1 + 1e-12:
            raise ValidationError(f"fidelity={self.fidelity} outside [0, 1]")

    @classmethod
    def from_unitary(cls, u, family: OrthogonalFamily,
                     tol: ToleranceConfig = DEFAULT_TOLERANCES) -> "QubitPathDescriptor":
        eta, omega = qubit_descriptor(u, family.basis, tol)
        fidelity = bures_fidelity(family.member(1), family.member(2), tol)
        return cls(eta, 0.0 if omega is None else omega, fidelity)


def qubit_l1_trace(d: QubitPathDescriptor, lambda1: float, which: int = 1,
                   tol: ToleranceConfig = DEFAULT_TOLERANCES) -> complex:
    """``Tr(U rho_1) = eta (lambda_1 e^{-i Omega/2} + lambda_2 e^{i Omega/2})``; ``which=2`` conjugates."""
    lambda2 = 1.0 - lambda1
    if abs(lambda1 - lambda2) <= tol.degeneracy_gap:
        raise DegenerateSpectrum("lambda_1 = lambda_2: the qubit phases are undefined")
    if which not in (1, 2):
        raise ValidationError("which must be 1 or 2")
    z = d.eta * (lambda1 * cmath.exp(-0.5j * d.omega) + lambda2 * cmath.exp(0.5j * d.omega))
    return z if which == 1 else z.conjugate()


def qubit_l2_trace(d: QubitPathDescriptor) -> float:
    """``Tr(U sqrt(rho_1) U sqrt(rho_2)) = -1 + eta^2 + eta^2 sqrt(F_B) cos(Omega)``."""
    return -1.0 + d.eta ** 2 + d.eta ** 2 * math.sqrt(d.fidelity) * math.cos(d.omega)


def nodal_eta(fidelity: float, omega: float) -> float | None:
    """Visibility on the nodal surface of the second-order qubit phase.

    Returns ``(1 + sqrt(F_B) cos Omega)^(-1/2)`` when ``sqrt(F_B) cos Omega >= 0``
    (the only case with a root in ``eta <= 1``) and ``None`` otherwise.
    """
    c = math.sqrt(fidelity) * math.cos(omega)
    if c < 0:
        return None
    return 1.0 / math.sqrt(1.0 + c)


def nodal_eta_bisect(fidelity: float, omega: float, xtol: float = 1e-13) -> float | None:
    """Zero of ``qubit_l2_trace`` in ``eta`` on ``[0, 1]``, found by bisection."""
    def trace(eta):
        return qubit_l2_trace(QubitPathDescriptor(eta, omega, fidelity))

    lo, hi = trace(0.0), trace(1.0)
    if hi == 0.0:
        return 1.0
    if lo * hi > 0:
        return None
    return bisect(trace, 0.0, 1.0, xtol=xtol)


# --- sign-change location ---------------------------------------------------

def sign_change_loci(f: Callable[[float], float], grid: Sequence[float], *,
                     zero: float = DEFAULT_TOLERANCES.definedness,
                     xtol: float = 1e-9) -> list[float]:
    """Points where the real function ``f`` changes sign, refined by bisection.

    Grid values with ``|f| <= zero`` are treated as nodes and skipped when
    bracketing, so a zero exactly on a grid point is still found, while a
    touch without a sign change (``-sin^2``) is not reported.
    """
    xs = [float(x) for x in grid]
    vals = [float(f(x)) for x in xs]
    signed = [(x, v) for x, v in zip(xs, vals) if abs(v) > zero]
    loci = []
    for (a, fa), (b, fb) in zip(signed, signed[1:]):
        if (fa > 0) != (fb > 0):
            loci.append(bisect(f, a, b, xtol=xtol))
    return loci


# --- projection phase --------------------------------------------------------

@dataclass(frozen=True)
class ProjectionConfig:
    """Input ``rho = lambda_1 |psi_1><psi_1| + lambda_2 |psi_2><psi_2|`` with ``lambda_1 > lambda_2``.

    ``eta`` and ``alpha`` parametrize ``U_11 = U_22^* = eta e^{i alpha}``.
    ``theta`` and ``delta`` are kept when the config comes from
    :meth:`from_precession`.
    """

    spectrum: tuple[float, float]
    eta: float
    alpha: float
    theta: float | None = None
    delta: float | None = None

    def __post_init__(self):
        l1, l2 = self.spectrum
        if abs(l1 + l2 - 1) > 1e-12:
            raise ValidationError(f"spectrum {self.spectrum} does not sum to 1")
        if not l1 > l2 or l2 < 0:
            raise ValidationError("projection phase needs lambda_1 > lambda_2 >= 0")
        if not 0 <= self.eta <= 1 + 1e-12:
            raise ValidationError(f"eta={self.eta} outside [0, 1]")

    @classmethod
    def from_precession(cls, spectrum, theta: float, delta: float) -> "ProjectionConfig":
        """Spinor polarized at angle ``theta`` to the field, precessing by ``delta``.

        ``U = exp(-i (delta/2) sigma_z)`` with the field along z. In the
        spinor eigenbasis ``U_11 = cos(delta/2) - i cos(theta) sin(delta/2)``.
        For ``theta = pi/2`` the generator is off-diagonal there, so ``U``
        parallel transports the spinor.
        """
        u11 = complex(math.cos(delta / 2), -math.cos(theta) * math.sin(delta / 2))
        return cls(tuple(float(x) for x in spectrum), min(abs(u11), 1.0), cmath.phase(u11),
                   theta, delta)


def projection_trace(c: ProjectionConfig) -> complex:
    """``Tr[U rho U P] = lambda_1(-1 + eta^2) + lambda_2 eta^2 e^{-2 i alpha}``.

    ``P`` projects onto the eigenvector of the smaller eigenvalue.
    """
    l1, l2 = c.spectrum
    return l1 * (-1 + c.eta ** 2) + l2 * c.eta ** 2 * cmath.exp(-2j * c.alpha)


def projection_operators(c: ProjectionConfig, offdiag_phase: float = 0.0
                         ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Explicit ``(U, rho, P)`` realizing a config.

    With ``theta``/``delta`` set this is the precession geometry: the field
    along z and the spinor eigenbasis tilted by ``theta``. Otherwise ``U`` is
    the SU(2) matrix with ``U_11 = eta e^{i alpha}`` and an off-diagonal
    phase ``offdiag_phase`` in the computational eigenbasis.
    """
    l1, l2 = c.spectrum
    if c.theta is not None and c.delta is not None:
        u = exp_hermitian(SIGMA_Z, c.delta / 2)
        up = np.array([math.cos(c.theta / 2), math.sin(c.theta / 2)], dtype=complex)
        down = np.array([-math.sin(c.theta / 2), math.cos(c.theta / 2)], dtype=complex)
    else:
        a = c.eta * cmath.exp(1j * c.alpha)
        b = math.sqrt(max(0.0, 1 - c.eta ** 2)) * cmath.exp(1j * offdiag_phase)
        u = np.array([[a, b], [-b.conjugate(), a.conjugate()]])
        up = np.array([1, 0], dtype=complex)
        down = np.array([0, 1], dtype=complex)
    rho = l1 * np.outer(up, up.conj()) + l2 * np.outer(down, down.conj())
    return u, rho, np.outer(down, down.conj())


def projection_trace_dense(c: ProjectionConfig, offdiag_phase: float = 0.0) -> complex:
    u, rho, p = projection_operators(c, offdiag_phase)
    return trace_product([u, rho, u, p])


def projection_phase(c: ProjectionConfig, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> PhaseResult:
    return phase_factor(projection_trace(c), tol)


def projection_sweep(spectrum, theta: float, deltas: Iterable[float],
                     tol: ToleranceConfig = DEFAULT_TOLERANCES) -> list[tuple[float, float | None]]:
    """``(delta, arg Tr[U rho U P] mod 2 pi)`` over a precession grid; ``None`` at nodes."""
    out = []
    for delta in deltas:
        r = projection_phase(ProjectionConfig.from_precession(spectrum, theta, float(delta)), tol)
        if not r.defined:
            out.append((float(delta), None))
            continue
        arg = r.argument % (2 * math.pi)
        # a rounding-level negative argument folds onto 0, not onto 2 pi
        out.append((float(delta), 0.0 if 2 * math.pi - arg < 1e-12 else arg))
    if not out:
        raise ValidationError("delta grid is empty")
    return out


def projection_jumps(spectrum, theta: float, deltas: Sequence[float], *,
                     tol: ToleranceConfig = DEFAULT_TOLERANCES, xtol: float = 1e-9) -> list[float]:
    """Precession angles where the projection phase jumps by pi.

    Consecutive grid points whose traces point in opposite half-planes
    bracket a node; the node is refined by bisecting the sign of
    ``Re(T(delta) conj(T(left)))``. A plain wrap of the argument through
    ``2 pi`` is not a jump.
    """
    def trace(delta):
        return projection_trace(ProjectionConfig.from_precession(spectrum, theta, delta))

    xs = [float(x) for x in deltas]
    pts = [(x, trace(x)) for x in xs]
    pts = [(x, t) for x, t in pts if abs(t) > tol.definedness]
    loci = []
    for (a, ta), (b, tb) in zip(pts, pts[1:]):
        if (ta * tb.conjugate()).real < 0:
            ref = ta.conjugate()
            loci.append(bisect(lambda x: (trace(x) * ref).real, a, b, xtol=xtol))
    return loci

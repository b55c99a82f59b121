"""Purification-based interferometry for the first- and second-order phases.

A mixed state ``rho_1 = sum_k lambda_k |psi_k><psi_k|`` is purified by an
ancilla copy of its eigenbasis,

    |Psi_1> = sum_k sqrt(lambda_k) |psi_k> (x) |psi_k>,

and sent through a Franson-type interferometer: long arms apply
``e^{i chi} U_s (x) U_a``, short arms ``V_s (x) V_a``. With an ideal
coincidence window only the long-long and short-short amplitudes superpose.
Joint vectors are stored in the computational product basis, system index
first.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InsufficientSamples, ValidationError
from .linalg import DEFAULT_TOLERANCES, ToleranceConfig, as_unitary
from .states import DensityOperator, OrthogonalFamily


@dataclass(frozen=True, eq=False)
class JointState:
    """System-ancilla pure state ``sum_ij amplitudes[i, j] |i>_s |j>_a``.

    ``basis`` is the eigenbasis shared by system and ancilla; transposes
    "with respect to the ancilla basis" are taken in it.
    """

    amplitudes: np.ndarray
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def reduced_system(self) -> np.ndarray:
        """``Tr_a |Psi><Psi|``."""
        c = self.amplitudes
        return c @ c.conj().T

    def reduced_ancilla(self) -> np.ndarray:
        c = self.amplitudes
        return c.T @ c.conj()


def purify(seed) -> JointState:
    """Purification ``sum_k sqrt(lambda_k) |psi_k> (x) |psi_k>``.

    ``seed`` is a :class:`DensityOperator` (purified in its own eigenbasis)
    or an :class:`OrthogonalFamily` (purifying ``rho_1`` in the family basis,
    which keeps the ancilla transpose consistent with the family's ``U_g``).
    """
    if isinstance(seed, OrthogonalFamily):
        b, lam = seed.basis, seed.spectrum
    elif isinstance(seed, DensityOperator):
        b, lam = seed.eigenbasis, seed.spectrum
    else:
        raise ValidationError("purify expects a DensityOperator or an OrthogonalFamily")
    amps = (b * np.sqrt(lam)) @ b.T
    return JointState(amps, b)


def entangled_pair(r: float) -> JointState:
    """``sqrt((1+r)/2)|hh> + sqrt((1-r)/2)|vv>`` in the h-v basis."""
    if not 0 <= r <= 1:
        raise ValidationError(f"polarization degree r={r} outside [0, 1]")
    amps = np.diag([math.sqrt((1 + r) / 2), math.sqrt((1 - r) / 2)]).astype(complex)
    return JointState(amps, np.eye(2, dtype=complex))


def pair_family(r: float, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> OrthogonalFamily:
    """The h-v family of each photon of :func:`entangled_pair`: spectrum ``((1+r)/2, (1-r)/2)``."""
    return OrthogonalFamily.from_spectrum([(1 + r) / 2, (1 - r) / 2], tol=tol)


@dataclass(frozen=True, eq=False)
class ArmConfiguration:
    """Long-arm ``(u_s, u_a)`` and short-arm ``(v_s, v_a)`` unitaries plus the shift ``chi``.

    The U(1) factor ``e^{i chi}`` rides on the long system arm and is not
    part of ``u_s``.
    """

    u_s: np.ndarray
    u_a: np.ndarray
    v_s: np.ndarray
    v_a: np.ndarray
    chi: float = 0.0

    def __post_init__(self):
        mats = [as_unitary(getattr(self, k), name=k) for k in ("u_s", "u_a", "v_s", "v_a")]
        if len({m.shape for m in mats}) != 1:
            raise DimensionMismatch("arm unitaries must share one dimension")

    def at(self, chi: float) -> "ArmConfiguration":
        return dataclasses.replace(self, chi=float(chi))

    def overlap_operator(self) -> np.ndarray:
        """``U_s^dagger V_s (x) U_a^dagger V_a`` without the ``e^{-i chi}`` factor."""
        return np.kron(self.u_s.conj().T @ self.v_s, self.u_a.conj().T @ self.v_a)


def coincidence_intensity(state: JointState, arms: ArmConfiguration) -> float:
    """``|e^{i chi} (U_s (x) U_a)|Psi> + (V_s (x) V_a)|Psi>|^2``, in ``[0, 4]``."""
    if arms.u_s.shape[0] != state.dim:
        raise DimensionMismatch("arm unitaries and joint state differ in dimension")
    psi = state.vector
    long = np.exp(1j * arms.chi) * (np.kron(arms.u_s, arms.u_a) @ psi)
    short = np.kron(arms.v_s, arms.v_a) @ psi
    return float(np.vdot(long + short, long + short).real)


def coincidence_overlap(state: JointState, arms: ArmConfiguration) -> complex:
    """``Tr(U_s^dagger V_s (x) U_a^dagger V_a |Psi><Psi|)``; the intensity is ``2 + 2 Re[e^{-i chi} .]``."""
    psi = state.vector
    return complex(np.vdot(psi, arms.overlap_operator() @ psi))


def ancilla_transpose(u, basis: np.ndarray) -> np.ndarray:
    """Transpose of ``u`` taken in the coordinates of ``basis``."""
    return basis @ (basis.conj().T @ u @ basis).T @ basis.conj().T


def l1_recipe(family: OrthogonalFamily, u_parallel, j1: int) -> ArmConfiguration:
    """Arms whose fringe carries ``Tr(U rho_{j1})``.

    ``U_s = e^{i chi} U_g^(j1-1)``, ``V_s = U U_g^(j1-1)`` and ``U_a = V_a = I``.
    """
    n = family.dim
    if not 1 <= j1 <= n:
        raise ValidationError(f"j1 must lie in 1..{n}")
    u = as_unitary(u_parallel)
    g = family.shift.power(j1 - 1)
    eye = np.eye(n, dtype=complex)
    return ArmConfiguration(u_s=g, u_a=eye, v_s=u @ g, v_a=eye)


def l2_recipe(family: OrthogonalFamily, u_parallel, j1: int, j2: int) -> ArmConfiguration:
    """Arms whose fringe carries ``Tr(U sqrt(rho_{j1}) U sqrt(rho_{j2}))``.

    ``U_s = e^{i chi} U_g^(j2-1)``, ``V_s = U U_g^(j1-1)``,
    ``U_a = U_g^(j2-1)`` and ``V_a = U^T U_g^(j1-1)``, the transpose taken in
    the ancilla copy of the family basis.
    """
    n = family.dim
    if not (1 <= j1 <= n and 1 <= j2 <= n) or j1 == j2:
        raise ValidationError(f"need distinct j1, j2 in 1..{n}")
    u = as_unitary(u_parallel)
    g1, g2 = family.shift.power(j1 - 1), family.shift.power(j2 - 1)
    ut = ancilla_transpose(u, family.basis)
    return ArmConfiguration(u_s=g2, u_a=g2, v_s=u @ g1, v_a=ut @ g1)


def extract_phase(samples: Sequence[tuple[float, float]],
                  tol: ToleranceConfig = DEFAULT_TOLERANCES) -> tuple[float, float | None]:
    """Fit ``I(chi) = c + 2 v cos(chi - phi)`` and return ``(v, phi)``.

    The model is linear in ``(1, cos chi, sin chi)``, so this is an ordinary
    least-squares solve. ``phi`` lies in (-pi, pi] and is ``None`` when
    ``v`` does not exceed the definedness threshold.
    """
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise InsufficientSamples("samples must be (chi, intensity) pairs")
    chi, inten = data[:, 0], data[:, 1]
    if len(np.unique(chi)) < 3:
        raise InsufficientSamples("need at least 3 distinct chi values")
    if chi.max() - chi.min() < math.pi:
        raise InsufficientSamples("chi samples must span at least pi")
    design = np.column_stack([np.ones_like(chi), np.cos(chi), np.sin(chi)])
    (_, a, b), *_ = np.linalg.lstsq(design, inten, rcond=None)
    # 2 v cos(chi - phi) = 2 v cos(phi) cos(chi) + 2 v sin(phi) sin(chi)
    v = 0.5 * math.hypot(a, b)
    if v <= tol.definedness:
        return v, None
    phi = math.atan2(b, a)
    return v, (math.pi if phi == -math.pi else phi)


def fringe(state: JointState, arms: ArmConfiguration, n_chi: int = 16
           ) -> list[tuple[float, float]]:
    """Coincidence intensities at ``n_chi`` equally spaced shifts over one period."""
    chis = np.linspace(0.0, 2 * math.pi, n_chi, endpoint=False)
    return [(float(c), coincidence_intensity(state, arms.at(c))) for c in chis]


def measured_trace(state: JointState, arms: ArmConfiguration, n_chi: int = 16,
                   tol: ToleranceConfig = DEFAULT_TOLERANCES) -> complex:
    """``v e^{i phi}`` read off the simulated fringe (zero at a node)."""
    v, phi = extract_phase(fringe(state, arms, n_chi), tol)
    return 0j if phi is None else v * complex(math.cos(phi), math.sin(phi))

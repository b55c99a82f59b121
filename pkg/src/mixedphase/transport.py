"""Parallel-transporting propagators built from off-diagonal generators.

The evolution obeys ``i dU/ds = U(s) J(s)`` with ``J`` in the Heisenberg
picture, so the propagator is the inverse-path-ordered exponential: later
factors multiply from the right. A path parallel transports its basis
``{|psi_k>}`` when every ``<psi_k|J(s)|psi_k>`` vanishes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NotParallelTransporting, NotSpecialUnitary, ValidationError
from .linalg import (
    DEFAULT_TOLERANCES,
    SIGMA_X,
    SIGMA_Y,
    ToleranceConfig,
    as_hermitian,
    as_special_unitary,
    as_unitary,
    exp_hermitian,
    polar_unitary,
)

DEFAULT_STEPS = 1024


@dataclass(frozen=True, eq=False)
class GeneratorPath:
    """A family of Hermitian generators ``J(s)`` on ``[s0, s1]``.

    ``sampler`` maps ``s`` to an N x N Hermitian matrix in the computational
    basis and must be safe to call concurrently. ``basis`` holds the
    transported eigenvectors as columns.
    """

    basis: np.ndarray
    sampler: Callable[[float], np.ndarray]
    s0: float = 0.0
    s1: float = 1.0

    def __post_init__(self):
        if not self.s1 > self.s0:
            raise ValidationError("path requires s1 > s0")
        object.__setattr__(self, "basis", as_unitary(self.basis, name="path basis"))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def generator(self, s: float, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
        j = as_hermitian(self.sampler(s), tol, f"J({s:g})")
        if j.shape != self.basis.shape:
            raise ValidationError(f"J({s:g}) has shape {j.shape}, basis is {self.basis.shape}")
        return j

    def violation(self, s: float, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> float:
        """Largest of ``|<psi_k|J(s)|psi_k>|`` and ``|Tr J(s)|``."""
        return self._violation(self.generator(s, tol))

    def _violation(self, j: np.ndarray) -> float:
        diag = np.einsum("ik,ij,jk->k", self.basis.conj(), j, self.basis)
        return float(max(np.max(np.abs(diag)), abs(np.trace(j))))

    def check(self, s: float, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> None:
        self._check(self.generator(s, tol), s, tol)

    def _check(self, j: np.ndarray, s: float, tol: ToleranceConfig) -> None:
        v = self._violation(j)
        if v > tol.transport:
            raise NotParallelTransporting(
                f"generator has diagonal weight {v:.3g} at s={s:g} in the transported basis"
            )


@dataclass(frozen=True, eq=False)
class Propagator:
    """Result of integrating a generator path.

    ``nodes[i]`` is ``U(s0 + i * ds)``; ``endpoint`` is ``nodes[-1]``.
    """

    endpoint: np.ndarray
    path: GeneratorPath
    step_count: int
    nodes: np.ndarray = field(repr=False)

    @property
    def step(self) -> float:
        return (self.path.s1 - self.path.s0) / self.step_count

    def at(self, s: float, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
        """``U(s)``: the nearest node at or below ``s`` advanced by one partial midpoint step."""
        p = self.path
        if not p.s0 <= s <= p.s1:
            raise ValidationError(f"s={s:g} outside [{p.s0:g}, {p.s1:g}]")
        i = min(int((s - p.s0) / self.step), self.step_count)
        rest = s - (p.s0 + i * self.step)
        u = self.nodes[i]
        if rest <= 0:
            return u
        return polar_unitary(u @ exp_hermitian(p.generator(s - rest / 2, tol), rest, tol))


def integrate(path: GeneratorPath, steps: int = DEFAULT_STEPS, *, validate: bool = True,
              tol: ToleranceConfig = DEFAULT_TOLERANCES) -> Propagator:
    """Exponential-midpoint product integration of ``i dU/ds = U J``.

    ``U_{n+1} = U_n exp(-i J(s_n + ds/2) ds)``, re-unitarized by its polar
    factor after every step. The scheme is second order in ``ds``.

    With ``validate`` set, every midpoint generator is checked for parallel
    transport and :class:`NotParallelTransporting` is raised on the first
    violation.
    """
    if int(steps) != steps or steps < 1:
        raise ValidationError("steps must be a positive integer")
    steps = int(steps)
    ds = (path.s1 - path.s0) / steps
    nodes = np.empty((steps + 1, path.dim, path.dim), dtype=complex)
    u = np.eye(path.dim, dtype=complex)
    nodes[0] = u
    for i in range(steps):
        s = path.s0 + (i + 0.5) * ds
        j = path.generator(s, tol)
        if validate:
            path._check(j, s, tol)
        u = polar_unitary(u @ exp_hermitian(j, ds, tol))
        nodes[i + 1] = u
    return Propagator(u, path, steps, nodes)


def transport_residual(p: Propagator, samples: int = 64,
                       tol: ToleranceConfig = DEFAULT_TOLERANCES) -> float:
    """Max over ``samples`` equally spaced ``s`` and all ``k`` of ``|<psi_k(s)|H(s)|psi_k(s)>|``.

    ``H(s) = U(s) J(s) U(s)^dagger`` is the Schroedinger-picture generator
    and ``|psi_k(s)> = U(s)|psi_k>`` the instantaneous basis.
    """
    path = p.path
    worst = 0.0
    for s in np.linspace(path.s0, path.s1, max(int(samples), 1)):
        u = p.at(float(s), tol)
        h = u @ path.generator(float(s), tol) @ u.conj().T
        psi = u @ path.basis
        diag = np.einsum("ik,ij,jk->k", psi.conj(), h, psi)
        worst = max(worst, float(np.max(np.abs(diag))))
    return worst


def constant_path(generator, basis=None, s0: float = 0.0, s1: float = 1.0) -> GeneratorPath:
    """Path with a fixed generator; its propagator is ``exp(-i (s1 - s0) J)``."""
    j = np.array(generator, dtype=complex)
    j.setflags(write=False)
    b = np.eye(j.shape[0], dtype=complex) if basis is None else basis
    return GeneratorPath(b, lambda s: j, s0, s1)


def polarization_generator(beta: float, theta: float) -> np.ndarray:
    """``(beta/2)(cos(theta) sigma_x + sin(theta) sigma_y)`` in the h-v basis."""
    return 0.5 * beta * (math.cos(theta) * SIGMA_X + math.sin(theta) * SIGMA_Y)


def polarization_rotation(beta: float, theta: float) -> np.ndarray:
    """Great-circle rotation of linear polarization by ``beta`` on the Poincare sphere.

    ``exp(-i (beta/2)[cos(theta) sigma_x + sin(theta) sigma_y])``, written in
    closed form. The generator is off-diagonal in the h-v basis, so the
    rotation parallel transports ``{h, v}``.
    """
    c, s = math.cos(beta / 2), math.sin(beta / 2)
    return np.array([[c, -1j * s * cmath.exp(-1j * theta)],
                     [-1j * s * cmath.exp(1j * theta), c]], dtype=complex)


def polarization_path(beta: float, theta: float) -> GeneratorPath:
    return constant_path(polarization_generator(beta, theta))


def qubit_descriptor(u, basis=None, tol: ToleranceConfig = DEFAULT_TOLERANCES
                     ) -> tuple[float, float | None]:
    """Pure-state visibility ``eta = |U_11|`` and solid angle ``Omega = -2 arg U_11``.

    ``Omega`` lies in (-2 pi, 2 pi] and is ``None`` when ``eta`` does not
    exceed the definedness threshold. ``basis`` (default: computational)
    gives ``|psi_1>, |psi_2>`` as columns.
    """
    u = as_special_unitary(u, tol, "qubit unitary")
    if u.shape != (2, 2):
        raise NotSpecialUnitary("qubit_descriptor needs a 2 x 2 unitary")
    if basis is not None:
        b = as_unitary(basis, tol, "basis")
        u = b.conj().T @ u @ b
    u11 = complex(u[0, 0])
    eta = min(abs(u11), 1.0)
    if eta <= tol.definedness:
        return eta, None
    omega = -2 * cmath.phase(u11)
    if omega <= -2 * math.pi:
        omega += 4 * math.pi
    return eta, omega

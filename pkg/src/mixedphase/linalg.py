"""Dense complex linear algebra with explicit tolerances.

Matrices are plain ``numpy`` arrays. The ``as_*`` helpers validate an input
and return a complex copy; they are the only place where the matrix
invariants (finite entries, Hermiticity, unitarity) are enforced.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NotHermitian,
    NotPositiveSemidefinite,
    NotSpecialUnitary,
    NotUnitary,
    ValidationError,
)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical cutoffs shared by every module.

    ``definedness`` decides when a trace counts as vanishing, so it is the
    knob that places nodal points.
    """

    hermiticity: float = 1e-12
    unitarity: float = 1e-10
    psd: float = 1e-12
    definedness: float = 1e-10
    degeneracy_gap: float = 1e-9
    trace: float = 1e-12
    isospectral: float = 1e-9
    orthogonality: float = 1e-9
    transport: float = 1e-10
    block: float = 1e-10

    def replace(self, **changes: float) -> "ToleranceConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ToleranceConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(mapping) - names
        if unknown:
            raise ValidationError(f"unknown tolerance keys: {sorted(unknown)}")
        values = {}
        for key, value in mapping.items():
            value = float(value)
            if not value > 0:
                raise ValidationError(f"tolerance {key!r} must be positive")
            values[key] = value
        return cls(**values)

    @classmethod
    def from_file(cls, path: str | Path) -> "ToleranceConfig":
        return cls.from_mapping(json.loads(Path(path).read_text()))


DEFAULT_TOLERANCES = ToleranceConfig()


@dataclass(frozen=True)
class PhaseResult:
    """A complex trace together with its unit-modulus phase factor.

    ``factor`` and ``argument`` are ``None`` when the trace magnitude does not
    exceed the definedness threshold.
    """

    value: complex
    defined: bool
    factor: complex | None = None
    argument: float | None = None
    method: str | None = None
    transport_verified: bool = False

    def with_metadata(self, **kwargs) -> "PhaseResult":
        return dataclasses.replace(self, **kwargs)


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate a square, finite, nonempty matrix and return a complex copy."""
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a nonempty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return a


def as_hermitian(m, tol: ToleranceConfig = DEFAULT_TOLERANCES, name: str = "matrix") -> np.ndarray:
    a = as_matrix(m, name)
    dev = np.max(np.abs(a - a.conj().T))
    if dev > tol.hermiticity:
        raise NotHermitian(f"{name} deviates from Hermitian by {dev:.3g}")
    return (a + a.conj().T) / 2


def unitarity_defect(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def as_unitary(m, tol: ToleranceConfig = DEFAULT_TOLERANCES, name: str = "matrix") -> np.ndarray:
    a = as_matrix(m, name)
    dev = unitarity_defect(a)
    if dev > tol.unitarity:
        raise NotUnitary(f"{name} deviates from unitary by {dev:.3g}")
    return a


def is_special(u: np.ndarray, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    """True when ``det(u) = 1`` within the unitarity tolerance."""
    return abs(np.linalg.det(u) - 1) <= tol.unitarity


def as_special_unitary(m, tol: ToleranceConfig = DEFAULT_TOLERANCES, name: str = "matrix") -> np.ndarray:
    a = as_unitary(m, tol, name)
    if not is_special(a, tol):
        raise NotSpecialUnitary(f"{name} has det {np.linalg.det(a):.6g}, not 1")
    return a


def fix_column_phases(v: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude component is real positive."""
    v = np.array(v, dtype=complex)
    rows = np.argmax(np.abs(v), axis=0)
    pivots = v[rows, np.arange(v.shape[1])]
    return v * (np.abs(pivots) / pivots)


def eig_hermitian(m, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ascending eigenvalues and a unitary whose columns are the
    eigenvectors, each with its largest-magnitude component real positive.
    Raises :class:`ConvergenceFailure` if LAPACK fails or the reconstruction
    ``V diag(w) V^dagger`` misses the input by more than 1e-10 (relative to
    the matrix scale).
    """
    h = as_hermitian(m, tol)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    v = fix_column_phases(v)
    scale = max(1.0, float(np.max(np.abs(h))))
    err = np.max(np.abs((v * w) @ v.conj().T - h))
    if err > 1e-10 * scale:
        raise ConvergenceFailure(f"eigendecomposition reconstruction error {err:.3g}")
    return w, v


def matrix_root(m, l: int, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    """Principal ``l``-th root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-tol.psd, 0)`` are clamped to zero; anything more
    negative raises :class:`NotPositiveSemidefinite`. Eigenvalues at the
    rounding level of the decomposition (``16 N eps`` times the spectral
    radius) are also set to zero, since the root would blow such noise up
    to ``(1e-16)^(1/l)``.
    """
    if int(l) != l or l < 1:
        raise ValidationError(f"root order must be a positive integer, got {l!r}")
    w, v = eig_hermitian(m, tol)
    if w[0] < -tol.psd:
        raise NotPositiveSemidefinite(f"smallest eigenvalue {w[0]:.3g} is negative")
    noise = 16 * len(w) * np.finfo(float).eps * max(1.0, float(np.max(np.abs(w))))
    w = np.where(w <= noise, 0.0, w) ** (1.0 / int(l))
    return (v * w) @ v.conj().T


def trace_product(factors: Sequence[np.ndarray]) -> complex:
    """``Tr(F_1 F_2 ... F_k)`` by dense left-to-right multiplication."""
    if len(factors) == 0:
        raise DimensionMismatch("trace_product needs at least one factor")
    mats = [as_matrix(f, f"factor {i}") for i, f in enumerate(factors)]
    n = mats[0].shape[0]
    if any(f.shape != (n, n) for f in mats):
        raise DimensionMismatch("all factors must share one dimension")
    acc = mats[0]
    for f in mats[1:]:
        acc = acc @ f
    return complex(np.trace(acc))


def phase_factor(z: complex, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> PhaseResult:
    """``z/|z|`` and ``arg z`` in (-pi, pi], or an undefined result at a node."""
    z = complex(z)
    r = abs(z)
    if not r > tol.definedness:
        return PhaseResult(value=z, defined=False)
    arg = math.atan2(z.imag, z.real)  # cmath.phase raises on subnormal parts
    if arg == -math.pi:
        arg = math.pi
    return PhaseResult(value=z, defined=True, factor=z / r, argument=arg)


def exp_hermitian(j, t: float, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> np.ndarray:
    """``exp(-i t J)`` for Hermitian ``J`` via its spectral decomposition."""
    w, v = eig_hermitian(j, tol)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def polar_unitary(m: np.ndarray) -> np.ndarray:
    """Closest unitary to ``m`` in Frobenius norm (unitary polar factor)."""
    w, _, vh = np.linalg.svd(m)
    return w @ vh

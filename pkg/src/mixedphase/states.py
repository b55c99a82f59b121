"""Density operators and families of mutually orthogonal mixed states.

A family is generated from a nondegenerate seed ``rho_1`` by the cyclic
shift ``U_g`` that maps each eigenvector onto the next one::

    U_g |psi_n> = |psi_{n+1}>,   rho_n = U_g^(n-1) rho_1 U_g^dagger^(n-1)

so that ``rho_n`` carries eigenvalue ``lambda_k`` on ``|psi_{k+n-1}>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    NotADensityOperator,
    NotIsospectral,
    NotPositiveSemidefinite,
    NotUnitarilyConnected,
    ValidationError,
)
from .linalg import (
    DEFAULT_TOLERANCES,
    ToleranceConfig,
    as_hermitian,
    as_unitary,
    eig_hermitian,
    matrix_root,
    trace_product,
)


def _is_nondegenerate(spectrum: np.ndarray, gap: float) -> bool:
    if len(spectrum) < 2:
        return True
    return bool(np.min(np.diff(np.sort(spectrum))) > gap)


def _check_spectrum(values, tol: ToleranceConfig) -> np.ndarray:
    w = np.asarray(values, dtype=float)
    if w.ndim != 1 or len(w) < 1 or not np.all(np.isfinite(w)):
        raise NotADensityOperator("spectrum must be a nonempty list of finite reals")
    if np.any(w < -tol.psd):
        raise NotPositiveSemidefinite(f"negative eigenvalue {w.min():.3g}")
    if abs(w.sum() - 1) > tol.trace:
        raise NotADensityOperator(f"eigenvalues sum to {w.sum():.15g}, not 1")
    return np.clip(w, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Unit-trace positive semidefinite Hermitian matrix with its eigensystem.

    ``spectrum`` is ascending and ``eigenbasis[:, k]`` belongs to
    ``spectrum[k]``.
    """

    matrix: np.ndarray
    spectrum: np.ndarray
    eigenbasis: np.ndarray
    nondegenerate: bool

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_matrix(cls, m, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> "DensityOperator":
        h = as_hermitian(m, tol, "density matrix")
        tr = np.trace(h).real
        if abs(tr - 1) > tol.trace:
            raise NotADensityOperator(f"trace is {tr:.15g}, not 1")
        w, v = eig_hermitian(h, tol)
        if w[0] < -tol.psd:
            raise NotPositiveSemidefinite(f"smallest eigenvalue {w[0]:.3g} is negative")
        w = np.clip(w, 0.0, 1.0)
        return cls(h, w, v, _is_nondegenerate(w, tol.degeneracy_gap))

    @classmethod
    def from_spectrum(cls, spectrum: Sequence[float], basis=None,
                      tol: ToleranceConfig = DEFAULT_TOLERANCES) -> "DensityOperator":
        """Build ``sum_k spectrum[k] |b_k><b_k|`` from the columns ``b_k`` of ``basis``.

        The basis columns are kept as given (no phase normalization), only
        reordered so that the stored spectrum is ascending.
        """
        w = _check_spectrum(spectrum, tol)
        n = len(w)
        b = np.eye(n, dtype=complex) if basis is None else as_unitary(basis, tol, "basis")
        if b.shape != (n, n):
            raise DimensionMismatch(f"basis is {b.shape}, spectrum has {n} entries")
        return cls._assemble(w, b, tol)

    @classmethod
    def _assemble(cls, w: np.ndarray, b: np.ndarray, tol: ToleranceConfig) -> "DensityOperator":
        # inputs already validated
        order = np.argsort(w, kind="stable")
        w, b = w[order], b[:, order]
        m = (b * w) @ b.conj().T
        return cls((m + m.conj().T) / 2, w, b, _is_nondegenerate(w, tol.degeneracy_gap))

    def root(self, l: int) -> np.ndarray:
        """``rho^(1/l)`` from the stored eigensystem."""
        b = self.eigenbasis
        return (b * self.spectrum ** (1.0 / l)) @ b.conj().T

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.spectrum > 0))


@dataclass(frozen=True, eq=False)
class CyclicShift:
    """The unitary ``U_g = |psi_1><psi_N| + |psi_N><psi_{N-1}| + ... + |psi_2><psi_1|``."""

    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def permutation(self, power: int = 1) -> np.ndarray:
        """``U_g**power`` in the coordinates of ``basis`` (a real permutation matrix)."""
        n = self.dim
        p = np.zeros((n, n), dtype=complex)
        cols = np.arange(n)
        p[(cols + power) % n, cols] = 1
        return p

    def power(self, k: int = 1) -> np.ndarray:
        b = self.basis
        return b @ self.permutation(k) @ b.conj().T

    @property
    def matrix(self) -> np.ndarray:
        return self.power(1)


@dataclass(frozen=True, eq=False)
class OrthogonalFamily:
    """``rho_1, ..., rho_N`` generated from a seed by powers of the cyclic shift.

    ``basis[:, k]`` is ``|psi_{k+1}>`` and ``spectrum[k]`` its eigenvalue in
    the seed, both in the labelled order that defines ``U_g``. Member indexes
    in the public API are 1-based, as in ``rho_1``.
    """

    seed: DensityOperator
    basis: np.ndarray
    spectrum: np.ndarray
    shift: CyclicShift
    tol: ToleranceConfig = field(default=DEFAULT_TOLERANCES, repr=False)
    _members: dict = field(default_factory=dict, init=False, repr=False)

    @property
    def dim(self) -> int:
        return len(self.spectrum)

    def member(self, n: int) -> DensityOperator:
        if not 1 <= n <= self.dim:
            raise ValidationError(f"member index {n} outside 1..{self.dim}")
        if n not in self._members:
            # rho_n carries the seed spectrum rolled by n - 1 along the basis
            self._members[n] = DensityOperator._assemble(self.diagonal(n), self.basis, self.tol)
        return self._members[n]

    def diagonal(self, n: int) -> np.ndarray:
        """Eigenvalues of ``rho_n`` along ``basis``: entry ``x`` is ``lambda_{x-n+1 mod N}``."""
        return np.roll(self.spectrum, n - 1)

    def root_diagonal(self, n: int, l: int) -> np.ndarray:
        return self.diagonal(n) ** (1.0 / l)

    def root(self, n: int, l: int) -> np.ndarray:
        """``rho_n^(1/l)`` in the computational basis."""
        b = self.basis
        return (b * self.root_diagonal(n, l)) @ b.conj().T

    def to_basis(self, u) -> np.ndarray:
        """Express an operator given in the computational basis in family coordinates."""
        return self.basis.conj().T @ np.asarray(u, dtype=complex) @ self.basis

    @classmethod
    def from_spectrum(cls, spectrum: Sequence[float], basis=None, *,
                      require_nondegenerate: bool = True,
                      tol: ToleranceConfig = DEFAULT_TOLERANCES) -> "OrthogonalFamily":
        """Family whose ``|psi_k>`` is ``basis[:, k-1]`` with eigenvalue ``spectrum[k-1]``.

        ``require_nondegenerate=False`` admits degenerate spectra (for example
        pure states with ``N > 2``); the explicit basis then fixes the
        labelling that a degenerate seed cannot.
        """
        w = _check_spectrum(spectrum, tol)
        n = len(w)
        b = np.eye(n, dtype=complex) if basis is None else as_unitary(basis, tol, "basis")
        if b.shape != (n, n):
            raise DimensionMismatch(f"basis is {b.shape}, spectrum has {n} entries")
        seed = DensityOperator.from_spectrum(w, b, tol)
        if require_nondegenerate and not seed.nondegenerate:
            raise DegenerateSpectrum(f"spectrum {w.tolist()} is degenerate; no basis is singled out")
        return cls._build(seed, b, w, tol)

    @classmethod
    def _build(cls, seed, basis, spectrum, tol) -> "OrthogonalFamily":
        return cls(seed, basis, np.asarray(spectrum, dtype=float), CyclicShift(basis), tol)


def make_family(seed: DensityOperator, ordering: Sequence[int] | None = None,
                tol: ToleranceConfig = DEFAULT_TOLERANCES) -> OrthogonalFamily:
    """Generate the orthogonal family of ``seed``.

    ``ordering[k]`` is the 1-based ascending rank of the seed eigenvector that
    becomes ``|psi_{k+1}>``; the default identity ordering labels the
    eigenvectors by ascending eigenvalue. Permuting the ordering yields a
    different set of mutually orthogonal states.
    """
    n = seed.dim
    if not seed.nondegenerate:
        raise DegenerateSpectrum("seed spectrum is degenerate; no basis is singled out")
    if ordering is None:
        idx = np.arange(n)
    else:
        idx = np.asarray(ordering, dtype=int) - 1
        if sorted(idx.tolist()) != list(range(n)):
            raise ValidationError(f"ordering {list(ordering)} is not a permutation of 1..{n}")
    return OrthogonalFamily._build(seed, seed.eigenbasis[:, idx], seed.spectrum[idx], tol)


def _as_density(x, tol) -> DensityOperator:
    return x if isinstance(x, DensityOperator) else DensityOperator.from_matrix(x, tol)


def is_orthogonal(a, b, connecting, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> bool:
    """Whether ``b = U a U^dagger`` cannot interfere with ``a``.

    The states are orthogonal when ``<psi_k|U|psi_k> = 0`` for every
    eigenvector of ``a``; eigenvectors of ``a`` and ``b`` are paired by
    eigenvalue rank.
    """
    a, b = _as_density(a, tol), _as_density(b, tol)
    u = as_unitary(connecting, tol, "connecting unitary")
    if a.dim != b.dim or u.shape[0] != a.dim:
        raise DimensionMismatch("operands have different dimensions")
    if np.max(np.abs(a.spectrum - b.spectrum)) > tol.isospectral:
        raise NotIsospectral("the two density operators have different spectra")
    if np.max(np.abs(u @ a.matrix @ u.conj().T - b.matrix)) > tol.isospectral:
        raise NotUnitarilyConnected("b != U a U^dagger for the given U")
    psi = a.eigenbasis
    overlaps = np.einsum("ik,ij,jk->k", psi.conj(), u, psi)
    return bool(np.max(np.abs(overlaps)) <= tol.orthogonality)


def bures_fidelity(a, b, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> float:
    """``[Tr sqrt(sqrt(a) b sqrt(a))]^2``, clipped to ``[0, 1]``."""
    a, b = _as_density(a, tol), _as_density(b, tol)
    if a.dim != b.dim:
        raise DimensionMismatch("operands have different dimensions")
    sa = a.root(2)
    inner = sa @ b.matrix @ sa
    inner = (inner + inner.conj().T) / 2
    # rounding can push zero eigenvalues of the product slightly negative
    w = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    return float(np.clip(np.sum(np.sqrt(w)) ** 2, 0.0, 1.0))


def normalization_check(family: OrthogonalFamily, l: int, k: int = 1) -> complex:
    """``Tr(U_g^dagger rho_k^(1/l) U_g^dagger rho_{k+1}^(1/l) ...)`` with ``l`` factors of each.

    Equals 1 for ``l = N`` and 0 for ``l < N``, which is what singles out
    the ``l``-th root as the mixed-state replacement for projectors.
    """
    n = family.dim
    if not 1 <= l <= n:
        raise ValidationError(f"l must lie in 1..{n}")
    ugd = family.shift.matrix.conj().T
    factors = []
    for step in range(l):
        factors += [ugd, matrix_root(family.member((k - 1 + step) % n + 1).matrix, l)]
    return trace_product(factors)

"""Random problem instances for property suites and the self-test."""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import unitary_group

from .transport import GeneratorPath


def random_spectrum(n: int, rng: np.random.Generator, min_gap: float = 1e-3) -> np.ndarray:
    """Dirichlet-distributed eigenvalues with every pairwise gap above ``min_gap``."""
    while True:
        lam = rng.dirichlet(np.ones(n))
        lam /= lam.sum()
        if n == 1 or np.min(np.diff(np.sort(lam))) > min_gap:
            return lam


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    if n == 1:
        return np.exp(2j * math.pi * rng.random((1, 1)))
    return unitary_group.rvs(n, random_state=rng)


def random_block_unitary(n: int, m: int, rng: np.random.Generator, *,
                         special: bool = False) -> np.ndarray:
    """Phased single ``m``-cycle on a random index subset, random diagonal phases elsewhere.

    Returned in the coordinates of the family basis. ``special`` rescales
    one entry so the determinant is one.
    """
    u = np.zeros((n, n), dtype=complex)
    phases = np.exp(2j * math.pi * rng.random(n))
    idx = rng.permutation(n)
    cycle, rest = idx[:m], idx[m:]
    for a, b in zip(cycle, np.roll(cycle, -1)):
        u[b, a] = 1
    for x in rest:
        u[x, x] = 1
    u = u * phases[np.newaxis, :]
    if special:
        u[:, idx[0]] /= np.linalg.det(u)
    return u


def random_sequence(n: int, l: int, rng: np.random.Generator) -> tuple[int, ...]:
    return tuple(int(j) + 1 for j in rng.permutation(n)[:l])


class FourierGenerator:
    """Smooth off-diagonal Hermitian generator ``J(s)`` expressed in a given basis.

    ``J(s) = B H(s) B^dagger`` where ``H(s)`` has zero diagonal and entries
    that are short Fourier series in ``s``. ``diagonal_weight`` adds a
    ``diag(1, -1, 0, ...)`` component, which breaks parallel transport.
    """

    def __init__(self, basis: np.ndarray, rng: np.random.Generator, modes: int = 3,
                 scale: float = 1.0, diagonal_weight: float = 0.0):
        n = basis.shape[0]
        self.basis = np.asarray(basis, dtype=complex)
        shape = (modes, n, n)
        self.cos_coef = scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / modes
        self.sin_coef = scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / modes
        self.diag = np.zeros(n)
        if n >= 2:
            self.diag[:2] = diagonal_weight, -diagonal_weight

    def __call__(self, s: float) -> np.ndarray:
        k = np.arange(1, self.cos_coef.shape[0] + 1)[:, None, None]
        a = np.sum(self.cos_coef * np.cos(math.pi * k * s) + self.sin_coef * np.sin(math.pi * k * s),
                   axis=0)
        h = np.triu(a, 1)
        h = h + h.conj().T + np.diag(self.diag)
        return self.basis @ h @ self.basis.conj().T


def random_transport_path(n: int, rng: np.random.Generator, *, basis=None, modes: int = 3,
                          scale: float = 1.0, diagonal_weight: float = 0.0) -> GeneratorPath:
    b = random_unitary(n, rng) if basis is None else np.asarray(basis, dtype=complex)
    return GeneratorPath(b, FourierGenerator(b, rng, modes, scale, diagonal_weight), 0.0, 1.0)

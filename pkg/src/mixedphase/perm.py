"""Fast traces for unitaries that split into a single-cycle permutation and a diagonal part.

In the family eigenbasis such a unitary reads ``U = u_p (+) u_d``: ``u_p``
sends each of ``m`` basis vectors to another one (with arbitrary entry
phases) along one cycle, and ``u_d`` is diagonal on the remaining ``N - m``
vectors. The order-``l`` trace then splits into

* a diagonal part ``D = sum_k (U_kk)^l (lambda_k1 ... lambda_kl)^(1/l)``, and
* a permutation part ``P = [(-1)^(m-1) det u_p]^K f``, nonzero only for
  ``l = K m``, where ``f`` is a sum of ``m`` products of eigenvalue roots.

Indexes are 0-based internally; every public label (sequences, reported
index lists) is 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    IndeterminatePhase,
    InvalidSequence,
    MultiCycleUnsupported,
    NotBlockStructured,
    SequenceNotMultiple,
)
from .linalg import DEFAULT_TOLERANCES, PhaseResult, ToleranceConfig, as_unitary, phase_factor
from .states import OrthogonalFamily


@dataclass(frozen=True)
class SequenceSpec:
    """Ordered, distinct, 1-based family indexes ``j_1, ..., j_l``."""

    indexes: tuple[int, ...]

    @classmethod
    def parse(cls, seq, n: int) -> "SequenceSpec":
        if isinstance(seq, SequenceSpec):
            seq = seq.indexes
        idx = tuple(int(j) for j in seq)
        if not 1 <= len(idx) <= n:
            raise InvalidSequence(f"sequence length must lie in 1..{n}, got {len(idx)}")
        if any(not 1 <= j <= n for j in idx):
            raise InvalidSequence(f"sequence {idx} has labels outside 1..{n}")
        if len(set(idx)) != len(idx):
            raise InvalidSequence(f"sequence {idx} repeats a state; members must be mutually orthogonal")
        return cls(idx)

    @property
    def l(self) -> int:
        return len(self.indexes)


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    """``U = u_p (+) u_d`` in the family eigenbasis.

    ``permuted_indexes = [a_1, ..., a_m]`` lists the cycle so that ``u_p``
    sends ``a_1 -> a_m -> a_{m-1} -> ... -> a_2 -> a_1`` (``a_1`` is the
    smallest label). ``u_p`` is the block restricted to that ordering and
    ``u_d`` holds the diagonal entries on ``cyclic_indexes``.
    """

    m: int
    permuted_indexes: tuple[int, ...]
    cyclic_indexes: tuple[int, ...]
    u_p: np.ndarray
    u_d: np.ndarray
    det_up: complex
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def prefactor(self) -> complex:
        """``(-1)^(m-1) det u_p``: the product of the cycle's entry phases."""
        return (-1) ** (self.m - 1) * self.det_up if self.m else 0j


def decompose(u, basis=None, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> BlockDecomposition:
    """Split a unitary into a single permutation cycle and a diagonal part.

    ``u`` is given in the computational basis and ``basis`` (columns
    ``|psi_k>``, default identity) is the family eigenbasis. Entries of
    magnitude at most ``tol.block`` count as zero.

    Raises
    ------
    NotBlockStructured
        Some row or column of ``u`` in the eigenbasis does not have exactly
        one nonzero entry.
    MultiCycleUnsupported
        The off-diagonal entries form more than one permutation cycle.
    """
    u = as_unitary(u, tol)
    n = u.shape[0]
    if basis is not None:
        b = as_unitary(basis, tol, "basis")
        if b.shape != u.shape:
            raise DimensionMismatch("basis and unitary differ in dimension")
        u = b.conj().T @ u @ b
    nonzero = np.abs(u) > tol.block
    if not (np.all(nonzero.sum(axis=0) == 1) and np.all(nonzero.sum(axis=1) == 1)):
        raise NotBlockStructured("unitary is not a phased permutation in the eigenbasis")
    image = np.argmax(nonzero, axis=0)  # column x is sent to row image[x]
    moved = [x for x in range(n) if image[x] != x]
    fixed = [x for x in range(n) if image[x] == x]
    cycle: list[int] = []
    if moved:
        preimage = np.empty(n, dtype=int)
        preimage[image] = np.arange(n)
        x = moved[0]
        while True:
            cycle.append(x)
            x = int(preimage[x])
            if x == cycle[0]:
                break
        if len(cycle) != len(moved):
            raise MultiCycleUnsupported(
                f"off-diagonal part splits into several cycles over labels {[x + 1 for x in moved]}"
            )
    u_p = u[np.ix_(cycle, cycle)]
    det_up = complex(np.linalg.det(u_p)) if cycle else 0j
    return BlockDecomposition(
        m=len(cycle),
        permuted_indexes=tuple(x + 1 for x in cycle),
        cyclic_indexes=tuple(x + 1 for x in fixed),
        u_p=u_p,
        u_d=np.array([u[x, x] for x in fixed], dtype=complex),
        det_up=det_up,
        matrix=u,
    )


def _eigen_index(position: int, j: int, n: int) -> int:
    # rho_j carries lambda_{(x - (j - 1)) mod N} at basis position x
    return (position - (j - 1)) % n


def _check(d: BlockDecomposition, family: OrthogonalFamily, seq) -> SequenceSpec:
    if d.dim != family.dim:
        raise DimensionMismatch("decomposition and family differ in dimension")
    return SequenceSpec.parse(seq, family.dim)


def diagonal_part(d: BlockDecomposition, family: OrthogonalFamily, seq) -> complex:
    """``D = sum over cyclic k of (U_kk)^l (lambda_{k_1} ... lambda_{k_l})^(1/l)``."""
    spec = _check(d, family, seq)
    n, l = family.dim, spec.l
    lam = family.spectrum
    total = 0j
    for k, ukk in zip(d.cyclic_indexes, d.u_d):
        x = k - 1
        roots = [lam[_eigen_index(x, j, n)] ** (1.0 / l) for j in spec.indexes]
        total += ukk ** l * float(np.prod(roots))
    return total


def f_terms(d: BlockDecomposition, family: OrthogonalFamily, seq) -> list[float]:
    """The ``m`` nonnegative terms ``A_1, ..., A_m`` whose sum is ``f``.

    With ``W^j = U_g^(m) rho_j^(1/l)`` (the phase-free cycle acting on the
    root), ``A_i = W^{j_1}_{i,i+1} W^{j_2}_{i+1,i+2} ... W^{j_l}_{i+l-1,i}``
    with cycle positions taken mod ``m``. Reverting ``U_g^(m)`` shifts the
    row index by one, so ``A_i`` is the product of root eigenvalues of
    ``rho_{j_k}`` at cycle position ``i + k``; each such basis position is
    then traced back to a seed eigenvalue.
    """
    spec = _check(d, family, seq)
    n, l, m = family.dim, spec.l, d.m
    if m < 2 or l % m:
        raise SequenceNotMultiple(f"sequence length {l} is not a multiple of the cycle length {m}")
    lam = family.spectrum
    cycle = [a - 1 for a in d.permuted_indexes]
    terms = []
    for i in range(m):
        prod = 1.0
        for k, j in enumerate(spec.indexes, start=1):
            position = cycle[(i + k) % m]
            prod *= lam[_eigen_index(position, j, n)] ** (1.0 / l)
        terms.append(prod)
    return terms


def compute_f(d: BlockDecomposition, family: OrthogonalFamily, seq) -> float:
    return float(sum(f_terms(d, family, seq)))


def permutation_part(d: BlockDecomposition, family: OrthogonalFamily, seq) -> complex:
    """``P = [(-1)^(m-1) det u_p]^K f`` for ``l = K m``; exactly zero otherwise."""
    spec = _check(d, family, seq)
    if d.m < 2 or spec.l % d.m:
        return 0j
    return complex(d.prefactor ** (spec.l // d.m) * compute_f(d, family, spec))


def fast_trace(d: BlockDecomposition, family: OrthogonalFamily, seq) -> complex:
    """``Tr(U rho_{j_1}^(1/l) ... U rho_{j_l}^(1/l)) = D + P``."""
    return diagonal_part(d, family, seq) + permutation_part(d, family, seq)


def full_cycle(n: int) -> np.ndarray:
    """The SU(N) full permutation ``|psi_k> -> |psi_{k-1}>`` (``|psi_1> -> |psi_N>``).

    The cycle has sign ``(-1)^(N-1)``, so one entry carries that sign to make
    the determinant one.
    """
    u = np.zeros((n, n), dtype=complex)
    cols = np.arange(n)
    u[(cols - 1) % n, cols] = 1
    u[n - 1, 0] = (-1) ** (n - 1)
    return u


def gamma_parity(n: int, family: OrthogonalFamily, seq,
                 tol: ToleranceConfig = DEFAULT_TOLERANCES) -> PhaseResult:
    """Order-``N`` phase for a full permutation in SU(N): ``-1`` for even ``N``, ``+1`` for odd.

    Raises :class:`IndeterminatePhase` when ``f`` for the sequence vanishes,
    which happens for some orderings of rank-deficient states.
    """
    if n != family.dim:
        raise DimensionMismatch(f"n={n} but the family has dimension {family.dim}")
    spec = SequenceSpec.parse(seq, n)
    if spec.l != n:
        raise InvalidSequence("the parity law concerns sequences of all N states")
    d = decompose(full_cycle(n), tol=tol)
    f = compute_f(d, family, spec)
    if f <= tol.definedness:
        raise IndeterminatePhase(f"f = {f:.3g} vanishes for sequence {spec.indexes}")
    sign = -1.0 if n % 2 == 0 else 1.0
    return phase_factor(sign * f, tol).with_metadata(method="perm-engine")

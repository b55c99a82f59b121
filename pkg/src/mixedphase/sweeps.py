"""Grid sweeps that regenerate the qubit figure data.

Each sweep returns plain rows ordered by grid index, plus node or jump loci
where applicable. Grid points are independent; ``jobs > 1`` evaluates them
in worker processes without changing the output order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Iterable, Sequence

from .linalg import DEFAULT_TOLERANCES, ToleranceConfig
from .phases import nodal_eta, projection_jumps, projection_sweep, sign_change_loci
from .purification import (
    extract_phase,
    fringe,
    l1_recipe,
    l2_recipe,
    pair_family,
    purify,
)
from .errors import ValidationError
from .transport import polarization_rotation


def parallel_map(fn: Callable, items: Sequence, jobs: int = 1) -> list:
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def nodal_rows(fidelities: Iterable[float], omegas: Iterable[float]
               ) -> list[tuple[float, float, float | None]]:
    """``(F_B, Omega, eta_node)`` over the product grid; ``eta_node`` is ``None`` without a node."""
    omegas = [float(w) for w in omegas]
    rows = [(float(f), w, nodal_eta(float(f), w)) for f in fidelities for w in omegas]
    if not rows:
        raise ValidationError("fidelity and omega grids must be nonempty")
    return rows


@dataclass(frozen=True)
class FransonPoint:
    beta: float
    visibility: float
    phase: float | None
    trace: complex


def franson_point(beta: float, r: float, theta: float, order: int, n_chi: int = 16,
                  tol: ToleranceConfig = DEFAULT_TOLERANCES) -> FransonPoint:
    """Simulate the fringe for one rotation angle and read off visibility and phase."""
    family = pair_family(r, tol)
    state = purify(family)
    u = polarization_rotation(beta, theta)
    if order == 1:
        arms = l1_recipe(family, u, 1)
    elif order == 2:
        arms = l2_recipe(family, u, 1, 2)
    else:
        raise ValidationError("order must be 1 or 2")
    v, phi = extract_phase(fringe(state, arms, n_chi), tol)
    trace = 0j if phi is None else v * complex(math.cos(phi), math.sin(phi))
    return FransonPoint(float(beta), v, phi, trace)


def _franson_real(beta, r, theta, order, tol):
    return franson_point(beta, r, theta, order, tol=tol).trace.real


def franson_sweep(r: float, betas: Sequence[float], theta: float, order: int, *,
                  jobs: int = 1, xtol: float = 1e-9,
                  tol: ToleranceConfig = DEFAULT_TOLERANCES) -> tuple[list[FransonPoint], list[float]]:
    """Fringe readout over ``betas`` and the sign changes of the (real) trace."""
    if not 0 <= r <= 1:
        raise ValidationError(f"polarization degree r={r} outside [0, 1]")
    betas = [float(b) for b in betas]
    if not betas:
        raise ValidationError("beta grid is empty")
    points = parallel_map(partial(franson_point, r=r, theta=theta, order=order, tol=tol),
                          betas, jobs)
    values = {p.beta: p.trace.real for p in points}

    def real_trace(beta):
        if beta in values:
            return values[beta]
        return _franson_real(beta, r, theta, order, tol)

    loci = sign_change_loci(real_trace, betas, zero=tol.definedness, xtol=xtol)
    return points, loci


def projection_rows(lambda1: float, theta: float, deltas: Sequence[float], *,
                    xtol: float = 1e-9, tol: ToleranceConfig = DEFAULT_TOLERANCES
                    ) -> tuple[list[tuple[float, float | None]], list[float]]:
    if not 0.5 < lambda1 <= 1:
        raise ValidationError("lambda1 must lie in (0.5, 1]")
    spectrum = (lambda1, 1.0 - lambda1)
    deltas = [float(d) for d in deltas]
    rows = projection_sweep(spectrum, theta, deltas, tol)
    return rows, projection_jumps(spectrum, theta, deltas, tol=tol, xtol=xtol)

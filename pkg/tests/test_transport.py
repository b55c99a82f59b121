import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from mixedphase.errors import NotParallelTransporting, NotSpecialUnitary, ValidationError
from mixedphase.linalg import SIGMA_X, SIGMA_Y, SIGMA_Z, exp_hermitian
from mixedphase.randomized import FourierGenerator, random_transport_path, random_unitary
from mixedphase.transport import (
    GeneratorPath,
    constant_path,
    integrate,
    polarization_generator,
    polarization_path,
    polarization_rotation,
    qubit_descriptor,
    transport_residual,
)

import oracles


def reference_endpoint(path, rtol=1e-12):
    """``i dU/ds = U J(s)`` solved by an adaptive Runge-Kutta scheme."""
    n = path.dim

    def rhs(s, y):
        u = y.reshape(n, n)
        return (-1j * u @ path.sampler(s)).reshape(-1)

    sol = solve_ivp(rhs, (path.s0, path.s1), np.eye(n, dtype=complex).reshape(-1),
                    method="DOP853", rtol=rtol, atol=rtol)
    return sol.y[:, -1].reshape(n, n)


def test_zero_generator():
    p = integrate(constant_path(np.zeros((2, 2))), 8)
    np.testing.assert_allclose(p.endpoint, np.eye(2))
    assert transport_residual(p) == 0


def test_constant_sigma_x():
    p = integrate(constant_path(math.pi / 2 * SIGMA_X), 64)
    np.testing.assert_allclose(p.endpoint, oracles.expm_hermitian(SIGMA_X, math.pi / 2), atol=1e-13)
    assert abs(p.endpoint[0, 0]) < 1e-13
    assert transport_residual(p) <= 1e-10


def test_diagonal_generator_rejected():
    path = constant_path(SIGMA_Z)
    with pytest.raises(NotParallelTransporting):
        integrate(path, 8)
    p = integrate(path, 8, validate=False)
    assert abs(transport_residual(p) - 1) < 1e-12


def test_traceful_generator_rejected():
    with pytest.raises(NotParallelTransporting):
        integrate(constant_path(np.eye(2) + SIGMA_X), 4)


def test_random_qubit_path_residual(rng):
    basis = np.eye(2)
    path = GeneratorPath(basis, lambda s: math.sin(3 * s) * SIGMA_X + (1 + s * s) * SIGMA_Y)
    p = integrate(path, 256)
    assert transport_residual(p) < 1e-10
    np.testing.assert_allclose(p.endpoint, reference_endpoint(path), atol=1e-5)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_endpoints_special_unitary(n, rng):
    for _ in range(5):
        p = integrate(random_transport_path(n, rng), 64)
        assert abs(np.linalg.det(p.endpoint) - 1) < 1e-9
        assert np.max(np.abs(p.endpoint.conj().T @ p.endpoint - np.eye(n))) < 1e-12


def test_qubit_matrix_structure(rng):
    for _ in range(10):
        u = integrate(random_transport_path(2, rng, basis=np.eye(2)), 64).endpoint
        eta = abs(u[0, 0])
        assert abs(u[0, 0] - u[1, 1].conj()) < 1e-9
        assert abs(u[0, 1] * u[1, 0] - (-1 + eta ** 2)) < 1e-9


def test_second_order_convergence(rng):
    path = random_transport_path(3, rng, modes=2)
    ref = reference_endpoint(path)
    errs = [np.max(np.abs(integrate(path, k).endpoint - ref)) for k in (16, 32, 64)]
    assert errs[0] / errs[1] >= 3.5
    assert errs[1] / errs[2] >= 3.5


def test_propagator_at_interpolates(rng):
    path = random_transport_path(2, rng)
    p = integrate(path, 100)
    np.testing.assert_allclose(p.at(path.s1), p.endpoint)
    np.testing.assert_allclose(p.at(0.5), p.nodes[50])
    ref = reference_endpoint(GeneratorPath(path.basis, path.sampler, 0.0, 0.503))
    # second-order error at 100 steps sits near 1e-5 for these generators
    assert np.max(np.abs(p.at(0.503) - ref)) < 1e-4
    with pytest.raises(ValidationError):
        p.at(1.5)


def test_negative_control_diagonal_weight(rng):
    path = random_transport_path(3, rng, diagonal_weight=0.3)
    with pytest.raises(NotParallelTransporting):
        integrate(path, 32)
    assert transport_residual(integrate(path, 32, validate=False)) > 1e-8


def test_bad_steps():
    with pytest.raises(ValidationError):
        integrate(constant_path(SIGMA_X), 0)


def test_fourier_generator_off_diagonal_in_basis(rng):
    b = random_unitary(4, rng)
    j = FourierGenerator(b, rng)(0.37)
    np.testing.assert_allclose(np.diag(b.conj().T @ j @ b), 0, atol=1e-14)
    np.testing.assert_allclose(j, j.conj().T, atol=1e-14)


# --- polarization rotation -----------------------------------------------

def test_polarization_identity():
    np.testing.assert_allclose(polarization_rotation(0, 1.3), np.eye(2))


def test_polarization_flip():
    u = polarization_rotation(math.pi, math.pi / 2)
    np.testing.assert_allclose(u, -1j * SIGMA_Y, atol=1e-15)
    assert abs(u[0, 0]) < 1e-15


def test_polarization_to_circular():
    u = polarization_rotation(math.pi / 2, 0)
    assert abs(abs(u[0, 0]) - math.cos(math.pi / 4)) < 1e-15
    out = u @ np.array([1, 0])
    # equal weights on h and v with a quarter-wave relative phase
    assert abs(abs(out[0]) - abs(out[1])) < 1e-15
    assert abs(out[1] / out[0] - (-1j)) < 1e-15


@pytest.mark.parametrize("beta,theta", [(0.3, 0.1), (2.0, 4.0), (7.0, -1.0)])
def test_polarization_matches_exponential(beta, theta):
    want = exp_hermitian(polarization_generator(beta, theta), 1.0)
    np.testing.assert_allclose(polarization_rotation(beta, theta), want, atol=1e-14)
    p = integrate(polarization_path(beta, theta), 16)
    np.testing.assert_allclose(p.endpoint, want, atol=1e-13)


# --- qubit descriptor ------------------------------------------------------

def test_descriptor_examples():
    assert qubit_descriptor(np.eye(2)) == (1.0, 0.0)
    eta, omega = qubit_descriptor(exp_hermitian(SIGMA_X, math.pi / 3))
    assert abs(eta - 0.5) < 1e-15 and abs(omega) < 1e-15
    eta, omega = qubit_descriptor(np.diag(np.exp([-1j * math.pi / 4, 1j * math.pi / 4])))
    assert abs(eta - 1) < 1e-15 and abs(omega - math.pi / 2) < 1e-15


def test_descriptor_node_and_errors():
    eta, omega = qubit_descriptor(-1j * SIGMA_X)
    assert eta < 1e-15 and omega is None
    with pytest.raises(NotSpecialUnitary):
        qubit_descriptor(SIGMA_X)


def test_descriptor_respects_basis(rng):
    b = random_unitary(2, rng)
    u = oracles.su2(0.6, 0.4, 1.0)
    eta, omega = qubit_descriptor(b @ u @ b.conj().T, b)
    assert abs(eta - 0.6) < 1e-12 and abs(omega + 0.8) < 1e-12

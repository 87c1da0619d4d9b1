"""Smoke tests for the python bindings: a quick pass over every exposed
operation on a small model."""

import numpy as np
import pytest

import bpod


@pytest.fixture(scope="module")
def model():
    return bpod.OsSquireModel(alpha=1.0, beta=1.0, Re=800.0, N=24)


def test_grid_and_quadrature():
    y = bpod.chebyshev_points(16)
    assert y[0] == pytest.approx(1.0)
    assert y[-1] == pytest.approx(-1.0)
    assert np.all(np.diff(y) < 0)

    w = bpod.quadrature_weights(16)
    assert w.sum() == pytest.approx(2.0, abs=1e-12)
    assert np.all(w > 0)

    d1 = bpod.diff_matrix(16, 1)
    assert np.abs(d1 @ np.ones(17)).max() < 1e-12

    with pytest.raises(ValueError):
        bpod.chebyshev_points(7)


def test_model_structure(model):
    n = model.state_dim
    assert model.A.shape == (n, n)
    split = model.A_conv + model.A_diff / model.reynolds
    assert np.abs(model.A - split).max() == 0.0
    # stable at these parameters
    eigs = bpod.spectrum(model.A)
    assert max(e.real for e in eigs) < 0.0


def test_adjoint_identity(model):
    rng = np.random.default_rng(3)
    n = model.state_dim
    adj = model.adjoint()
    M = model.M_weight
    for _ in range(3):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        lhs = np.vdot(model.A @ x, M @ z)
        rhs = np.vdot(x, M @ (adj @ z))
        assert abs(lhs - rhs) < 1e-10 * np.linalg.norm(x) * np.linalg.norm(z)


def test_velocity_recovery_divergence_free(model):
    rng = np.random.default_rng(4)
    x = rng.standard_normal(model.state_dim) + 1j * rng.standard_normal(model.state_dim)
    u, v, w = model.recover_velocities(x)
    d1 = bpod.diff_matrix(len(model.grid_points) - 1, 1)
    div = 1j * 1.0 * u + d1 @ v + 1j * 1.0 * w
    assert np.abs(div).max() < 1e-9 * max(1.0, np.abs(v).max())


def test_propagate_and_pod_bpod(model):
    x0, _, growth, _, gmax = model.optimal_perturbation()
    assert growth[0] == pytest.approx(1.0, abs=1e-9)
    assert gmax >= 1.0

    dt = bpod.stable_dt(model.A)
    times = np.arange(120) * 50 * dt
    X, _, _ = bpod.propagate(model.A, x0, dt, times)

    modes, values, total = bpod.pod(X, model.E_weight)
    assert values[0] > 0 and total > 0
    assert np.all(np.diff(values) <= 1e-12)
    gram = modes.conj().T @ model.E_weight @ modes
    assert np.abs(gram - np.eye(gram.shape[0])).max() < 1e-8

    # adjoint data for a 2-mode output projection
    adj = model.adjoint()
    Minv_E = np.linalg.solve(model.M_weight, model.E_weight)
    Y = np.hstack(
        [bpod.propagate(adj, Minv_E @ modes[:, j], dt, times)[0] for j in range(2)]
    )
    phi, psi, hsv = bpod.bpod(X, Y, model.M_weight, r=8)
    biorth = psi.conj().T @ model.M_weight @ phi
    assert np.abs(biorth - np.eye(biorth.shape[0])).max() < 1e-8
    assert np.all(np.diff(hsv) <= 1e-12)


def test_exact_bt_and_galerkin_match_transfer(model):
    rng = np.random.default_rng(5)
    n = model.state_dim
    b = rng.standard_normal((n, 1)) + 1j * rng.standard_normal((n, 1))

    bt = bpod.exact_balanced_truncation(model, b, 6)
    assert bt["hsv"][0] > 0
    assert np.abs(bt["psi"].conj().T @ bt["phi"] - np.eye(6)).max() < 1e-8

    # full-rank Galerkin projection reproduces the transfer function
    X = rng.standard_normal((n, 3 * n)) + 1j * rng.standard_normal((n, 3 * n))
    modes, _, _ = bpod.pod(X, np.eye(n))
    cmap = rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n))
    Ar, Br, Cr, _, _ = bpod.reduce_dense(
        model.A,
        model.A_conv,
        model.A_diff,
        b,
        model.reynolds,
        modes,
        np.zeros((0, 0), dtype=complex),
        np.eye(n),
        n,
        cmap,
    )
    omegas = np.array([0.1, 1.0, 3.0])
    full = bpod.frequency_response(model.A, b, cmap, omegas)
    rom = bpod.frequency_response(Ar, Br, Cr, omegas)
    assert np.abs(full - rom).max() < 1e-7 * np.abs(full).max()


def test_error_norm_and_trace(model):
    rng = np.random.default_rng(6)
    n = model.state_dim
    y = rng.standard_normal((3, 10)) + 1j * rng.standard_normal((3, 10))
    t = np.linspace(0.0, 1.0, 10)
    assert bpod.impulse_error_2norm(y, y, t) == 0.0

    basis = rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3))
    T = bpod.subspace_trace(basis, basis, model.E_weight)
    assert T == pytest.approx(3.0, abs=1e-9)


def test_gaussian_actuator_shape():
    v = bpod.gaussian_actuator(8, 16, 8)
    assert v.shape == (64, 17)
    ic = (8 // 2) * 8 + 8 // 2
    assert v[ic, 8] == pytest.approx(2.0)  # center, y = 0

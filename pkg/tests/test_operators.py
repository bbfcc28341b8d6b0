import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from penalized_mhd.geometry import build_grid
from penalized_mhd.operators import (
    SparseOps, cell_to_face, curl, curl2_scal, curl2_vec, curl3, curl3_adjoint, curl_adjoint, div,
    face_to_cell, face_to_edge, edge_to_face_adjoint, gaffney_ratio, grad, l2, remove_divergence,
    solve_poisson_fft, sym_grad, viscous_dissipation, viscous_force,
)

N = 8
finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
cell_fields = arrays(np.float64, (N, N), elements=finite)
face_fields = arrays(np.float64, (2, N, N), elements=finite)


@given(cell_fields)
def test_grad_matches_loop_oracle(f):
    np.testing.assert_allclose(grad(f, 0.3), oracles.grad2(f, 0.3), rtol=1e-13, atol=1e-12)


@given(face_fields)
def test_div_matches_loop_oracle(F):
    np.testing.assert_allclose(div(F, 0.3), oracles.div2(F, 0.3), rtol=1e-13, atol=1e-12)


@given(face_fields)
def test_curl_matches_loop_oracle(H):
    np.testing.assert_allclose(curl2_vec(H, 0.3), oracles.curl2(H, 0.3), rtol=1e-13, atol=1e-11)
    np.testing.assert_allclose(curl(H, 0.3)[0], curl2_vec(H, 0.3))


@given(cell_fields)
def test_div_grad_is_five_point_laplacian(f):
    np.testing.assert_allclose(div(grad(f, 0.5), 0.5), oracles.laplacian5(f, 0.5), atol=1e-10)


@given(arrays(np.float64, (N, N), elements=finite))
def test_div_curl_scal_vanishes(psi):
    assert np.max(np.abs(div(curl2_scal(psi, 0.25), 0.25))) <= 1e-14 * max(1.0, np.max(np.abs(psi))) * 16


def test_constant_fields_annihilated():
    h = 0.1
    assert np.all(grad(np.full((N, N), 3.0), h) == 0)
    F = np.ones((2, N, N)) * np.array([2.0, -1.0])[:, None, None]
    assert np.all(div(F, h) == 0)
    assert np.all(curl(F, h) == 0)
    assert gaffney_ratio(F, h) == 0.0


def test_adjointness_against_dense_matrices():
    h = 0.25
    G = oracles.dense_matrix(lambda v: grad(v.reshape(N, N), h), N * N)
    D = oracles.dense_matrix(lambda v: div(v.reshape(2, N, N), h), 2 * N * N)
    np.testing.assert_allclose(D, -G.T, atol=1e-13)
    C = oracles.dense_matrix(lambda v: curl(v.reshape(2, N, N), h), 2 * N * N)
    Ct = oracles.dense_matrix(lambda v: curl_adjoint(v.reshape(1, N, N), h), N * N)
    np.testing.assert_allclose(Ct, C.T, atol=1e-13)
    A = oracles.dense_matrix(lambda v: np.concatenate(face_to_edge(v.reshape(2, N, N), (0, 1))).ravel(),
                             2 * N * N)
    At = oracles.dense_matrix(lambda v: np.stack([edge_to_face_adjoint(v[:N * N].reshape(N, N), 1),
                                                  edge_to_face_adjoint(v[N * N:].reshape(N, N), 0)]),
                              2 * N * N)
    np.testing.assert_allclose(At, A.T, atol=1e-15)


def test_sparse_matrices_match_stencils():
    g = build_grid(2, 1.0, N)
    ops = SparseOps(g)
    rng = np.random.default_rng(0)
    f = rng.standard_normal((N, N))
    F = rng.standard_normal((2, N, N))
    np.testing.assert_allclose(ops.grad @ f.ravel(), grad(f, g.h).ravel(), atol=1e-12)
    np.testing.assert_allclose(ops.div @ F.ravel(), div(F, g.h).ravel(), atol=1e-12)
    np.testing.assert_allclose(ops.curl @ F.ravel(), curl(F, g.h).ravel(), atol=1e-12)


def test_viscous_stiffness_energy_identity():
    g = build_grid(2, 1.0, N)
    rng = np.random.default_rng(1)
    nu, lam = 0.1 + rng.random((N, N)), rng.random((N, N))
    u = rng.standard_normal((2, N, N))
    K = SparseOps(g).viscous_stiffness(nu, lam)
    quad = u.ravel() @ (K @ u.ravel())
    assert quad * g.cell_volume == pytest.approx(viscous_dissipation(u, nu, lam, g.h), rel=1e-12)
    np.testing.assert_allclose(-(K @ u.ravel()), viscous_force(u, nu, lam, g.h).ravel(), atol=1e-10)
    assert abs((K - K.T)).max() < 1e-10


def test_grad_sine_second_order():
    errs = []
    for n in (64, 128):
        g = build_grid(2, 1.0, n)
        X = g.cell_centers()
        Xf = g.face_centers(0)
        e = grad(np.sin(np.pi * X[0]), g.h)[0] - np.pi * np.cos(np.pi * Xf[0])
        errs.append(np.max(np.abs(e)))
    assert errs[1] < errs[0] / 3.8
    assert errs[1] <= 2 * (2.0 / 128) ** 2 * np.pi ** 3


def test_grad_sawtooth_exact_away_from_seam():
    h = 0.1
    f = np.add.outer(np.arange(N) * h, np.zeros(N))
    gx = grad(f, h)[0]
    np.testing.assert_allclose(gx[:-1], 1.0)


def test_curl_of_rotation_field():
    errs = []
    for n in (64, 128):
        g = build_grid(2, np.pi, n)
        H = np.stack([-np.sin(g.face_centers(0)[1]), np.sin(g.face_centers(1)[0])])
        C = g.edge_centers(0, 1)
        errs.append(np.max(np.abs(curl2_vec(H, g.h) - (np.cos(C[0]) + np.cos(C[1])))))
    assert errs[1] < errs[0] / 3.8


def test_sym_grad_examples():
    errs = []
    for n in (64, 128):
        g = build_grid(2, np.pi, n)
        u = np.stack([-np.sin(g.face_centers(0)[1]), np.sin(g.face_centers(1)[0])])
        X = g.cell_centers()
        D = sym_grad(u, g.h)
        assert np.max(np.abs(D[0, 0])) < 1e-12 and np.max(np.abs(D[1, 1])) < 1e-12
        errs.append(np.max(np.abs(D[0, 1] - 0.5 * (np.cos(X[0]) - np.cos(X[1])))))
    assert errs[1] < errs[0] / 3.5
    h = 0.1
    assert np.all(sym_grad(np.ones((2, N, N)), h) == 0)
    u = np.zeros((2, N, N))
    u[0] = np.add.outer(np.arange(N) * h, np.zeros(N))
    np.testing.assert_allclose(sym_grad(u, h)[0, 0][1:], 1.0)


def test_3d_curl_forms():
    rng = np.random.default_rng(2)
    n, h = 8, 0.25
    H = rng.standard_normal((3, n, n, n))
    E = rng.standard_normal((3, n, n, n))
    assert np.sum(curl3(H, h) * E) == pytest.approx(np.sum(H * curl3_adjoint(E, h)), rel=1e-12)
    assert np.max(np.abs(div(curl3_adjoint(E, h), h))) < 1e-12


def test_averaging_preserves_constants():
    c = np.full((N, N), 2.5)
    np.testing.assert_allclose(cell_to_face(c), 2.5)
    np.testing.assert_allclose(face_to_cell(np.full((2, N, N), -1.0)), -1.0)


def test_fft_poisson_and_cleanup():
    g = build_grid(2, 1.0, 16)
    rng = np.random.default_rng(4)
    r = rng.standard_normal((16, 16))
    phi = solve_poisson_fft(r, g.h)
    np.testing.assert_allclose(div(grad(phi, g.h), g.h), r - r.mean(), atol=1e-10)
    B = remove_divergence(rng.standard_normal((2, 16, 16)), g.h)
    assert np.max(np.abs(div(B, g.h))) < 1e-10


def test_gaffney_of_smooth_gradient_is_order_one():
    g = build_grid(2, 1.0, 64)
    X = g.cell_centers()
    f = np.sin(np.pi * X[0]) * np.cos(2 * np.pi * X[1])
    r = gaffney_ratio(grad(f, g.h), g.h)
    assert np.isfinite(r) and 0 < r < 5


def test_l2_norm():
    assert l2(np.ones((4, 4)), 0.5, 2) == pytest.approx(2.0)
    assert l2([np.ones((4, 4)), np.ones((4, 4))], 0.5, 2) == pytest.approx(np.sqrt(8.0))

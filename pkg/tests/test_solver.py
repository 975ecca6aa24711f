import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cylgrating.errors import AnomalyError, NoConvergenceError, SingularSystemError, TruncationError
from cylgrating.isolated import isolated_coefficients
from cylgrating.lattice import lattice_sum_table
from cylgrating.medium import (
    GratingConfig,
    anomaly_margin,
    derive_polarization_constants,
    derive_wavenumbers,
    incident_mode_amplitude,
)
from cylgrating.solver import (
    LinearSystem,
    build_system,
    converged_truncation,
    solve_direct,
    solve_exact,
    solve_neumann,
)


def cfg_(kra=0.05, ratio=0.1, theta=math.pi / 3, phi=0.4, eps=2.25, mu=1.0):
    return GratingConfig.from_dimensionless(kra, ratio, theta, phi, eps, mu)


def test_vacuum_gives_zero():
    for N in (0, 3):
        t = solve_exact(cfg_(eps=1.0), N)
        assert np.abs(t.vector).max() < 1e-14


def test_matrix_entry_for_A0_in_second_row_family():
    cfg = cfg_()
    sys_ = build_system(cfg, 2)
    K = 5
    a0 = sys_.coeffs.a_eps[sys_.coeffs.index(0)]
    I0 = sys_.sums[0]
    assert sys_.matrix[K + 2, 2] == pytest.approx(-(1 + a0 * I0), rel=1e-15)


def test_hand_assembled_N1_system():
    cfg = cfg_(kra=0.2, ratio=0.2, eps=3.0, mu=1.5)
    wn = derive_wavenumbers(cfg)
    pol = derive_polarization_constants(cfg, wn)
    co = isolated_coefficients(cfg, wn, pol, 1)
    I = lattice_sum_table(wn, 2)
    E = incident_mode_amplitude(cfg, wn, np.arange(-1, 2))
    M = np.zeros((6, 6), complex)
    b = np.zeros(6, complex)
    for i, n in enumerate((-1, 0, 1)):
        k = co.index(n)
        for j, m in enumerate((-1, 0, 1)):
            Inm = I[n - m]
            delta = 1.0 if n == m else 0.0
            M[i, j] = co.b_mu[k] * delta + co.b_mu[k] * co.c[k] * Inm
            M[i, 3 + j] = delta + co.a_mu[k] * Inm
            M[3 + i, j] = -delta - co.a_eps[k] * Inm
            M[3 + i, 3 + j] = co.b_eps[k] * delta + co.b_eps[k] * co.c[k] * Inm
        b[i] = -co.b_mu[k] * co.c[k] * E[i]
        b[3 + i] = co.a_eps[k] * E[i]
    sys_ = build_system(cfg, 1)
    assert np.allclose(sys_.matrix, M, rtol=1e-14, atol=0)
    assert np.allclose(sys_.rhs, b, rtol=1e-14, atol=0)
    t = solve_direct(sys_)
    assert np.allclose(t.vector, np.linalg.solve(M, b), rtol=1e-10, atol=1e-16)


def test_normal_incidence_reduces_to_scalar_problem():
    cfg = cfg_(kra=0.3, ratio=0.15, theta=math.pi / 2, eps=2.25)
    N = 4
    wn = derive_wavenumbers(cfg)
    pol = derive_polarization_constants(cfg, wn)
    co = isolated_coefficients(cfg, wn, pol, N)
    I = lattice_sum_table(wn, 2 * N)
    n = np.arange(-N, N + 1)
    a = co.a_eps[n + N]
    T = I[n[:, None] - n[None, :]]
    E = incident_mode_amplitude(cfg, wn, n)
    # A + a (T A) = -a E
    expected = np.linalg.solve(np.eye(2 * N + 1) + a[:, None] * T, -a * E)
    t = solve_exact(cfg, N)
    assert np.allclose(t.A, expected, rtol=1e-11, atol=1e-18)
    assert np.abs(t.AH).max() < 1e-15 * np.abs(t.A).max() + 1e-30


@settings(max_examples=25, deadline=None)
@given(
    st.floats(1e-3, 0.5),
    st.floats(0.02, 0.4),
    st.floats(0.3, math.pi / 2),
    st.floats(-1.2, 1.2),
    st.floats(1.0, 6.0),
)
def test_direct_residual_small(kra, ratio, theta, phi, eps):
    try:
        cfg = cfg_(kra=kra, ratio=ratio, theta=theta, phi=phi, eps=eps)
    except AnomalyError:
        assume(False)
    assume(anomaly_margin(cfg) > 1e-2)
    t = solve_exact(cfg, 4)
    assert t.residual <= 1e-10


@pytest.mark.parametrize("kra,ratio,eps,mu", [(0.005, 0.05, 2.25, 1.0), (0.02, 0.1, 4.0, 1.5), (0.01, 0.08, 3.0, 2.0)])
def test_neumann_agrees_with_direct(kra, ratio, eps, mu):
    sys_ = build_system(cfg_(kra=kra, ratio=ratio, eps=eps, mu=mu), 6)
    d = solve_direct(sys_)
    n = solve_neumann(sys_)
    assert np.abs(d.vector - n.vector).max() <= 1e-10 * np.abs(d.vector).max()
    assert n.neumann_iters > 1


def test_neumann_vacuum_single_iteration():
    t = solve_neumann(build_system(cfg_(eps=1.0), 3))
    assert t.neumann_iters == 1


def test_neumann_divergence_is_reported():
    # large cylinders near the first Rayleigh condition: the iteration grows
    cfg = GratingConfig.from_dimensionless(4.105 * 0.45, 0.45, math.pi / 3, math.pi / 6, 2.25)
    sys_ = build_system(cfg, 6)
    with pytest.raises(NoConvergenceError):
        solve_neumann(sys_)
    assert solve_direct(sys_).residual <= 1e-10


def test_truncation_convergence():
    cfg = cfg_(kra=0.01)
    t = converged_truncation(cfg, tol=1e-12)
    assert t.N <= 16
    smaller = t.restrict(t.N // 2)
    ref = solve_exact(cfg, t.N // 2)
    assert np.abs(smaller.A - ref.A).max() <= 1e-12 * np.abs(t.A).max()
    with pytest.raises(TruncationError):
        converged_truncation(cfg, tol=0.0)
    assert converged_truncation(cfg_(eps=1.0), base_N=4).N == 8


def test_singular_matrix_raises():
    sys_ = LinearSystem(0, np.zeros((2, 2), complex), np.ones(2, complex))
    with pytest.raises(SingularSystemError):
        solve_direct(sys_)
    sys_ = LinearSystem(0, np.array([[1, 1], [1, 1 + 1e-15]], complex), np.ones(2, complex))
    with pytest.raises(SingularSystemError):
        solve_direct(sys_)


def test_table_helpers():
    t = solve_exact(cfg_(), 3)
    assert t.get(7) == (0j, 0j)
    assert t.get(-2) == (t.A[1], t.AH[1])
    assert t.restrict(1).A.shape == (3,)
    with pytest.raises(ValueError):
        solve_exact(cfg_(), 2, method="gmres")

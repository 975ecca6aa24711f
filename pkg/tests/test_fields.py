import math

import numpy as np
import pytest

from cylgrating.errors import DomainError, NumericalError
from cylgrating.fields import default_field_order, eval_exterior_fields, max_sum_order
from cylgrating.medium import GratingConfig, derive_wavenumbers
from cylgrating.solver import solve_exact
from oracles import plane_wave


def cfg_(kra=0.1, ratio=0.1, theta=math.pi / 3, phi=0.4, eps=2.25, mu=1.0):
    return GratingConfig.from_dimensionless(kra, ratio, theta, phi, eps, mu)


def grid(cfg, frac=0.75, n=11):
    x, y = np.meshgrid(np.linspace(-frac, frac, n) * cfg.d, np.linspace(-frac, frac, n) * cfg.d)
    R = np.hypot(x, y)
    keep = (R > 1.05 * cfg.a) & (R < frac * cfg.d)
    return x[keep], y[keep]


def test_vacuum_reproduces_plane_wave():
    cfg = cfg_(eps=1.0, kra=0.05, ratio=0.04)
    wn = derive_wavenumbers(cfg)
    t = solve_exact(cfg, 3)
    x, y = np.meshgrid(np.linspace(-20, 20, 21) * cfg.a, np.linspace(-20, 20, 21) * cfg.a)
    R = np.hypot(x, y)
    keep = (R > 1.01 * cfg.a) & (R < 20 * cfg.a)
    z = 0.37
    f = eval_exterior_fields(cfg, wn, t, None, x[keep], y[keep], z=z)
    ref = math.sin(cfg.theta_i) * plane_wave(wn.kr, wn.psi_i, x[keep], y[keep]) * np.exp(-1j * wn.kz * z)
    assert np.abs(f.Ez - ref).max() < 1e-12
    assert np.abs(f.Hz).max() < 1e-12


def test_normal_incidence_has_no_axial_magnetic_field():
    cfg = cfg_(theta=math.pi / 2)
    t = solve_exact(cfg, 4)
    x, y = grid(cfg)
    f = eval_exterior_fields(cfg, None, t, None, x, y)
    assert np.abs(f.Hz).max() <= 1e-14 * np.abs(f.Ez).max()


@pytest.mark.parametrize("s", [1, -2])
def test_frame_phase_factor(s):
    cfg = cfg_()
    t = solve_exact(cfg, 4)
    wn = derive_wavenumbers(cfg)
    x, y = grid(cfg)
    f0 = eval_exterior_fields(cfg, wn, t, None, x, y)
    fs = eval_exterior_fields(cfg, wn, t, None, x, y, s=s)
    ph = np.exp(1j * wn.kr * s * wn.d * math.sin(wn.psi_i))
    assert np.allclose(fs.Ez, ph * f0.Ez, rtol=1e-14, atol=0)


@pytest.mark.parametrize("krd,ratio,eps", [(1.0, 0.1, 2.25), (0.3, 0.2, 4.0), (2.0, 0.15, 2.25)])
def test_neighbouring_frames_agree(krd, ratio, eps):
    # the same physical point seen from cylinder 0 and from cylinder 1 at y = d
    cfg = cfg_(kra=krd * ratio, ratio=ratio, eps=eps)
    wn = derive_wavenumbers(cfg)
    t = solve_exact(cfg, 8)
    x = np.array([0.3, -0.25, 0.4]) * cfg.d
    y = np.array([0.5, 0.45, 0.55]) * cfg.d
    f0 = eval_exterior_fields(cfg, wn, t, None, x, y)
    f1 = eval_exterior_fields(cfg, wn, t, None, x, y - cfg.d, s=1)
    scale = np.abs(f0.Ez).max()
    assert np.abs(f0.Ez - f1.Ez).max() <= 1e-9 * scale
    assert np.abs(f0.Hz - f1.Hz).max() <= 1e-9 * max(np.abs(f0.Hz).max(), 1e-300)


def test_field_order_convergence():
    cfg = cfg_(kra=0.2, ratio=0.2)
    wn = derive_wavenumbers(cfg)
    t = solve_exact(cfg, 6)
    x, y = grid(cfg)
    f = eval_exterior_fields(cfg, wn, t, None, x, y)
    g = eval_exterior_fields(cfg, wn, t, None, x, y, n_field=f.n_field + 10)
    assert np.abs(f.Ez - g.Ez).max() <= 1e-11 * np.abs(g.Ez).max()
    assert f.n_field == default_field_order(wn, np.hypot(x, y).max())
    assert f.truncation_estimate < 1e-12


def test_points_near_spacing_report_truncation():
    cfg = cfg_(kra=0.1, ratio=0.1)
    t = solve_exact(cfg, 4)
    f = eval_exterior_fields(cfg, None, t, None, [0.0], [0.95 * cfg.d])
    assert f.n_field == max_sum_order(1.0) - 4
    assert 1e-12 < f.truncation_estimate < 1e-2
    assert np.isfinite(f.Ez).all()
    with pytest.raises(NumericalError):
        eval_exterior_fields(cfg, None, t, None, [0.0], [0.5 * cfg.d], n_field=400)


def test_domain_errors():
    cfg = cfg_()
    t = solve_exact(cfg, 3)
    with pytest.raises(DomainError):
        eval_exterior_fields(cfg, None, t, None, [0.5 * cfg.a], [0.0])
    with pytest.raises(DomainError):
        eval_exterior_fields(cfg, None, t, None, [1.2 * cfg.d], [0.0])

"""Physical configuration of the grating and the quantities derived from it."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants

from .errors import AnomalyError, BranchPointError, ConfigError, DegenerateMediumError

__all__ = [
    "GratingConfig",
    "DerivedWavenumbers",
    "PolarizationConstants",
    "derive_wavenumbers",
    "derive_polarization_constants",
    "incident_mode_amplitude",
    "anomaly_margin",
]

UNITS_MODES = ("normalized", "SI")


@dataclass(frozen=True)
class GratingConfig:
    """Grating of identical dielectric cylinders lit by an oblique E-polarized plane wave.

    Cylinder ``s`` is centred at ``(x, y) = (0, s*d)``.  Angles are in radians:
    ``theta_i`` is measured from the cylinder axis, ``phi_i`` in the x-y plane
    (the wave travels along ``psi_i = pi + phi_i``).
    """

    lambda0: float
    theta_i: float
    phi_i: float
    eps_r: float
    a: float
    d: float
    mu_r: float = 1.0
    E0: complex = 1.0
    units_mode: str = "normalized"

    def __post_init__(self):
        for name in ("lambda0", "theta_i", "phi_i", "eps_r", "mu_r", "a", "d"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite, got {value!r}")
        if self.lambda0 <= 0:
            raise ConfigError("lambda0 must be > 0")
        if self.a <= 0 or self.d <= 0:
            raise ConfigError("radius a and spacing d must be > 0")
        if not self.a / self.d < 0.5:
            raise ConfigError(
                f"a/d = {self.a / self.d:.6g} violates xi = a/d < 1/2 (cylinders would touch)"
            )
        if not 0 < self.theta_i <= math.pi / 2 + 1e-15:
            raise ConfigError("theta_i must lie in (0, pi/2]")
        if self.eps_r <= 0 or self.mu_r <= 0:
            raise ConfigError("eps_r and mu_r must be > 0")
        if self.units_mode not in UNITS_MODES:
            raise ConfigError(f"units_mode must be one of {UNITS_MODES}")
        if self.eps_r * self.mu_r == cos_theta(self.theta_i) ** 2:
            raise BranchPointError("eps_r * mu_r == cos^2(theta_i) gives k_1 = 0")
        if anomaly_margin(self) < 1e-12:
            raise AnomalyError("configuration lies on a grating anomaly")

    @classmethod
    def from_dimensionless(cls, kra, a_over_d, theta_i, phi_i, eps_r, mu_r=1.0, **kw):
        """Build a config from k_r a and a/d, with lambda0 = 1."""
        kr = 2 * math.pi * math.sin(theta_i)
        a = kra / kr
        return cls(lambda0=1.0, theta_i=theta_i, phi_i=phi_i, eps_r=eps_r, mu_r=mu_r,
                   a=a, d=a / a_over_d, **kw)

    def replace(self, **changes):
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return type(self)(**fields)


@dataclass(frozen=True)
class DerivedWavenumbers:
    k0: float
    kr: float
    kz: float
    k1: float
    Delta: float
    xi: float
    psi_i: float
    a: float
    d: float

    @property
    def kra(self):
        return self.kr * self.a

    @property
    def krd(self):
        return self.kr * self.d

    @property
    def k1a(self):
        return self.k1 * self.a

    @property
    def ratio(self):
        """k_r / k_1."""
        return self.kr / self.k1


@dataclass(frozen=True)
class PolarizationConstants:
    F: float
    D: float
    s_em: float
    s_me: float
    s_xi_plus: complex
    s_xi_minus: complex
    s_eta_plus: complex
    s_eta_minus: complex
    s0_em: complex
    eta0: float
    xi0: float


def cos_theta(theta_i):
    """cos(theta_i) with the rounding residue at 90 degrees removed (cos(pi/2) is 6e-17)."""
    c = math.cos(theta_i)
    return 0.0 if abs(c) < 1e-15 else c


def anomaly_margin(cfg_or_wn):
    """Distance to the nearest grating anomaly.

    An anomaly is Delta(1 +/- sin psi_i) equal to a positive integer, or
    grazing incidence 1 +/- sin psi_i = 0.  Values of Delta(1 +/- sin psi_i)
    near zero are the ordinary long-wavelength regime, not an anomaly.
    """
    if isinstance(cfg_or_wn, GratingConfig):
        kr = 2 * math.pi / cfg_or_wn.lambda0 * math.sin(cfg_or_wn.theta_i)
        delta = kr * cfg_or_wn.d / (2 * math.pi)
        psi = math.pi + cfg_or_wn.phi_i
    else:
        delta, psi = cfg_or_wn.Delta, cfg_or_wn.psi_i
    s = math.sin(psi)
    out = []
    for g in (1 + s, 1 - s):
        v = delta * g
        out.append(abs(v - max(1, round(v))))
        out.append(g)
    return min(out)


def derive_wavenumbers(cfg):
    """k0, kr, kz, k1, Delta, xi and psi_i for a configuration."""
    k0 = 2 * math.pi / cfg.lambda0
    kr = k0 * math.sin(cfg.theta_i)
    kz = k0 * cos_theta(cfg.theta_i)
    arg = cfg.eps_r * cfg.mu_r - cos_theta(cfg.theta_i) ** 2
    if arg <= 0:
        raise BranchPointError(
            f"eps_r*mu_r - cos^2(theta_i) = {arg:.3g} <= 0: k_1 would be zero or imaginary"
        )
    if kr <= 0:
        raise ConfigError("k_r = k0 sin(theta_i) must be > 0")
    return DerivedWavenumbers(
        k0=k0,
        kr=kr,
        kz=kz,
        k1=k0 * math.sqrt(arg),
        Delta=kr * cfg.d / (2 * math.pi),
        xi=cfg.a / cfg.d,
        psi_i=math.pi + cfg.phi_i,
        a=cfg.a,
        d=cfg.d,
    )


def derive_polarization_constants(cfg, wn):
    """Cross-polarization constant F, the denominator D and the s-constants."""
    if cfg.units_mode == "SI":
        eta0 = math.sqrt(constants.mu_0 / constants.epsilon_0)
    else:
        eta0 = 1.0
    xi0 = 1.0 / eta0
    er, mr = cfg.eps_r, cfg.mu_r
    cos_t = cos_theta(cfg.theta_i)
    F = (mr * er - 1) * cos_t / (mr * er - cos_t**2)
    q = wn.ratio**2
    D = (1 + er * q) * (1 + mr * q) - F**2
    if D == 0:
        raise DegenerateMediumError("D = 0 for this medium")
    return PolarizationConstants(
        F=F,
        D=D,
        s_em=(1 - er * q) * (1 + mr * q) + F**2,
        s_me=(1 - mr * q) * (1 + er * q) + F**2,
        s_xi_plus=2j * xi0 * F,
        s_xi_minus=-2j * xi0 * F,
        s_eta_plus=-2j * eta0 * F,
        s_eta_minus=2j * eta0 * F,
        s0_em=1j * math.pi / 4 * (er - 1),
        eta0=eta0,
        xi0=xi0,
    )


def incident_mode_amplitude(cfg, wn, n):
    """E_n^i = sin(theta_i) E0 exp(-i n psi_i); ``n`` may be an array."""
    n = np.asarray(n)
    out = math.sin(cfg.theta_i) * cfg.E0 * np.exp(-1j * n * wn.psi_i)
    return out if out.ndim else complex(out)

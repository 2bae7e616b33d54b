"""Cross-section properties, deformation measures, stress resultants,
energies, inertia forces and momenta.

Material frame convention: component 1 is the axial direction, so the
constitutive diagonals read C_F = diag(EA, GA2, GA3),
C_M = diag(GI_T, EI2, EI3) and C_rho = diag(rhoI_P, rhoI2, rhoI3).
"""

from dataclasses import dataclass, field

import numpy as np

from . import interp


@dataclass(frozen=True)
class Section:
    EA: float
    GA2: float
    GA3: float
    GI_T: float
    EI2: float
    EI3: float
    rhoA: float = 0.0
    rhoI2: float = 0.0
    rhoI3: float = 0.0
    rhoIP: float = field(default=None)  # defaults to rhoI2 + rhoI3

    def __post_init__(self):
        for name in ("EA", "GA2", "GA3", "GI_T", "EI2", "EI3"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"section stiffness {name} must be positive")
        if self.rhoIP is None:
            object.__setattr__(self, "rhoIP", self.rhoI2 + self.rhoI3)

    @property
    def C_F(self):
        return np.diag([self.EA, self.GA2, self.GA3])

    @property
    def C_M(self):
        return np.diag([self.GI_T, self.EI2, self.EI3])

    @property
    def C_rho(self):
        return np.diag([self.rhoIP, self.rhoI2, self.rhoI3])


def standard_section(R, E=1.0, G=0.5, rho=0.0):
    """Standard benchmark parameter set: square section of side R,
    A = R^2, I2 = I3 = R^4/12, I_T = R^4/6 (beam length l = 1000 lives
    in the benchmark definitions, not here)."""
    A = R * R
    I2 = I3 = R**4 / 12.0
    IT = R**4 / 6.0
    return Section(EA=E * A, GA2=G * A, GA3=G * A,
                   GI_T=G * IT, EI2=E * I2, EI3=E * I3,
                   rhoA=rho * A, rhoI2=rho * I2, rhoI3=rho * I3)


# ----------------------------------------------------------------- strains

def reissner_gamma(lam, r_prime, lam0=None, r0_prime=None):
    """Material translational strain Gamma = Lambda^T r' - Lambda0^T r0'.

    With the initial configuration omitted, the straight reference
    Gamma0 = E1 is used."""
    g = np.einsum("...ji,...j->...i", lam, r_prime)
    if lam0 is None:
        g0 = np.zeros_like(g)
        g0[..., 0] = 1.0
    else:
        g0 = np.einsum("...ji,...j->...i", lam0, r0_prime)
    return g - g0


def curvature_omega(K, K0=None):
    """Material bending/torsion strain Omega = K - K0."""
    return K if K0 is None else K - K0


def kirchhoff_axial(r_prime):
    """Axial strain eps = |r'| - 1 (complex-analytic norm)."""
    n2 = np.sum(r_prime * r_prime, axis=-1)
    if np.any(n2.real <= 0.0):
        raise ValueError("zero centerline tangent")
    return np.sqrt(n2) - 1.0


MCS_CPS = np.array([-1.0, 1.0, 0.0])  # collocation points, element order


def mcs_axial(eps_cp, xi):
    """Re-interpolated axial strain: quadratic Lagrange combination of the
    collocation-point values eps_cp (ordered like MCS_CPS) at xi."""
    L, _ = interp.lagrange_shape(np.asarray(xi, float), MCS_CPS)
    return np.sum(L * eps_cp, axis=-1)


# ------------------------------------------------------------- constitutive

def constitutive_reissner(gamma, omega, section):
    """Material stress resultants and stored energy density."""
    F = gamma * np.array([section.EA, section.GA2, section.GA3])
    M = omega * np.array([section.GI_T, section.EI2, section.EI3])
    energy = 0.5 * (np.sum(gamma * F, axis=-1) + np.sum(omega * M, axis=-1))
    return F, M, energy


def constitutive_kirchhoff(eps, omega, section):
    """Axial force F1 = EA eps (eps possibly re-interpolated), moments and
    stored energy density of the Kirchhoff constitutive law."""
    F1 = section.EA * eps
    M = omega * np.array([section.GI_T, section.EI2, section.EI3])
    energy = 0.5 * (eps * F1 + np.sum(omega * M, axis=-1))
    return F1, M, energy


# ------------------------------------------------------------------ inertia

def inertia_terms(rddot, W, A, lam, section):
    """Distributed inertia force and moment (spatial):
    -f_rho = rhoA r''_t ,  -m_rho = Lambda [S(W) C_rho W + C_rho A]."""
    f_rho = -section.rhoA * rddot
    crho = np.array([section.rhoIP, section.rhoI2, section.rhoI3])
    inner = np.cross(W, crho * W) + crho * A
    m_rho = -np.einsum("...ij,...j->...i", lam, inner)
    return f_rho, m_rho


def kinetic_energy_density(rdot, W, section):
    crho = np.array([section.rhoIP, section.rhoI2, section.rhoI3])
    return 0.5 * (section.rhoA * np.sum(rdot * rdot, axis=-1)
                  + np.sum(W * (crho * W), axis=-1))


def momenta(r, rdot, lam, W, wJ, section):
    """Total linear and angular momentum by quadrature.

    r, rdot, lam, W sampled at quadrature points with combined weights
    wJ (Gauss weight times Jacobian); angular momentum taken about the
    origin: h = int (Lambda C_rho W + r x rhoA rdot) ds."""
    l_spec = section.rhoA * rdot
    crho = np.array([section.rhoIP, section.rhoI2, section.rhoI3])
    h_spec = np.einsum("...ij,...j->...i", lam, crho * W) + np.cross(r, l_spec)
    l_tot = np.sum(wJ[..., None] * l_spec, axis=tuple(range(l_spec.ndim - 1)))
    h_tot = np.sum(wJ[..., None] * h_spec, axis=tuple(range(h_spec.ndim - 1)))
    return l_tot, h_tot

"""Lie-group generalized-alpha time integration.

One-step scheme with Newmark-type translational updates and a
multiplicative rotational update based on the material step increment
Theta = axial(log(Lambda_n^T Lambda_{n+1})).  All terms of the weak form
are evaluated at t_{n+1}; modified accelerations carry the alpha
weighting.  For alpha_m = alpha_f = 0 the scheme degenerates to the
Lie-group Newmark variant.
"""

from dataclasses import dataclass

import numpy as np

from . import so3


class RotationIncrementTooLarge(Exception):
    """A per-step rotation increment reached pi."""


@dataclass(frozen=True)
class GenAlphaParams:
    dt: float
    alpha_m: float
    alpha_f: float
    beta: float
    gamma: float
    rho_inf: float = None

    @property
    def coeffs(self):
        """Update coefficients: x in (u | Theta),
        v_{n+1} = cv_u x + cv_v v_n + cv_am amod_n
        a_{n+1} = ca_u x + ca_v v_n + ca_am amod_n + ca_a a_n."""
        dt, am, af, b, g = self.dt, self.alpha_m, self.alpha_f, self.beta, self.gamma
        return dict(
            cv_u=g / (b * dt),
            cv_v=1.0 - g / b,
            cv_am=dt * (1.0 - g / (2.0 * b)),
            ca_u=(1.0 - am) / (b * dt**2 * (1.0 - af)),
            ca_v=-(1.0 - am) / (b * dt * (1.0 - af)),
            ca_am=-(1.0 - am) * (0.5 - b) / (b * (1.0 - af)) + am / (1.0 - af),
            ca_a=-af / (1.0 - af),
        )


def derive_params(rho_inf, dt):
    """Standard spectral-radius parametrization of the generalized-alpha
    family: alpha_m = (2 rho - 1)/(rho + 1), alpha_f = rho/(rho + 1),
    gamma = 1/2 + alpha_f - alpha_m, beta = (gamma + 1/2)^2 / 4."""
    if not 0.0 <= rho_inf <= 1.0:
        raise ValueError("rho_inf must lie in [0, 1]")
    am = (2.0 * rho_inf - 1.0) / (rho_inf + 1.0)
    af = rho_inf / (rho_inf + 1.0)
    g = 0.5 + af - am
    b = 0.25 * (g + 0.5) ** 2
    return GenAlphaParams(dt=dt, alpha_m=am, alpha_f=af, beta=b, gamma=g,
                          rho_inf=rho_inf)


def newmark_params(dt, beta=0.25, gamma=0.5):
    """Lie-group Newmark special case (alpha_m = alpha_f = 0)."""
    return GenAlphaParams(dt=dt, alpha_m=0.0, alpha_f=0.0, beta=beta, gamma=gamma)


def update_rates(params, x, v_n, a_n, amod_n):
    """Velocity and acceleration at t_{n+1} from the step increment x
    (translational u or material rotation increment Theta), batched."""
    c = params.coeffs
    v = c["cv_u"] * x + c["cv_v"] * v_n + c["cv_am"] * amod_n
    a = c["ca_u"] * x + c["ca_v"] * v_n + c["ca_am"] * amod_n + c["ca_a"] * a_n
    return v, a


def advance_modified(params, a_new, a_n, amod_n):
    """Modified-acceleration recursion:
    (1-am) amod_{n+1} + am amod_n = (1-af) a_{n+1} + af a_n."""
    am, af = params.alpha_m, params.alpha_f
    return ((1.0 - af) * a_new + af * a_n - am * amod_n) / (1.0 - am)


def step_rotation_increment(lam_n, lam_new, limit=np.pi):
    """Material rotation increment Theta = axial(log(Lam_n^T Lam_{n+1})).

    Raises RotationIncrementTooLarge when any increment reaches the
    limit (too-large rotation per time step)."""
    theta = so3.log_map(np.swapaxes(lam_n, -1, -2) @ lam_new)
    ang = np.sqrt(np.sum(theta.real**2, axis=-1))
    if np.any(ang >= limit - 1e-12):
        raise RotationIncrementTooLarge(
            f"rotation increment {float(np.max(ang)):.3f} rad in one step")
    return theta

"""Rotation-group kernel.

Exponential / logarithm maps on SO(3), the tangent operator T and its
inverse, the smallest-rotation (SR) mapping and the four-parameter
(tangent, relative angle) transformation matrices.

Conventions
-----------
* A triad Lambda is a 3x3 matrix whose columns (g1, g2, g3) form a
  right-handed orthonormal frame.
* exp_map follows the Rodrigues formula; log_map extracts the rotation
  vector with norm in [0, pi] via Spurrier's quaternion algorithm. For a
  rotation by exactly pi the axis sign is chosen such that the axis
  component of largest magnitude is positive.
* The tangent operator maps multiplicative (spin) increments onto
  additive rotation-vector increments: dpsi = T(psi) dtheta, and
  dtheta = T^-1(psi) dpsi.

All functions accept arrays with arbitrary leading batch dimensions and
are written complex-analytically (norms via sqrt(v.v), branches selected
on real parts), so residuals built on top of them can be differentiated
by complex-step perturbations.
"""

import numpy as np


SMALL_ANGLE = 1e-4     # series branch below this rotation angle
TOL_SR = 1e-8          # smallest-rotation singularity guard


class SingularSR(Exception):
    """Smallest-rotation mapping close to its 180-degree singularity."""


class FirstAxisMismatch(Exception):
    """relative_angle called on triads whose first axes differ."""


def skew(v):
    """Skew-symmetric matrix S(v) with S(v) w = v x w, batched."""
    v = np.asarray(v)
    S = np.zeros(v.shape[:-1] + (3, 3), dtype=v.dtype)
    S[..., 0, 1] = -v[..., 2]
    S[..., 0, 2] = v[..., 1]
    S[..., 1, 0] = v[..., 2]
    S[..., 1, 2] = -v[..., 0]
    S[..., 2, 0] = -v[..., 1]
    S[..., 2, 1] = v[..., 0]
    return S


def axial(S):
    """Axial vector of a (skew-symmetric part of a) matrix, batched."""
    S = np.asarray(S)
    return 0.5 * np.stack([S[..., 2, 1] - S[..., 1, 2],
                           S[..., 0, 2] - S[..., 2, 0],
                           S[..., 1, 0] - S[..., 0, 1]], axis=-1)


def _norm(v):
    # complex-analytic 2-norm (no abs); valid for real + small imaginary parts
    return np.sqrt(np.sum(v * v, axis=-1))


def _safe_div(num, den, fallback, use_series):
    den_safe = np.where(use_series, 1.0, den)
    return np.where(use_series, fallback, num / den_safe)


def exp_map(psi):
    """Rodrigues formula: rotation triad of the rotation vector psi."""
    psi = np.asarray(psi, dtype=np.result_type(psi, float))
    phi2 = np.sum(psi * psi, axis=-1)
    phi = np.sqrt(phi2)
    small = phi.real < SMALL_ANGLE
    # sin(phi)/phi and (1-cos(phi))/phi^2 with series fallback
    a = _safe_div(np.sin(phi), phi, 1.0 - phi2 / 6.0 + phi2 * phi2 / 120.0, small)
    b = _safe_div(1.0 - np.cos(phi), phi2, 0.5 - phi2 / 24.0 + phi2 * phi2 / 720.0, small)
    S = skew(psi)
    I = np.broadcast_to(np.eye(3, dtype=S.dtype), S.shape)
    return I + a[..., None, None] * S + b[..., None, None] * (S @ S)


def quat_from_triad(R):
    """Unit quaternion (q0, q1, q2, q3) of a triad, Spurrier's algorithm.

    Batched; the branch with the largest pivot is selected per sample so
    near-pi rotations keep full precision.
    """
    R = np.asarray(R, dtype=np.result_type(R, float))
    tr = R[..., 0, 0] + R[..., 1, 1] + R[..., 2, 2]
    diag = np.stack([R[..., 0, 0], R[..., 1, 1], R[..., 2, 2]], axis=-1)
    # candidate 0: trace pivot
    arg0 = 1.0 + tr
    # candidates i: diagonal pivot
    argi = 1.0 + 2.0 * diag - tr[..., None]
    best = np.argmax(diag.real, axis=-1)
    use_tr = tr.real >= np.max(diag.real, axis=-1)

    q = np.zeros(R.shape[:-2] + (4,), dtype=R.dtype)
    s0 = 0.5 * np.sqrt(np.where(use_tr, arg0, 1.0))
    q0 = np.where(use_tr, s0, 0.0)
    qv = np.zeros(R.shape[:-2] + (3,), dtype=R.dtype)
    off = np.stack([R[..., 2, 1] - R[..., 1, 2],
                    R[..., 0, 2] - R[..., 2, 0],
                    R[..., 1, 0] - R[..., 0, 1]], axis=-1)
    denom0 = np.where(use_tr, 4.0 * s0, 1.0)
    qv = np.where(use_tr[..., None], off / denom0[..., None], qv)

    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        sel = (~use_tr) & (best == i)
        si = 0.5 * np.sqrt(np.where(sel, argi[..., i], 1.0))
        deni = np.where(sel, 4.0 * si, 1.0)
        q0 = np.where(sel, (R[..., k, j] - R[..., j, k]) / deni, q0)
        comp = np.zeros_like(qv)
        comp[..., i] = si
        comp[..., j] = (R[..., j, i] + R[..., i, j]) / deni
        comp[..., k] = (R[..., k, i] + R[..., i, k]) / deni
        qv = np.where(sel[..., None], comp, qv)

    q[..., 0] = q0
    q[..., 1:] = qv
    return q


def log_map(R):
    """Rotation vector psi with ||psi|| in [0, pi] such that exp(S(psi)) = R."""
    q = quat_from_triad(R)
    q0 = q[..., 0]
    qv = q[..., 1:]
    # global sign so that q0 >= 0, i.e. angle in [0, pi]
    flip = q0.real < 0.0
    q0 = np.where(flip, -q0, q0)
    qv = np.where(flip[..., None], -qv, qv)
    s = _norm(qv)                      # sin(phi/2)
    # angle: arctan branch away from pi, arccos branch near pi
    near_pi = q0.real < 0.5
    q0_safe = np.where(near_pi, 1.0, q0)
    phi = np.where(near_pi,
                   2.0 * np.arccos(np.where(near_pi, q0, 0.0)),
                   2.0 * np.arctan(s / q0_safe))
    small = phi.real < SMALL_ANGLE
    # psi = phi * qv / sin(phi/2); series: phi/sin(phi/2) ~ 2 + phi^2/12
    fac = _safe_div(phi, np.sin(0.5 * phi),
                    2.0 + phi * phi / 12.0, small)
    psi = fac[..., None] * qv
    # pi-boundary convention: largest-magnitude axis component positive
    at_pi = np.abs(q0.real) < 1e-12
    if np.any(at_pi):
        idx = np.argmax(np.abs(qv.real), axis=-1)
        comp = np.take_along_axis(qv.real, idx[..., None], axis=-1)[..., 0]
        neg = at_pi & (comp < 0.0)
        psi = np.where(neg[..., None], -psi, psi)
    return psi


def _tangent_coeffs(phi, phi2, small):
    """Coefficients for T = I - S/2 + e S^2 and T^-1 = I + b S + c S^2."""
    b = _safe_div(1.0 - np.cos(phi), phi2,
                  0.5 - phi2 / 24.0 + phi2 * phi2 / 720.0, small)
    c = _safe_div(phi - np.sin(phi), phi2 * np.where(small, 1.0, phi),
                  1.0 / 6.0 - phi2 / 120.0 + phi2 * phi2 / 5040.0, small)
    # e = (1 - (phi/2) cot(phi/2)) / phi^2
    sin_h = np.sin(0.5 * phi)
    cos_h = np.cos(0.5 * phi)
    e = _safe_div(1.0 - 0.5 * phi * cos_h / np.where(small, 1.0, sin_h), phi2,
                  1.0 / 12.0 + phi2 / 720.0 + phi2 * phi2 / 30240.0, small)
    return b, c, e


def tangent_op(psi):
    """T(psi) with dpsi = T dtheta.  Requires ||psi|| < 2 pi."""
    psi = np.asarray(psi, dtype=np.result_type(psi, float))
    phi2 = np.sum(psi * psi, axis=-1)
    phi = np.sqrt(phi2)
    small = phi.real < SMALL_ANGLE
    _, _, e = _tangent_coeffs(phi, phi2, small)
    S = skew(psi)
    I = np.broadcast_to(np.eye(3, dtype=S.dtype), S.shape)
    return I - 0.5 * S + e[..., None, None] * (S @ S)


def tangent_op_inv(psi):
    """T^-1(psi) with dtheta = T^-1 dpsi."""
    psi = np.asarray(psi, dtype=np.result_type(psi, float))
    phi2 = np.sum(psi * psi, axis=-1)
    phi = np.sqrt(phi2)
    small = phi.real < SMALL_ANGLE
    b, c, _ = _tangent_coeffs(phi, phi2, small)
    S = skew(psi)
    I = np.broadcast_to(np.eye(3, dtype=S.dtype), S.shape)
    return I + b[..., None, None] * S + c[..., None, None] * (S @ S)


def tangent_op_inv_prime(psi, psi_prime):
    """Arc-length derivative d/ds [T^-1(psi(s))] given psi and psi'.

    Differentiates the closed form T^-1 = I + b(phi) S + c(phi) S^2.
    For phi -> 0 the limit is 0.5 S(psi').
    """
    psi = np.asarray(psi, dtype=np.result_type(psi, psi_prime, float))
    psi_prime = np.asarray(psi_prime, dtype=psi.dtype)
    phi2 = np.sum(psi * psi, axis=-1)
    phi = np.sqrt(phi2)
    small = phi.real < SMALL_ANGLE
    b, c, _ = _tangent_coeffs(phi, phi2, small)
    # db/dphi and dc/dphi, with series near zero
    phi_s = np.where(small, 1.0, phi)
    db = _safe_div(phi * np.sin(phi) - 2.0 * (1.0 - np.cos(phi)), phi2 * phi_s,
                   -phi / 12.0 + phi * phi2 / 180.0, small)
    dc = _safe_div(3.0 * np.sin(phi) - phi * (2.0 + np.cos(phi)),
                   phi2 * phi2, -phi / 60.0 + phi * phi2 / 1260.0, small)
    # dphi/ds = psi.psi' / phi ; the products db*dphi, dc*dphi stay regular
    dot = np.sum(psi * psi_prime, axis=-1)
    dphi = _safe_div(dot, phi, 0.0 * dot, small)
    # near zero, db*dphi and dc*dphi -> 0 like phi; series path uses dot directly
    db_dphi = np.where(small, -dot / 12.0, db * dphi)
    dc_dphi = np.where(small, -dot / 60.0, dc * dphi)
    S = skew(psi)
    Sp = skew(psi_prime)
    return (db_dphi[..., None, None] * S + b[..., None, None] * Sp
            + dc_dphi[..., None, None] * (S @ S)
            + c[..., None, None] * (Sp @ S + S @ Sp))


def smallest_rotation(lam_bar, g1, tol=TOL_SR):
    """Triad with first axis g1, reached from lam_bar by the smallest rotation.

    Raises SingularSR when 1 + g1_bar . g1 <= tol for any sample.
    """
    lam_bar = np.asarray(lam_bar, dtype=np.result_type(lam_bar, g1, float))
    g1 = np.asarray(g1, dtype=lam_bar.dtype)
    gb1 = lam_bar[..., :, 0]
    gb2 = lam_bar[..., :, 1]
    gb3 = lam_bar[..., :, 2]
    denom = 1.0 + np.sum(gb1 * g1, axis=-1)
    if np.any(denom.real <= tol):
        raise SingularSR("smallest rotation near 180-degree singularity")
    axis_sum = g1 + gb1
    g2 = gb2 - (np.sum(g1 * gb2, axis=-1) / denom)[..., None] * axis_sum
    g3 = gb3 - (np.sum(g1 * gb3, axis=-1) / denom)[..., None] * axis_sum
    return np.stack([g1, g2, g3], axis=-1)


def relative_angle(lam, lam_m, tol=1e-10):
    """Angle phi in (-pi, pi] with exp(S(phi g1)) lam_m = lam.

    Both triads must share their first column; at the +-pi boundary the
    convention phi = +pi is returned.
    """
    lam = np.asarray(lam, dtype=np.result_type(lam, lam_m, float))
    lam_m = np.asarray(lam_m, dtype=lam.dtype)
    g1 = lam[..., :, 0]
    mis = np.max(np.abs(g1.real - lam_m[..., :, 0].real))
    if mis > tol:
        raise FirstAxisMismatch(f"first axes differ by {mis:.3e}")
    rel = lam @ np.swapaxes(lam_m, -1, -2)
    q = quat_from_triad(rel)
    q0 = q[..., 0]
    y = np.sum(q[..., 1:] * g1, axis=-1)
    flip = q0.real < 0.0
    q0 = np.where(flip, -q0, q0)
    y = np.where(flip, -y, y)
    # stable half-angle form of 2*atan2(y, q0); q0^2 + y^2 = 1 here
    phi = 4.0 * np.arctan(y / (1.0 + q0))
    # boundary convention: exactly pi stays +pi
    phi = np.where(np.abs(phi.real + np.pi) < 1e-14, np.pi + 0.0 * phi, phi)
    return phi


def tan_param_transforms(t, g1_bar):
    """Transformation matrices of the 4-dof (tangent, angle) parametrization.

    Parameters: t = non-unit nodal tangent, g1_bar = first axis of the
    intermediate (SR) triad. Returns a dict with
      T_tilde      : (dtheta, dt_norm)      -> (dt, dTheta1)
      T_tilde_inv  : (dt, dTheta1)          -> (dtheta, dt_norm)
      T_M          : (dtheta, dt_norm)      -> (dt, dphi)
      T_M_inv      : (dt, dphi)             -> (dtheta, dt_norm)
    all of shape (..., 4, 4) with vector blocks first, scalar last.
    """
    t = np.asarray(t, dtype=np.result_type(t, g1_bar, float))
    g1_bar = np.asarray(g1_bar, dtype=t.dtype)
    tn = _norm(t)
    if np.any(tn.real <= 0.0):
        raise ValueError("degenerate tangent with zero norm")
    g1 = t / tn[..., None]
    denom = 1.0 + np.sum(g1 * g1_bar, axis=-1)
    if np.any(denom.real <= TOL_SR):
        raise SingularSR("tangent transformation near SR singularity")
    S1 = skew(g1)
    shape = t.shape[:-1] + (4, 4)

    def block(mat33, vec_col, vec_row, scal):
        M = np.zeros(shape, dtype=t.dtype)
        M[..., :3, :3] = mat33
        M[..., :3, 3] = vec_col
        M[..., 3, :3] = vec_row
        M[..., 3, 3] = scal
        return M

    T_tilde = block(-tn[..., None, None] * S1, g1, g1, 0.0)
    T_tilde_inv = block(S1 / tn[..., None, None], g1, g1, 0.0)
    row_phi = (g1 + g1_bar) / denom[..., None]
    T_M = block(-tn[..., None, None] * S1, g1, row_phi, 0.0)
    P = (np.broadcast_to(np.eye(3, dtype=t.dtype), S1.shape)
         - g1[..., :, None] * g1_bar[..., None, :] / denom[..., None, None])
    T_M_inv = block(P @ S1 / tn[..., None, None], g1, g1, 0.0)
    return {"T_tilde": T_tilde, "T_tilde_inv": T_tilde_inv,
            "T_M": T_M, "T_M_inv": T_M_inv}


def is_triad(R, tol=1e-12):
    """Orthonormality + det check used in tests and input validation."""
    R = np.asarray(R)
    err = np.max(np.abs(np.swapaxes(R, -1, -2) @ R - np.eye(3)))
    return bool(err < 10 * tol + 1e-12 and
                np.all(np.abs(np.linalg.det(R.real) - 1.0) < 1e-9))

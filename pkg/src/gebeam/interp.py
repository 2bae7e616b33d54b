"""Element-local field interpolation.

Centerlines: cubic Hermite (position + tangent nodes, scaled by the
element length constant c) and Lagrange polynomials of order 1..4.
Triad fields: the geodesic field built on relative rotation vectors with
respect to a reference triad (exact for constant curvature) and the
smallest-rotation (SR) mapped field with quadratic relative-angle
interpolation used by the strong Kirchhoff elements.

All evaluators broadcast over leading batch dimensions and stay
complex-analytic for complex-step differentiation.
"""

import numpy as np

from . import so3


class NoConvergence(Exception):
    pass


def gauss_rule(n):
    """Gauss-Legendre points and weights on [-1, 1]."""
    xi, w = np.polynomial.legendre.leggauss(n)
    return xi, w


# ------------------------------------------------------------------ Lagrange

def lagrange_nodes(n):
    """Equidistant nodes on [-1, 1] in the element-local ordering
    (first the two end nodes, then interior nodes from left to right)."""
    full = np.linspace(-1.0, 1.0, n)
    if n == 1:
        return np.array([0.0])
    order = [0, n - 1] + list(range(1, n - 1))
    return full[order]


def lagrange_shape(xi, nodes):
    """Lagrange polynomial values and first derivatives at xi.

    Returns (L, L_xi), each of shape xi.shape + (n,).
    """
    xi = np.asarray(xi, dtype=float)
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.size
    L = np.ones(xi.shape + (n,))
    L_xi = np.zeros(xi.shape + (n,))
    for i in range(n):
        num = np.ones_like(xi)
        dnum = np.zeros_like(xi)
        denom = 1.0
        for j in range(n):
            if j == i:
                continue
            dnum = dnum * (xi - nodes[j]) + num
            num = num * (xi - nodes[j])
            denom *= nodes[i] - nodes[j]
        L[..., i] = num / denom
        L_xi[..., i] = dnum / denom
    return L, L_xi


# ------------------------------------------------------------------- Hermite

def hermite_shape(xi, c):
    """Cubic Hermite coefficients for nodal data (d1, t1, d2, t2).

    Returns (h, h_xi, h_xixi), each of shape xi.shape + (4,), such that
    r(xi) = h0 d1 + h1 t1 + h2 d2 + h3 t2 with the tangent columns
    already scaled by the element length constant c.
    """
    xi = np.asarray(xi, dtype=float)
    u = 0.5 * (xi + 1.0)
    h00 = 2 * u**3 - 3 * u**2 + 1
    h10 = u**3 - 2 * u**2 + u
    h01 = -2 * u**3 + 3 * u**2
    h11 = u**3 - u**2
    d00 = 6 * u**2 - 6 * u
    d10 = 3 * u**2 - 4 * u + 1
    d01 = -6 * u**2 + 6 * u
    d11 = 3 * u**2 - 2 * u
    s00 = 12 * u - 6
    s10 = 6 * u - 4
    s01 = -12 * u + 6
    s11 = 6 * u - 2
    h = np.stack([h00, c * h10, h01, c * h11], axis=-1)
    # d/dxi = 0.5 d/du
    h_xi = 0.5 * np.stack([d00, c * d10, d01, c * d11], axis=-1)
    h_xixi = 0.25 * np.stack([s00, c * s10, s01, c * s11], axis=-1)
    return h, h_xi, h_xixi


def hermite_point(coeff, d1, t1, d2, t2):
    """Contract a Hermite coefficient array with nodal vectors (batched)."""
    return (coeff[..., 0, None] * d1 + coeff[..., 1, None] * t1
            + coeff[..., 2, None] * d2 + coeff[..., 3, None] * t2)


def hermite_eval(d1, t1, d2, t2, c, xi, J=None, J_xi=None):
    """Evaluate a Hermite centerline at xi.

    With J (and J_xi) of the initial geometry supplied, returns the
    arc-length derivatives r' and r''; otherwise derivatives in xi.
    """
    h, h1, h2 = hermite_shape(np.asarray(xi), c)
    r = hermite_point(h, d1, t1, d2, t2)
    r_xi = hermite_point(h1, d1, t1, d2, t2)
    r_xixi = hermite_point(h2, d1, t1, d2, t2)
    if J is None:
        return r, r_xi, r_xixi
    rp = r_xi / J[..., None]
    rpp = r_xixi / (J**2)[..., None] - r_xi * (J_xi / J**3)[..., None]
    return r, rp, rpp


def initial_jacobian(d1, t1, d2, t2, c, xi):
    """J(xi) = |r0,xi| and its xi-derivative for the initial geometry."""
    _, r_xi, r_xixi = hermite_eval(d1, t1, d2, t2, c, xi)
    J = np.sqrt(np.sum(r_xi * r_xi, axis=-1))
    J_xi = np.sum(r_xi * r_xixi, axis=-1) / J
    return J, J_xi


def element_length_fixpoint(d1, t1, d2, t2, tol=1e-12, maxit=50, n_gauss=10):
    """Element length constant c via fixed-point iteration.

    c is iterated to equal the Gauss-quadrature arc length of the Hermite
    interpolant it generates; raises NoConvergence on failure.
    """
    xi, w = gauss_rule(n_gauss)
    c = float(np.linalg.norm(np.asarray(d2, float) - np.asarray(d1, float)))
    if c <= 0.0:
        raise NoConvergence("zero-length element")
    for _ in range(maxit):
        _, r_xi, _ = hermite_eval(d1, t1, d2, t2, c, xi)
        length = float(np.sum(w * np.linalg.norm(r_xi, axis=-1)))
        if abs(length - c) <= tol * max(c, 1.0):
            return length
        c = length
    raise NoConvergence("element length fixed point did not converge")


# ------------------------------------------------------- geodesic triad field

def geodesic_refs(triads):
    """Reference triad and nodal relative rotation vectors.

    triads: (..., n, 3, 3) in the element-local node ordering of
    lagrange_nodes (ends first).  The reference is the middle node for
    odd n, the mid-rotation between the two middle nodes for even n.
    Raises ValueError when a relative rotation reaches pi.
    """
    triads = np.asarray(triads)
    n = triads.shape[-3]
    nodes = lagrange_nodes(n)
    order = np.argsort(nodes)
    mid = order[(n - 1) // 2], order[n // 2]
    lam_i = triads[..., mid[0], :, :]
    if mid[0] == mid[1]:
        lam_r = lam_i
    else:
        lam_j = triads[..., mid[1], :, :]
        phi_ij = so3.log_map(np.swapaxes(lam_i, -1, -2) @ lam_j)
        lam_r = lam_i @ so3.exp_map(0.5 * phi_ij)
    rel = np.swapaxes(lam_r, -1, -2)[..., None, :, :] @ triads
    phi_l = so3.log_map(rel)
    ang = np.sqrt(np.sum(phi_l.real**2, axis=-1))
    if np.any(ang >= np.pi - 1e-12):
        raise ValueError("relative nodal rotation >= pi in geodesic field")
    return lam_r, phi_l


def geodesic_eval(lam_r, phi_l, L, L_xi, J):
    """Triad and material curvature of the geodesic field.

    lam_r: (..., 3, 3); phi_l: (..., n, 3); L, L_xi: shape (..., n)
    evaluated at the points of interest; J: initial Jacobian there.
    Returns (lam_h, K_h) with K_h the material curvature vector.
    """
    phi = np.sum(L[..., None] * phi_l, axis=-2)
    phi_p = np.sum(L_xi[..., None] * phi_l, axis=-2) / J[..., None]
    lam_h = lam_r @ so3.exp_map(phi)
    K_h = np.einsum("...ji,...j->...i", so3.tangent_op_inv(phi), phi_p)
    return lam_h, K_h


def _vee_pair(phi_ij):
    """v^I, v^J matrices of the generalized rotational shape functions."""
    ang2 = np.sum(phi_ij * phi_ij, axis=-1)
    ang = np.sqrt(ang2)
    small = ang.real < so3.SMALL_ANGLE
    # tan(ang/4)/ang with series fallback
    fac = np.where(small, 0.25 + ang2 / 96.0,
                   np.tan(0.25 * np.where(small, 1.0, ang)) / np.where(small, 1.0, ang))
    S = so3.skew(phi_ij)
    I = np.broadcast_to(np.eye(3, dtype=S.dtype), S.shape)
    vI = 0.5 * (I + fac[..., None, None] * S)
    vJ = 0.5 * (I - fac[..., None, None] * S)
    return vI, vJ


def generalized_shape_matrices(triads, xi, J, J_xi=None):
    """Generalized rotational shape matrices I~^i(xi) and their xi-derivative.

    Consistent with the geodesic triad field: a multiplicative nodal
    perturbation dtheta^i changes the interpolated triad by
    dtheta_h(xi) = sum_i I~^i(xi) dtheta^i.  Shapes: triads (..., n, 3, 3),
    scalar xi; returns (Itil, Itil_xi) of shape (..., n, 3, 3).
    """
    triads = np.asarray(triads)
    n = triads.shape[-3]
    nodes = lagrange_nodes(n)
    lam_r, phi_l = geodesic_refs(triads)
    L, L_xi = lagrange_shape(np.asarray(xi, float), nodes)
    phi = np.sum(L[..., None] * phi_l, axis=-2)
    phi_xi = np.sum(L_xi[..., None] * phi_l, axis=-2)
    Tinv_h = so3.tangent_op_inv(phi)
    Tinv_h_xi = so3.tangent_op_inv_prime(phi, phi_xi)
    T_i = so3.tangent_op(phi_l)                       # (..., n, 3, 3)
    lam_rT = np.swapaxes(lam_r, -1, -2)

    Itil = (L[..., None, None] * (lam_r[..., None, :, :] @ Tinv_h[..., None, :, :]
                                  @ T_i @ lam_rT[..., None, :, :]))
    Itil_xi = (L_xi[..., None, None] * (lam_r[..., None, :, :] @ Tinv_h[..., None, :, :]
                                        @ T_i @ lam_rT[..., None, :, :])
               + L[..., None, None] * (lam_r[..., None, :, :] @ Tinv_h_xi[..., None, :, :]
                                       @ T_i @ lam_rT[..., None, :, :]))

    order = np.argsort(nodes)
    midI, midJ = order[(n - 1) // 2], order[n // 2]
    if midI == midJ:
        vI = vJ = 0.5 * np.broadcast_to(np.eye(3, dtype=triads.dtype), lam_r.shape)
    else:
        lam_i = triads[..., midI, :, :]
        lam_j = triads[..., midJ, :, :]
        phi_ij = so3.log_map(np.swapaxes(lam_i, -1, -2) @ lam_j)
        vI, vJ = _vee_pair(phi_ij)
    sumLT = np.sum(L[..., None, None] * T_i, axis=-3)
    sumLT_xi = np.sum(L_xi[..., None, None] * T_i, axis=-3)
    I3 = np.broadcast_to(np.eye(3, dtype=triads.dtype), lam_r.shape)
    brk = I3 - Tinv_h @ sumLT
    brk_xi = -(Tinv_h_xi @ sumLT + Tinv_h @ sumLT_xi)
    for idx, v in ((midI, vI), (midJ, vJ)):
        add = lam_r @ brk @ v @ lam_rT
        add_xi = lam_r @ brk_xi @ v @ lam_rT
        Itil[..., idx, :, :] = Itil[..., idx, :, :] + add
        Itil_xi[..., idx, :, :] = Itil_xi[..., idx, :, :] + add_xi
    return Itil, Itil_xi


# ------------------------------------------------------------- SR triad field

def centerline_curvature(rp, rpp):
    """kappa = S(r') r'' / |r'|^2 and the stretch |r'|."""
    norm2 = np.sum(rp * rp, axis=-1)
    kappa = np.cross(rp, rpp) / norm2[..., None]
    return kappa, np.sqrt(norm2)


def sr_nodal_angles(triads, lam_I, g1_nodes):
    """Relative angles of the nodal triads w.r.t. the SR intermediate field.

    triads: (..., n, 3, 3) nodal triads whose first axes equal g1_nodes;
    lam_I: (..., 3, 3) reference (center) nodal triad.
    """
    lam_m = so3.smallest_rotation(lam_I[..., None, :, :], g1_nodes)
    return so3.relative_angle(triads, lam_m)


def sr_triad_eval(lam_I, phis, L, L_xi, J, rp, rpp):
    """SR-mapped triad field with relative-angle interpolation.

    lam_I: reference nodal triad (center node); phis: (..., n) nodal
    relative angles; L, L_xi: Lagrange values at the evaluation points;
    rp, rpp: arc-length centerline derivatives there.  Returns
    (lam_h, K) with K = (K1, K2, K3) the material curvature.
    """
    kappa, stretch = centerline_curvature(rp, rpp)
    g1 = rp / stretch[..., None]
    lam_m = so3.smallest_rotation(lam_I, g1)
    phi_h = np.sum(L * phis, axis=-1)
    phi_p = np.sum(L_xi * phis, axis=-1) / J
    lam_h = so3.exp_map(phi_h[..., None] * g1) @ lam_m
    g1_I = lam_I[..., :, 0]
    denom = 1.0 + np.sum(g1 * g1_I, axis=-1)
    K_m1 = -np.sum(kappa * g1_I, axis=-1) / denom
    K1 = K_m1 + phi_p
    K2 = np.sum(lam_h[..., :, 1] * kappa, axis=-1)
    K3 = np.sum(lam_h[..., :, 2] * kappa, axis=-1)
    return lam_h, np.stack([K1, K2, K3], axis=-1)

"""Element residuals, consistent tangents and energies.

Four element families, each implemented as a mesh-level kernel that
evaluates all elements of one type in a single vectorized call:

* ReissnerMesh  -- shear-deformable reference element: Lagrange
  centerline of order 1..4 with a geodesic triad field, reduced Gauss
  integration of the internal forces, Petrov-Galerkin spin test
  functions, multiplicative nodal rotation updates.
* KirchhoffTanMesh -- strong ("sk") and weak ("wk") constraint
  enforcement with tangent-based nodal parametrization: Hermite
  centerline, nodal triads built from relative angles on top of stored
  intermediate (smallest-rotation) triads, optional Bubnov-Galerkin
  completion ("sk-cs") and selectable anti-locking policy
  {mcs, fi, ri}.
* HsrMesh -- shear-deformable hybrid: Hermite centerline plus 3-node
  geodesic triad field with re-interpolated translational strain.
* RotMesh -- rotation-vector nodal parametrization obtained from a
  tangent-based element by the analytic transformation
  r_ROT = T~^T r_TAN, k_ROT = H~(r_TAN) + T~^T k_TAN T_M.

All state-dependent code paths are complex-analytic; consistent
tangents are computed by complex-step differentiation of the residual
through the exact configuration update maps (additive for positions,
tangents and relative angles, multiplicative for triads).
"""

from dataclasses import dataclass, replace

import numpy as np

from . import beamcore, interp, so3, timeint


H_CSTEP = 1e-150      # complex-step perturbation size

XI_NODES = np.array([-1.0, 1.0, 0.0])   # element-local node/CP positions


@dataclass
class ElementOutput:
    residual: np.ndarray
    stiffness: np.ndarray
    energy: float


@dataclass
class DynState:
    """Per-Gauss-point dynamic history of one element family (time t_n)."""
    params: timeint.GenAlphaParams
    r: np.ndarray        # (E, G, 3) centerline positions
    v: np.ndarray        # (E, G, 3) velocities
    a: np.ndarray        # (E, G, 3) accelerations
    amod: np.ndarray     # (E, G, 3) modified accelerations
    lam: np.ndarray      # (E, G, 3, 3) triads
    W: np.ndarray        # (E, G, 3) material angular velocities
    A: np.ndarray        # (E, G, 3) material angular accelerations
    Amod: np.ndarray     # (E, G, 3) modified angular accelerations


@dataclass
class DirectAccel:
    """Directly prescribed acceleration fields (initial-acceleration solve)."""
    rddot: np.ndarray    # (E, G, 3)
    W: np.ndarray        # (E, G, 3)
    A: np.ndarray        # (E, G, 3)


def _outer(coeff, vec):
    """Row-block outer product: coeff (..., P, 4) x vec (..., P, 3) ->
    (..., P, 4, 3) Hermite test-function rows."""
    return coeff[..., :, None] * vec[..., None, :]


def _dots(a, b):
    return np.sum(a * b, axis=-1)


class _ElementMesh:
    """Shared machinery: complex-step tangent and dynamic bookkeeping."""

    ndof = None

    # families implement: _evaluate(state, dyn) -> dict(res, eint, ekin),
    # perturb(state, dv), _dyn_fields(state) -> (r_h, lam_h) at the
    # inertia Gauss points.

    def residual(self, state, dyn=None):
        return self._evaluate(state, dyn)["res"]

    def energy(self, state, dyn=None):
        ev = self._evaluate(state, dyn)
        return ev["eint"], ev["ekin"]

    def tangent(self, state, dyn=None, h=H_CSTEP):
        """Residual and consistent tangent of every element.

        Complex-step differentiation through the exact update maps; the
        returned stiffness k[e, i, j] = d res_i / d (increment_j)."""
        dv = (1j * h) * np.eye(self.ndof)[:, None, :]
        res = self._evaluate(self.perturb(state, dv), dyn)["res"]
        k = np.moveaxis(res.imag, 0, -1) / h
        return res[0].real, k

    # ----------------------------------------------------------- dynamics

    def _inertia(self, r_h, lam_h, dyn):
        """Distributed inertia force/moment at the inertia Gauss points."""
        if isinstance(dyn, DirectAccel):
            return beamcore.inertia_terms(dyn.rddot, dyn.W, dyn.A, lam_h,
                                          self.section)
        p = dyn.params
        u = r_h - dyn.r
        _, rddot = timeint.update_rates(p, u, dyn.v, dyn.a, dyn.amod)
        theta = timeint.step_rotation_increment(dyn.lam, lam_h)
        W, A = timeint.update_rates(p, theta, dyn.W, dyn.A, dyn.Amod)
        return beamcore.inertia_terms(rddot, W, A, lam_h, self.section)

    def _rates(self, r_h, lam_h, dyn):
        p = dyn.params
        u = r_h - dyn.r
        rdot, rddot = timeint.update_rates(p, u, dyn.v, dyn.a, dyn.amod)
        theta = timeint.step_rotation_increment(dyn.lam, lam_h)
        W, A = timeint.update_rates(p, theta, dyn.W, dyn.A, dyn.Amod)
        return rdot, rddot, W, A

    def dyn_init(self, state, params):
        """History at rest (zero rates); nonzero initial accelerations are
        handled by the solver via the DirectAccel mass solve."""
        r_h, lam_h = self._dyn_fields(state)
        z = np.zeros(r_h.shape)
        return DynState(params=params, r=r_h.real.copy(), v=z.copy(),
                        a=z.copy(), amod=z.copy(), lam=lam_h.real.copy(),
                        W=z.copy(), A=z.copy(), Amod=z.copy())

    def dyn_advance(self, state, dyn):
        """History at t_{n+1} from the converged configuration."""
        r_h, lam_h = self._dyn_fields(state)
        rdot, rddot, W, A = self._rates(r_h, lam_h, dyn)
        amod = timeint.advance_modified(dyn.params, rddot, dyn.a, dyn.amod)
        Amod = timeint.advance_modified(dyn.params, A, dyn.A, dyn.Amod)
        return DynState(params=dyn.params, r=r_h.real, v=rdot.real,
                        a=rddot.real, amod=amod.real, lam=lam_h.real,
                        W=W.real, A=A.real, Amod=Amod.real)

    def dyn_quantities(self, state, dyn):
        """Kinetic energy and total momenta at t_{n+1}."""
        r_h, lam_h = self._dyn_fields(state)
        rdot, _, W, _ = self._rates(r_h, lam_h, dyn)
        wJ = self.w_dyn * self.J_dyn
        ek = np.sum(wJ * beamcore.kinetic_energy_density(rdot, W, self.section))
        l_tot, h_tot = beamcore.momenta(r_h, rdot, lam_h, W, wJ, self.section)
        return float(ek.real), l_tot.real, h_tot.real

    def _kinetic(self, r_h, lam_h, dyn):
        if isinstance(dyn, DirectAccel):
            return 0.0
        rdot, _, W, _ = self._rates(r_h, lam_h, dyn)
        wJ = self.w_dyn * self.J_dyn
        return np.sum(wJ * beamcore.kinetic_energy_density(rdot, W, self.section),
                      axis=(-1,))


# ======================================================================
# Reissner reference element (Lagrange centerline, geodesic triads)
# ======================================================================

@dataclass
class ReissnerState:
    pos: np.ndarray      # (..., E, n, 3)
    tri: np.ndarray      # (..., E, n, 3, 3)


class ReissnerMesh(_ElementMesh):
    """Shear-deformable elements with multiplicative rotation dofs.

    Node ordering is element-local (both ends first, then interior
    nodes left to right); dof layout per element is node-major
    [d(3), theta(3)] per node.  Internal forces use the reduced
    (n_n - 1)-point rule, inertia the full n_n-point rule.
    """

    def __init__(self, pos0, tri0, section, n_nodes=4):
        pos0 = np.asarray(pos0, float)
        tri0 = np.asarray(tri0, float)
        if not 2 <= n_nodes <= 5:
            raise ValueError("supported polynomial orders: 1..4")
        if pos0.shape[-2] != n_nodes:
            raise ValueError("node count mismatch")
        self.section = section
        self.n_nodes = n_nodes
        self.ndof = 6 * n_nodes
        self.nodes = interp.lagrange_nodes(n_nodes)

        xi_i, w_i = interp.gauss_rule(n_nodes - 1)
        xi_d, w_d = interp.gauss_rule(n_nodes)
        self.w_int, self.w_dyn = w_i, w_d
        self.L_int, self.Lx_int = interp.lagrange_shape(xi_i, self.nodes)
        self.L_dyn, self.Lx_dyn = interp.lagrange_shape(xi_d, self.nodes)

        r0x_i = np.einsum("gn,eni->egi", self.Lx_int, pos0)
        r0x_d = np.einsum("gn,eni->egi", self.Lx_dyn, pos0)
        self.J_int = np.sqrt(_dots(r0x_i, r0x_i))
        self.J_dyn = np.sqrt(_dots(r0x_d, r0x_d))

        lam0, K0 = self._triad_field(tri0, self.L_int, self.Lx_int, self.J_int)
        r0p = r0x_i / self.J_int[..., None]
        self.gamma0 = np.einsum("egji,egj->egi", lam0, r0p)
        self.K0 = K0

    @staticmethod
    def _triad_field(tri, L, Lx, J):
        lam_r, phi_l = interp.geodesic_refs(tri)
        return interp.geodesic_eval(lam_r[..., None, :, :],
                                    phi_l[..., None, :, :], L, Lx, J)

    def perturb(self, state, dv):
        dv = np.reshape(dv, dv.shape[:-1] + (self.n_nodes, 6))
        pos = state.pos + dv[..., :3]
        tri = so3.exp_map(dv[..., 3:]) @ state.tri
        return ReissnerState(pos=pos, tri=tri)

    def _dyn_fields(self, state):
        r_h = np.einsum("gn,...eni->...egi", self.L_dyn, state.pos)
        lam_h, _ = self._triad_field(state.tri, self.L_dyn, self.Lx_dyn,
                                     self.J_dyn)
        return r_h, lam_h

    def _evaluate(self, state, dyn=None):
        sec = self.section
        r_xi = np.einsum("gn,...eni->...egi", self.Lx_int, state.pos)
        rp = r_xi / self.J_int[..., None]
        lam, K = self._triad_field(state.tri, self.L_int, self.Lx_int,
                                   self.J_int)
        gamma = np.einsum("...egji,...egj->...egi", lam, rp) - self.gamma0
        omega = K - self.K0
        F, M, edens = beamcore.constitutive_reissner(gamma, omega, sec)
        f = np.einsum("...egij,...egj->...egi", lam, F)
        m = np.einsum("...egij,...egj->...egi", lam, M)

        rd = np.einsum("g,gn,...egi->...eni", self.w_int, self.Lx_int, f)
        rth = (np.einsum("g,gn,...egi->...eni", self.w_int, self.Lx_int, m)
               - np.einsum("g,eg,gn,...egi->...eni", self.w_int, self.J_int,
                           self.L_int, np.cross(rp, f)))
        eint = np.einsum("g,eg,...eg->...e", self.w_int, self.J_int, edens)
        ekin = 0.0

        if dyn is not None:
            r_h, lam_h = self._dyn_fields(state)
            f_rho, m_rho = self._inertia(r_h, lam_h, dyn)
            rd = rd - np.einsum("g,eg,gn,...egi->...eni", self.w_dyn,
                                self.J_dyn, self.L_dyn, f_rho)
            rth = rth - np.einsum("g,eg,gn,...egi->...eni", self.w_dyn,
                                  self.J_dyn, self.L_dyn, m_rho)
            ekin = self._kinetic(r_h, lam_h, dyn)

        res = np.concatenate([rd, rth], axis=-1)   # (..., E, n, 6)
        res = np.reshape(res, res.shape[:-2] + (self.ndof,))
        return {"res": res, "eint": eint, "ekin": ekin}

    def refresh(self, state):
        """No stored intermediate triads; step-end refresh is a no-op."""
        return state


# ======================================================================
# Tangent-parametrized Kirchhoff elements (strong and weak constraint)
# ======================================================================

@dataclass
class TanState:
    d: np.ndarray        # (..., E, 2, 3) end positions
    t: np.ndarray        # (..., E, 2, 3) end tangents (non-unit)
    phi: np.ndarray      # (..., E, 3) relative angles (ends, center)
    lam_m: np.ndarray    # (E, 3, 3, 3) stored intermediate triads


# dof layout [d1, t1, phi1, d2, t2, phi2, phi3]
TAN12 = np.array([0, 1, 2, 3, 4, 5, 7, 8, 9, 10, 11, 12])
TANPHI = np.array([6, 13, 14])


class KirchhoffTanMesh(_ElementMesh):
    """Hermite-centerline Kirchhoff elements, tangent parametrization.

    kind: "sk" (strong constraint, Petrov-Galerkin), "sk-cs" (strong,
    Bubnov-Galerkin completion), "wk" (weak constraint via collocation).
    locking: "mcs" (re-interpolated axial strain, default), "fi" (full
    integration), "ri" (reduced 3-point rule for the internal forces).
    """

    ndof = 15

    def __init__(self, d0, t0, tri0, section, kind="sk", locking="mcs",
                 n_gauss=4):
        if kind not in ("sk", "sk-cs", "wk"):
            raise ValueError(f"unknown element kind {kind!r}")
        if locking not in ("mcs", "fi", "ri"):
            raise ValueError(f"unknown locking policy {locking!r}")
        d0 = np.asarray(d0, float)
        t0 = np.asarray(t0, float)
        tri0 = np.asarray(tri0, float)
        self.section = section
        self.kind = kind
        self.locking = locking
        E = d0.shape[0]
        self.c = np.array([interp.element_length_fixpoint(
            d0[e, 0], t0[e, 0], d0[e, 1], t0[e, 1]) for e in range(E)])

        n_int = 3 if locking == "ri" else n_gauss
        self.xi_int, self.w_int = interp.gauss_rule(n_int)
        self.xi_dyn, self.w_dyn = interp.gauss_rule(n_gauss)
        self._prep_pointset("int", d0, t0, self.xi_int)
        self._prep_pointset("dyn", d0, t0, self.xi_dyn)
        self._prep_pointset("nod", d0, t0, XI_NODES)
        self.L3_int, self.L3x_int = interp.lagrange_shape(self.xi_int, XI_NODES)
        self.L3_dyn, self.L3x_dyn = interp.lagrange_shape(self.xi_dyn, XI_NODES)

        # reference strain state: initial geometry is stress free
        state0 = TanState(d=d0, t=t0, phi=np.zeros((E, 3)), lam_m=tri0)
        f0 = self._fields(state0, "int")
        self.K0 = f0["K"]
        self.eps0 = f0["eps"]

    def _prep_pointset(self, tag, d0, t0, xi):
        E = self.c.shape[0]
        xb = np.broadcast_to(xi, (E, xi.size))
        h, h1, h2 = interp.hermite_shape(xb, self.c[:, None])
        r0x = self._contract(h1, d0, t0)
        r0xx = self._contract(h2, d0, t0)
        J = np.sqrt(_dots(r0x, r0x))
        J_xi = _dots(r0x, r0xx) / J
        setattr(self, "h_" + tag, h)
        setattr(self, "hp_" + tag, h1 / J[..., None])
        setattr(self, "hpp_" + tag,
                h2 / (J**2)[..., None] - h1 * (J_xi / J**3)[..., None])
        setattr(self, "J_" + tag, J)
        if tag == "dyn":
            self.J_dyn = J

    @staticmethod
    def _contract(coeff, d, t):
        nod = np.stack([d[..., 0, :], t[..., 0, :], d[..., 1, :], t[..., 1, :]],
                       axis=-2)
        return np.einsum("egk,...eki->...egi", coeff, nod)

    def perturb(self, state, dv):
        dv12 = np.reshape(dv[..., TAN12], dv.shape[:-1] + (4, 3))
        d = state.d + np.stack([dv12[..., 0, :], dv12[..., 2, :]], axis=-2)
        t = state.t + np.stack([dv12[..., 1, :], dv12[..., 3, :]], axis=-2)
        phi = state.phi + dv[..., TANPHI]
        return replace(state, d=d, t=t, phi=phi)

    # -------------------------------------------------- kinematic fields

    def _centerline(self, state, tag):
        rp = self._contract(getattr(self, "hp_" + tag), state.d, state.t)
        rpp = self._contract(getattr(self, "hpp_" + tag), state.d, state.t)
        stretch = np.sqrt(_dots(rp, rp))
        g1 = rp / stretch[..., None]
        g1p = (rpp - _dots(g1, rpp)[..., None] * g1) / stretch[..., None]
        tt = rp / (stretch**2)[..., None]
        ttp = (rpp / (stretch**2)[..., None]
               - 2.0 * _dots(rp, rpp)[..., None] * rp / (stretch**4)[..., None])
        return dict(rp=rp, rpp=rpp, stretch=stretch, g1=g1, g1p=g1p,
                    tt=tt, ttp=ttp)

    def _nodal_triads(self, state):
        cn = self._centerline(state, "nod")
        g1n = cn["g1"].copy()
        g1n[..., :2, :] = state.t / np.sqrt(_dots(state.t, state.t))[..., None]
        lam_sr = so3.smallest_rotation(state.lam_m, g1n)
        lam_nod = so3.exp_map(state.phi[..., None] * g1n) @ lam_sr
        return cn, g1n, lam_nod

    def _fields(self, state, tag):
        """Triad field, curvature and axial strain at a point set."""
        L3 = self.L3_int if tag == "int" else self.L3_dyn
        L3x = self.L3x_int if tag == "int" else self.L3x_dyn
        J = getattr(self, "J_" + tag)
        cl = self._centerline(state, tag)
        cn, g1n, lam_nod = self._nodal_triads(state)
        if self.kind == "wk":
            lam_r, phi_l = interp.geodesic_refs(lam_nod)
            lam_h, K = interp.geodesic_eval(lam_r[..., None, :, :],
                                            phi_l[..., None, :, :], L3, L3x, J)
        else:
            lam_I = lam_nod[..., 2, :, :]
            phis = interp.sr_nodal_angles(lam_nod, lam_I, g1n)
            lam_h, K = interp.sr_triad_eval(lam_I[..., None, :, :],
                                            phis[..., None, :], L3, L3x, J,
                                            cl["rp"], cl["rpp"])
        if self.locking == "fi" or self.locking == "ri":
            eps = cl["stretch"] - 1.0
        else:
            eps_cp = cn["stretch"] - 1.0     # CPs coincide with the nodes
            eps = np.einsum("gk,...ek->...eg", L3, eps_cp)
        return dict(cl=cl, cn=cn, g1n=g1n, lam_nod=lam_nod, lam_h=lam_h,
                    K=K, eps=eps)

    def _dyn_fields(self, state):
        f = self._fields(state, "dyn")
        r_h = self._contract(self.h_dyn, state.d, state.t)
        return r_h, f["lam_h"]

    # ----------------------------------------------------------- residual

    def _evaluate(self, state, dyn=None):
        sec = self.section
        f = self._fields(state, "int")
        cl, cn = f["cl"], f["cn"]
        J, w = self.J_int, self.w_int
        hp, hpp, h = self.hp_int, self.hpp_int, self.h_int
        L3, L3x = self.L3_int, self.L3x_int
        hp_n = self.hp_nod

        eps = f["eps"] - self.eps0
        omega = f["K"] - self.K0
        F1, M, edens = beamcore.constitutive_kirchhoff(eps, omega, sec)
        m = np.einsum("...egij,...egj->...egi", f["lam_h"], M)
        g1, g1p, tt, ttp = cl["g1"], cl["g1p"], cl["tt"], cl["ttp"]
        wJ = w * J

        if self.kind == "wk":
            g1_n, tt_n = f["g1n"], cn["tt"]
            # barred operators: Lagrange combinations of nodal values; for
            # the primed variants the Jacobian cancels against L'_k = L_xi/J
            cross_n = np.cross(tt_n[..., :, None, :], m[..., None, :, :])
            r12 = -np.einsum("g,gk,ekc,...ekgi->...eci", w, L3x, hp_n, cross_n)
            g1m = np.einsum("...eki,...egi->...ekg", g1_n, m)
            rphi = np.einsum("g,gk,...ekg->...ek", w, L3x, g1m)
            veps_n = _outer(hp_n, g1_n)
            vbar_eps = np.einsum("gk,...ekci->...egci", L3, veps_n)
            r12 = r12 + np.einsum("...eg,...egci->...eci", wJ * F1, vbar_eps)
        else:
            r12 = (np.einsum("...eg,...egci->...eci", wJ,
                             _outer(hpp, -np.cross(tt, m))
                             + _outer(hp, -np.cross(ttp, m))))
            if self.locking in ("fi", "ri"):
                veps = _outer(hp, g1)
            else:
                veps_n = _outer(self.hp_nod, f["g1n"])
                veps = np.einsum("gk,...ekci->...egci", L3, veps_n)
            r12 = r12 + np.einsum("...eg,...egci->...eci", wJ * F1, veps)
            rphi = (np.einsum("g,gk,...eg->...ek", w, L3x, _dots(g1, m))
                    + np.einsum("...eg,gk,...eg->...ek", wJ, L3,
                                _dots(g1p, m)))
            if self.kind == "sk-cs":
                r12 = r12 + self._cs_rows(f, m, wJ)

        eint = np.einsum("...eg,...eg->...e", wJ, edens)
        ekin = 0.0

        if dyn is not None:
            r_h, lam_hd = self._dyn_fields(state)
            f_rho, m_rho = self._inertia(r_h, lam_hd, dyn)
            cld = self._centerline(state, "dyn")
            wJd = self.w_dyn * self.J_dyn
            r12 = r12 + np.einsum("...eg,...egci->...eci", wJd,
                                  _outer(self.h_dyn, -f_rho)
                                  + _outer(self.hp_dyn,
                                           np.cross(cld["tt"], m_rho)))
            if self.kind == "wk":
                cross_nd = np.cross(cn["tt"][..., :, None, :],
                                    m_rho[..., None, :, :])
                r12 = r12 + np.einsum("...eg,gk,ekc,...ekgi->...eci",
                                      wJd, self.L3_dyn, hp_n, cross_nd)
                rphi = rphi - np.einsum("...eg,gk,...ekg->...ek", wJd,
                                        self.L3_dyn,
                                        np.einsum("...eki,...egi->...ekg",
                                                  f["g1n"], m_rho))
            else:
                rphi = rphi - np.einsum("...eg,gk,...eg->...ek", wJd,
                                        self.L3_dyn, _dots(cld["g1"], m_rho))
                if self.kind == "sk-cs":
                    fd = dict(cl=cld, cn=cn, g1n=f["g1n"])
                    r12 = r12 - self._cs_rows(fd, m_rho, wJd, dyn_tag=True)
            ekin = self._kinetic(r_h, lam_hd, dyn)

        res = np.zeros(r12.shape[:-2] + (15,),
                       dtype=np.result_type(r12, rphi))
        res[..., TAN12] = np.reshape(r12, r12.shape[:-2] + (12,))
        res[..., TANPHI] = rphi
        return {"res": res, "eint": eint, "ekin": ekin}

    def _cs_rows(self, f, m, wJ, dyn_tag=False):
        """Bubnov-Galerkin completion rows (parallel spin contribution of
        the centerline dofs), contracted with a spatial moment field m."""
        cl, cn, g1n = f["cl"], f["cn"], f["g1n"]
        hp = self.hp_dyn if dyn_tag else self.hp_int
        hpp = self.hpp_dyn if dyn_tag else self.hpp_int
        L3 = self.L3_dyn if dyn_tag else self.L3_int
        L3x = self.L3x_dyn if dyn_tag else self.L3x_int
        J = self.J_dyn if dyn_tag else self.J_int
        g1, g1p, tt, ttp = cl["g1"], cl["g1p"], cl["tt"], cl["ttp"]
        g1I = g1n[..., 2, :]
        ttI = cn["tt"][..., 2, :]
        hpI = self.hp_nod[..., 2, :]

        den = (1.0 + _dots(g1, g1I[..., None, :]))[..., None, None]
        v1 = (_outer(hp, np.cross(g1I[..., None, :], tt))
              - _outer(hpI[..., None, :], np.cross(g1, ttI[..., None, :]))) / den
        v1p = ((_outer(hp, np.cross(g1I[..., None, :], ttp))
                + _outer(hpp, np.cross(g1I[..., None, :], tt))
                - _outer(hpI[..., None, :],
                         np.cross(g1p, ttI[..., None, :]))) / den
               - (_dots(g1p, g1I[..., None, :])[..., None, None] / den) * v1)
        # nodal values of v1 (at the three angle nodes)
        g1_n, tt_n = g1n, cn["tt"]
        den_n = (1.0 + _dots(g1_n, g1I[..., None, :]))[..., None, None]
        v1_n = (_outer(self.hp_nod, np.cross(g1I[..., None, :], tt_n))
                - _outer(hpI[..., None, :],
                         np.cross(g1_n, ttI[..., None, :]))) / den_n
        sumv1 = np.einsum("gk,...ekci->...egci", L3, v1_n)
        g1m = _dots(g1, m)
        if dyn_tag:
            # inertia contraction: only the unprimed operator appears
            rows = (sumv1 - v1) * g1m[..., None, None]
        else:
            sumv1p = (np.einsum("gk,...ekci->...egci", L3x, v1_n)
                      / J[..., None, None])
            rows = ((sumv1p - v1p) * g1m[..., None, None]
                    + (sumv1 - v1) * _dots(g1p, m)[..., None, None])
        return np.einsum("...eg,...egci->...eci", wJ, rows)

    def refresh(self, state):
        """Step-end smallest-rotation refresh of the stored intermediate
        triads (idempotent w.r.t. the relative angles)."""
        _, g1n, _ = self._nodal_triads(state)
        lam_m = so3.smallest_rotation(state.lam_m, g1n.real)
        return replace(state, lam_m=lam_m)


# ======================================================================
# Hermite Simo-Reissner element
# ======================================================================

@dataclass
class HsrState:
    d: np.ndarray        # (..., E, 2, 3)
    t: np.ndarray        # (..., E, 2, 3)
    tri: np.ndarray      # (..., E, 3, 3, 3) nodal triads (ends, center)


class HsrMesh(_ElementMesh):
    """Shear-deformable element with Hermite centerline and 3-node
    geodesic triad field; translational strain re-interpolated from its
    nodal (collocation) values.  Dof layout
    [d1, t1, th1, d2, t2, th2, th3] (th = multiplicative spin)."""

    ndof = 21

    def __init__(self, d0, t0, tri0, section, n_gauss=4):
        d0 = np.asarray(d0, float)
        t0 = np.asarray(t0, float)
        tri0 = np.asarray(tri0, float)
        self.section = section
        E = d0.shape[0]
        self.c = np.array([interp.element_length_fixpoint(
            d0[e, 0], t0[e, 0], d0[e, 1], t0[e, 1]) for e in range(E)])
        self.xi_g, self.w_int = interp.gauss_rule(n_gauss)
        self.w_dyn = self.w_int
        for tag, xi in (("int", self.xi_g), ("nod", XI_NODES)):
            xb = np.broadcast_to(xi, (E, xi.size))
            h, h1, h2 = interp.hermite_shape(xb, self.c[:, None])
            r0x = np.einsum("egk,eki->egi", h1,
                            np.stack([d0[:, 0], t0[:, 0], d0[:, 1], t0[:, 1]],
                                     axis=1))
            J = np.sqrt(_dots(r0x, r0x))
            setattr(self, "h_" + tag, h)
            setattr(self, "hp_" + tag, h1 / J[..., None])
            setattr(self, "J_" + tag, J)
        self.J_dyn = self.J_int
        self.L3, self.L3x = interp.lagrange_shape(self.xi_g, XI_NODES)

        rp0_n = self._contract(self.hp_nod, d0, t0)
        self.gamma0 = np.einsum("ekji,ekj->eki", tri0, rp0_n)
        lam_r0, phi_l0 = interp.geodesic_refs(tri0)
        _, self.K0 = interp.geodesic_eval(lam_r0[:, None], phi_l0[:, None],
                                          self.L3, self.L3x, self.J_int)

    _contract = staticmethod(KirchhoffTanMesh._contract)

    def perturb(self, state, dv):
        dth = np.stack([dv[..., 6:9], dv[..., 15:18], dv[..., 18:21]], axis=-2)
        return HsrState(
            d=state.d + np.stack([dv[..., 0:3], dv[..., 9:12]], axis=-2),
            t=state.t + np.stack([dv[..., 3:6], dv[..., 12:15]], axis=-2),
            tri=so3.exp_map(dth) @ state.tri)

    def _dyn_fields(self, state):
        r_h = self._contract(self.h_int, state.d, state.t)
        lam_r, phi_l = interp.geodesic_refs(state.tri)
        lam_h, _ = interp.geodesic_eval(lam_r[..., None, :, :],
                                        phi_l[..., None, :, :], self.L3,
                                        self.L3x, self.J_int)
        return r_h, lam_h

    def _evaluate(self, state, dyn=None):
        sec = self.section
        J, w = self.J_int, self.w_int
        rp_n = self._contract(self.hp_nod, state.d, state.t)
        gamma_n = (np.einsum("...ekji,...ekj->...eki", state.tri, rp_n)
                   - self.gamma0)
        gamma_bar = np.einsum("gk,...eki->...egi", self.L3, gamma_n)
        lam_r, phi_l = interp.geodesic_refs(state.tri)
        lam_h, K = interp.geodesic_eval(lam_r[..., None, :, :],
                                        phi_l[..., None, :, :], self.L3,
                                        self.L3x, J)
        omega = K - self.K0
        Fbar, M, edens = beamcore.constitutive_reissner(gamma_bar, omega, sec)
        m = np.einsum("...egij,...egj->...egi", lam_h, M)
        wJ = w * J

        # d/t rows: sum_k L3_k H'(xi_k)^T Lambda_k Fbar(xi)
        lamF = np.einsum("...ekij,...egj->...ekgi", state.tri, Fbar)
        r12 = np.einsum("...eg,gk,ekc,...ekgi->...eci", wJ, self.L3,
                        self.hp_nod, lamF)
        # theta rows: L'_j m - L3_j S(r'(xi_j)) Lambda_j Fbar
        rth = (np.einsum("g,gk,...egi->...eki", w, self.L3x, m)
               - np.einsum("...eg,gk,...ekgi->...eki", wJ, self.L3,
                           np.cross(rp_n[..., :, None, :], lamF)))
        eint = np.einsum("...eg,...eg->...e", wJ, edens)
        ekin = 0.0

        if dyn is not None:
            r_h, lam_hd = self._dyn_fields(state)
            f_rho, m_rho = self._inertia(r_h, lam_hd, dyn)
            r12 = r12 + np.einsum("...eg,...egci->...eci", wJ,
                                  _outer(self.h_int, -f_rho))
            rth = rth - np.einsum("...eg,gk,...egi->...eki", wJ, self.L3,
                                  m_rho)
            ekin = self._kinetic(r_h, lam_hd, dyn)

        res = np.zeros(r12.shape[:-2] + (21,),
                       dtype=np.result_type(r12, rth))
        res[..., 0:3] = r12[..., 0, :]
        res[..., 3:6] = r12[..., 1, :]
        res[..., 6:9] = rth[..., 0, :]
        res[..., 9:12] = r12[..., 2, :]
        res[..., 12:15] = r12[..., 3, :]
        res[..., 15:18] = rth[..., 1, :]
        res[..., 18:21] = rth[..., 2, :]
        return {"res": res, "eint": eint, "ekin": ekin}

    def refresh(self, state):
        return state


# ======================================================================
# Rotation-vector parametrization (transform of a tangent element)
# ======================================================================

@dataclass
class RotState:
    d: np.ndarray        # (..., E, 2, 3)
    tri: np.ndarray      # (..., E, 2, 3, 3) end triads
    tmag: np.ndarray     # (..., E, 2) tangent magnitudes
    phi3: np.ndarray     # (..., E) center relative angle
    lam_m: np.ndarray    # (E, 3, 3, 3) stored intermediate triads


# ROT dof layout [d1, th1, tmag1, d2, th2, tmag2, phi3]; the (th, tmag)
# blocks occupy the same index ranges as the (t, phi) blocks of TAN.
_BLK = (slice(3, 7), slice(10, 14))


def rot_transform(res_tan, k_tan, t, g1_bar):
    """Transform a tangent-element output into the rotation-vector layout.

    t: (..., 2, 3) nodal tangents; g1_bar: (..., 2, 3) first axes of the
    stored intermediate triads.  Returns (res_rot, k_rot) with
    res_rot = T~^T res_tan and k_rot = H~(res_tan) + T~^T k_tan T_M.
    """
    res_tan = np.asarray(res_tan)
    tr = so3.tan_param_transforms(t, g1_bar)
    lead = res_tan.shape[:-1]
    dtype = np.result_type(res_tan, np.asarray(t), float)
    eye = np.broadcast_to(np.eye(15, dtype=dtype), lead + (15, 15))
    A = np.array(eye)            # test-function map (dth, dtmag)->(dt, dTheta1)
    B = np.array(eye)            # trial map (dth, dtmag)->(dt, dphi)
    H = np.zeros(lead + (15, 15), dtype=dtype)
    tn = np.sqrt(np.sum(t * t, axis=-1))
    g1 = t / tn[..., None]
    for i, blk in enumerate(_BLK):
        A[..., blk, blk] = tr["T_tilde"][..., i, :, :]
        B[..., blk, blk] = tr["T_M"][..., i, :, :]
        r_t = res_tan[..., blk][..., :3]
        r_phi = res_tan[..., blk][..., 3]
        S1 = so3.skew(g1[..., i, :])
        Sg_rt = np.einsum("...ij,...j->...i", S1, r_t)
        H4 = np.zeros(lead + (4, 4), dtype=dtype)
        H4[..., :3, :3] = (tn[..., i, None, None]
                           * (so3.skew(r_t) @ S1) - r_phi[..., None, None] * S1)
        H4[..., :3, 3] = Sg_rt
        H4[..., 3, :3] = Sg_rt
        H[..., blk, blk] = H4
    At = np.swapaxes(A, -1, -2)
    res_rot = np.einsum("...ij,...j->...i", At, res_tan)
    k_rot = None
    if k_tan is not None:
        k_rot = H + At @ k_tan @ B
    return res_rot, k_rot


class RotMesh(_ElementMesh):
    """Rotation-vector parametrized wrapper around a Petrov tangent mesh."""

    ndof = 15

    def __init__(self, tan_mesh):
        if tan_mesh.kind not in ("sk", "wk"):
            raise ValueError("rotation-vector layout wraps Petrov tangent "
                             "elements only")
        self.tan = tan_mesh
        self.section = tan_mesh.section
        self.w_dyn = tan_mesh.w_dyn

    @property
    def J_dyn(self):
        return self.tan.J_dyn

    def to_tan(self, state):
        g1 = state.tri[..., :, 0]
        tn = state.tmag
        if np.any(tn.real <= 0.0):
            raise ValueError("nodal tangent magnitude must stay positive")
        t = tn[..., None] * g1
        lam_sr = so3.smallest_rotation(state.lam_m[..., :2, :, :], g1)
        phi12 = so3.relative_angle(state.tri, lam_sr)
        phi = np.concatenate([phi12, state.phi3[..., None]], axis=-1)
        return TanState(d=state.d, t=t, phi=phi, lam_m=state.lam_m)

    def perturb(self, state, dv):
        dth = np.stack([dv[..., 3:6], dv[..., 10:13]], axis=-2)
        return replace(
            state,
            d=state.d + np.stack([dv[..., 0:3], dv[..., 7:10]], axis=-2),
            tri=so3.exp_map(dth) @ state.tri,
            tmag=state.tmag + np.stack([dv[..., 6], dv[..., 13]], axis=-1),
            phi3=state.phi3 + dv[..., 14])

    def _transform_args(self, state):
        t = state.tmag[..., None] * state.tri[..., :, 0]
        g1_bar = state.lam_m[..., :2, :, 0]
        return t, g1_bar

    def residual(self, state, dyn=None):
        r_tan = self.tan.residual(self.to_tan(state), dyn)
        t, g1_bar = self._transform_args(state)
        r_rot, _ = rot_transform(r_tan, None, t, g1_bar)
        return r_rot

    def _evaluate(self, state, dyn=None):
        ev = self.tan._evaluate(self.to_tan(state), dyn)
        t, g1_bar = self._transform_args(state)
        r_rot, _ = rot_transform(ev["res"], None, t, g1_bar)
        return {"res": r_rot, "eint": ev["eint"], "ekin": ev["ekin"]}

    def tangent(self, state, dyn=None, h=H_CSTEP):
        """Analytic transformation of the tangent-element output."""
        r_tan, k_tan = self.tan.tangent(self.to_tan(state), dyn, h=h)
        t, g1_bar = self._transform_args(state)
        return rot_transform(r_tan, k_tan, t.real, g1_bar)

    def energy(self, state, dyn=None):
        return self.tan.energy(self.to_tan(state), dyn)

    def _dyn_fields(self, state):
        return self.tan._dyn_fields(self.to_tan(state))

    def dyn_init(self, state, params):
        return self.tan.dyn_init(self.to_tan(state), params)

    def dyn_advance(self, state, dyn):
        return self.tan.dyn_advance(self.to_tan(state), dyn)

    def dyn_quantities(self, state, dyn):
        return self.tan.dyn_quantities(self.to_tan(state), dyn)

    def refresh(self, state):
        g1 = state.tri[..., :, 0]
        lam_m = state.lam_m.copy()
        lam_m[..., :2, :, :] = so3.smallest_rotation(state.lam_m[..., :2, :, :],
                                                     g1.real)
        # center node: refresh against the interpolated tangent
        tan_state = self.to_tan(replace(state, lam_m=lam_m))
        _, g1n, _ = self.tan._nodal_triads(tan_state)
        lam_m[..., 2, :, :] = so3.smallest_rotation(state.lam_m[..., 2, :, :],
                                                    g1n.real[..., 2, :])
        return replace(state, lam_m=lam_m)


# ======================================================================
# single-element convenience wrappers (spec-facing API)
# ======================================================================

def _single(mesh, state, loads, dyn):
    r, k = mesh.tangent(state, dyn)
    eint, ekin = mesh.energy(state, dyn)
    res = r[0] if loads is None else r[0] - np.asarray(loads, float)
    ek = float(np.sum(np.asarray(ekin).real)) if dyn is not None else 0.0
    return ElementOutput(residual=res, stiffness=k[0],
                         energy=float(np.sum(eint.real)) + ek)


def cj_eval(dofs, section, loads=None, dyn=None):
    """dofs: dict(pos0, tri0, pos, tri) for a single element."""
    mesh = ReissnerMesh(dofs["pos0"][None], dofs["tri0"][None], section,
                        n_nodes=len(dofs["pos0"]))
    return _single(mesh, ReissnerState(pos=dofs["pos"][None],
                                       tri=dofs["tri"][None]), loads, dyn)


def sk_tan_eval(dofs, section, loads=None, dyn=None, galerkin="petrov",
                locking="mcs"):
    """dofs: dict(d0, t0, tri0, d, t, phi, lam_m) for a single element."""
    kind = "sk" if galerkin == "petrov" else "sk-cs"
    mesh = KirchhoffTanMesh(dofs["d0"][None], dofs["t0"][None],
                            dofs["tri0"][None], section, kind=kind,
                            locking=locking)
    state = TanState(d=dofs["d"][None], t=dofs["t"][None],
                     phi=dofs["phi"][None], lam_m=dofs["lam_m"][None])
    return _single(mesh, state, loads, dyn)


def wk_tan_eval(dofs, section, loads=None, dyn=None, locking="mcs"):
    mesh = KirchhoffTanMesh(dofs["d0"][None], dofs["t0"][None],
                            dofs["tri0"][None], section, kind="wk",
                            locking=locking)
    state = TanState(d=dofs["d"][None], t=dofs["t"][None],
                     phi=dofs["phi"][None], lam_m=dofs["lam_m"][None])
    return _single(mesh, state, loads, dyn)


def hsr_eval(dofs, section, loads=None, dyn=None):
    """dofs: dict(d0, t0, tri0, d, t, tri) for a single element."""
    mesh = HsrMesh(dofs["d0"][None], dofs["t0"][None], dofs["tri0"][None],
                   section)
    state = HsrState(d=dofs["d"][None], t=dofs["t"][None],
                     tri=dofs["tri"][None])
    return _single(mesh, state, loads, dyn)

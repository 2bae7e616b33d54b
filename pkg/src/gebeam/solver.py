"""Global assembly, Dirichlet constraints, Newton iteration and load
stepping.

A Model binds one element family to a global node set.  Corner nodes of
the tangent-parametrized families carry 7 DOFs (position, tangent,
relative angle), interior angle nodes carry 1; the rotation-vector
layout replaces (tangent, angle) by (rotation increment, tangent
magnitude); the Hermite Simo-Reissner family carries 9/3 and the
Reissner reference element 6 per node.  Configuration updates are
additive for positions, tangents and angles and multiplicative for
triads.  Rigid joints are realized by node sharing with a constant
right-multiplied triad offset per element node, which commutes with the
left (spin) updates and therefore needs no runtime constraint handling.
"""

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import elements, so3

TAN_FAMILIES = ("sk", "sk-cs", "wk")

# residual tolerance per slenderness ratio; increment tolerance is fixed
RES_TOL = {10: 1e-7, 100: 1e-9, 1000: 1e-11, 10000: 1e-13}


def tol_res_for(zeta):
    """Residual tolerance for a slenderness ratio (nearest decade)."""
    key = min(RES_TOL, key=lambda z: abs(np.log10(zeta) - np.log10(z)))
    return RES_TOL[key]


class NoConvergence(Exception):
    """Newton iteration exhausted without meeting both tolerances."""


class StepUnderflow(Exception):
    """Load-step size fell below its floor during adaptation."""


class SingularSystem(Exception):
    """Linear system singular; message names the suspected null mode."""


@dataclass
class SolverConfig:
    tol_res: float
    tol_inc: float = 1e-8
    n_iter_max: int = 10
    n_steps0: int = 1
    adapt: bool = True

    def __post_init__(self):
        if self.tol_res <= 0 or self.tol_inc <= 0:
            raise ValueError("tolerances must be positive")


# ----------------------------------------------------------------- loads

@dataclass
class PointForce:
    node: int
    vec: np.ndarray
    ramp: callable = None    # factor(time); default: factor = time


@dataclass
class PointMoment:
    node: int
    vec: np.ndarray
    ramp: callable = None


def _ramp_factor(load, time):
    return time if load.ramp is None else load.ramp(time)


# ----------------------------------------------------------- constraints

@dataclass
class Clamp:
    """Fixed position and orientation; tangent magnitude stays free for
    the tangent-carrying families (frame column 0 = tangent direction)
    unless fix_stretch prescribes the full tangent vector."""
    node: int
    frame: np.ndarray = None
    fix_stretch: bool = False


@dataclass
class Support:
    """Fixed position only."""
    node: int


@dataclass
class RotationRamp:
    """Clamp whose orientation follows exp(angle(t) S(axis))."""
    node: int
    axis: np.ndarray
    angle: callable
    frame: np.ndarray = None


# ---------------------------------------------------------- global state

@dataclass
class GlobalState:
    pos: np.ndarray           # (N, 3)
    t: np.ndarray             # (N, 3) nodal tangents (tan/hsr)
    phi: np.ndarray           # (N,) relative angles (tan) / phi3 (rot mid)
    tri: np.ndarray           # (N, 3, 3) triads (cj/rot/hsr)
    tmag: np.ndarray          # (N,) tangent magnitudes (rot)
    lam_m: np.ndarray = None  # (E, 3, 3, 3) stored intermediate triads


class Model:
    """One element family on a global node set; see build_model."""

    def __init__(self, family, mesh, conn, n_nodes, offsets=None):
        self.family = family
        self.mesh = mesh
        self.conn = np.asarray(conn, int)
        self.n_nodes = n_nodes
        self.offsets = offsets
        E, nn = self.conn.shape

        # per-node DOF widths
        width = np.zeros(n_nodes, int)
        if family == "cj":
            width[:] = 6
        elif family in TAN_FAMILIES or family == "rot":
            width[self.conn[:, :2]] = 7
            width[self.conn[:, 2]] = 1
        elif family == "hsr":
            width[self.conn[:, :2]] = 9
            width[self.conn[:, 2]] = 3
        else:
            raise ValueError(f"unknown element family {family!r}")
        if np.any(width == 0):
            raise ValueError("model contains nodes unused by any element")
        self.width = width
        self.start = np.concatenate([[0], np.cumsum(width)])
        self.ndof = int(self.start[-1])

        # field -> (node ids, global dof columns)
        st = self.start
        corners = np.unique(self.conn[:, :2]) if nn == 3 else None
        mids = np.unique(self.conn[:, 2]) if nn == 3 else None
        if family == "cj":
            nodes = np.arange(n_nodes)
            self.d_nodes, self.d_cols = nodes, st[nodes, None] + np.arange(3)
            self.th_nodes = nodes
            self.th_cols = st[nodes, None] + 3 + np.arange(3)
            self.t_nodes = self.phi_nodes = self.tm_nodes = None
        elif family in TAN_FAMILIES:
            self.d_nodes = self.t_nodes = corners
            self.d_cols = st[corners, None] + np.arange(3)
            self.t_cols = st[corners, None] + 3 + np.arange(3)
            self.phi_nodes = np.concatenate([corners, mids])
            self.phi_cols = np.concatenate([st[corners] + 6, st[mids]])
            self.th_nodes = self.tm_nodes = None
        elif family == "rot":
            self.d_nodes = self.th_nodes = self.tm_nodes = corners
            self.d_cols = st[corners, None] + np.arange(3)
            self.th_cols = st[corners, None] + 3 + np.arange(3)
            self.tm_cols = st[corners] + 6
            self.phi_nodes, self.phi_cols = mids, st[mids]
            self.t_nodes = None
        else:   # hsr
            self.d_nodes = self.t_nodes = corners
            self.d_cols = st[corners, None] + np.arange(3)
            self.t_cols = st[corners, None] + 3 + np.arange(3)
            self.th_nodes = np.concatenate([corners, mids])
            self.th_cols = np.concatenate([st[corners, None] + 6 + np.arange(3),
                                           st[mids, None] + np.arange(3)])
            self.phi_nodes = self.tm_nodes = None

        # element -> global dof map, fixed assembly pattern
        ed = np.empty((E, mesh.ndof), int)
        if family == "cj":
            for k in range(nn):
                ed[:, 6 * k:6 * k + 6] = st[self.conn[:, k], None] + np.arange(6)
        elif family in TAN_FAMILIES or family == "rot":
            ed[:, 0:7] = st[self.conn[:, 0], None] + np.arange(7)
            ed[:, 7:14] = st[self.conn[:, 1], None] + np.arange(7)
            ed[:, 14] = st[self.conn[:, 2]]
        else:
            ed[:, 0:9] = st[self.conn[:, 0], None] + np.arange(9)
            ed[:, 9:18] = st[self.conn[:, 1], None] + np.arange(9)
            ed[:, 18:21] = st[self.conn[:, 2], None] + np.arange(3)
        self.edofs = ed
        self._rows = np.repeat(ed[:, :, None], mesh.ndof, axis=2).ravel()
        self._cols = np.repeat(ed[:, None, :], mesh.ndof, axis=1).ravel()

    # ------------------------------------------------------------ gather

    def gather(self, gs):
        c = self.conn
        if self.family == "cj":
            tri = gs.tri[c]
            if self.offsets is not None:
                tri = tri @ self.offsets
            return elements.ReissnerState(pos=gs.pos[c], tri=tri)
        if self.family in TAN_FAMILIES:
            return elements.TanState(d=gs.pos[c[:, :2]], t=gs.t[c[:, :2]],
                                     phi=gs.phi[c], lam_m=gs.lam_m)
        if self.family == "rot":
            return elements.RotState(d=gs.pos[c[:, :2]], tri=gs.tri[c[:, :2]],
                                     tmag=gs.tmag[c[:, :2]],
                                     phi3=gs.phi[c[:, 2]], lam_m=gs.lam_m)
        tri = gs.tri[c]
        if self.offsets is not None:
            tri = tri @ self.offsets
        return elements.HsrState(d=gs.pos[c[:, :2]], t=gs.t[c[:, :2]], tri=tri)

    def apply_increment(self, gs, dx):
        pos, t, phi = gs.pos.copy(), gs.t.copy(), gs.phi.copy()
        tri, tmag = gs.tri.copy(), gs.tmag.copy()
        pos[self.d_nodes] += dx[self.d_cols]
        if self.t_nodes is not None:
            t[self.t_nodes] += dx[self.t_cols]
        if self.th_nodes is not None:
            tri[self.th_nodes] = (so3.exp_map(dx[self.th_cols])
                                  @ tri[self.th_nodes])
        if self.phi_nodes is not None:
            phi[self.phi_nodes] += dx[self.phi_cols]
        if self.tm_nodes is not None:
            tmag[self.tm_nodes] += dx[self.tm_cols]
        return replace(gs, pos=pos, t=t, phi=phi, tri=tri, tmag=tmag)

    def refresh_state(self, gs):
        """Step-end smallest-rotation refresh of stored element triads."""
        if self.family in TAN_FAMILIES or self.family == "rot":
            est = self.mesh.refresh(self.gather(gs))
            return replace(gs, lam_m=est.lam_m)
        return gs

    # ------------------------------------------------------ postprocess

    def nodal_frames(self, gs):
        """Positions and triads of every node of the model."""
        pos = gs.pos.copy()
        tri = gs.tri.copy() if gs.tri is not None else None
        if self.family == "cj":
            return pos, tri
        est = self.gather(gs)
        if self.family == "hsr":
            # interior position from the Hermite centerline at xi = 0
            r_mid = self.mesh._contract(self.mesh.h_nod, est.d, est.t)
            pos[self.conn[:, 2]] = r_mid[:, 2]
            return pos, gs.tri.copy()
        if self.family == "rot":
            est = self.mesh.to_tan(est)
            tanm = self.mesh.tan
        else:
            tanm = self.mesh
        _, _, lam_nod = tanm._nodal_triads(est)
        r_nod = tanm._contract(tanm.h_nod, est.d, est.t)
        tri = np.zeros((self.n_nodes, 3, 3))
        for k in range(3):
            tri[self.conn[:, k]] = lam_nod[:, k].real
            pos[self.conn[:, k]] = r_nod[:, k].real
        return pos, tri


def build_model(family, pos0, tri0, conn, section, locking="mcs",
                offsets=None):
    """Construct a Model and its stress-free initial GlobalState.

    pos0 (N,3), tri0 (N,3,3) nodal triads with first axis along the
    centerline tangent; conn (E,nn) node indices (corner a, corner b,
    interior...).  offsets: optional (E,nn,3,3) constant right-multiplied
    triad offsets (rigid joints), triad-carrying families only.
    """
    pos0 = np.asarray(pos0, float)
    tri0 = np.asarray(tri0, float)
    conn = np.asarray(conn, int)
    # canonical element order: assembly output independent of input order
    order = np.lexsort(conn.T[::-1])
    conn = conn[order]
    if offsets is not None:
        offsets = np.asarray(offsets, float)[order]
    n_nodes = pos0.shape[0]
    if offsets is not None and family in TAN_FAMILIES:
        raise NotImplementedError("rigid joints require a triad-carrying "
                                  "family (cj, hsr or rot)")
    lam_m = None
    if family == "cj":
        tri_e = tri0[conn] if offsets is None else tri0[conn] @ offsets
        mesh = elements.ReissnerMesh(pos0[conn], tri_e, section,
                                     n_nodes=conn.shape[1])
    elif family in TAN_FAMILIES:
        mesh = elements.KirchhoffTanMesh(pos0[conn[:, :2]],
                                         tri0[conn[:, :2], :, 0],
                                         tri0[conn], section, kind=family,
                                         locking=locking)
        lam_m = tri0[conn].copy()
    elif family in ("sk-rot", "wk-rot", "rot"):
        kind = {"sk-rot": "sk", "wk-rot": "wk", "rot": "sk"}[family]
        tanm = elements.KirchhoffTanMesh(pos0[conn[:, :2]],
                                         tri0[conn[:, :2], :, 0],
                                         tri0[conn], section, kind=kind,
                                         locking=locking)
        mesh = elements.RotMesh(tanm)
        family = "rot"
        lam_m = tri0[conn].copy()
    elif family == "hsr":
        tri_e = tri0[conn] if offsets is None else tri0[conn] @ offsets
        mesh = elements.HsrMesh(pos0[conn[:, :2]], tri0[conn[:, :2], :, 0],
                                tri_e, section)
    else:
        raise ValueError(f"unknown element family {family!r}")
    model = Model(family, mesh, conn, n_nodes, offsets=offsets)
    gs0 = GlobalState(pos=pos0.copy(), t=tri0[:, :, 0].copy(),
                      phi=np.zeros(n_nodes), tri=tri0.copy(),
                      tmag=np.ones(n_nodes), lam_m=lam_m)
    return model, gs0


# -------------------------------------------------------------- assembly

def _moment_rows_tan(t, M):
    """Work-conjugate rows of a nodal moment in the (dt, dTheta1) pairing:
    t-rows -S(t/|t|^2) M, angle row g1 . M."""
    tn2 = np.sum(t * t, axis=-1)
    return -np.cross(t, M) / tn2, np.sum(t * M, axis=-1) / np.sqrt(tn2)


def load_vector(model, gs, time, loads):
    """External generalized force vector; complex-capable in gs.t."""
    dtype = complex if np.iscomplexobj(gs.t) else float
    f = np.zeros(gs.t.shape[:-2] + (model.ndof,), dtype=dtype)
    st = model.start
    for ld in loads:
        fac = _ramp_factor(ld, time)
        vec = fac * np.asarray(ld.vec, float)
        if isinstance(ld, PointForce):
            if model.width[ld.node] < 3:
                raise ValueError(f"node {ld.node} carries no position DOFs")
            f[..., st[ld.node]:st[ld.node] + 3] += vec
        elif isinstance(ld, PointMoment):
            if model.family in TAN_FAMILIES:
                if model.width[ld.node] != 7:
                    raise ValueError("moments attach to corner nodes only")
                rt, rphi = _moment_rows_tan(gs.t[..., ld.node, :], vec)
                f[..., st[ld.node] + 3:st[ld.node] + 6] += rt
                f[..., st[ld.node] + 6] += rphi
            else:
                off = {"cj": 3, "rot": 3, "hsr": 6}[model.family]
                f[..., st[ld.node] + off:st[ld.node] + off + 3] += vec
        else:
            raise TypeError(f"unknown load {ld!r}")
    return f


def _load_tangent_blocks(model, gs, time, loads):
    """Configuration dependence of tangent-family moment rows (complex
    step over the loaded node's tangent DOFs)."""
    blocks = []
    if model.family not in TAN_FAMILIES:
        return blocks
    h = elements.H_CSTEP
    st = model.start
    for ld in loads:
        if not isinstance(ld, PointMoment):
            continue
        vec = _ramp_factor(ld, time) * np.asarray(ld.vec, float)
        t0 = gs.t[ld.node]
        rows = np.zeros((4, 3))
        for j in range(3):
            tc = t0.astype(complex)
            tc[j] += 1j * h
            rt, rphi = _moment_rows_tan(tc, vec)
            rows[:3, j] = rt.imag / h
            rows[3, j] = rphi.imag / h
        dof_r = st[ld.node] + 3 + np.arange(4)
        dof_c = st[ld.node] + 3 + np.arange(3)
        # residual = internal - external: subtract the load derivative
        blocks.append((dof_r, dof_c, -rows))
    return blocks


def assemble(model, gs, time=1.0, loads=(), dyn=None):
    """Global residual and sparse tangent (deterministic summation)."""
    r_e, k_e = model.mesh.tangent(model.gather(gs), dyn)
    R = np.zeros(model.ndof)
    np.add.at(R, model.edofs, r_e)
    if loads:
        R -= load_vector(model, gs, time, loads)
    rows, cols = [model._rows], [model._cols]
    vals = [k_e.ravel()]
    for dof_r, dof_c, blk in _load_tangent_blocks(model, gs, time, loads):
        rows.append(np.repeat(dof_r, dof_c.size))
        cols.append(np.tile(dof_c, dof_r.size))
        vals.append(blk.ravel())
    K = sp.coo_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(model.ndof, model.ndof)).tocsr()
    return R, K


def residual_vector(model, gs, time=1.0, loads=(), dyn=None):
    """Residual only (no tangent); full vector including reaction rows."""
    R = np.zeros(model.ndof)
    np.add.at(R, model.edofs, model.mesh.residual(model.gather(gs), dyn))
    if loads:
        R -= load_vector(model, gs, time, loads)
    return R


def energies(model, gs, dyn=None):
    eint, ekin = model.mesh.energy(model.gather(gs), dyn)
    return float(np.sum(eint)), float(np.sum(np.asarray(ekin)))


def _frame_from_dir(tdir):
    """Any orthonormal frame with first column tdir (robust completion)."""
    a = np.zeros(3)
    a[np.argmin(np.abs(tdir))] = 1.0
    g2 = np.cross(tdir, a)
    g2 = g2 / np.linalg.norm(g2)
    return np.stack([tdir, g2, np.cross(tdir, g2)], axis=-1)


# ----------------------------------------------------- constraint system

class ConstraintSystem:
    """Basis change Q (identity with rotated tangent blocks) plus the set
    of eliminated transformed DOFs."""

    def __init__(self, model, constraints, gs0):
        fixed = np.zeros(model.ndof, bool)
        q_blocks = []           # (dof indices (3,), 3x3 basis)
        st = model.start
        fam = model.family
        for c in constraints:
            base = st[c.node]
            if isinstance(c, Support):
                if model.width[c.node] < 3:
                    raise ValueError("support needs position DOFs")
                fixed[base:base + 3] = True
                continue
            if not isinstance(c, (Clamp, RotationRamp)):
                raise TypeError(f"unknown constraint {c!r}")
            fixed[base:base + 3] = True              # position
            if fam in ("cj", "rot"):
                fixed[base + 3:base + 6] = True      # rotation
            elif fam in TAN_FAMILIES or fam == "hsr":
                tdir = gs0.t[c.node]
                tn = np.linalg.norm(tdir)
                if tn < 1e-14:
                    raise ValueError("constraint at zero-magnitude tangent")
                tdir = tdir / tn
                frame = c.frame
                if frame is None:
                    frame = _frame_from_dir(tdir)
                q_blocks.append((base + 3 + np.arange(3), frame))
                fixed[base + 4:base + 6] = True      # transverse tangent
                if getattr(c, "fix_stretch", False):
                    fixed[base + 3] = True           # tangent magnitude
                if fam == "hsr":
                    fixed[base + 6:base + 9] = True  # rotation
                else:
                    fixed[base + 6] = True           # relative angle
        self.fixed = fixed
        self.free = np.flatnonzero(~fixed)
        Q = sp.identity(model.ndof, format="lil")
        for dofs, B in q_blocks:
            Q[np.ix_(dofs, dofs)] = B
        self.Q = Q.tocsr()
        self.n_fixed = int(fixed.sum())

    def reduce(self, R, K=None):
        Rt = self.Q.T @ R
        if K is None:
            return Rt[self.free], None
        Kt = (self.Q.T @ K @ self.Q).tocsr()
        return Rt[self.free], Kt[self.free][:, self.free]

    def expand(self, dxf):
        dx = np.zeros(self.Q.shape[0])
        dx[self.free] = dxf
        return self.Q @ dx


def _predictor(model, gs, constraints, t0, t1):
    """Apply prescribed motion of the step (rotation ramps)."""
    for c in constraints:
        if not isinstance(c, RotationRamp):
            continue
        dth = np.asarray(c.axis, float) * (c.angle(t1) - c.angle(t0))
        dlam = so3.exp_map(dth)
        if model.family in ("cj", "rot", "hsr"):
            tri = gs.tri.copy()
            tri[c.node] = dlam @ tri[c.node]
            gs = replace(gs, tri=tri)
            if model.family == "hsr":
                t = gs.t.copy()
                t[c.node] = dlam @ t[c.node]
                gs = replace(gs, t=t)
        else:
            # tangent family: rotate the tangent, recover the relative
            # angle from the rotated nodal triad
            e, i = np.argwhere(model.conn[:, :2] == c.node)[0]
            est = model.gather(gs)
            _, g1n, lam_nod = model.mesh._nodal_triads(est)
            lam_new = dlam @ lam_nod[e, i]
            t = gs.t.copy()
            t[c.node] = dlam @ t[c.node]
            g1_new = t[c.node] / np.linalg.norm(t[c.node])
            lam_sr = so3.smallest_rotation(gs.lam_m[e, i], g1_new)
            phi = gs.phi.copy()
            phi[c.node] = so3.relative_angle(lam_new, lam_sr)
            gs = replace(gs, t=t, phi=phi)
    return gs


# ---------------------------------------------------------- linear solve

def linear_solve(K, rhs, n_fixed=None):
    """Direct sparse solve with a singularity diagnostic."""
    K = sp.csc_matrix(K)
    try:
        lu = spla.splu(K)
        x = lu.solve(rhs)
    except RuntimeError as exc:
        raise SingularSystem(_singular_message(K, n_fixed, str(exc)))
    if not np.all(np.isfinite(x)):
        raise SingularSystem(_singular_message(K, n_fixed, "non-finite solve"))
    rnorm = np.linalg.norm(rhs)
    if rnorm > 0.0:
        # iterative refinement recovers accuracy on stiff systems
        for _ in range(2):
            res = rhs - K @ x
            if np.linalg.norm(res) < 1e-14 * rnorm:
                break
            x = x + lu.solve(res)
        # normwise backward error: ~eps for a healthy factorization even
        # on badly conditioned systems, O(1) for a broken one
        knorm = np.max(np.abs(K).sum(axis=0))
        berr = (np.linalg.norm(K @ x - rhs)
                / (knorm * np.linalg.norm(x) + rnorm))
        if not berr < 1e-8:
            raise SingularSystem(_singular_message(
                K, n_fixed, f"backward error {berr:.2e}"))
    return x


def _singular_message(K, n_fixed, detail):
    diag = np.abs(K.diagonal())
    pivot = int(np.argmin(diag))
    if n_fixed == 0:
        return ("singular system: rigid-body null modes (translations/"
                f"rotations) — no Dirichlet constraints ({detail})")
    return (f"singular system near pivot {pivot} "
            f"(|diag| = {diag[pivot]:.2e}; {detail})")


# --------------------------------------------------------------- newton

def newton_solve(model, gs, time, config, loads=(), cons=None, dyn=None):
    """Full Newton with multiplicative triad updates.

    Converged when the residual norm and the increment norm (free,
    transformed DOFs, unweighted) both fall below their tolerances."""
    if cons is None:
        cons = ConstraintSystem(model, (), gs)
    for it in range(1, config.n_iter_max + 1):
        R, K = assemble(model, gs, time, loads, dyn)
        Rf, Kf = cons.reduce(R, K)
        rnorm = np.linalg.norm(Rf)
        dxf = linear_solve(Kf, -Rf, n_fixed=cons.n_fixed)
        gs = model.apply_increment(gs, cons.expand(dxf))
        if rnorm < config.tol_res and np.linalg.norm(dxf) < config.tol_inc:
            return gs, it
    raise NoConvergence(
        f"no convergence in {config.n_iter_max} iterations "
        f"(residual {rnorm:.3e})")


# --------------------------------------------------------- step drivers

@dataclass
class StaticResult:
    gs: GlobalState
    n_steps: int
    n_iter_tot: int
    history: list = field(default_factory=list)   # (time, dt, n_iter)


def load_step_adapt(step_fn, gs, config, t_end=1.0):
    """Pseudo-time stepping with halving on failure and doubling after
    four consecutive successes (never beyond the initial step size);
    failed attempts add n_iter_max to the accumulated iteration count."""
    dt0 = t_end / config.n_steps0
    dt = dt0
    t = 0.0
    n_iter_tot = 0
    streak = 0
    history = []
    while t < t_end - 1e-12 * t_end:
        dt_c = min(dt, t_end - t)
        try:
            gs_new, n_it = step_fn(gs, t, t + dt_c)
        except (NoConvergence, so3.SingularSR):
            # a diverged Newton iterate can also leave the smallest-
            # rotation domain; both mean the step was too large
            n_iter_tot += config.n_iter_max
            streak = 0
            if not config.adapt:
                raise
            dt *= 0.5
            if dt < dt0 / 2**16:
                raise StepUnderflow(
                    f"step size underflow at pseudo-time {t:.6f}")
            continue
        gs = gs_new
        t += dt_c
        n_iter_tot += n_it
        history.append((t, dt_c, n_it))
        streak += 1
        if config.adapt and streak >= 4 and dt < dt0:
            dt = min(2.0 * dt, dt0)
            streak = 0
    return StaticResult(gs=gs, n_steps=len(history), n_iter_tot=n_iter_tot,
                        history=history)


def solve_static(model, gs0, config, loads=(), constraints=(), t_end=1.0):
    """Static analysis driven by a pseudo-time ramp of loads/constraints."""

    def step(gs, t0, t1):
        gs = _predictor(model, gs, constraints, t0, t1)
        # constraint frames follow prescribed rotations: rebuild per step
        cons = ConstraintSystem(model, constraints, gs)
        gs, n_it = newton_solve(model, gs, t1, config, loads, cons)
        return model.refresh_state(gs), n_it

    return load_step_adapt(step, gs0, config, t_end=t_end)


@dataclass
class DynamicResult:
    gs: GlobalState
    history: list    # (time, n_iter, e_int, e_kin)


def solve_dynamic(model, gs0, config, params, t_end, loads=(),
                  constraints=()):
    """Generalized-alpha dynamics at a fixed step size, starting from
    rest (nonzero initial loads would require an initial-acceleration
    mass solve; benchmark cases ramp loads from zero)."""
    dyn = model.mesh.dyn_init(model.gather(gs0), params)
    n_steps = int(round(t_end / params.dt))
    gs = gs0
    history = []
    for k in range(n_steps):
        t0, t1 = k * params.dt, (k + 1) * params.dt
        gs = _predictor(model, gs, constraints, t0, t1)
        cons = ConstraintSystem(model, constraints, gs)
        gs, n_it = newton_solve(model, gs, t1, config, loads, cons, dyn=dyn)
        est = model.gather(gs)
        ek = model.mesh.dyn_quantities(est, dyn)[0]
        dyn = model.mesh.dyn_advance(est, dyn)
        gs = model.refresh_state(gs)
        eint = float(np.sum(model.mesh.energy(model.gather(gs))[0]))
        history.append((t1, n_it, eint, ek))
    return DynamicResult(gs=gs, history=history)

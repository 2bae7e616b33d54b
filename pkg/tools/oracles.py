"""Independent oracle generators for values frozen into the test suite.

Run with `python tools/oracles.py`; each section prints the literal that
appears in a test, computed by a route independent of the library code
(scipy.spatial.transform, direct quadrature, brute force, closed forms).
"""

import numpy as np
from scipy.spatial.transform import Rotation


def rotation_roundtrip():
    # tests/test_so3.py::test_roundtrip_07
    u = np.array([0.5, -0.8, 0.3])
    u /= np.linalg.norm(u)
    psi = 0.7 * u
    print("psi =", repr(psi))
    print("R =", repr(Rotation.from_rotvec(psi).as_matrix()))


def gyroscopic_moment():
    # tests/test_beamcore.py::test_inertia_gyroscopic_cross_product
    W = np.array([1.0, 2.0, 3.0])
    C_rho = np.diag([30.0, 10.0, 20.0])
    print("W x C_rho W =", repr(np.cross(W, C_rho @ W)))


def helix_reference_props():
    # tests/test_bench.py: helix-from-straight analytic curve is unit speed
    # r(s) = R0 * ( (sin b + b)/sqrt(2), 1 - cos b, (b - sin b)/sqrt(2) ),
    # b = s / (sqrt(2) R0); |r'| = 1 identically (symbolic check below).
    import sympy as sp
    s, R0 = sp.symbols("s R0", positive=True)
    b = s / (sp.sqrt(2) * R0)
    r = sp.Matrix([R0 * (sp.sin(b) + b) / sp.sqrt(2),
                   R0 * (1 - sp.cos(b)),
                   R0 * (b - sp.sin(b)) / sp.sqrt(2)])
    rp = r.diff(s)
    print("|r'|^2 simplified:", sp.simplify(rp.dot(rp)))


def genalpha_rho0():
    # tests/test_timeint.py::test_params_rho0
    rho = 0.0
    am = (2 * rho - 1) / (rho + 1)
    af = rho / (rho + 1)
    g = 0.5 + af - am
    b = 0.25 * (g + 0.5) ** 2
    print("rho_inf=0 ->", am, af, g, b)


if __name__ == "__main__":
    rotation_roundtrip()
    gyroscopic_moment()
    genalpha_rho0()
    try:
        helix_reference_props()
    except ImportError:
        print("(sympy not installed; helix check skipped)")

"""Geometrically exact beam finite elements.

Modules
-------
so3       rotation-group kernel
interp    centerline and triad field interpolation
beamcore  constitutive law, strains, inertia, momenta
elements  element residuals and consistent tangents
timeint   Lie-group generalized-alpha integrator
solver    assembly, constraints, Newton with adaptive load stepping
bench     benchmark catalog, error norms, reports (CLI in gebeam.cli)
"""

__version__ = "0.1.0"

"""Consistent reconstruction from uniformly noisy linear measurements.

Library modules:

sphere
    sampling, caps, C_d, the |<x, phi>| density and geodesic nets
measurement
    instances, slab systems, radial extent, dump format
estimators
    soft-threshold, cyclic projections, canonical duals, exact W_N
bounds
    closed-form laws and bounds
coverage
    bi-caps, circle oracle, net certificates, non-coverage Monte Carlo
harness
    seeded sweeps, CSV, power-law fitting
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]

"""Commensurability of cusped hyperbolic 3-manifolds via canonical cell
decompositions, together with the supporting machinery: ideal
triangulations, hyperbolic shapes, Epstein-Penner lifts and tilts,
parameter-space cell enumeration, tiling isometries, cusp shape fields,
punctured-torus bundles, and knot code parsing."""

import os

__version__ = '0.1.0'


def asset_path(name):
    """Path of a bundled data file (frozen triangulations, knot tables)."""
    return os.path.join(os.path.dirname(__file__), 'assets', name)

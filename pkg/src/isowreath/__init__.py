"""Isotropic surface geometry: curvature, metric dualities, isometric families,
Darboux wreaths, the paratactic map and discrete flexible nets."""

__version__ = "0.1.0"

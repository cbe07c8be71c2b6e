"""
Numerical engine: Reeb cone, link quadrature, volume and Futaki invariant,
volume flow, n=1 soliton solver and entropy functionals
"""
__version__ = "1.0.0"

from .quadrature import WeightedSphereLink, integrate_basic, mc_integrate
from .reeb_cone import (
    contact_pairing,
    homothetic,
    normalization_charge,
    normalize_to_slice,
    project_tangent,
    reeb_membership,
    tangent_basis,
)
from .volume_futaki import closed_form_relative_volume, futaki, grad_volume, hessian_volume, volume

__all__ = [
    '__version__',
    'WeightedSphereLink',
    'integrate_basic',
    'mc_integrate',
    'contact_pairing',
    'homothetic',
    'normalization_charge',
    'normalize_to_slice',
    'project_tangent',
    'reeb_membership',
    'tangent_basis',
    'closed_form_relative_volume',
    'futaki',
    'grad_volume',
    'hessian_volume',
    'volume',
]

# Repositories package
from . import fields_repository
from . import equilibria_repository
from . import trajectories_repository
from . import manifests_repository

__all__ = [
    'fields_repository',
    'equilibria_repository',
    'trajectories_repository',
    'manifests_repository'
]

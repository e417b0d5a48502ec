# Services package
from . import spectral_service
from . import forcing_service
from . import evolution_service
from . import equilibria_service
from . import pullback_service
from . import structure_service
from . import connections_service
from . import export_service

# Exportar instâncias dos serviços
from .spectral_service import spectral_service
from .forcing_service import forcing_service
from .evolution_service import evolution_service
from .equilibria_service import equilibria_service
from .pullback_service import pullback_service
from .structure_service import structure_service
from .connections_service import connections_service
from .export_service import export_service

__all__ = [
    'spectral_service',
    'forcing_service',
    'evolution_service',
    'equilibria_service',
    'pullback_service',
    'structure_service',
    'connections_service',
    'export_service'
]

"""
Exceções do laboratório
"""


class LabError(Exception):
    """Erro base do laboratório"""
    exit_code = 1


class ConfigError(LabError):
    """Configuração inválida ou incompleta"""
    exit_code = 2


class BifurcationValueError(ConfigError):
    """λ exatamente num ponto de bifurcação (λ = n²)"""


class NumericalError(LabError):
    """Falha numérica (não convergência, blow-up)"""
    exit_code = 3


class NoSuchEquilibrium(NumericalError):
    """Não existe equilíbrio do modo pedido (λ ≤ j²)"""


class NonConvergence(NumericalError):
    """Iteração não convergiu dentro do limite configurado"""

    def __init__(self, message: str, history: list | None = None):
        super().__init__(message)
        self.history = list(history or [])


class BlowUpError(NumericalError):
    """Norma do sup acima do limite de dissipatividade; indica bug do solver"""

    def __init__(self, message: str, time: float, sup_norm: float):
        super().__init__(message)
        self.time = time
        self.sup_norm = sup_norm


class SeedTooLarge(NumericalError):
    """Semente da variedade instável grande demais (dependência em ε acima da tolerância)"""

    def __init__(self, message: str, defect: float):
        super().__init__(message)
        self.defect = defect


class CertificationError(LabError):
    """Alguma certificação falhou"""
    exit_code = 4


class ManifestIntegrityError(CertificationError):
    """Artefato listado no manifesto ausente ou com hash divergente"""

"""
Repositório de equilíbrios (perfil CSV + metadados JSON)
"""

from pathlib import Path

from app.models import Equilibrium, Sign
from app.repositories.fields_repository import load_field, save_field
from app.storage import read_json, write_json


def save_equilibrium(directory: Path, e: Equilibrium) -> list[Path]:
    directory = Path(directory)
    meta = {
        'j': e.j,
        'sign': e.sign.value,
        'lambda': e.lam,
        'beta': e.beta,
        'slope_at_0': e.slope_at_0,
        'zeros': list(e.zeros),
        'residual': e.residual,
        'label': e.label,
    }
    return [
        save_field(directory / f"{e.label}.csv", e.profile),
        write_json(directory / f"{e.label}.json", meta),
    ]


def load_equilibrium(directory: Path, label: str) -> Equilibrium:
    directory = Path(directory)
    meta = read_json(directory / f"{label}.json")
    return Equilibrium(j=int(meta['j']), sign=Sign(meta['sign']), lam=float(meta['lambda']),
                       beta=float(meta['beta']), profile=load_field(directory / f"{label}.csv"),
                       slope_at_0=float(meta['slope_at_0']), zeros=tuple(meta['zeros']),
                       residual=float(meta['residual']))

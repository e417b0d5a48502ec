"""
Repositório de campos (CSV x,value com as bordas de Dirichlet)
"""

import math
from pathlib import Path

import numpy as np

from app.models import Field, Grid
from app.storage import read_csv, write_csv


def save_field(path: Path, field: Field) -> Path:
    """Salva x,value incluindo as linhas x=0 e x=L com valor 0"""
    grid = field.grid
    rows = [(0.0, 0.0)]
    rows.extend((float(x), float(v)) for x, v in zip(grid.points, field.values))
    rows.append((float(grid.length), 0.0))
    return write_csv(path, ['x', 'value'], rows)


def load_field(path: Path) -> Field:
    header, rows = read_csv(path)
    if header != ['x', 'value']:
        raise ValueError(f"Cabeçalho inesperado em {path}: {header}")
    xs = np.array([float(r[0]) for r in rows])
    values = np.array([float(r[1]) for r in rows])
    length = float(xs[-1]) if len(xs) else math.pi
    return Field(Grid(len(rows) - 2, length=length), values[1:-1])

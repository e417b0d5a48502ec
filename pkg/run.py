#!/usr/bin/env python3
"""
LABORATÓRIO CHAFEE-INFANTE - Script de Execução
Executa a linha de comando do laboratório (equilibria, evolve, pullback, connect, omega, report)
"""

import sys

from app import create_app
from app.errors import LabError

if __name__ == '__main__':
    try:
        cli = create_app()
    except LabError as e:
        print(f"Erro ao iniciar o laboratório: {e}", file=sys.stderr)
        sys.exit(e.exit_code)
    cli()

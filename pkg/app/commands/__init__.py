# Commands package
from .equilibria import equilibria_command
from .evolve import evolve_command
from .pullback import pullback_command
from .connect import connect_command
from .omega import omega_command
from .report import report_command

COMMANDS = (
    equilibria_command,
    evolve_command,
    pullback_command,
    connect_command,
    omega_command,
    report_command,
)


def register_commands(group) -> None:
    for command in COMMANDS:
        group.add_command(command)

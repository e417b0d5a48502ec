"""
Repositório de trajetórias, equilíbrios não autônomos e conexões
"""

from pathlib import Path

import numpy as np

from app.models import Connection, Field, Grid, NonAutEquilibrium, Scheme, Sign, SolverConfig, Trajectory
from app.services.forcing_service import forcing_service
from app.storage import read_csv, read_json, write_csv, write_json


def save_trajectory(directory: Path, traj: Trajectory, extra: dict | None = None) -> list[Path]:
    """meta.json + snapshots.csv (tempo seguido dos valores interiores)"""
    directory = Path(directory)
    grid = traj.grid
    meta = {
        't0': traj.t0,
        'times': [float(t) for t in traj.times],
        'lambda': traj.config.lam,
        'forcing': forcing_service.describe(traj.forcing),
        'scheme': traj.config.scheme.value,
        'n_modes': grid.n_modes,
        'length': grid.length,
        'solver': traj.config.describe(),
        'origin': traj.origin,
    }
    if extra:
        meta.update(extra)
    header = ['time'] + [f"u{k}" for k in range(1, grid.n_modes + 1)]
    rows = ([float(t)] + [float(v) for v in state.values] for t, state in zip(traj.times, traj.states))
    return [
        write_json(directory / 'meta.json', meta),
        write_csv(directory / 'snapshots.csv', header, rows),
    ]


def load_trajectory(directory: Path) -> Trajectory:
    directory = Path(directory)
    meta = read_json(directory / 'meta.json')
    grid = Grid(int(meta['n_modes']), length=float(meta['length']))
    _, rows = read_csv(directory / 'snapshots.csv')
    times = np.array([float(r[0]) for r in rows])
    states = tuple(Field(grid, np.array([float(v) for v in r[1:]])) for r in rows)
    solver = dict(meta['solver'])
    cfg = SolverConfig(
        lam=float(solver.pop('lambda')),
        scheme=Scheme(solver.pop('scheme')),
        **solver,
    )
    return Trajectory(t0=float(meta['t0']), times=times, states=states,
                      forcing=forcing_service.from_description(meta['forcing']), config=cfg,
                      origin=meta.get('origin', 'forward'))


def save_convergence(directory: Path, history) -> Path:
    return write_csv(Path(directory) / 'convergence.csv', ['s_k', 'delta_k'],
                     ((float(s), float(d)) for s, d in history))


def load_convergence(directory: Path) -> list[tuple[float, float]]:
    _, rows = read_csv(Path(directory) / 'convergence.csv')
    return [(float(r[0]), float(r[1])) for r in rows]


def save_nonaut_equilibrium(directory: Path, xi: NonAutEquilibrium) -> list[Path]:
    extra = {'j': xi.j, 'sign': xi.sign.value, 'label': xi.label, 'certificates': xi.certificates}
    paths = save_trajectory(directory, xi.trajectory, extra=extra)
    paths.append(save_convergence(directory, xi.convergence_history))
    return paths


def load_nonaut_equilibrium(directory: Path) -> NonAutEquilibrium:
    directory = Path(directory)
    meta = read_json(directory / 'meta.json')
    traj = load_trajectory(directory)
    return NonAutEquilibrium(j=int(meta['j']), sign=Sign(meta['sign']), lam=traj.config.lam, trajectory=traj,
                             convergence_history=tuple(load_convergence(directory)),
                             certificates=dict(meta.get('certificates', {})))


def save_connection(directory: Path, conn: Connection) -> list[Path]:
    directory = Path(directory)
    paths = save_trajectory(directory, conn.trajectory, extra={'label': conn.label})
    paths.append(write_json(directory / 'connection.json', {
        'j': conn.j,
        'sign': conn.sign.value,
        'epsilon': conn.epsilon,
        's0': conn.launch_time,
        'backward_norms': conn.backward_norms,
        'forward_distance': conn.forward_distance,
        'certificates': conn.certificates,
    }))
    return paths


def load_connection(directory: Path) -> Connection:
    directory = Path(directory)
    data = read_json(directory / 'connection.json')
    return Connection(j=int(data['j']), sign=Sign(data['sign']), launch_time=float(data['s0']),
                      epsilon=float(data['epsilon']), trajectory=load_trajectory(directory),
                      backward_norms=np.array(data['backward_norms']),
                      forward_distance=np.array(data['forward_distance']),
                      certificates=dict(data['certificates']))

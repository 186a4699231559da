"""CSV readers and writers for paths, systems, trajectories and diagnostics

Every file has a header row; floats are written with 17 significant digits
so that a written file reads back bit-exactly.
"""

import logging
from pathlib import Path
from typing import Dict, Union

import numpy as np
import pandas as pd

from fgnarx.arx import StateTrajectory
from fgnarx.design import InputDesign
from fgnarx.exceptions import DimensionError, FormatError
from fgnarx.innovations import InnovationSystem
from fgnarx.laplace import RiccatiTrace

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'

PathLike = Union[str, Path]


def _write(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except OSError as e:
        raise FormatError(f'cannot write {path}: {e}') from e
    logger.debug('wrote %d rows to %s', len(frame), path)
    return path


def _read(path: PathLike, *columns: str) -> pd.DataFrame:
    path = Path(path)
    try:
        frame = pd.read_csv(path, float_precision='round_trip')
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise FormatError(f'cannot read {path}: {e}') from e
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise FormatError(f'{path}: missing column(s) {", ".join(missing)}')
    return frame


def _steps(length: int) -> np.ndarray:
    return np.arange(1, length + 1)


def save_noise_path(xi: np.ndarray, path: PathLike) -> Path:
    return _write(pd.DataFrame({'xi': np.asarray(xi, dtype=float)}), path)


def load_noise_path(path: PathLike) -> np.ndarray:
    return _read(path, 'xi')['xi'].to_numpy(dtype=float)


def save_innovation_system(system: InnovationSystem, path: PathLike) -> Path:
    """One row per n = 1..N+1; beta_{N+1} is not defined and left empty"""
    beta = np.full(system.horizon, np.nan)
    beta[:system.beta.size] = system.beta
    frame = pd.DataFrame({'n': _steps(system.horizon), 'beta_n': beta,
                          'sigma_n': system.sigma})
    return _write(frame, path)


def save_trajectory(traj: StateTrajectory, path: PathLike) -> Path:
    eps = traj.innovations if traj.innovations is not None else np.full(traj.n, np.nan)
    frame = pd.DataFrame({
        'n': _steps(traj.n),
        'x': traj.x,
        'z': traj.z,
        'zeta1': traj.zeta[:, 0],
        'zeta2': traj.zeta[:, 1],
        'v': traj.v,
        'eps': eps,
    })
    return _write(frame, path)


def load_trajectory_columns(path: PathLike) -> Dict[str, np.ndarray]:
    """Read the ``x`` and ``v`` columns of a trajectory file (``eps`` when present)"""
    frame = _read(path, 'x', 'v')
    columns = {'x': frame['x'].to_numpy(dtype=float), 'v': frame['v'].to_numpy(dtype=float)}
    if 'eps' in frame.columns and not frame['eps'].isna().any():
        columns['eps'] = frame['eps'].to_numpy(dtype=float)
    return columns


def save_design(design: InputDesign, path: PathLike) -> Path:
    frame = pd.DataFrame({'n': _steps(design.n), 'u': design.u, 'v': design.v,
                          'sigma_next': design.sigma_next})
    return _write(frame, path)


def load_input(path: PathLike, n: int) -> np.ndarray:
    """Read a custom input file with a ``u`` column of length n"""
    u = _read(path, 'u')['u'].to_numpy(dtype=float)
    if u.size != n:
        raise DimensionError(f'{path}: input has {u.size} rows, expected {n}')
    return u


def save_riccati_trace(trace: RiccatiTrace, path: PathLike) -> Path:
    frame = pd.DataFrame({
        'n': _steps(trace.scale.size),
        'gamma11': trace.gamma_diag[:, 0, 0],
        'gamma12': trace.gamma_diag[:, 0, 1],
        'gamma22': trace.gamma_diag[:, 1, 1],
        'z1': trace.z[:, 0],
        'z2': trace.z[:, 1],
        'log_det': trace.log_det,
    })
    return _write(frame, path)


def save_histogram(edges: np.ndarray, counts: np.ndarray, density: np.ndarray,
                   target_density: np.ndarray, path: PathLike) -> Path:
    frame = pd.DataFrame({
        'bin_left': edges[:-1],
        'bin_right': edges[1:],
        'count': np.asarray(counts, dtype=np.int64),
        'density': density,
        'target_density': target_density,
    })
    return _write(frame, path)


def save_table(frame: pd.DataFrame, path: PathLike) -> Path:
    return _write(frame, path)

"""
Servicio de Exportación - Consensus Lyapunov
Trayectorias y series en CSV con escritura atómica
"""
import csv
import io
import logging
import os
import tempfile
from pathlib import Path
from typing import Dict, Sequence

import numpy as np

from app.models import Trajectory

logger = logging.getLogger(__name__)

SERIES_COLUMNS = ("t", "V", "Psi_V", "dist_consensus_inf")


def format_float(value: float) -> str:
    """Doble precisión completa (17 dígitos significativos)"""
    return format(float(value), ".17g")


def atomic_write_text(path: Path, text: str) -> Path:
    """
    Escribe en un temporal del mismo directorio y lo renombra

    Returns:
        Ruta final escrita
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, temporal = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(temporal, path)
    except BaseException:
        if os.path.exists(temporal):
            os.unlink(temporal)
        raise
    logger.debug(f"Archivo escrito: {path}")
    return path


def _csv_text(header: Sequence[str], rows) -> str:
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) for v in row])
    return output.getvalue()


def trajectory_csv_text(trajectory: Trajectory) -> str:
    """CSV con encabezado t,x0,...,x{n-1} y una fila por muestra"""
    header = ["t"] + [f"x{i}" for i in range(trajectory.n)]
    rows = np.column_stack([trajectory.times, trajectory.states])
    return _csv_text(header, rows)


def trajectory_to_csv(trajectory: Trajectory, path: Path) -> Path:
    """Exporta la trayectoria a CSV de forma atómica"""
    return atomic_write_text(path, trajectory_csv_text(trajectory))


def series_csv_text(series: Dict[str, np.ndarray]) -> str:
    """CSV de series con columnas t, V, Psi_V, dist_consensus_inf"""
    rows = np.column_stack([series[col] for col in SERIES_COLUMNS])
    return _csv_text(SERIES_COLUMNS, rows)


def series_to_csv(series: Dict[str, np.ndarray], path: Path) -> Path:
    return atomic_write_text(path, series_csv_text(series))

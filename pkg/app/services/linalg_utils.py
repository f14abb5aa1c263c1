"""
Utilidades de Álgebra Lineal - Consensus Lyapunov
Exponencial matricial por escalado y cuadrado, rango numérico
"""
import logging
import math

import numpy as np
from scipy import linalg

logger = logging.getLogger(__name__)

TAYLOR_TERMS = 20
SCALING_TARGET = 0.5
RANK_RELATIVE_THRESHOLD = 1e-9


def expm(a: np.ndarray, terms: int = TAYLOR_TERMS) -> np.ndarray:
    """
    Exponencial matricial con escalado y cuadrado sobre Taylor truncado

    Se escala A por 2^-k hasta que ‖A‖∞/2^k ≤ 0.5, se evalúa la serie
    de Taylor por Horner y se eleva al cuadrado k veces.

    Args:
        a: Matriz cuadrada
        terms: Cantidad de términos de la serie

    Returns:
        e^A como np.ndarray
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    norma = float(np.abs(a).sum(axis=1).max(initial=0.0))
    k = 0
    if norma > SCALING_TARGET:
        k = max(0, math.ceil(math.log2(norma / SCALING_TARGET)))
    escalada = a / (2.0 ** k)

    identidad = np.eye(n)
    resultado = identidad.copy()
    for j in range(terms, 0, -1):
        resultado = identidad + (escalada @ resultado) / j

    for _ in range(k):
        resultado = resultado @ resultado

    logger.debug(f"expm: n={n}, ‖A‖∞={norma:.3e}, cuadrados={k}")
    return resultado


def numerical_rank(a: np.ndarray, relative_threshold: float = RANK_RELATIVE_THRESHOLD) -> int:
    """
    Rango numérico: valores singulares por encima de threshold·σ_max

    Args:
        a: Matriz
        relative_threshold: Umbral relativo al mayor valor singular

    Returns:
        Cantidad de valores singulares significativos
    """
    sigma = linalg.svdvals(np.asarray(a, dtype=float))
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    return int(np.count_nonzero(sigma > relative_threshold * sigma[0]))


def inf_norm(a: np.ndarray) -> float:
    """Norma infinito de un vector o matriz"""
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        return float(np.abs(a).max(initial=0.0))
    return float(np.abs(a).sum(axis=1).max(initial=0.0))

"""
Validadores de Dominio - Consensus Lyapunov
Validaciones reutilizables para grafos, estados y parámetros de integración
"""
import math
from typing import Any, Iterable, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import (
    ConfigurationException,
    DomainException,
    GraphValidationException,
    IntegrationException,
    InvalidProbabilityException,
)


class GraphValidator:
    """
    Validador para grafos dirigidos ponderados
    """

    @staticmethod
    def validar_digraph(n: int, edges: Iterable[Tuple[int, int, float]]) -> None:
        """
        Valida las invariantes de un WeightedDigraph

        Args:
            n: Cantidad de nodos
            edges: Aristas (origen, destino, peso)

        Raises:
            GraphValidationException: Si alguna invariante no se cumple
        """
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
            raise GraphValidationException(
                message="La cantidad de nodos debe ser un entero positivo",
                details={"n": n}
            )

        vistos = set()
        for posicion, (i, j, w) in enumerate(edges):
            if not (0 <= i < n and 0 <= j < n):
                raise GraphValidationException(
                    message=f"Arista {posicion} con índice fuera de rango [0, {n})",
                    details={"edge": [i, j, w], "n": n}
                )
            if i == j:
                raise GraphValidationException(
                    message=f"Arista {posicion} es un lazo sobre el nodo {i}",
                    details={"edge": [i, j, w]}
                )
            if not (math.isfinite(w) and w > 0):
                raise GraphValidationException(
                    message=f"Arista {posicion} con peso no positivo",
                    details={"edge": [i, j, w]}
                )
            if (i, j) in vistos:
                raise GraphValidationException(
                    message=f"Arista duplicada ({i}, {j})",
                    details={"edge": [i, j, w]}
                )
            vistos.add((i, j))


class StateValidator:
    """
    Validador para vectores de estado y de probabilidad
    """

    @staticmethod
    def validar_vector(x: Any, n: Optional[int] = None, nombre: str = "x") -> np.ndarray:
        """
        Convierte a vector float finito y valida la dimensión

        Returns:
            Copia del vector como np.ndarray de float64
        """
        arr = np.array(x, dtype=float).reshape(-1)
        if n is not None and arr.shape[0] != n:
            raise ConfigurationException(
                message=f"El vector '{nombre}' tiene dimensión {arr.shape[0]}, se esperaba {n}",
                details={"nombre": nombre, "dimension": int(arr.shape[0]), "esperada": n}
            )
        if not np.all(np.isfinite(arr)):
            index = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise DomainException(nombre, index, float(arr[index]), "finito")
        return arr

    @staticmethod
    def validar_positivo(x: np.ndarray, nombre: str = "x") -> None:
        """
        Valida que todas las componentes sean estrictamente positivas

        Raises:
            DomainException: Nombrando el primer índice inválido
        """
        malos = np.flatnonzero(~(x > 0))
        if malos.size:
            index = int(malos[0])
            raise DomainException(nombre, index, float(x[index]), "(0, inf)")

    @staticmethod
    def validar_probabilidad(
        p: Any,
        nombre: str = "p",
        tolerancia: float = 1e-9,
        estricta: bool = True
    ) -> np.ndarray:
        """
        Valida un vector de probabilidad

        Args:
            p: Vector candidato
            nombre: Nombre para los mensajes de error
            tolerancia: Tolerancia para la suma unitaria
            estricta: Exigir componentes > 0; con False alcanza con >= 0

        Raises:
            InvalidProbabilityException: Si tiene componentes fuera de rango o no suma 1
        """
        arr = np.array(p, dtype=float).reshape(-1)
        fuera = np.any(arr <= 0) if estricta else np.any(arr < 0)
        if arr.size == 0 or not np.all(np.isfinite(arr)) or fuera:
            requisito = "estrictamente positivo" if estricta else "no negativo"
            raise InvalidProbabilityException(
                message=f"El vector '{nombre}' debe ser {requisito}",
                details={"nombre": nombre}
            )
        total = float(arr.sum())
        if abs(total - 1.0) > tolerancia:
            raise InvalidProbabilityException(
                message=f"El vector '{nombre}' no está normalizado (suma = {total!r})",
                details={"nombre": nombre, "suma": total}
            )
        return arr

    @staticmethod
    def validar_mismo_tamano(a: Sequence, b: Sequence, nombre_a: str, nombre_b: str) -> None:
        """Valida que dos vectores tengan igual dimensión"""
        if len(a) != len(b):
            raise ConfigurationException(
                message=f"'{nombre_a}' y '{nombre_b}' tienen dimensiones distintas",
                details={nombre_a: len(a), nombre_b: len(b)}
            )


class IntegrationValidator:
    """
    Validador de horizontes y pasos de integración
    """

    @staticmethod
    def validar_horizonte(t_end: float, dt: float) -> None:
        """
        Valida t_end > 0 y dt > 0

        Raises:
            ConfigurationException: Si alguno no es positivo y finito
        """
        for nombre, valor in (("t_end", t_end), ("dt", dt)):
            if not (math.isfinite(valor) and valor > 0):
                raise ConfigurationException(
                    message=f"'{nombre}' debe ser positivo",
                    details={nombre: valor}
                )

    @staticmethod
    def validar_paso_estable(dt: float, max_diagonal: float) -> None:
        """
        Valida la cota de estabilidad dt ≤ 1/(2·max L_ii)

        Raises:
            IntegrationException: Con la cota sugerida en los detalles
        """
        if max_diagonal <= 0:
            return
        cota = 1.0 / (2.0 * max_diagonal)
        if dt > cota:
            raise IntegrationException(
                message=f"Paso dt={dt!r} demasiado grande; usar dt <= {cota!r}",
                details={"dt": dt, "suggested_dt": cota}
            )

"""
Manejo Global de Excepciones - Consensus Lyapunov
Jerarquía de excepciones y traducción centralizada a códigos de salida
"""
import logging
from typing import Any, Dict, Optional

from pydantic import ValidationError


logger = logging.getLogger(__name__)


# ==================== CÓDIGOS DE SALIDA ====================

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_VERIFICATION = 4
EXIT_GRAPH = 5
EXIT_INTEGRATION = 6


class ConsensusLabException(Exception):
    """
    Excepción base personalizada para Consensus Lyapunov
    """
    exit_code: int = EXIT_UNEXPECTED

    def __init__(
        self,
        message: str,
        details: Optional[Dict[str, Any]] = None,
        exit_code: Optional[int] = None
    ):
        self.message = message
        self.details = details or {}
        if exit_code is not None:
            self.exit_code = exit_code
        super().__init__(self.message)


class GraphValidationException(ConsensusLabException):
    """Grafo inválido: pesos no positivos, lazos, índices fuera de rango, aristas duplicadas"""
    exit_code = EXIT_GRAPH


class ReducibleGraphException(GraphValidationException):
    """El grafo no es fuertemente conexo"""
    def __init__(self, n: int, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message="Perron vector not unique/positive: el grafo no es fuertemente conexo",
            details={"n": n, **(details or {})}
        )


class SymmetryRequiredException(GraphValidationException):
    """La operación solo está definida para Laplacianos simétricos"""
    def __init__(self, operacion: str):
        super().__init__(
            message=f"La operación '{operacion}' requiere un Laplaciano simétrico",
            details={"operacion": operacion}
        )


class DomainException(ConsensusLabException):
    """Estado fuera del dominio de un potencial o función monótona"""
    exit_code = EXIT_DOMAIN

    def __init__(self, nombre: str, index: Optional[int], value: float, domain: Any = None):
        if index is None:
            mensaje = f"Parámetro '{nombre}' fuera del dominio {domain}: {value!r}"
        else:
            mensaje = f"Componente {index} fuera del dominio de '{nombre}': {value!r}"
        super().__init__(
            message=mensaje,
            details={"potencial": nombre, "index": index, "value": value, "domain": domain}
        )
        self.index = index


class InvalidProbabilityException(ConsensusLabException):
    """Vector de probabilidad no positivo o no normalizado"""
    exit_code = EXIT_DOMAIN


class NonConvexPotentialException(ConsensusLabException):
    """Potencial o función que no es estrictamente convexa / creciente en el rango muestreado"""
    exit_code = EXIT_DOMAIN


class ConfigurationException(ConsensusLabException):
    """Configuración de escenario o argumentos inválidos"""
    exit_code = EXIT_CONFIG


class IntegrationException(ConsensusLabException):
    """Paso de integración inestable o subdesbordado"""
    exit_code = EXIT_INTEGRATION


class VerificationException(ConsensusLabException):
    """Uno o más chequeos de verificación fallaron"""
    exit_code = EXIT_VERIFICATION


def handle_exception(exc: BaseException) -> int:
    """
    Handler central: registra la excepción y retorna el código de salida

    Args:
        exc: Excepción capturada en el punto de entrada

    Returns:
        Código de salida del proceso
    """
    if isinstance(exc, ConsensusLabException):
        logger.warning(
            f"{type(exc).__name__}: {exc.message}",
            extra={"details": exc.details, "exit_code": exc.exit_code}
        )
        return exc.exit_code

    if isinstance(exc, ValidationError):
        errors = []
        for error in exc.errors():
            field = " -> ".join(str(x) for x in error["loc"])
            errors.append({"field": field, "message": error["msg"], "type": error["type"]})
        logger.warning("Error de validación en la configuración", extra={"errors": errors})
        return EXIT_CONFIG

    logger.critical(f"Unhandled Exception: {exc}", exc_info=exc)
    return EXIT_UNEXPECTED

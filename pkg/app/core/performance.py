"""
Monitoreo de Performance - Consensus Lyapunov
Mide corridas de simulación y verificación y alerta sobre las lentas
"""
import logging
import time
from contextlib import contextmanager
from typing import Iterator, Optional

from app.core.config import settings

logger = logging.getLogger(__name__)


@contextmanager
def timed_run(label: str, slow_threshold: Optional[float] = None) -> Iterator[dict]:
    """
    Context manager que mide la duración de una corrida

    Args:
        label: Nombre de la corrida (escenario, suite, ...)
        slow_threshold: Umbral en segundos (default: settings.SLOW_RUN_THRESHOLD)

    Yields:
        Dict que al salir contiene 'duration_seconds'
    """
    threshold = slow_threshold if slow_threshold is not None else settings.SLOW_RUN_THRESHOLD
    metrics: dict = {}
    start_time = time.perf_counter()
    try:
        yield metrics
    finally:
        duration = time.perf_counter() - start_time
        metrics["duration_seconds"] = duration

        if duration > threshold:
            logger.warning(
                f"SLOW RUN: {label} took {duration:.2f}s (threshold: {threshold}s)",
                extra={"label": label, "duration_seconds": duration}
            )
        else:
            logger.debug(f"{label} completado en {duration * 1000:.0f} ms")

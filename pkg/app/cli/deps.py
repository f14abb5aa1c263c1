"""
Dependencias de la CLI - Consensus Lyapunov
Settings por invocación y configuración de logging
"""
import argparse
from typing import List

from app.core.config import Settings
from app.core.exceptions import ConfigurationException
from app.core.logging_config import setup_logging


def get_settings() -> Settings:
    """
    Settings frescos por invocación

    Así CONSENSUS_OUTPUT_DIR y el .env se leen al momento de ejecutar el comando.
    """
    return Settings()


def configure_logging(args: argparse.Namespace, settings: Settings) -> None:
    """Flags globales --log-level / --json-logs sobre los valores de Settings"""
    setup_logging(
        log_level=args.log_level or settings.LOG_LEVEL,
        log_dir=settings.LOG_DIR,
        enable_console=True,
        enable_file=settings.LOG_TO_FILE,
        enable_json=args.json_logs or settings.LOG_JSON,
    )


def parse_sizes(texto: str) -> List[int]:
    """
    Parsea "4,8,16"

    Raises:
        ConfigurationException: Si algún elemento no es entero
    """
    partes = [p.strip() for p in texto.split(",") if p.strip()]
    try:
        return [int(p) for p in partes]
    except ValueError as e:
        raise ConfigurationException(f"Tamaños inválidos: '{texto}'", {"sizes": texto}) from e

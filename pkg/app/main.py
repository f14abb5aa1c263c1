"""
Aplicación Principal - Consensus Lyapunov
Punto de entrada de la CLI: simulate, verify, flowmap, report
"""
import argparse
import logging
import sys
from typing import List, Optional

from app.cli.commands import flowmap, report, simulate, verify
from app.cli.deps import configure_logging, get_settings
from app.core.exceptions import handle_exception

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="consensus-lyapunov",
        description=f"{settings.PROJECT_NAME} v{settings.VERSION}: simulación y verificación de dinámicas de consenso",
    )
    parser.add_argument("--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    parser.add_argument("--json-logs", action="store_true", help="Logs en formato JSON")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for comando in (simulate, verify, flowmap, report):
        comando.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Ejecuta la CLI y retorna el código de salida

    0 éxito, 2 configuración, 3 dominio, 4 verificación, 5 grafo, 6 integración.
    """
    args = build_parser().parse_args(argv)
    configure_logging(args, get_settings())
    logger.debug(f"Comando: {args.command}")
    try:
        return args.handler(args)
    except Exception as exc:
        return handle_exception(exc)


if __name__ == "__main__":
    sys.exit(main())

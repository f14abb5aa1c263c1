"""
Logging - Consensus Lyapunov
stderr para diagnósticos (stdout queda reservado a reportes y CSV),
archivos rotativos opcionales y un canal de auditoría en JSON
"""
import json
import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Optional

from pythonjsonlogger import jsonlogger

TEXT_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"
JSON_FIELDS = "%(asctime)s %(levelname)s %(name)s %(funcName)s %(lineno)d %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

MAX_LOG_BYTES = 10 * 1024 * 1024
AUDIT_LOGGER_NAME = "audit"

# Archivo -> (nivel mínimo, backups)
LOG_FILES = {
    "app.log": (logging.INFO, 5),
    "error.log": (logging.ERROR, 5),
}


class ColoredFormatter(logging.Formatter):
    """Colorea solo el nivel; el resto de la línea queda igual que en archivo"""

    _ANSI = {
        logging.DEBUG: "36",
        logging.INFO: "32",
        logging.WARNING: "33",
        logging.ERROR: "31",
        logging.CRITICAL: "35",
    }

    def format(self, record: logging.LogRecord) -> str:
        nivel = record.levelname
        codigo = self._ANSI.get(record.levelno)
        if codigo:
            record.levelname = f"\033[{codigo}m{nivel:<8}\033[0m"
        try:
            return super().format(record)
        finally:
            record.levelname = nivel


class AuditFilter(logging.Filter):
    """Deja pasar solo registros emitidos por log_audit"""

    def filter(self, record: logging.LogRecord) -> bool:
        return getattr(record, "audit", False) is True


def _build_formatter(as_json: bool, colored: bool = False) -> logging.Formatter:
    if as_json:
        return jsonlogger.JsonFormatter(JSON_FIELDS, json_ensure_ascii=False)
    if colored and sys.stderr.isatty():
        return ColoredFormatter(TEXT_FORMAT, datefmt=DATE_FORMAT)
    return logging.Formatter(TEXT_FORMAT, datefmt=DATE_FORMAT)


def _rotating(path: Path, level: int, backups: int, formatter: logging.Formatter) -> RotatingFileHandler:
    handler = RotatingFileHandler(path, maxBytes=MAX_LOG_BYTES, backupCount=backups, encoding="utf-8")
    handler.setLevel(level)
    handler.setFormatter(formatter)
    return handler


def setup_logging(
    log_level: str = "INFO",
    log_dir: Optional[Path] = None,
    enable_console: bool = True,
    enable_file: bool = False,
    enable_json: bool = False,
) -> None:
    """
    Reemplaza los handlers del root logger

    Args:
        log_level: nombre del nivel (DEBUG ... CRITICAL)
        log_dir: carpeta de app.log, error.log y audit.log (default ./logs)
        enable_console: emitir a stderr
        enable_file: escribir archivos rotativos
        enable_json: JSON en consola y en app.log/error.log; audit.log es siempre JSON
    """
    nivel = logging.getLevelName(log_level.upper())
    if not isinstance(nivel, int):
        raise ValueError(f"Nivel de logging desconocido: {log_level}")

    raiz = logging.getLogger()
    for handler in list(raiz.handlers):
        raiz.removeHandler(handler)
        handler.close()
    raiz.setLevel(nivel)

    if enable_console:
        consola = logging.StreamHandler(sys.stderr)
        consola.setFormatter(_build_formatter(enable_json, colored=True))
        raiz.addHandler(consola)

    if enable_file:
        carpeta = log_dir or Path("logs")
        carpeta.mkdir(parents=True, exist_ok=True)
        for nombre, (minimo, backups) in LOG_FILES.items():
            raiz.addHandler(_rotating(carpeta / nombre, minimo, backups, _build_formatter(enable_json)))

        auditoria = _rotating(carpeta / "audit.log", logging.INFO, 10, _build_formatter(True))
        auditoria.addFilter(AuditFilter())
        raiz.addHandler(auditoria)

    logging.getLogger(__name__).debug(
        f"Logging listo: nivel={log_level} consola={enable_console} archivos={enable_file} json={enable_json}"
    )


def log_audit(action: str, details: Optional[dict[str, Any]] = None) -> None:
    """
    Registra el resultado de una corrida o de la suite en el canal de auditoría

    Args:
        action: identificador estable, p. ej. "SCENARIO_RUN" o "VERIFICATION_SUITE"
        details: campos adicionales serializables a JSON
    """
    texto = action
    if details:
        texto = f"{action} {json.dumps(details, ensure_ascii=False, sort_keys=True, default=str)}"
    logging.getLogger(AUDIT_LOGGER_NAME).info(texto, extra={"audit": True, "action": action})

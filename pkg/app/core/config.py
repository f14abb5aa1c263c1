"""
Configuración de la aplicación - Consensus Lyapunov
Variables de entorno y settings globales
"""
from pathlib import Path
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Configuración centralizada del sistema
    Lee variables de entorno desde archivo .env
    """
    # Aplicación
    PROJECT_NAME: str = "Consensus Lyapunov"
    VERSION: str = "1.0.0"

    # Salidas (CONSENSUS_OUTPUT_DIR pisa el directorio de corridas)
    OUTPUT_DIR: Path = Field(default=Path("runs"), validation_alias="CONSENSUS_OUTPUT_DIR")

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_DIR: Path = Path("logs")
    LOG_JSON: bool = False
    LOG_TO_FILE: bool = False

    # Verificación
    TOLERANCE_MODE: Literal["normal", "strict", "lenient"] = "normal"

    # Ejecución por lotes
    MAX_WORKERS: int = Field(default=4, ge=1)
    SLOW_RUN_THRESHOLD: float = 10.0  # segundos

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
        populate_by_name=True,
    )

    @property
    def TOLERANCE_SCALE(self) -> float:
        """Factor global aplicado a todas las tolerancias de verificación"""
        return {"normal": 1.0, "strict": 0.1, "lenient": 10.0}[self.TOLERANCE_MODE]


settings = Settings()

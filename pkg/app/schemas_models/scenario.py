"""
Schemas Pydantic para Escenarios - Consensus Lyapunov
Configuración de corridas de simulación (archivo JSON, claves desconocidas prohibidas)
"""
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

GraphGenerator = Literal["path", "cycle", "complete", "random"]
MonotoneName = Literal["identity", "log", "power"]
ArtifactName = Literal["trajectory", "series", "report"]


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ==================== GRAFO ====================

class GraphSource(_StrictModel):
    """
    Origen del grafo: archivo de lista de aristas o generador con nombre
    """
    path: Optional[Path] = None
    generator: Optional[GraphGenerator] = None
    n: Optional[int] = Field(None, ge=2)
    seed: Optional[int] = None
    symmetric: bool = True
    weight: float = Field(1.0, gt=0)

    @model_validator(mode="after")
    def validar_origen(self) -> "GraphSource":
        """Exactamente uno de path / generator; el generador requiere n"""
        if (self.path is None) == (self.generator is None):
            raise ValueError("Indicar exactamente uno de 'path' o 'generator'")
        if self.generator is not None and self.n is None:
            raise ValueError("El generador requiere 'n'")
        return self


# ==================== ESTADO INICIAL ====================

class InitialState(_StrictModel):
    """
    Estado inicial explícito o por patrón

    Patrones:
    - spike: baseline en todos los nodos y baseline + height en el nodo k
    - uniform-random: U[low, high] con semilla
    """
    values: Optional[List[float]] = Field(None, min_length=1)
    pattern: Optional[Literal["spike", "uniform-random"]] = None
    k: int = Field(0, ge=0)
    baseline: float = 1.0
    height: float = 1.0
    low: float = 0.5
    high: float = 2.0
    seed: Optional[int] = None

    @model_validator(mode="after")
    def validar_estado(self) -> "InitialState":
        if (self.values is None) == (self.pattern is None):
            raise ValueError("Indicar exactamente uno de 'values' o 'pattern'")
        if self.pattern == "uniform-random" and not self.low < self.high:
            raise ValueError("Se requiere low < high")
        return self


# ==================== POTENCIAL ====================

class PotentialConfig(_StrictModel):
    """
    Potencial y parámetros de V(x) = rt·β Σ q_i H(c x_i)

    Sin beta/c se usa la normalización β = α·n, c = 1/α.
    """
    name: Literal["quadratic", "entropy", "gibbs", "power"]
    beta: Optional[float] = Field(None, gt=0)
    c: Optional[float] = Field(None, gt=0)
    ref: float = 1.0
    p: float = Field(2.0, gt=1)
    rt: float = Field(1.0, gt=0)


# ==================== DINÁMICA ====================

class DynamicsConfig(_StrictModel):
    """
    Dinámica a integrar

    - linear: ẋ = -Lx
    - nonlinear: ẋ = -L_hf(x)·x con f, h por nombre
    - log-laplacian: f = identidad, h = ln, rate = 1/α
    - gradient-flow: f = h = H′ del potencial configurado
    """
    kind: Literal["linear", "nonlinear", "log-laplacian", "gradient-flow"] = "linear"
    f: Optional[MonotoneName] = None
    h: Optional[MonotoneName] = None
    f_p: float = Field(2.0, gt=0)
    h_p: float = Field(2.0, gt=0)
    rate: float = Field(1.0, gt=0)

    @model_validator(mode="after")
    def validar_funciones(self) -> "DynamicsConfig":
        if self.kind == "nonlinear" and (self.f is None or self.h is None):
            raise ValueError("La dinámica 'nonlinear' requiere 'f' y 'h'")
        if self.kind != "nonlinear" and (self.f is not None or self.h is not None):
            raise ValueError(f"'f'/'h' solo aplican a la dinámica 'nonlinear' (kind={self.kind})")
        return self


class IntegrationConfig(_StrictModel):
    t_end: float = Field(..., gt=0)
    dt: float = Field(..., gt=0)


# ==================== ESCENARIO ====================

class ScenarioConfig(_StrictModel):
    """
    Escenario completo de simulación

    compare agrega una segunda dinámica sobre el mismo grafo y estado inicial.
    """
    name: str = Field(..., pattern=r"^[A-Za-z0-9_.-]+$")
    graph: GraphSource
    initial_state: InitialState
    potential: PotentialConfig
    dynamics: DynamicsConfig = Field(default_factory=DynamicsConfig)
    compare: Optional[DynamicsConfig] = None
    alpha: Optional[float] = Field(None, gt=0)
    integration: IntegrationConfig
    outputs: List[ArtifactName] = Field(default_factory=lambda: ["trajectory", "series", "report"])

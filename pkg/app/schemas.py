"""
Schemas Pydantic - Consensus Lyapunov
Reportes de verificación y de corridas
"""
import math
import sys
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


# ==================== CHECK REPORT ====================

class CheckReport(BaseModel):
    """
    Resultado de un chequeo: passed ⇔ residual ≤ tolerance

    Los chequeos informativos se reportan pero no cuentan como fallas.
    """
    model_config = ConfigDict(frozen=True)

    name: str = Field(..., min_length=1)
    passed: bool
    residual: float = Field(..., ge=0)
    tolerance: float = Field(..., gt=0)
    seed: Optional[int] = None
    context: Dict[str, Any] = Field(default_factory=dict)
    informational: bool = False

    @model_validator(mode="after")
    def validar_consistencia(self) -> "CheckReport":
        """Valida que passed coincida con residual <= tolerance"""
        if self.passed != (self.residual <= self.tolerance):
            raise ValueError(
                f"Reporte inconsistente: passed={self.passed}, "
                f"residual={self.residual!r}, tolerance={self.tolerance!r}"
            )
        return self

    @classmethod
    def from_residual(
        cls,
        name: str,
        residual: float,
        tolerance: float,
        seed: Optional[int] = None,
        context: Optional[Dict[str, Any]] = None,
        informational: bool = False
    ) -> "CheckReport":
        """Construye el reporte derivando passed; residuos no finitos se saturan"""
        residual = float(residual)
        if not math.isfinite(residual):
            residual = sys.float_info.max
        return cls(
            name=name,
            passed=residual <= tolerance,
            residual=residual,
            tolerance=tolerance,
            seed=seed,
            context=context or {},
            informational=informational,
        )

    @property
    def counts_as_failure(self) -> bool:
        return not self.passed and not self.informational


class SuiteSummary(BaseModel):
    """Resumen de una suite de verificación"""
    total: int
    passed: int
    failed: int
    informational_failed: int

    @classmethod
    def from_reports(cls, reports: List[CheckReport]) -> "SuiteSummary":
        return cls(
            total=len(reports),
            passed=sum(1 for r in reports if r.passed),
            failed=sum(1 for r in reports if r.counts_as_failure),
            informational_failed=sum(1 for r in reports if r.informational and not r.passed),
        )


# ==================== RUN REPORT ====================

class RunReport(BaseModel):
    """
    Resumen de una corrida de escenario

    Sin marcas de tiempo: dos corridas iguales producen el mismo JSON.
    """
    name: str
    scenario: Dict[str, Any]
    dynamics: str
    consensus_value: float
    alpha: float
    terminal_distance: float
    samples: int
    stopped_early: bool
    checks: List[CheckReport] = Field(default_factory=list)
    files: Dict[str, str] = Field(default_factory=dict)
    compare: Optional["RunReport"] = None

    @property
    def passed(self) -> bool:
        propios = all(not r.counts_as_failure for r in self.checks)
        return propios and (self.compare is None or self.compare.passed)


RunReport.model_rebuild()

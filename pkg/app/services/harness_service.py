"""
Servicio de Corridas - Consensus Lyapunov
Escenarios desde JSON, series para graficar, reportes y suite de verificación
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import ConfigurationException, DomainException, SymmetryRequiredException
from app.core.logging_config import log_audit
from app.core.performance import timed_run
from app.core.validators import StateValidator
from app.models import (
    AdditiveLyapunov,
    ConvexPotential,
    LaplacianMatrix,
    NonlinearSpec,
    PerronVector,
    Trajectory,
    WeightedDigraph,
)
from app.schemas import CheckReport, RunReport
from app.schemas_models.scenario import (
    DynamicsConfig,
    GraphSource,
    InitialState,
    PotentialConfig,
    ScenarioConfig,
)
from app.services import (
    export_service,
    flow_service,
    graph_service,
    metric_service,
    potential_service,
)
from app.services.verification_service import VerificationService

logger = logging.getLogger(__name__)

RUN_REPORT_FILE = "run_report.json"
TRAJECTORY_FILE = "trajectory.csv"
SERIES_FILE = "series.csv"
COMPARE_PREFIX = "compare_"


# ==================== CONFIGURACIÓN ====================

def load_scenario(path: Path) -> ScenarioConfig:
    """
    Lee y valida un escenario JSON

    Las rutas de grafo relativas se resuelven contra el directorio del archivo.

    Raises:
        ConfigurationException: Si el archivo no existe o no es JSON válido
        ValidationError: Si el contenido no respeta el esquema
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationException(f"No existe el escenario: {path}", {"path": str(path)})
    try:
        crudo = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigurationException(
            f"JSON inválido en {path}: {e.msg} (línea {e.lineno})",
            {"path": str(path), "linea": e.lineno}
        ) from e

    config = ScenarioConfig.model_validate(crudo)
    if config.graph.path is not None and not config.graph.path.is_absolute():
        grafo = config.graph.model_copy(update={"path": path.parent / config.graph.path})
        config = config.model_copy(update={"graph": grafo})
    logger.info(f"Escenario cargado: {config.name} ({path})")
    return config


def build_graph(source: GraphSource) -> WeightedDigraph:
    """Grafo desde lista de aristas o generador con nombre"""
    if source.path is not None:
        return graph_service.load_edge_list(source.path)
    return graph_service.named_graph(
        source.generator, source.n, seed=source.seed, symmetric=source.symmetric, weight=source.weight
    )


def build_initial_state(state: InitialState, n: int) -> np.ndarray:
    """
    Estado inicial explícito o por patrón

    Raises:
        ConfigurationException: Si el tamaño no coincide o k está fuera de rango
    """
    if state.values is not None:
        if len(state.values) != n:
            raise ConfigurationException(
                f"El estado inicial tiene {len(state.values)} componentes, el grafo {n} nodos",
                {"esperado": n, "recibido": len(state.values)}
            )
        return StateValidator.validar_vector(state.values, n, "x0")
    if state.pattern == "spike":
        if state.k >= n:
            raise ConfigurationException(f"Nodo del pico fuera de rango: k={state.k}, n={n}", {"k": state.k, "n": n})
        x = np.full(n, state.baseline, dtype=float)
        x[state.k] += state.height
        return x
    return np.random.default_rng(state.seed).uniform(state.low, state.high, n)


def build_potential(config: PotentialConfig) -> ConvexPotential:
    return potential_service.potential_by_name(config.name, ref=config.ref, p=config.p)


def build_lyapunov(config: PotentialConfig, q: PerronVector, alpha: float) -> AdditiveLyapunov:
    """
    V(x) = rt·β Σ q_i H(c x_i) con β = α·n y c = 1/α por defecto
    """
    n = q.q.shape[0]
    beta = config.beta if config.beta is not None else alpha * n
    c = config.c if config.c is not None else 1.0 / alpha
    return AdditiveLyapunov(beta=config.rt * beta, c=c, q=q, potential=build_potential(config))


def build_spec(dynamics: DynamicsConfig, H: ConvexPotential, alpha: float) -> Optional[NonlinearSpec]:
    """Especificación no lineal de la dinámica; None para la lineal"""
    if dynamics.kind == "linear":
        return None
    if dynamics.kind == "log-laplacian":
        return flow_service.log_laplacian_spec(alpha)
    if dynamics.kind == "gradient-flow":
        return flow_service.gradient_flow_spec(H, alpha)
    return NonlinearSpec(
        f=metric_service.function_by_name(dynamics.f, dynamics.f_p),
        h=metric_service.function_by_name(dynamics.h, dynamics.h_p),
        alpha=alpha,
        rate=dynamics.rate,
    )


# ==================== SERIES ====================

def emit_series(
    trajectory: Trajectory,
    V: AdditiveLyapunov,
    L: LaplacianMatrix,
    spec: Optional[NonlinearSpec] = None
) -> Dict[str, np.ndarray]:
    """
    Series t, V, Psi_V, dist_consensus_inf a lo largo de la trayectoria

    Psi_V = ∇V·(velocidad) es -dV/dt para la dinámica integrada: Lx en la
    lineal, L_hf(x)·x si se pasa spec.

    Raises:
        DomainException: Si V no está definida en alguna muestra
    """
    a = trajectory.consensus_level
    valores = np.empty(len(trajectory))
    psi = np.empty(len(trajectory))
    distancia = np.empty(len(trajectory))
    for k, x in enumerate(trajectory.states):
        valores[k] = potential_service.lyapunov_value(V, x)
        if spec is None:
            psi[k] = potential_service.dissipation_rate(L, V, x)
        else:
            velocidad = flow_service.nonlinear_laplacian(L, spec, x) @ x
            psi[k] = float(potential_service.lyapunov_gradient(V, x) @ velocidad)
        distancia[k] = flow_service.distance_to_consensus(x, a)
    return {"t": trajectory.times.copy(), "V": valores, "Psi_V": psi, "dist_consensus_inf": distancia}


def _integrate(
    L: LaplacianMatrix,
    spec: Optional[NonlinearSpec],
    x0: np.ndarray,
    config: ScenarioConfig
) -> Trajectory:
    t_end, dt = config.integration.t_end, config.integration.dt
    if spec is None:
        return flow_service.integrate_linear(L, x0, t_end, dt)
    return flow_service.integrate_nonlinear(L, spec, x0, t_end, dt)


def _certify(
    verifier: VerificationService,
    L: LaplacianMatrix,
    V: AdditiveLyapunov,
    H: ConvexPotential,
    x0: np.ndarray,
    alpha: float,
    trajectory: Trajectory,
    seed: Optional[int]
) -> List[CheckReport]:
    """Chequeos embebidos en el reporte de una corrida"""
    checks: List[CheckReport] = []
    if len(trajectory) >= 2:
        checks.append(verifier.check_conservation(trajectory, seed=seed))
        checks.append(verifier.check_monotone(V, trajectory, seed=seed))
    else:
        logger.info("Trayectoria de una sola muestra: estado inicial en consenso, sin chequeos de trayectoria")
    if L.symmetric:
        checks.append(verifier.check_theorem2(L, H, x0, alpha, seed=seed))
        if trajectory.dynamics == "linear" and len(trajectory) >= 3:
            checks.append(verifier.check_dissipation(L, V, trajectory, seed=seed))
    return checks


# ==================== ESCENARIOS ====================

def _run_dynamics(
    config: ScenarioConfig,
    dynamics: DynamicsConfig,
    L: LaplacianMatrix,
    q: PerronVector,
    x0: np.ndarray,
    alpha: float,
    run_dir: Path,
    prefijo: str,
    verifier: VerificationService
) -> RunReport:
    H = build_potential(config.potential)
    V = build_lyapunov(config.potential, q, alpha)
    # V debe estar definida en x0 antes de integrar
    potential_service.lyapunov_value(V, x0)
    spec = build_spec(dynamics, H, alpha)
    if spec is not None and not L.symmetric:
        raise SymmetryRequiredException(f"dinámica {dynamics.kind}")

    trajectory = _integrate(L, spec, x0, config)
    series = emit_series(trajectory, V, L, spec)
    seed = config.graph.seed if config.graph.seed is not None else config.initial_state.seed
    checks = _certify(verifier, L, V, H, x0, alpha, trajectory, seed)

    files: Dict[str, str] = {}
    if "trajectory" in config.outputs:
        ruta = export_service.trajectory_to_csv(trajectory, run_dir / f"{prefijo}{TRAJECTORY_FILE}")
        files["trajectory"] = str(ruta)
    if "series" in config.outputs:
        ruta = export_service.series_to_csv(series, run_dir / f"{prefijo}{SERIES_FILE}")
        files["series"] = str(ruta)

    return RunReport(
        name=config.name,
        scenario=config.model_dump(mode="json"),
        dynamics=dynamics.kind,
        consensus_value=flow_service.consensus_value(q, x0),
        alpha=alpha,
        terminal_distance=float(series["dist_consensus_inf"][-1]),
        samples=len(trajectory),
        stopped_early=trajectory.stopped_early,
        checks=checks,
        files=files,
    )


def run_scenario(
    config: ScenarioConfig,
    output_dir: Optional[Path] = None,
    tolerance_scale: Optional[float] = None
) -> RunReport:
    """
    Corre un escenario y escribe sus artefactos en output_dir/<name>/

    Args:
        config: Escenario validado
        output_dir: Directorio base (default: settings.OUTPUT_DIR)
        tolerance_scale: Escala de los chequeos embebidos (default: settings.TOLERANCE_SCALE)

    Returns:
        RunReport con chequeos embebidos y rutas de archivos emitidos

    Raises:
        ReducibleGraphException: Si el grafo no es fuertemente conexo
        DomainException: Si el estado inicial sale del dominio del potencial
    """
    output_dir = Path(output_dir) if output_dir is not None else settings.OUTPUT_DIR
    run_dir = output_dir / config.name
    verifier = VerificationService(tolerance_scale if tolerance_scale is not None else settings.TOLERANCE_SCALE)

    with timed_run(f"escenario {config.name}") as metrics:
        g = build_graph(config.graph)
        L = graph_service.build_laplacian(g)
        q = graph_service.perron_vector(L)
        x0 = build_initial_state(config.initial_state, L.n)
        alpha = config.alpha if config.alpha is not None else flow_service.consensus_value(q, x0)
        if not alpha > 0:
            raise DomainException("alpha", None, alpha, "(0, inf): fijar 'alpha' en el escenario")

        report = _run_dynamics(config, config.dynamics, L, q, x0, alpha, run_dir, "", verifier)
        if config.compare is not None:
            comparada = _run_dynamics(config, config.compare, L, q, x0, alpha, run_dir, COMPARE_PREFIX, verifier)
            report = report.model_copy(update={"compare": comparada})

        if "report" in config.outputs:
            ruta = run_dir / RUN_REPORT_FILE
            files = {**report.files, "report": str(ruta)}
            report = report.model_copy(update={"files": files})
            export_service.atomic_write_text(ruta, report.model_dump_json(indent=2) + "\n")

    log_audit("SCENARIO_RUN", {
        "name": config.name,
        "dynamics": config.dynamics.kind,
        "compare": config.compare.kind if config.compare else None,
        "passed": report.passed,
        "duration_seconds": round(metrics["duration_seconds"], 3),
    })
    logger.info(
        f"Escenario {config.name}: a={report.consensus_value:.6g}, "
        f"distancia final={report.terminal_distance:.3e}, passed={report.passed}"
    )
    return report


def run_batch(
    configs: Sequence[ScenarioConfig],
    output_dir: Optional[Path] = None,
    max_workers: Optional[int] = None,
    tolerance_scale: Optional[float] = None
) -> List[RunReport]:
    """
    Corre varios escenarios en paralelo, cada uno aislado en su directorio

    Todos los escenarios terminan antes de propagar el primer error.
    """
    nombres = [c.name for c in configs]
    if len(set(nombres)) != len(nombres):
        raise ConfigurationException("Nombres de escenario repetidos en el lote", {"nombres": nombres})
    workers = max_workers or settings.MAX_WORKERS

    with ThreadPoolExecutor(max_workers=workers) as executor:
        futuros = [executor.submit(run_scenario, c, output_dir, tolerance_scale) for c in configs]
        resultados: List[Tuple[Optional[RunReport], Optional[BaseException]]] = []
        for config, futuro in zip(configs, futuros):
            try:
                resultados.append((futuro.result(), None))
            except Exception as e:
                logger.error(f"Escenario {config.name} falló: {type(e).__name__}: {e}")
                resultados.append((None, e))

    for _, error in resultados:
        if error is not None:
            raise error
    return [r for r, _ in resultados]


def load_run_report(run_dir: Path) -> RunReport:
    """
    Relee run_report.json de un directorio de corrida

    Raises:
        ConfigurationException: Si el reporte no existe
    """
    ruta = Path(run_dir) / RUN_REPORT_FILE
    if not ruta.is_file():
        raise ConfigurationException(f"No hay {RUN_REPORT_FILE} en {run_dir}", {"run_dir": str(run_dir)})
    try:
        return RunReport.model_validate_json(ruta.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise ConfigurationException(f"Reporte ilegible en {ruta}", {"errores": e.error_count()}) from e


# ==================== SUITE ====================

def run_verification_suite(
    seed: int,
    count: int,
    sizes: Sequence[int],
    tolerance_scale: Optional[float] = None,
    max_workers: Optional[int] = None
) -> List[CheckReport]:
    """
    Suite completa sobre count instancias aleatorias por tamaño

    Raises:
        ConfigurationException: Si count < 1 o sizes está vacío
    """
    escala = tolerance_scale if tolerance_scale is not None else settings.TOLERANCE_SCALE
    verifier = VerificationService(escala)
    with timed_run(f"suite seed={seed}") as metrics:
        reports = verifier.run_suite(seed, count, list(sizes), max_workers=max_workers or settings.MAX_WORKERS)

    fallidos = sum(1 for r in reports if r.counts_as_failure)
    log_audit("VERIFICATION_SUITE", {
        "seed": seed,
        "count": count,
        "sizes": list(sizes),
        "tolerance_scale": escala,
        "checks": len(reports),
        "failed": fallidos,
        "duration_seconds": round(metrics["duration_seconds"], 3),
    })
    return reports

"""
Servicio de Dinámica - Consensus Lyapunov
Mapa de flujo, integración RK4 lineal y no lineal, dual de Markov
"""
import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np

from app.core.exceptions import (
    ConfigurationException,
    DomainException,
    IntegrationException,
    NonConvexPotentialException,
)
from app.core.validators import IntegrationValidator, StateValidator
from app.models import (
    ConvexPotential,
    FlowMap,
    LaplacianMatrix,
    NonlinearSpec,
    PerronVector,
    Trajectory,
)
from app.services import graph_service, metric_service
from app.services.linalg_utils import expm, inf_norm

logger = logging.getLogger(__name__)

Rhs = Callable[[np.ndarray], np.ndarray]

# Parada cerca del equilibrio: ‖ẋ‖∞ < EQUILIBRIUM_RATIO · ‖x‖∞
EQUILIBRIUM_RATIO = 1e-12
DT_MIN = 1e-9
SPEC_SAMPLES = 1000


# ==================== MAPA DE FLUJO ====================

def flow_map(L: LaplacianMatrix, t: float) -> FlowMap:
    """
    P^(t) = e^{-Lt}, matriz estocástica por filas

    Raises:
        ConfigurationException: Si t < 0
    """
    if not (math.isfinite(t) and t >= 0):
        raise ConfigurationException(f"El horizonte del mapa de flujo debe ser >= 0 (t={t!r})", {"t": t})
    return FlowMap(matrix=expm(-L.entries * t), horizon=t)


# ==================== VALOR DE CONSENSO ====================

def consensus_value(q: PerronVector, x0) -> float:
    """a(x₀) = qᵀx₀"""
    x0 = StateValidator.validar_vector(x0, q.q.shape[0], "x0")
    return float(q.q @ x0)


def density(x, a: float) -> np.ndarray:
    """
    ρ = x/a

    Raises:
        DomainException: Si a <= 0
    """
    if not a > 0:
        raise DomainException("a", None, a, "(0, inf)")
    return StateValidator.validar_vector(x) * (1.0 / a)


def distance_to_consensus(x, a: float) -> float:
    """‖x - a·1‖∞"""
    return inf_norm(np.asarray(x, dtype=float) - a)


def in_simplex(q: PerronVector, x, alpha: float, tol: float = 1e-8) -> bool:
    """Pertenencia a M(α) = {x >= 0 : qᵀx = α}"""
    x = np.asarray(x, dtype=float)
    return bool(np.all(x >= 0) and abs(float(q.q @ x) - alpha) <= tol * max(1.0, abs(alpha)))


# ==================== INTEGRADOR ====================

def _rk4_step(rhs: Rhs, x: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(x)
    k2 = rhs(x + 0.5 * h * k1)
    k3 = rhs(x + 0.5 * h * k2)
    k4 = rhs(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _sample_times(t_end: float, dt: float) -> np.ndarray:
    """Grilla 0, dt, 2dt, ... con el último paso acortado para terminar en t_end"""
    pasos = max(1, math.ceil(t_end / dt - 1e-9))
    times = np.arange(pasos + 1, dtype=float) * dt
    times[-1] = t_end
    return times


def _is_equilibrium(dx: np.ndarray, x: np.ndarray) -> bool:
    norma_dx = inf_norm(dx)
    return norma_dx == 0.0 or norma_dx < EQUILIBRIUM_RATIO * inf_norm(x)


def _integrate_fixed(
    rhs: Rhs,
    x0: np.ndarray,
    t_end: float,
    dt: float,
    stop_early: bool
) -> Tuple[np.ndarray, np.ndarray, bool]:
    times = _sample_times(t_end, dt)
    states: List[np.ndarray] = [x0]
    x = x0
    for k in range(len(times) - 1):
        if stop_early and _is_equilibrium(rhs(x), x):
            logger.debug(f"Equilibrio alcanzado en t={times[k]:.6g}")
            return times[: k + 1], np.array(states), True
        x = _rk4_step(rhs, x, times[k + 1] - times[k])
        states.append(x)
    return times, np.array(states), False


def integrate_linear(
    L: LaplacianMatrix,
    x0,
    t_end: float,
    dt: float,
    stop_early: bool = True
) -> Trajectory:
    """
    RK4 de paso fijo para ẋ = -Lx, muestreado cada dt

    Args:
        L: Laplaciano de un grafo fuertemente conexo
        x0: Estado inicial
        t_end: Horizonte
        dt: Paso (debe cumplir dt <= 1/(2·max L_ii))
        stop_early: Cortar cuando ‖ẋ‖∞ < 1e-12·‖x‖∞

    Raises:
        IntegrationException: Si dt supera la cota de estabilidad (con suggested_dt)
    """
    IntegrationValidator.validar_horizonte(t_end, dt)
    IntegrationValidator.validar_paso_estable(dt, L.max_diagonal)
    x0 = StateValidator.validar_vector(x0, L.n, "x0")
    q = graph_service.perron_vector(L)
    entries = L.entries

    times, states, detenida = _integrate_fixed(lambda x: -(entries @ x), x0, t_end, dt, stop_early)
    logger.debug(f"Trayectoria lineal: n={L.n}, muestras={len(times)}, detenida={detenida}")
    return Trajectory(
        times=times,
        states=states,
        conserved=float(q.q @ x0),
        weights=q.q,
        dynamics="linear",
        dt=dt,
        stopped_early=detenida,
    )


def markov_dual(
    L: LaplacianMatrix,
    p0,
    t_end: float,
    dt: float,
    stop_early: bool = True
) -> Trajectory:
    """
    Ecuación de Kolmogorov hacia adelante ṗᵀ = -pᵀL

    p0 puede tener componentes nulas (p. ej. una masa puntual).

    Raises:
        InvalidProbabilityException: Si p0 no es un vector de probabilidad
    """
    IntegrationValidator.validar_horizonte(t_end, dt)
    IntegrationValidator.validar_paso_estable(dt, L.max_diagonal)
    p0 = StateValidator.validar_probabilidad(p0, "p0", estricta=False)
    StateValidator.validar_mismo_tamano(p0, L.entries, "p0", "L")
    transpuesta = L.entries.T

    times, states, detenida = _integrate_fixed(lambda p: -(transpuesta @ p), p0, t_end, dt, stop_early)
    return Trajectory(
        times=times,
        states=states,
        conserved=float(p0.sum()),
        weights=np.ones(L.n),
        dynamics="markov_dual",
        dt=dt,
        stopped_early=detenida,
    )


# ==================== DIFUSIÓN NO LINEAL ====================

def log_laplacian_spec(alpha: float) -> NonlinearSpec:
    """
    f = identidad, h = ln, rate = 1/α: reproduce ẋ = -L ln ρ

    Acoplamientos -[L_log]ij = w_ij / (α·LM(ρ_i, ρ_j)).
    """
    return NonlinearSpec(
        f=metric_service.identity_function(),
        h=metric_service.log_function(),
        alpha=alpha,
        rate=1.0 / alpha,
    )


def gradient_flow_spec(H: ConvexPotential, alpha: float) -> NonlinearSpec:
    """f = h = H′: el flujo gradiente que reproduce la dinámica lineal"""
    derivada = H.derivative_function()
    return NonlinearSpec(f=derivada, h=derivada, alpha=alpha)


def validate_nonlinear_spec(spec: NonlinearSpec, rho, samples: int = SPEC_SAMPLES) -> None:
    """
    Verifica f′ > 0 y h′ > 0 muestreando el rango de ρ encontrado

    Raises:
        NonConvexPotentialException: Si alguna derivada no es positiva
    """
    rho = np.asarray(rho, dtype=float)
    grilla = np.linspace(float(rho.min()), float(rho.max()), samples)
    for func in (spec.f, spec.h):
        func.domain.check(grilla, func.name)
        derivada = np.asarray(func.derivative(grilla), dtype=float)
        if np.any(~(derivada > 0)):
            index = int(np.flatnonzero(~(derivada > 0))[0])
            raise NonConvexPotentialException(
                message=f"'{func.name}' no es estrictamente creciente en u={grilla[index]!r}",
                details={"funcion": func.name, "u": float(grilla[index])}
            )


class _EdgeCouplings:
    """
    Acoplamientos c_ij = rate·w_ij·(h(ρ_i) - h(ρ_j))/(f(ρ_i) - f(ρ_j)) sobre las aristas de L

    Índices y pesos se arman una vez por trayectoria. Se memoriza el último
    estado evaluado (por identidad), así la etapa k1 del RK4 reutiliza los
    acoplamientos del chequeo de estabilidad.
    """

    def __init__(self, L: LaplacianMatrix, spec: NonlinearSpec):
        self.n = L.n
        self.spec = spec
        self.i, self.j, w = L.edge_arrays()
        self.pesos = spec.rate * w
        self.inverso_alpha = 1.0 / spec.alpha
        self._ultimo: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def check_domain(self, x: np.ndarray) -> None:
        rho = x * self.inverso_alpha
        for func in (self.spec.f, self.spec.h):
            func.domain.check(rho, func.name)

    def couplings(self, x: np.ndarray) -> np.ndarray:
        if self._ultimo is not None and self._ultimo[0] is x:
            return self._ultimo[1]
        self.check_domain(x)
        rho = x * self.inverso_alpha
        a, b = rho[self.i], rho[self.j]
        c = self.pesos * metric_service.ordered_quotient(self.spec.h, self.spec.f, np.maximum(a, b), np.minimum(a, b))
        self._ultimo = (x, c)
        return c

    def velocity(self, x: np.ndarray) -> np.ndarray:
        """-L_hf(x)·x como suma de flujos c_ij (x_i - x_j)"""
        flujo = self.couplings(x) * (x[self.i] - x[self.j])
        return -np.bincount(self.i, weights=flujo, minlength=self.n)

    def max_diagonal(self, x: np.ndarray) -> float:
        return float(np.bincount(self.i, weights=self.couplings(x), minlength=self.n).max(initial=0.0))

    def matrix(self, x: np.ndarray) -> np.ndarray:
        entries = np.zeros((self.n, self.n))
        entries[self.i, self.j] = -self.couplings(x)
        np.fill_diagonal(entries, -entries.sum(axis=1))
        return entries


def nonlinear_laplacian(L: LaplacianMatrix, spec: NonlinearSpec, x) -> np.ndarray:
    """
    L_hf(x): fuera de la diagonal -rate·w_ij·(h(ρ_i) - h(ρ_j))/(f(ρ_i) - f(ρ_j))

    Raises:
        DomainException: Si ρ = x/α sale del dominio de f o h
    """
    x = StateValidator.validar_vector(x, L.n)
    return _EdgeCouplings(L, spec).matrix(x)


def integrate_nonlinear(
    L: LaplacianMatrix,
    spec: NonlinearSpec,
    x0,
    t_end: float,
    dt: float,
    stop_early: bool = True,
    dt_min: float = DT_MIN
) -> Trajectory:
    """
    RK4 para ẋ = -L_hf(x)·x con subdivisión de pasos

    Cada intervalo de salida se divide en 2^k subpasos; k crece mientras
    un subpaso supere 1/(2·max diag L_hf) o una etapa salga del dominio.

    Raises:
        DomainException: Si x0 está fuera del dominio
        IntegrationException: Si el subpaso requerido cae por debajo de dt_min
    """
    IntegrationValidator.validar_horizonte(t_end, dt)
    x0 = StateValidator.validar_vector(x0, L.n, "x0")
    operador = _EdgeCouplings(L, spec)
    operador.check_domain(x0)
    validate_nonlinear_spec(spec, x0 * (1.0 / spec.alpha))

    times = _sample_times(t_end, dt)
    states: List[np.ndarray] = [x0]
    x = x0
    detenida = False
    subdivisiones_max = 0
    for k in range(len(times) - 1):
        if stop_early and _is_equilibrium(operador.velocity(x), x):
            times = times[: k + 1]
            detenida = True
            break
        x, nivel = _advance_interval(operador, x, times[k + 1] - times[k], dt_min)
        subdivisiones_max = max(subdivisiones_max, nivel)
        states.append(x)

    logger.debug(
        f"Trayectoria no lineal: n={L.n}, muestras={len(times)}, "
        f"subdivisión máxima=2^{subdivisiones_max}, detenida={detenida}"
    )
    return Trajectory(
        times=times,
        states=np.array(states),
        conserved=float(x0.sum()),
        weights=np.ones(L.n),
        dynamics="nonlinear",
        dt=dt,
        stopped_early=detenida,
        metadata={"max_subdivision_level": subdivisiones_max},
    )


def _advance_interval(
    operador: _EdgeCouplings,
    x_start: np.ndarray,
    intervalo: float,
    dt_min: float
) -> Tuple[np.ndarray, int]:
    nivel = 0
    while True:
        sub = intervalo / (2 ** nivel)
        if sub < dt_min:
            raise IntegrationException(
                message=f"Subpaso {sub!r} por debajo de dt_min={dt_min!r}",
                details={"dt": intervalo, "dt_min": dt_min, "nivel": nivel}
            )
        resultado = _try_substeps(operador, x_start, sub, 2 ** nivel)
        if resultado is not None:
            return resultado, nivel
        nivel += 1


def _try_substeps(operador: _EdgeCouplings, x: np.ndarray, h: float, count: int) -> Optional[np.ndarray]:
    try:
        for _ in range(count):
            diagonal = operador.max_diagonal(x)
            if diagonal > 0 and h > 1.0 / (2.0 * diagonal):
                return None
            x = _rk4_step(operador.velocity, x, h)
            operador.check_domain(x)
    except DomainException:
        return None
    return x

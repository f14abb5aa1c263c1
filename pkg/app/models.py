"""
Modelos de Dominio - Consensus Lyapunov
Tipos inmutables: grafos, Laplacianos, potenciales, métricas y trayectorias
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from app.core.exceptions import DomainException, GraphValidationException
from app.core.validators import GraphValidator

ArrayFunction = Callable[[np.ndarray], np.ndarray]
GapFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

# Tolerancia absoluta de sumas por fila para matrices con forma Laplaciana
ROW_SUM_TOL = 1e-12


def _frozen_array(values: Any, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise GraphValidationException(
            message=f"Se esperaba un arreglo de {ndim} dimensiones",
            details={"shape": list(arr.shape)}
        )
    arr.setflags(write=False)
    return arr


# ==================== GRAFOS ====================

@dataclass(frozen=True)
class Edge:
    """Arista dirigida (source → target) con peso positivo"""
    source: int
    target: int
    weight: float


@dataclass(frozen=True)
class WeightedDigraph:
    """
    Grafo dirigido ponderado G = (N, E, w)

    Invariantes validadas al construir: pesos positivos, sin lazos,
    índices en [0, n) y a lo sumo una arista por par ordenado.
    """
    n: int
    edges: Tuple[Edge, ...]

    def __post_init__(self) -> None:
        normalizadas = tuple(
            e if isinstance(e, Edge) else Edge(int(e[0]), int(e[1]), float(e[2]))
            for e in self.edges
        )
        object.__setattr__(self, "edges", normalizadas)
        GraphValidator.validar_digraph(self.n, ((e.source, e.target, e.weight) for e in normalizadas))

    @classmethod
    def from_edges(cls, n: int, edges) -> "WeightedDigraph":
        """Construye desde tuplas (i, j, w)"""
        return cls(n=n, edges=tuple(edges))

    @property
    def weights(self) -> Dict[Tuple[int, int], float]:
        return {(e.source, e.target): e.weight for e in self.edges}

    def is_symmetric(self) -> bool:
        """Cada arista (i, j) tiene su recíproca (j, i) con el mismo peso"""
        pesos = self.weights
        return all(pesos.get((j, i)) == w for (i, j), w in pesos.items())

    def undirected_edges(self) -> Tuple[Tuple[int, int, float], ...]:
        """Aristas no dirigidas (i < j) de un grafo simétrico, en orden lexicográfico"""
        return tuple(sorted(
            (e.source, e.target, e.weight) for e in self.edges if e.source < e.target
        ))


@dataclass(frozen=True)
class LaplacianMatrix:
    """
    Laplaciano L con [L]ij = -w_ij fuera de la diagonal y filas de suma cero
    """
    entries: np.ndarray
    symmetric: bool
    balanced: bool

    def __post_init__(self) -> None:
        arr = _frozen_array(self.entries, 2)
        n, m = arr.shape
        if n != m:
            raise GraphValidationException("El Laplaciano debe ser cuadrado", {"shape": [n, m]})
        offdiag = arr[~np.eye(n, dtype=bool)]
        if np.any(offdiag > 0) or np.any(np.diag(arr) < 0):
            raise GraphValidationException("Signos inválidos en el Laplaciano")
        escala = ROW_SUM_TOL * max(1.0, float(np.abs(arr).max(initial=0.0)))
        row_sums = np.abs(arr.sum(axis=1))
        if np.any(row_sums > escala):
            raise GraphValidationException(
                "Las filas del Laplaciano deben sumar cero",
                {"max_row_sum": float(row_sums.max())}
            )
        if self.symmetric and not np.array_equal(arr, arr.T):
            raise GraphValidationException("Laplaciano marcado simétrico pero no lo es")
        if self.balanced and np.any(np.abs(arr.sum(axis=0)) > escala):
            raise GraphValidationException(
                "Laplaciano marcado balanceado pero sus columnas no suman cero",
                {"max_column_sum": float(np.abs(arr.sum(axis=0)).max())}
            )
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def max_diagonal(self) -> float:
        return float(np.diag(self.entries).max(initial=0.0))

    @property
    def inf_norm(self) -> float:
        """‖L‖∞ (máxima suma absoluta por fila)"""
        return float(np.abs(self.entries).sum(axis=1).max(initial=0.0))

    def edge_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Índices (i, j) y pesos positivos w_ij = -[L]ij de todas las aristas dirigidas"""
        off = -self.entries.copy()
        np.fill_diagonal(off, 0.0)
        i, j = np.nonzero(off > 0)
        return i, j, off[i, j]


@dataclass(frozen=True)
class IncidenceMatrix:
    """Matriz de incidencia con signo: fila (i, j) con +1 en i y -1 en j"""
    entries: np.ndarray
    edge_order: Tuple[Tuple[int, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", _frozen_array(self.entries, 2))


@dataclass(frozen=True)
class PerronVector:
    """Vector de Perron izquierdo: q > 0, ‖q‖₁ = 1, qᵀL = 0"""
    q: np.ndarray

    def __post_init__(self) -> None:
        arr = _frozen_array(self.q, 1)
        if np.any(arr <= 0) or abs(float(arr.sum()) - 1.0) > 1e-12:
            raise GraphValidationException("Perron vector not unique/positive")
        object.__setattr__(self, "q", arr)

    @classmethod
    def uniform(cls, n: int) -> "PerronVector":
        return cls(np.full(n, 1.0 / n))


# ==================== POTENCIALES ====================

@dataclass(frozen=True)
class Interval:
    """Intervalo de validez (lo, hi); closed_lo incluye el extremo inferior"""
    lo: float = -math.inf
    hi: float = math.inf
    closed_lo: bool = False

    def contains(self, u: np.ndarray) -> np.ndarray:
        lower = (u >= self.lo) if self.closed_lo else (u > self.lo)
        return lower & (u < self.hi)

    def check(self, u: np.ndarray, nombre: str) -> None:
        """
        Raises:
            DomainException: Nombrando el primer índice fuera del intervalo
        """
        malos = np.flatnonzero(~self.contains(np.asarray(u, dtype=float).reshape(-1)))
        if malos.size:
            index = int(malos[0])
            raise DomainException(nombre, index, float(np.ravel(u)[index]), str(self))

    def __str__(self) -> str:
        izquierda = "[" if self.closed_lo else "("
        return f"{izquierda}{self.lo!r}, {self.hi!r})"


# Guarda de underflow para potenciales logarítmicos: u ≥ 1e-300
REAL_LINE = Interval()
POSITIVE = Interval(lo=1e-300, closed_lo=True)


@dataclass(frozen=True)
class MonotoneFunction:
    """
    Función escalar estrictamente creciente con derivada

    gap(a, b) devuelve f(a) - f(b) evitando cancelación cuando está disponible.
    """
    name: str
    value: ArrayFunction
    derivative: ArrayFunction
    domain: Interval = REAL_LINE
    gap: Optional[GapFunction] = None

    def difference(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.gap is not None:
            return self.gap(a, b)
        return self.value(a) - self.value(b)


@dataclass(frozen=True)
class ConvexPotential:
    """
    Potencial escalar H con H′ y H″ analíticas sobre su dominio
    """
    name: str
    value: ArrayFunction
    derivative: ArrayFunction
    second_derivative: ArrayFunction
    domain: Interval = REAL_LINE
    derivative_gap: Optional[GapFunction] = None

    def derivative_function(self) -> MonotoneFunction:
        """H′ como función monótona (H″ como su derivada)"""
        return MonotoneFunction(
            name=f"{self.name}'",
            value=self.derivative,
            derivative=self.second_derivative,
            domain=self.domain,
            gap=self.derivative_gap,
        )


@dataclass(frozen=True)
class AdditiveLyapunov:
    """
    V(x) = β Σ qᵢ H(c xᵢ)
    """
    beta: float
    c: float
    q: np.ndarray
    potential: ConvexPotential

    def __post_init__(self) -> None:
        for nombre in ("beta", "c"):
            valor = getattr(self, nombre)
            if not valor > 0:
                raise DomainException(f"AdditiveLyapunov.{nombre}", None, valor, "(0, inf)")
        q = self.q.q if isinstance(self.q, PerronVector) else self.q
        arr = _frozen_array(q, 1)
        if np.any(arr <= 0):
            raise DomainException("q", int(np.flatnonzero(arr <= 0)[0]), float(arr.min()), "(0, inf)")
        object.__setattr__(self, "q", arr)

    @property
    def n(self) -> int:
        return self.q.shape[0]


@dataclass(frozen=True)
class DisagreementReport:
    """V_L, Ψ_L, V_SoS y Ψ_V evaluados en un mismo estado"""
    laplacian_potential: float
    group_disagreement: float
    collective: float
    generalized: float


# ==================== GEOMETRÍA ====================

@dataclass(frozen=True)
class MetricMatrix:
    """
    G⁻¹(x): matriz simétrica con forma Laplaciana evaluada en el estado x
    """
    entries: np.ndarray
    state: np.ndarray
    alpha: float

    def __post_init__(self) -> None:
        arr = _frozen_array(self.entries, 2)
        if not np.allclose(arr, arr.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(arr).max(initial=0.0)))):
            raise GraphValidationException("La matriz métrica debe ser simétrica")
        object.__setattr__(self, "entries", arr)
        object.__setattr__(self, "state", _frozen_array(self.state, 1))


@dataclass(frozen=True)
class EdgeWeightMatrix:
    """Diagonal W de pesos por arista, alineada con el orden de IncidenceMatrix"""
    diagonal: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "diagonal", _frozen_array(self.diagonal, 1))

    def as_matrix(self) -> np.ndarray:
        return np.diag(self.diagonal)


@dataclass(frozen=True)
class MetricSpectrum:
    """Certificado espectral de G⁻¹"""
    eigenvalues: np.ndarray
    positive_semidefinite: bool
    kernel_dimension: int
    condition_number: float


# ==================== DINÁMICA ====================

@dataclass(frozen=True)
class FlowMap:
    """P^(t) = e^{-Lt}"""
    matrix: np.ndarray
    horizon: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", _frozen_array(self.matrix, 2))


@dataclass(frozen=True)
class NonlinearSpec:
    """
    Difusión no lineal ẋ = -L_hf(x)·x con ρ = x/α

    rate escala todos los acoplamientos (1 por defecto).
    """
    f: MonotoneFunction
    h: MonotoneFunction
    alpha: float
    rate: float = 1.0

    def __post_init__(self) -> None:
        for nombre in ("alpha", "rate"):
            valor = getattr(self, nombre)
            if not valor > 0:
                raise DomainException(f"NonlinearSpec.{nombre}", None, valor, "(0, inf)")


@dataclass(frozen=True)
class Trajectory:
    """
    Muestras (t_k, x(t_k)) de una integración

    conserved es weightsᵀx(0); weights es q para la dinámica lineal y el
    vector de unos para la dual de Markov y las difusiones no lineales.
    """
    times: np.ndarray
    states: np.ndarray
    conserved: float
    weights: np.ndarray
    dynamics: str = "linear"
    dt: float = 0.0
    stopped_early: bool = False
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        times = _frozen_array(self.times, 1)
        states = _frozen_array(self.states, 2)
        if times.shape[0] != states.shape[0] or times.shape[0] == 0:
            raise GraphValidationException("Trayectoria con tiempos y estados desalineados")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise GraphValidationException("Los tiempos deben empezar en 0 y ser estrictamente crecientes")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "weights", _frozen_array(self.weights, 1))

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def consensus_level(self) -> float:
        """Valor de consenso a = conserved / Σ weights"""
        return self.conserved / float(self.weights.sum())

    def __len__(self) -> int:
        return self.times.shape[0]

"""
Servicio de Grafos - Consensus Lyapunov
Laplacianos, matrices de incidencia, conectividad y vector de Perron
"""
import logging
import math
import warnings
from pathlib import Path
from typing import List, Optional, Tuple

import networkx as nx
import numpy as np
from scipy import linalg

from app.core.exceptions import (
    GraphValidationException,
    ReducibleGraphException,
    SymmetryRequiredException,
)
from app.models import (
    ROW_SUM_TOL,
    EdgeWeightMatrix,
    IncidenceMatrix,
    LaplacianMatrix,
    PerronVector,
    WeightedDigraph,
)
from app.services.linalg_utils import expm

logger = logging.getLogger(__name__)

# Rango de pesos de los grafos aleatorios
RANDOM_WEIGHT_LOW = 0.5
RANDOM_WEIGHT_HIGH = 2.0
MAX_REJECTION_ATTEMPTS = 1000
PERRON_MAX_SQUARINGS = 64

NAMED_GRAPHS = ("path", "cycle", "complete", "random")


# ==================== CONSTRUCCIÓN ====================

def build_laplacian(g: WeightedDigraph) -> LaplacianMatrix:
    """
    Construye el Laplaciano L con [L]ij = -w_ij y diagonal Σj w_ij

    Args:
        g: Grafo dirigido ponderado (validado al construirse)

    Returns:
        LaplacianMatrix con las banderas symmetric / balanced calculadas
    """
    entries = np.zeros((g.n, g.n))
    for e in g.edges:
        entries[e.source, e.target] = -e.weight
    np.fill_diagonal(entries, -entries.sum(axis=1))

    symmetric = g.is_symmetric()
    escala = max(1.0, float(np.abs(entries).max(initial=0.0)))
    balanced = symmetric or bool(np.all(np.abs(entries.sum(axis=0)) <= ROW_SUM_TOL * escala))

    logger.debug(f"Laplaciano construido: n={g.n}, |E|={len(g.edges)}, simétrico={symmetric}")
    return LaplacianMatrix(entries=entries, symmetric=symmetric, balanced=balanced)


def digraph_from_laplacian(L: LaplacianMatrix) -> WeightedDigraph:
    """Reconstruye el grafo a partir del patrón de L (pesos w_ij = -[L]ij)"""
    i, j, w = L.edge_arrays()
    return WeightedDigraph.from_edges(L.n, zip(i.tolist(), j.tolist(), w.tolist()))


def incidence(g: WeightedDigraph, undirected: Optional[bool] = None) -> IncidenceMatrix:
    """
    Matriz de incidencia con signo (+1 en el origen, -1 en el destino)

    Args:
        g: Grafo
        undirected: True exige aristas no dirigidas (cada par una sola vez);
            None las usa si el grafo es simétrico

    Raises:
        SymmetryRequiredException: Si se pide incidencia no dirigida sobre un grafo no simétrico
    """
    symmetric = g.is_symmetric()
    if undirected is None:
        undirected = symmetric
    if undirected and not symmetric:
        raise SymmetryRequiredException("incidence")

    if undirected:
        pares = [(i, j) for i, j, _ in g.undirected_edges()]
    else:
        pares = [(e.source, e.target) for e in g.edges]

    entries = np.zeros((len(pares), g.n))
    for fila, (i, j) in enumerate(pares):
        entries[fila, i] = 1.0
        entries[fila, j] = -1.0
    return IncidenceMatrix(entries=entries, edge_order=tuple(pares))


def edge_weights(g: WeightedDigraph, m: IncidenceMatrix) -> EdgeWeightMatrix:
    """Pesos W alineados con el orden de filas de la incidencia"""
    pesos = g.weights
    return EdgeWeightMatrix(np.array([pesos[par] for par in m.edge_order], dtype=float))


def to_networkx(g: WeightedDigraph) -> nx.DiGraph:
    """Convierte a networkx.DiGraph con atributo 'weight'"""
    grafo = nx.DiGraph()
    grafo.add_nodes_from(range(g.n))
    grafo.add_weighted_edges_from((e.source, e.target, e.weight) for e in g.edges)
    return grafo


# ==================== CONECTIVIDAD ====================

def is_strongly_connected(g: WeightedDigraph) -> bool:
    """
    True si todo nodo alcanza a todo otro por aristas dirigidas

    Equivale a rank(L) = n - 1.
    """
    if g.n == 1:
        return True
    return nx.is_strongly_connected(to_networkx(g))


def laplacian_is_strongly_connected(L: LaplacianMatrix) -> bool:
    """Conectividad fuerte leída del patrón de L"""
    if L.n == 1:
        return True
    i, j, _ = L.edge_arrays()
    grafo = nx.DiGraph()
    grafo.add_nodes_from(range(L.n))
    grafo.add_edges_from(zip(i.tolist(), j.tolist()))
    return nx.is_strongly_connected(grafo)


def algebraic_connectivity(L: LaplacianMatrix) -> float:
    """
    λ₂: menor autovalor no nulo (parte real para L no simétrico)

    Raises:
        GraphValidationException: Si n < 2
        ReducibleGraphException: Si el grafo no es fuertemente conexo
    """
    if L.n < 2:
        raise GraphValidationException("λ₂ requiere al menos dos nodos", {"n": L.n})
    if not laplacian_is_strongly_connected(L):
        raise ReducibleGraphException(L.n)
    if L.symmetric:
        valores = linalg.eigvalsh(L.entries)
    else:
        valores = np.sort(np.real(linalg.eigvals(L.entries)))
    return float(valores[1])


# ==================== VECTOR DE PERRON ====================

def perron_vector(L: LaplacianMatrix) -> PerronVector:
    """
    Vector de Perron izquierdo: qᵀL = 0, q > 0, Σq = 1

    Resuelve Lᵀq = 0 con la última ecuación reemplazada por Σq = 1. Si el
    sistema está mal condicionado usa potencias de e^{-LΔ} con Δ = 1/‖L‖∞.

    Raises:
        ReducibleGraphException: Si el grafo no es fuertemente conexo
    """
    n = L.n
    if not laplacian_is_strongly_connected(L):
        raise ReducibleGraphException(n)
    if L.balanced:
        return PerronVector.uniform(n)

    sistema = L.entries.T.copy()
    sistema[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0

    q: Optional[np.ndarray]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", linalg.LinAlgWarning)
            q = linalg.solve(sistema, rhs)
    except (linalg.LinAlgError, linalg.LinAlgWarning) as e:
        logger.warning(f"Sistema de Perron mal condicionado ({e}); usando iteración de potencias")
        q = None

    if q is None or np.any(q <= 0):
        q = _perron_by_powers(L)

    return PerronVector(q / q.sum())


def _perron_by_powers(L: LaplacianMatrix) -> np.ndarray:
    paso = 1.0 / L.inf_norm
    p = expm(-L.entries * paso)
    for _ in range(PERRON_MAX_SQUARINGS):
        siguiente = p @ p
        if np.abs(siguiente - p).max() <= 1e-15:
            p = siguiente
            break
        p = siguiente
    q = p.mean(axis=0)
    if np.any(q <= 0):
        raise ReducibleGraphException(L.n, {"metodo": "potencias"})
    return q


# ==================== LISTA DE ARISTAS ====================

def parse_edge_list(text: str) -> WeightedDigraph:
    """
    Parsea el formato de lista de aristas

    Formato: encabezado "n <count>", una arista "i j w" por línea,
    líneas que empiezan con '#' ignoradas.

    Raises:
        GraphValidationException: Si falta el encabezado o una línea es inválida
    """
    n: Optional[int] = None
    edges: List[Tuple[int, int, float]] = []
    for numero, cruda in enumerate(text.splitlines(), start=1):
        linea = cruda.strip()
        if not linea or linea.startswith("#"):
            continue
        partes = linea.split()
        if partes[0] == "n":
            if n is not None or len(partes) != 2:
                raise GraphValidationException(f"Encabezado 'n' inválido en línea {numero}", {"linea": cruda})
            try:
                n = int(partes[1])
            except ValueError as e:
                raise GraphValidationException(f"Cantidad de nodos inválida en línea {numero}", {"linea": cruda}) from e
            continue
        if len(partes) != 3:
            raise GraphValidationException(f"Se esperaba 'i j w' en línea {numero}", {"linea": cruda})
        try:
            edges.append((int(partes[0]), int(partes[1]), float(partes[2])))
        except ValueError as e:
            raise GraphValidationException(f"Arista ilegible en línea {numero}", {"linea": cruda}) from e

    if n is None:
        raise GraphValidationException("Falta el encabezado 'n <count>'")
    return WeightedDigraph.from_edges(n, edges)


def load_edge_list(path: Path) -> WeightedDigraph:
    """Lee un archivo de lista de aristas"""
    path = Path(path)
    if not path.is_file():
        raise GraphValidationException(f"No existe el archivo de grafo: {path}", {"path": str(path)})
    g = parse_edge_list(path.read_text(encoding="utf-8"))
    logger.info(f"Grafo cargado desde {path}: n={g.n}, |E|={len(g.edges)}")
    return g


def format_edge_list(g: WeightedDigraph) -> str:
    """Serializa al formato de lista de aristas"""
    lineas = [f"n {g.n}"]
    lineas.extend(f"{e.source} {e.target} {e.weight!r}" for e in g.edges)
    return "\n".join(lineas) + "\n"


# ==================== GENERADORES ====================

def random_digraph(
    n: int,
    rng: np.random.Generator,
    symmetric: bool = False,
    max_attempts: int = MAX_REJECTION_ATTEMPTS
) -> WeightedDigraph:
    """
    Grafo de Erdős–Rényi fuertemente conexo

    p = min(1, 2 ln n / n), pesos U[0.5, 2], muestreo por rechazo hasta
    obtener conectividad fuerte.

    Args:
        n: Cantidad de nodos (≥ 2)
        rng: Generador de numpy
        symmetric: Si True cada arista no dirigida lleva el mismo peso en ambos sentidos
        max_attempts: Máximo de rechazos

    Raises:
        GraphValidationException: Si no se logra un grafo conexo
    """
    if n < 2:
        raise GraphValidationException("Los grafos aleatorios requieren n >= 2", {"n": n})
    p = min(1.0, 2.0 * math.log(n) / n)

    for intento in range(max_attempts):
        edges: List[Tuple[int, int, float]] = []
        if symmetric:
            for i in range(n):
                for j in range(i + 1, n):
                    if rng.random() < p:
                        w = float(rng.uniform(RANDOM_WEIGHT_LOW, RANDOM_WEIGHT_HIGH))
                        edges.extend([(i, j, w), (j, i, w)])
        else:
            for i in range(n):
                for j in range(n):
                    if i != j and rng.random() < p:
                        edges.append((i, j, float(rng.uniform(RANDOM_WEIGHT_LOW, RANDOM_WEIGHT_HIGH))))
        g = WeightedDigraph.from_edges(n, edges)
        if is_strongly_connected(g):
            logger.debug(f"Grafo aleatorio n={n} aceptado tras {intento + 1} intentos")
            return g

    raise GraphValidationException(
        f"No se obtuvo un grafo fuertemente conexo en {max_attempts} intentos",
        {"n": n, "p": p}
    )


def named_graph(
    kind: str,
    n: int,
    seed: Optional[int] = None,
    symmetric: bool = True,
    weight: float = 1.0
) -> WeightedDigraph:
    """
    Generadores con nombre para la CLI: path, cycle, complete, random

    Los tres primeros son no dirigidos con peso uniforme; "random" usa
    random_digraph con la semilla dada.
    """
    if kind not in NAMED_GRAPHS:
        raise GraphValidationException(f"Generador desconocido '{kind}'", {"validos": list(NAMED_GRAPHS)})
    if kind == "random":
        return random_digraph(n, np.random.default_rng(seed), symmetric=symmetric)
    if n < 2:
        raise GraphValidationException("Los generadores requieren n >= 2", {"n": n})

    if kind == "path":
        pares = [(i, i + 1) for i in range(n - 1)]
    elif kind == "cycle":
        pares = [(i, (i + 1) % n) for i in range(n)] if n > 2 else [(0, 1)]
    else:
        pares = [(i, j) for i in range(n) for j in range(i + 1, n)]

    edges = [(i, j, weight) for i, j in pares] + [(j, i, weight) for i, j in pares]
    return WeightedDigraph.from_edges(n, edges)

"""
Servicio de Geometría Métrica - Consensus Lyapunov
Diferencias divididas, media logarítmica, métrica G⁻¹(x) y factorización de Kirchhoff
"""
import logging
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy import linalg

from app.core.exceptions import (
    DomainException,
    NonConvexPotentialException,
    SymmetryRequiredException,
    VerificationException,
)
from app.core.validators import StateValidator
from app.models import (
    POSITIVE,
    REAL_LINE,
    ROW_SUM_TOL,
    ConvexPotential,
    EdgeWeightMatrix,
    IncidenceMatrix,
    LaplacianMatrix,
    MetricMatrix,
    MetricSpectrum,
    MonotoneFunction,
)
from app.services import graph_service, potential_service
from app.services.linalg_utils import inf_norm

logger = logging.getLogger(__name__)

Scalar = Union[float, np.ndarray]

# Rama límite cuando |f(a) - f(b)| <= NEAR_DIAGONAL · max(1, |f(a)|, |f(b)|)
NEAR_DIAGONAL = 1e-8
EIGEN_RELATIVE_TOL = 1e-10
MONOTONE_NAMES = ("identity", "log", "power")


# ==================== FUNCIONES MONÓTONAS ====================

def identity_function() -> MonotoneFunction:
    return MonotoneFunction(
        name="identity",
        value=lambda u: np.asarray(u, dtype=float),
        derivative=lambda u: np.ones_like(np.asarray(u, dtype=float)),
        domain=REAL_LINE,
        gap=potential_service.linear_gap,
    )


def log_function() -> MonotoneFunction:
    return MonotoneFunction(
        name="log",
        value=np.log,
        derivative=lambda u: 1.0 / u,
        domain=POSITIVE,
        gap=potential_service.log_gap,
    )


def power_function(p: float) -> MonotoneFunction:
    """
    u ↦ u^p sobre (0, ∞), creciente para p > 0

    Raises:
        NonConvexPotentialException: Si p <= 0
    """
    if not p > 0:
        raise NonConvexPotentialException(
            message=f"u^p es creciente solo para p > 0 (p={p!r})",
            details={"p": p}
        )
    return MonotoneFunction(
        name=f"power{p:g}",
        value=lambda u: u ** p,
        derivative=lambda u: p * u ** (p - 1.0),
        domain=POSITIVE,
        gap=potential_service.power_gap(p),
    )


def function_by_name(name: str, p: float = 2.0) -> MonotoneFunction:
    """Selección por nombre para la CLI: identity, log, power"""
    if name == "identity":
        return identity_function()
    if name == "log":
        return log_function()
    if name == "power":
        return power_function(p)
    raise NonConvexPotentialException(
        message=f"Función monótona desconocida '{name}'",
        details={"validos": list(MONOTONE_NAMES)}
    )


# ==================== DIFERENCIAS DIVIDIDAS ====================

def difference_quotient(h: MonotoneFunction, f: MonotoneFunction, a: Scalar, b: Scalar) -> np.ndarray:
    """
    (h(a) - h(b)) / (f(a) - f(b)), con límite h′/f′ en el punto medio

    Los argumentos se ordenan (mayor, menor) antes de evaluar, lo que hace
    el cociente exactamente simétrico.

    Raises:
        DomainException: Si a o b salen del dominio de f o h
        NonConvexPotentialException: Si el cociente no es positivo
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    for func in (f, h):
        func.domain.check(a, func.name)
        func.domain.check(b, func.name)
    return ordered_quotient(h, f, np.maximum(a, b), np.minimum(a, b))


def ordered_quotient(h: MonotoneFunction, f: MonotoneFunction, hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    """
    Núcleo de difference_quotient con hi >= lo ya dentro del dominio

    Raises:
        NonConvexPotentialException: Si el cociente no es positivo
    """
    df = f.difference(hi, lo)
    escala = np.maximum(1.0, np.maximum(np.abs(f.value(hi)), np.abs(f.value(lo))))
    limite = np.abs(df) <= NEAR_DIAGONAL * escala

    resultado = np.empty_like(hi)
    directo = ~limite
    if np.any(directo):
        resultado[directo] = h.difference(hi[directo], lo[directo]) / df[directo]
    if np.any(limite):
        medio = 0.5 * (hi[limite] + lo[limite])
        fp = np.asarray(f.derivative(medio), dtype=float)
        if np.any(~(fp > 0)):
            index = int(np.flatnonzero(~(fp > 0))[0])
            raise NonConvexPotentialException(
                message=f"f′ se anula en el punto medio {medio[index]!r} de '{f.name}'",
                details={"funcion": f.name, "midpoint": float(medio[index])}
            )
        resultado[limite] = np.asarray(h.derivative(medio), dtype=float) / fp

    if np.any(~(resultado > 0)):
        index = int(np.flatnonzero(~(resultado > 0))[0])
        raise NonConvexPotentialException(
            message=f"Cociente no positivo entre '{h.name}' y '{f.name}'",
            details={"a": float(hi[index]), "b": float(lo[index]), "valor": float(resultado[index])}
        )
    return resultado


def divided_difference(f: MonotoneFunction, a: Scalar, b: Scalar) -> Scalar:
    """
    K_f(a, b) = (a - b) / (f(a) - f(b)), con límite 1/f′((a+b)/2)

    Args:
        f: Función estrictamente creciente
        a, b: Escalares o arreglos del mismo tamaño

    Returns:
        float si a y b son escalares, np.ndarray en otro caso
    """
    resultado = difference_quotient(identity_function(), f, a, b)
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        return float(resultado[0])
    return resultado


def log_mean(a: Scalar, b: Scalar) -> Scalar:
    """
    Media logarítmica (a - b)/(ln a - ln b), con límite a cuando b → a

    Raises:
        DomainException: Si algún argumento no es positivo
    """
    for nombre, valor in (("a", a), ("b", b)):
        arr = np.atleast_1d(np.asarray(valor, dtype=float))
        malos = np.flatnonzero(~(arr > 0))
        if malos.size:
            raise DomainException(f"log_mean.{nombre}", int(malos[0]), float(arr[malos[0]]), "(0, inf)")
    return divided_difference(log_function(), a, b)


# ==================== MATRICES DE KIRCHHOFF ====================

def _require_symmetric(L: LaplacianMatrix, operacion: str) -> None:
    if not L.symmetric:
        raise SymmetryRequiredException(operacion)


def _laplacian_form(L: LaplacianMatrix, couplings: np.ndarray, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    entries = np.zeros((L.n, L.n))
    entries[i, j] = -couplings
    np.fill_diagonal(entries, -entries.sum(axis=1))
    return entries


def kirchhoff_form_matrix(L: LaplacianMatrix, f: MonotoneFunction, y) -> MetricMatrix:
    """
    K_f(y): fuera de la diagonal -w_ij·K_f(y_i, y_j), filas de suma cero

    Raises:
        SymmetryRequiredException: Si L no es simétrico
        DomainException: Si y sale del dominio de f
    """
    _require_symmetric(L, "kirchhoff_form_matrix")
    y = StateValidator.validar_vector(y, L.n, "y")
    i, j, w = L.edge_arrays()
    k = difference_quotient(identity_function(), f, y[i], y[j]) if i.size else np.empty(0)
    return MetricMatrix(entries=_laplacian_form(L, w * k, i, j), state=y, alpha=1.0)


def _density(x: np.ndarray, alpha: float) -> np.ndarray:
    """ρ = x/α"""
    return x * (1.0 / alpha)


def metric_matrix(L: LaplacianMatrix, H: ConvexPotential, x, alpha: float) -> MetricMatrix:
    """
    G⁻¹(x) = α·K_{H′}(x/α)

    Args:
        L: Laplaciano simétrico
        H: Potencial convexo
        x: Estado positivo
        alpha: Valor de consenso

    Returns:
        MetricMatrix evaluada en x
    """
    _require_symmetric(L, "metric_matrix")
    if not alpha > 0:
        raise DomainException("alpha", None, alpha, "(0, inf)")
    x = StateValidator.validar_vector(x, L.n)
    rho = _density(x, alpha)
    H.domain.check(rho, H.name)
    kirchhoff = kirchhoff_form_matrix(L, H.derivative_function(), rho)
    return MetricMatrix(entries=alpha * kirchhoff.entries, state=x, alpha=alpha)


def gradient_identity_residual(
    L: LaplacianMatrix,
    H: ConvexPotential,
    x,
    alpha: float,
    metric: Optional[np.ndarray] = None
) -> float:
    """
    ‖-Lx + G⁻¹(x)∇V(x)‖∞ / max(1, ‖Lx‖∞) para V normalizada

    Args:
        metric: Matriz G⁻¹ a usar en lugar de la calculada (controles negativos)
    """
    x = StateValidator.validar_vector(x, L.n)
    V = potential_service.normalized_lyapunov(H, alpha, L.n)
    gradiente = potential_service.lyapunov_gradient(V, x)
    g_inv = metric_matrix(L, H, x, alpha).entries if metric is None else np.asarray(metric, dtype=float)
    lx = L.entries @ x
    return inf_norm(-lx + g_inv @ gradiente) / max(1.0, inf_norm(lx))


def factorize(
    L: LaplacianMatrix,
    H: ConvexPotential,
    x,
    alpha: float
) -> Tuple[IncidenceMatrix, EdgeWeightMatrix]:
    """
    Factorización de Kirchhoff–Ohm G⁻¹(x) = MᵀW(ρ)M

    W_e = α·w_ij·K_{H′}(ρ_i, ρ_j) sobre las aristas no dirigidas de M.
    """
    _require_symmetric(L, "factorize")
    x = StateValidator.validar_vector(x, L.n)
    rho = _density(x, alpha)
    H.domain.check(rho, H.name)
    g = graph_service.digraph_from_laplacian(L)
    m = graph_service.incidence(g, undirected=True)
    pesos = graph_service.edge_weights(g, m).diagonal
    if not m.edge_order:
        return m, EdgeWeightMatrix(np.empty(0))
    i = np.array([e[0] for e in m.edge_order])
    j = np.array([e[1] for e in m.edge_order])
    k = difference_quotient(identity_function(), H.derivative_function(), rho[i], rho[j])
    return m, EdgeWeightMatrix(alpha * pesos * k)


def output_feedback_rate(L: LaplacianMatrix, H: ConvexPotential, x, alpha: float) -> np.ndarray:
    """
    Lazo de Kirchhoff–Ohm: y_N = ∇V, u_E = -M y_N, y_E = W u_E, u_N = Mᵀ y_E

    Returns:
        u_N, que coincide con ẋ = -Lx
    """
    m, w = factorize(L, H, x, alpha)
    V = potential_service.normalized_lyapunov(H, alpha, L.n)
    y_n = potential_service.lyapunov_gradient(V, x)
    u_e = -(m.entries @ y_n)
    y_e = w.diagonal * u_e
    return m.entries.T @ y_e


# ==================== CERTIFICADOS ====================

def metric_spectrum(G: MetricMatrix) -> MetricSpectrum:
    """
    Autovalores de G⁻¹, certificado PSD, dimensión del núcleo y condición

    El número de condición es λ_max/λ₂ y se reporta sin contrato.
    """
    valores = linalg.eigvalsh(G.entries)
    tol = EIGEN_RELATIVE_TOL * max(1.0, float(np.abs(valores).max(initial=0.0)))
    positivos = valores[valores > tol]
    condicion = float(valores[-1] / positivos[0]) if positivos.size else float("inf")
    return MetricSpectrum(
        eigenvalues=valores,
        positive_semidefinite=bool(np.all(valores >= -tol)),
        kernel_dimension=int(np.count_nonzero(np.abs(valores) <= tol)),
        condition_number=condicion,
    )


def metric_violations(G: MetricMatrix, L: LaplacianMatrix) -> List[str]:
    """Lista de invariantes de MetricMatrix que G no cumple (vacía si es válida)"""
    problemas: List[str] = []
    e = G.entries
    escala = max(1.0, float(np.abs(e).max(initial=0.0)))
    if np.abs(e - e.T).max(initial=0.0) > 1e-12 * escala:
        problemas.append("no simétrica")
    if np.abs(e.sum(axis=1)).max(initial=0.0) > ROW_SUM_TOL * escala:
        problemas.append("filas con suma no nula")
    fuera = ~np.eye(L.n, dtype=bool)
    if np.any(e[fuera] > 0):
        problemas.append("entradas fuera de la diagonal positivas")
    if not np.array_equal(e[fuera] < 0, L.entries[fuera] < 0):
        problemas.append("patrón distinto al del Laplaciano")
    espectro = metric_spectrum(G)
    if not espectro.positive_semidefinite:
        problemas.append("no semidefinida positiva")
    if graph_service.laplacian_is_strongly_connected(L) and espectro.kernel_dimension != 1:
        problemas.append(f"núcleo de dimensión {espectro.kernel_dimension}")
    return problemas


def validate_metric(G: MetricMatrix, L: LaplacianMatrix) -> None:
    """
    Raises:
        VerificationException: Si G viola alguna invariante de MetricMatrix
    """
    problemas = metric_violations(G, L)
    if problemas:
        raise VerificationException(
            message=f"Métrica inválida: {', '.join(problemas)}",
            details={"problemas": problemas}
        )

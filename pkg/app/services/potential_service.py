"""
Servicio de Potenciales - Consensus Lyapunov
Potenciales convexos, funciones de Lyapunov aditivas, f-divergencias y desacuerdos
"""
import logging
from typing import Optional

import numpy as np

from app.core.exceptions import (
    DomainException,
    NonConvexPotentialException,
    SymmetryRequiredException,
)
from app.core.validators import StateValidator
from app.models import (
    POSITIVE,
    REAL_LINE,
    AdditiveLyapunov,
    ArrayFunction,
    ConvexPotential,
    DisagreementReport,
    Interval,
    LaplacianMatrix,
    PerronVector,
)

logger = logging.getLogger(__name__)

POTENTIAL_NAMES = ("quadratic", "entropy", "gibbs", "power")
CONVEXITY_SAMPLES = 1000


# ==================== DIFERENCIAS PRECISAS ====================

def log_gap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """ln a - ln b sin cancelación cuando a ≈ b"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.log1p((a - b) / b)


def linear_gap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=float) - np.asarray(b, dtype=float)


def power_gap(exponent: float):
    """a^k - b^k con k = exponent, evaluado vía expm1/log1p"""
    def gap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return b ** exponent * np.expm1(exponent * np.log1p((a - b) / b))
    return gap


# ==================== POTENCIALES PREDEFINIDOS ====================

def builtin_quadratic(ref: float = 0.0) -> ConvexPotential:
    """
    H(u) = ½(u - ref)², energía eléctrica de un circuito RC

    Args:
        ref: Punto de mínimo
    """
    return ConvexPotential(
        name="quadratic",
        value=lambda u: 0.5 * (u - ref) ** 2,
        derivative=lambda u: u - ref,
        second_derivative=lambda u: np.ones_like(np.asarray(u, dtype=float)),
        domain=REAL_LINE,
        derivative_gap=linear_gap,
    )


def builtin_entropy() -> ConvexPotential:
    """H(u) = u ln u (entropía, genera la divergencia de Kullback-Leibler)"""
    return ConvexPotential(
        name="entropy",
        value=lambda u: u * np.log(u),
        derivative=lambda u: np.log(u) + 1.0,
        second_derivative=lambda u: 1.0 / u,
        domain=POSITIVE,
        derivative_gap=log_gap,
    )


def builtin_gibbs() -> ConvexPotential:
    """H(u) = u(ln u - 1) + 1 (energía libre de Gibbs, mínimo en u = 1)"""
    return ConvexPotential(
        name="gibbs",
        # u ln u - (u - 1) conserva precisión cerca de u = 1
        value=lambda u: u * np.log(u) - (u - 1.0),
        derivative=np.log,
        second_derivative=lambda u: 1.0 / u,
        domain=POSITIVE,
        derivative_gap=log_gap,
    )


def builtin_power(p: float = 2.0) -> ConvexPotential:
    """
    H(u) = (u^p - 1 - p(u - 1)) / (p(p - 1)), familia de divergencias de potencia

    Normalizado para que H(1) = H′(1) = 0; p = 2 da una divergencia tipo χ².

    Raises:
        NonConvexPotentialException: Si p <= 1
    """
    if not p > 1:
        raise NonConvexPotentialException(
            message=f"El potencial de potencia requiere p > 1 (p={p!r})",
            details={"p": p}
        )
    k = p - 1.0
    gap = power_gap(k)
    return ConvexPotential(
        name=f"power{p:g}",
        value=lambda u: (u ** p - 1.0 - p * (u - 1.0)) / (p * k),
        derivative=lambda u: (u ** k - 1.0) / k,
        second_derivative=lambda u: u ** (p - 2.0),
        domain=POSITIVE,
        derivative_gap=lambda a, b: gap(a, b) / k,
    )


def concave_counterexample() -> ConvexPotential:
    """H(u) = -u², potencial cóncavo usado como control negativo"""
    return ConvexPotential(
        name="concave_counterexample",
        value=lambda u: -(u ** 2),
        derivative=lambda u: -2.0 * u,
        second_derivative=lambda u: -2.0 * np.ones_like(np.asarray(u, dtype=float)),
        domain=REAL_LINE,
    )


def custom_potential(
    name: str,
    value: ArrayFunction,
    derivative: ArrayFunction,
    second_derivative: ArrayFunction,
    domain: Interval = REAL_LINE
) -> ConvexPotential:
    """
    Registra un potencial de usuario con derivadas analíticas

    La convexidad no se verifica acá: usar validate_convexity sobre el
    rango de estados que se vaya a recorrer.
    """
    return ConvexPotential(
        name=name,
        value=value,
        derivative=derivative,
        second_derivative=second_derivative,
        domain=domain,
    )


def potential_by_name(name: str, ref: float = 0.0, p: float = 2.0) -> ConvexPotential:
    """
    Selección por nombre para la CLI

    Raises:
        NonConvexPotentialException: Si el nombre no existe
    """
    if name == "quadratic":
        return builtin_quadratic(ref)
    if name == "entropy":
        return builtin_entropy()
    if name == "gibbs":
        return builtin_gibbs()
    if name == "power":
        return builtin_power(p)
    raise NonConvexPotentialException(
        message=f"Potencial desconocido '{name}'",
        details={"validos": list(POTENTIAL_NAMES)}
    )


def validate_convexity(
    H: ConvexPotential,
    lo: float,
    hi: float,
    samples: int = CONVEXITY_SAMPLES
) -> None:
    """
    Verifica convexidad estricta por muestreo de H″ y monotonía de H′

    Args:
        H: Potencial
        lo: Extremo inferior del rango de estados
        hi: Extremo superior
        samples: Cantidad de puntos

    Raises:
        DomainException: Si el rango sale del dominio
        NonConvexPotentialException: Si H″ <= 0 o H′ no crece en algún punto
    """
    grilla = np.linspace(lo, hi, samples)
    H.domain.check(grilla, H.name)

    segunda = np.asarray(H.second_derivative(grilla), dtype=float)
    if np.any(~(segunda > 0)):
        index = int(np.flatnonzero(~(segunda > 0))[0])
        raise NonConvexPotentialException(
            message=f"H″ no positiva para '{H.name}' en u={grilla[index]!r}",
            details={"potencial": H.name, "u": float(grilla[index]), "H2": float(segunda[index])}
        )

    derivada = np.asarray(H.derivative(grilla), dtype=float)
    if hi > lo and np.any(np.diff(derivada) <= 0):
        index = int(np.flatnonzero(np.diff(derivada) <= 0)[0])
        raise NonConvexPotentialException(
            message=f"H′ no es estrictamente creciente para '{H.name}' cerca de u={grilla[index]!r}",
            details={"potencial": H.name, "u": float(grilla[index])}
        )
    logger.debug(f"Convexidad verificada para '{H.name}' en [{lo}, {hi}] con {samples} muestras")


# ==================== LYAPUNOV ADITIVA ====================

def normalized_lyapunov(H: ConvexPotential, alpha: float, n: int) -> AdditiveLyapunov:
    """
    V(x) = α Σ H(x_i/α) como (β = αn, c = 1/α, q uniforme)

    Es la normalización bajo la cual ∇V_i = H′(ρ_i) con ρ = x/α.
    """
    return AdditiveLyapunov(beta=alpha * n, c=1.0 / alpha, q=PerronVector.uniform(n), potential=H)


def sum_of_squares_lyapunov(a: float, n: int) -> AdditiveLyapunov:
    """V_SoS(x) = ½ Σ (x_i - a)² para trayectorias de consenso a conservado"""
    return AdditiveLyapunov(beta=float(n), c=1.0, q=PerronVector.uniform(n), potential=builtin_quadratic(a))


def _scaled_state(V: AdditiveLyapunov, x) -> np.ndarray:
    x = StateValidator.validar_vector(x, V.n)
    u = V.c * x
    V.potential.domain.check(u, V.potential.name)
    return u


def lyapunov_value(V: AdditiveLyapunov, x) -> float:
    """
    V(x) = β Σ q_i H(c x_i)

    Raises:
        DomainException: Nombrando el primer índice con c·x_i fuera del dominio
    """
    u = _scaled_state(V, x)
    return float(V.beta * np.dot(V.q, V.potential.value(u)))


def lyapunov_gradient(V: AdditiveLyapunov, x) -> np.ndarray:
    """
    ∇V_i = β q_i c H′(c x_i)

    Bajo normalized_lyapunov esto es H′(ρ_i).
    """
    u = _scaled_state(V, x)
    return V.beta * V.q * V.c * np.asarray(V.potential.derivative(u), dtype=float)


# ==================== DIVERGENCIAS ====================

def f_divergence(H: ConvexPotential, p, q) -> float:
    """
    Σ q_i H(p_i / q_i)

    Raises:
        InvalidProbabilityException: Si p o q no son vectores de probabilidad
    """
    p = StateValidator.validar_probabilidad(p, "p")
    q = StateValidator.validar_probabilidad(q, "q")
    StateValidator.validar_mismo_tamano(p, q, "p", "q")
    u = p / q
    H.domain.check(u, H.name)
    return float(np.dot(q, H.value(u)))


def kl_divergence(p, q) -> float:
    """Divergencia de Kullback-Leibler Σ p_i ln(p_i/q_i)"""
    return f_divergence(builtin_entropy(), p, q)


def gibbs_free_energy(m, m_ref, rt: float = 1.0) -> float:
    """
    RT Σ [m_i ln(m_i/m_ref,i) - (m_i - m_ref,i)]

    Args:
        m: Concentraciones (positivas)
        m_ref: Concentraciones de equilibrio (positivas)
        rt: Escala RT positiva provista por el usuario (sin unidades)
    """
    if not rt > 0:
        raise DomainException("rt", None, rt, "(0, inf)")
    m = StateValidator.validar_vector(m, nombre="m")
    m_ref = StateValidator.validar_vector(m_ref, m.shape[0], nombre="m_ref")
    StateValidator.validar_positivo(m, "m")
    StateValidator.validar_positivo(m_ref, "m_ref")
    return float(rt * np.sum(m * log_gap(m, m_ref) - (m - m_ref)))


def probability_vector(q: PerronVector, rho) -> np.ndarray:
    """p_i = q_i ρ_i (suma 1 cuando qᵀρ = 1)"""
    return q.q * StateValidator.validar_vector(rho, q.q.shape[0], "rho")


# ==================== DESACUERDOS ====================

def _require_symmetric(L: LaplacianMatrix, operacion: str) -> None:
    if not L.symmetric:
        raise SymmetryRequiredException(operacion)


def laplacian_potential(L: LaplacianMatrix, x) -> float:
    """V_L(x) = ½ xᵀLx"""
    _require_symmetric(L, "laplacian_potential")
    x = StateValidator.validar_vector(x, L.n)
    return float(0.5 * x @ L.entries @ x)


def laplacian_potential_edges(L: LaplacianMatrix, x) -> float:
    """½ Σ sobre aristas no dirigidas de w_ij (x_i - x_j)²"""
    _require_symmetric(L, "laplacian_potential_edges")
    x = StateValidator.validar_vector(x, L.n)
    i, j, w = L.edge_arrays()
    mask = i < j
    return float(0.5 * np.sum(w[mask] * (x[i[mask]] - x[j[mask]]) ** 2))


def sum_of_squares(q: PerronVector, x) -> float:
    """V_SoS(x) = ½ Σ (x_i - a)² con a = qᵀx"""
    x = StateValidator.validar_vector(x, q.q.shape[0])
    a = float(q.q @ x)
    return float(0.5 * np.sum((x - a) ** 2))


def dissipation_rate(L: LaplacianMatrix, V: AdditiveLyapunov, x) -> float:
    """-dV/dt = ∇V(x)·Lx a lo largo de ẋ = -Lx (cualquier L)"""
    x = StateValidator.validar_vector(x, L.n)
    return float(lyapunov_gradient(V, x) @ (L.entries @ x))


def group_disagreement(L: LaplacianMatrix, V: AdditiveLyapunov, x) -> float:
    """
    Ψ_V(x) = ∇V(x)·Lx, no negativo para L simétrico y V convexa

    Raises:
        SymmetryRequiredException: Si L no es simétrico
    """
    _require_symmetric(L, "group_disagreement")
    return dissipation_rate(L, V, x)


def group_disagreement_edges(L: LaplacianMatrix, V: AdditiveLyapunov, x) -> float:
    """Σ sobre aristas no dirigidas de w_ij (x_i - x_j)(∇V_i - ∇V_j)"""
    _require_symmetric(L, "group_disagreement_edges")
    x = StateValidator.validar_vector(x, L.n)
    g = lyapunov_gradient(V, x)
    i, j, w = L.edge_arrays()
    mask = i < j
    i, j, w = i[mask], j[mask], w[mask]
    return float(np.sum(w * (x[i] - x[j]) * (g[i] - g[j])))


def disagreement_report(
    L: LaplacianMatrix,
    V: AdditiveLyapunov,
    x,
    q: Optional[PerronVector] = None
) -> DisagreementReport:
    """
    Agrupa V_L, Ψ_L = xᵀLx, V_SoS y Ψ_V en un mismo estado
    """
    _require_symmetric(L, "disagreement_report")
    q = q or PerronVector.uniform(L.n)
    v_l = laplacian_potential(L, x)
    return DisagreementReport(
        laplacian_potential=v_l,
        group_disagreement=2.0 * v_l,
        collective=sum_of_squares(q, x),
        generalized=group_disagreement(L, V, x),
    )

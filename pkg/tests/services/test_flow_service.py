"""
Tests de dinámica: mapa de flujo, integración lineal, dual de Markov y difusión no lineal
"""
import math

import numpy as np
import pytest
from scipy import linalg

from app.core.exceptions import (
    ConfigurationException,
    DomainException,
    IntegrationException,
    InvalidProbabilityException,
    ReducibleGraphException,
)
from app.models import PerronVector
from app.services import flow_service, graph_service, potential_service


# ==================== MAPA DE FLUJO ====================

def test_mapa_de_flujo_dos_nodos(two_node_laplacian, ln2):
    P = flow_service.flow_map(two_node_laplacian, ln2 / 2)
    np.testing.assert_allclose(P.matrix, [[0.75, 0.25], [0.25, 0.75]], rtol=0, atol=1e-12)
    np.testing.assert_allclose(P.matrix @ np.array([2.0, 0.0]), [1.5, 0.5], rtol=0, atol=1e-12)


def test_mapa_de_flujo_en_cero_es_identidad(directed_laplacian):
    np.testing.assert_array_equal(flow_service.flow_map(directed_laplacian, 0.0).matrix, np.eye(3))


@pytest.mark.parametrize("t", [-0.1, math.inf, math.nan])
def test_mapa_de_flujo_horizonte_invalido(two_node_laplacian, t):
    with pytest.raises(ConfigurationException):
        flow_service.flow_map(two_node_laplacian, t)


@pytest.mark.parametrize("t", [0.01, 0.1, 1.0, 10.0])
def test_mapa_de_flujo_estocastico(directed_laplacian, t):
    P = flow_service.flow_map(directed_laplacian, t).matrix
    q = graph_service.perron_vector(directed_laplacian).q
    assert np.all(P >= -1e-15)
    np.testing.assert_allclose(P.sum(axis=1), np.ones(3), rtol=0, atol=1e-12)
    np.testing.assert_allclose(q @ P, q, rtol=0, atol=1e-12)


def test_semigrupo(make_instance):
    L = make_instance(seed=21, n=8, symmetric=False).laplacian
    producto = flow_service.flow_map(L, 0.3).matrix @ flow_service.flow_map(L, 0.7).matrix
    np.testing.assert_allclose(producto, flow_service.flow_map(L, 1.0).matrix, rtol=0, atol=1e-10)


def test_mapa_de_flujo_tiende_a_proyector(directed_laplacian):
    P = flow_service.flow_map(directed_laplacian, 50.0).matrix
    q = graph_service.perron_vector(directed_laplacian).q
    np.testing.assert_allclose(P, np.outer(np.ones(3), q), rtol=0, atol=1e-12)


# ==================== INTEGRACIÓN LINEAL ====================

def test_forma_cerrada_dos_nodos(two_node_laplacian, ln2):
    # x(t) = 1 ± e^{-2t}
    mitad = flow_service.integrate_linear(two_node_laplacian, [2.0, 0.0], ln2 / 2, 1e-3, stop_early=False)
    np.testing.assert_allclose(mitad.final_state, [1.5, 0.5], rtol=0, atol=1e-9)
    completo = flow_service.integrate_linear(two_node_laplacian, [2.0, 0.0], ln2, 1e-3, stop_early=False)
    np.testing.assert_allclose(completo.final_state, [1.25, 0.75], rtol=0, atol=1e-9)
    assert completo.times[-1] == ln2
    assert completo.consensus_level == pytest.approx(1.0)


def test_integracion_coincide_con_mapa_de_flujo(make_instance):
    instance = make_instance(seed=22, n=8, symmetric=False)
    L, x0 = instance.laplacian, instance.states[0]
    dt = 0.25 / L.max_diagonal
    tray = flow_service.integrate_linear(L, x0, 2.0, dt, stop_early=False)
    esperado = flow_service.flow_map(L, 2.0).matrix @ x0
    np.testing.assert_allclose(tray.final_state, esperado, rtol=0, atol=1e-8)


def test_paso_inestable_sugiere_dt(two_node_laplacian):
    with pytest.raises(IntegrationException) as info:
        flow_service.integrate_linear(two_node_laplacian, [2.0, 0.0], 1.0, 0.6)
    assert info.value.details["suggested_dt"] == 0.5


@pytest.mark.parametrize("t_end, dt", [(0.0, 0.1), (1.0, 0.0), (-1.0, 0.1)])
def test_horizonte_invalido(two_node_laplacian, t_end, dt):
    with pytest.raises(ConfigurationException):
        flow_service.integrate_linear(two_node_laplacian, [2.0, 0.0], t_end, dt)


def test_conservacion_dirigida(directed_laplacian):
    x0 = np.array([3.0, 1.0, 0.5])
    tray = flow_service.integrate_linear(directed_laplacian, x0, 10.0, 1e-3)
    q = graph_service.perron_vector(directed_laplacian).q
    deriva = np.abs(tray.states @ q - tray.conserved).max()
    assert deriva <= 1e-8 * max(1.0, abs(tray.conserved))
    np.testing.assert_allclose(tray.final_state, np.full(3, q @ x0), rtol=0, atol=1e-6)


def test_consenso_inicial_se_detiene(two_node_laplacian):
    tray = flow_service.integrate_linear(two_node_laplacian, [1.0, 1.0], 5.0, 0.1)
    assert tray.stopped_early
    assert len(tray) == 1


def test_ultimo_paso_acortado(two_node_laplacian):
    tray = flow_service.integrate_linear(two_node_laplacian, [2.0, 0.0], 1.0, 0.3, stop_early=False)
    np.testing.assert_allclose(tray.times, [0.0, 0.3, 0.6, 0.9, 1.0])


def test_grafo_reducible(reducible_laplacian):
    with pytest.raises(ReducibleGraphException):
        flow_service.integrate_linear(reducible_laplacian, [1.0, 0.0], 1.0, 0.1)


def test_cota_de_acuerdo(cycle_laplacian):
    x0 = np.array([2.0, 0.5, 1.0, 1.5, 0.8, 1.2])
    a = float(x0.mean())
    tray = flow_service.integrate_linear(cycle_laplacian, x0, 5.0, 0.01, stop_early=False)
    inicial = np.linalg.norm(x0 - a)
    for t, x in zip(tray.times, tray.states):
        assert np.linalg.norm(x - a) <= inicial * math.exp(-t) + 1e-8


# ==================== DUAL DE MARKOV ====================

def test_markov_dual_converge_a_perron(directed_laplacian):
    tray = flow_service.markov_dual(directed_laplacian, [1.0, 0.0, 0.0], 30.0, 0.1)
    q = graph_service.perron_vector(directed_laplacian).q
    np.testing.assert_allclose(tray.final_state, q, rtol=0, atol=1e-6)
    np.testing.assert_allclose(tray.states.sum(axis=1), 1.0, rtol=0, atol=1e-12)


def test_markov_dual_estacionario(directed_laplacian):
    q = graph_service.perron_vector(directed_laplacian).q
    tray = flow_service.markov_dual(directed_laplacian, q, 5.0, 0.1, stop_early=False)
    assert np.abs(tray.states - q).max() <= 1e-10


@pytest.mark.parametrize("p0", [[0.5, 0.6, 0.0], [1.2, -0.2, 0.0]])
def test_markov_dual_probabilidad_invalida(directed_laplacian, p0):
    with pytest.raises(InvalidProbabilityException):
        flow_service.markov_dual(directed_laplacian, p0, 1.0, 0.1)


# ==================== DIFUSIÓN NO LINEAL ====================

def test_log_laplaciano_conserva_y_converge(cycle_laplacian):
    x0 = np.array([2.0, 0.5, 1.0, 1.5, 0.8, 1.2])
    alpha = float(x0.mean())
    tray = flow_service.integrate_nonlinear(cycle_laplacian, flow_service.log_laplacian_spec(alpha), x0, 60.0, 0.05)
    np.testing.assert_allclose(tray.states.sum(axis=1), x0.sum(), rtol=1e-10)
    assert flow_service.distance_to_consensus(tray.final_state, alpha) < 1e-6
    assert np.all(tray.states > 0)


def test_log_laplaciano_gibbs_no_crece(cycle_laplacian):
    x0 = np.array([2.0, 0.5, 1.0, 1.5, 0.8, 1.2])
    alpha = float(x0.mean())
    tray = flow_service.integrate_nonlinear(cycle_laplacian, flow_service.log_laplacian_spec(alpha), x0, 10.0, 0.05)
    V = potential_service.normalized_lyapunov(potential_service.builtin_gibbs(), alpha, 6)
    valores = np.array([potential_service.lyapunov_value(V, x) for x in tray.states])
    assert np.all(np.diff(valores) <= 0)


@pytest.mark.parametrize("nombre", ["quadratic", "gibbs"])
def test_flujo_gradiente_reproduce_lineal(cycle_laplacian, nombre):
    x0 = np.array([2.0, 0.5, 1.0, 1.5, 0.8, 1.2])
    alpha = float(x0.mean())
    H = potential_service.potential_by_name(nombre, ref=1.0)
    lineal = flow_service.integrate_linear(cycle_laplacian, x0, 3.0, 0.05, stop_early=False)
    gradiente = flow_service.integrate_nonlinear(
        cycle_laplacian, flow_service.gradient_flow_spec(H, alpha), x0, 3.0, 0.05, stop_early=False
    )
    np.testing.assert_allclose(gradiente.states, lineal.states, rtol=0, atol=1e-12)


def test_no_lineal_componente_nula(cycle_laplacian):
    x0 = np.array([2.0, 0.0, 1.0, 1.5, 0.8, 1.2])
    with pytest.raises(DomainException) as info:
        flow_service.integrate_nonlinear(cycle_laplacian, flow_service.log_laplacian_spec(1.0), x0, 1.0, 0.1)
    assert info.value.index == 1


def test_no_lineal_dt_min():
    L = graph_service.build_laplacian(graph_service.named_graph("path", 2, weight=10.0))
    with pytest.raises(IntegrationException):
        flow_service.integrate_nonlinear(L, flow_service.log_laplacian_spec(2.0), [1.0, 3.0], 2.0, 1.0, dt_min=0.5)


def test_no_lineal_subdivide_pasos():
    L = graph_service.build_laplacian(graph_service.named_graph("path", 2, weight=10.0))
    tray = flow_service.integrate_nonlinear(L, flow_service.log_laplacian_spec(2.0), [1.0, 3.0], 2.0, 1.0)
    assert tray.metadata["max_subdivision_level"] >= 1
    np.testing.assert_allclose(tray.final_state, [2.0, 2.0], rtol=0, atol=1e-6)


def test_laplaciano_no_lineal_filas_cero(make_instance):
    instance = make_instance(seed=23, n=8)
    x = instance.states[0]
    entries = flow_service.nonlinear_laplacian(instance.laplacian, flow_service.log_laplacian_spec(float(x.mean())), x)
    np.testing.assert_allclose(entries.sum(axis=1), 0.0, rtol=0, atol=1e-12)
    fuera = ~np.eye(8, dtype=bool)
    assert np.all(entries[fuera] <= 0)


def test_paso_no_lineal_coincide_con_rk4_sobre_la_matriz(make_instance):
    instance = make_instance(seed=24, n=6)
    L, x0 = instance.laplacian, instance.states[0]
    spec = flow_service.log_laplacian_spec(float(x0.mean()))

    def velocidad(x):
        return -(flow_service.nonlinear_laplacian(L, spec, x) @ x)

    h = 0.25 / float(np.diag(flow_service.nonlinear_laplacian(L, spec, x0)).max())
    k1 = velocidad(x0)
    k2 = velocidad(x0 + 0.5 * h * k1)
    k3 = velocidad(x0 + 0.5 * h * k2)
    k4 = velocidad(x0 + h * k3)
    esperado = x0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    tray = flow_service.integrate_nonlinear(L, spec, x0, h, h, stop_early=False)
    assert tray.metadata["max_subdivision_level"] == 0
    np.testing.assert_allclose(tray.final_state, esperado, rtol=0, atol=1e-13)


# ==================== CONSENSO ====================

def test_valor_de_consenso(directed_laplacian):
    q = graph_service.perron_vector(directed_laplacian)
    assert flow_service.consensus_value(q, [6.0, 3.0, 0.0]) == pytest.approx(4.0)


def test_densidad():
    np.testing.assert_allclose(flow_service.density([1.0, 2.0], 2.0), [0.5, 1.0])
    with pytest.raises(DomainException):
        flow_service.density([1.0, 2.0], 0.0)


def test_simplex():
    q = PerronVector.uniform(2)
    assert flow_service.in_simplex(q, [1.5, 0.5], 1.0)
    assert not flow_service.in_simplex(q, [2.5, -0.5], 1.0)
    assert not flow_service.in_simplex(q, [1.5, 1.5], 1.0)



def test_mapa_de_flujo_contra_scipy(make_instance):
    L = make_instance(seed=24, n=16, symmetric=False).laplacian
    for t in (0.01, 1.0, 10.0):
        np.testing.assert_allclose(
            flow_service.flow_map(L, t).matrix, linalg.expm(-L.entries * t), rtol=0, atol=1e-11
        )

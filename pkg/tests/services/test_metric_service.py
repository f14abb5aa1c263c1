"""
Tests de geometría métrica: diferencias divididas, media logarítmica y G⁻¹(x)
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.core.exceptions import (
    DomainException,
    NonConvexPotentialException,
    SymmetryRequiredException,
    VerificationException,
)
from app.models import MetricMatrix, MonotoneFunction
from app.services import metric_service, potential_service
from app.services.verification_service import random_instance

BUILTINS = ["quadratic", "entropy", "gibbs"]


# ==================== DIFERENCIAS DIVIDIDAS ====================

def test_media_logaritmica_valores():
    assert metric_service.log_mean(1.0, 1.0) == 1.0
    assert metric_service.log_mean(math.e, 1.0) == pytest.approx(math.e - 1.0, rel=1e-14)
    assert metric_service.log_mean(2.0, 8.0) == pytest.approx(6.0 / math.log(4.0), rel=1e-14)


def test_media_logaritmica_entre_geometrica_y_aritmetica(rng):
    a = rng.uniform(0.01, 100.0, 1000)
    b = rng.uniform(0.01, 100.0, 1000)
    distintos = np.abs(a - b) > 1e-6 * np.maximum(a, b)
    a, b = a[distintos], b[distintos]
    lm = metric_service.log_mean(a, b)
    assert np.all(np.sqrt(a * b) < lm)
    assert np.all(lm < 0.5 * (a + b))


def test_media_logaritmica_cerca_de_la_diagonal():
    a = 1.0 + 1e-12
    assert metric_service.log_mean(a, 1.0) == pytest.approx(1.0, rel=1e-11)


@pytest.mark.parametrize("a, b", [(-1.0, 1.0), (1.0, 0.0)])
def test_media_logaritmica_dominio(a, b):
    with pytest.raises(DomainException):
        metric_service.log_mean(a, b)


def test_diferencia_dividida_simetrica_exacta(rng):
    f = metric_service.log_function()
    a = rng.uniform(0.1, 5.0, 200)
    b = rng.uniform(0.1, 5.0, 200)
    np.testing.assert_array_equal(
        metric_service.divided_difference(f, a, b),
        metric_service.divided_difference(f, b, a),
    )


def test_diferencia_dividida_limite():
    assert metric_service.divided_difference(metric_service.log_function(), 2.0, 2.0) == 2.0
    potencia = metric_service.power_function(3.0)
    assert metric_service.divided_difference(potencia, 1.0, 1.0) == pytest.approx(1.0 / 3.0)
    assert isinstance(metric_service.divided_difference(potencia, 1.0, 2.0), float)


@pytest.mark.parametrize("f", [metric_service.log_function(), metric_service.power_function(2.0)], ids=["log", "power2"])
def test_diferencia_dividida_continua_en_la_diagonal(f):
    a = 2.0
    limite = metric_service.divided_difference(f, a, a)
    errores = []
    for eps in (1e-4, 1e-6):
        error = abs(metric_service.divided_difference(f, a + eps, a) - limite)
        assert error <= eps
        errores.append(error)
    assert 50.0 <= errores[0] / errores[1] <= 200.0


def test_diferencia_dividida_funcion_decreciente():
    decreciente = MonotoneFunction(name="neg", value=lambda u: -u, derivative=lambda u: -np.ones_like(u))
    with pytest.raises(NonConvexPotentialException):
        metric_service.divided_difference(decreciente, 1.0, 2.0)
    with pytest.raises(NonConvexPotentialException):
        metric_service.divided_difference(decreciente, 1.0, 1.0)


def test_funciones_por_nombre():
    assert metric_service.function_by_name("identity").name == "identity"
    assert metric_service.function_by_name("power", 0.5).name == "power0.5"
    with pytest.raises(NonConvexPotentialException):
        metric_service.function_by_name("seno")
    with pytest.raises(NonConvexPotentialException):
        metric_service.power_function(0.0)


# ==================== MÉTRICA ====================

def test_metrica_cuadratica_es_alpha_L(make_instance):
    instance = make_instance(seed=9, n=8)
    x = instance.states[0]
    alpha = float(x.mean())
    G = metric_service.metric_matrix(instance.laplacian, potential_service.builtin_quadratic(), x, alpha)
    np.testing.assert_allclose(G.entries, alpha * instance.laplacian.entries, rtol=0, atol=1e-13)


def test_metrica_entropia_igual_a_gibbs(make_instance):
    instance = make_instance(seed=10, n=8, states=100)
    for x in instance.states:
        alpha = float(x.mean())
        entropia = metric_service.metric_matrix(instance.laplacian, potential_service.builtin_entropy(), x, alpha)
        gibbs = metric_service.metric_matrix(instance.laplacian, potential_service.builtin_gibbs(), x, alpha)
        np.testing.assert_allclose(entropia.entries, gibbs.entries, rtol=0, atol=1e-12)


@pytest.mark.parametrize("nombre", BUILTINS)
def test_forma_cuadratica_positiva_fuera_del_consenso(make_instance, nombre):
    instance = make_instance(seed=12, n=8, states=20)
    H = potential_service.potential_by_name(nombre)
    for x in instance.states:
        alpha = float(x.mean())
        V = potential_service.normalized_lyapunov(H, alpha, instance.n)
        grad = potential_service.lyapunov_gradient(V, x)
        G = metric_service.metric_matrix(instance.laplacian, H, x, alpha)
        assert grad @ G.entries @ grad > 0


def test_metrica_requiere_simetria(directed_laplacian):
    with pytest.raises(SymmetryRequiredException):
        metric_service.metric_matrix(directed_laplacian, potential_service.builtin_gibbs(), [1.0, 2.0, 3.0], 2.0)


def test_metrica_dominio(cycle_laplacian):
    x = np.array([1.0, 2.0, 0.0, 1.0, 1.0, 1.0])
    with pytest.raises(DomainException) as info:
        metric_service.metric_matrix(cycle_laplacian, potential_service.builtin_entropy(), x, 1.0)
    assert info.value.index == 2


@settings(max_examples=50, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**31 - 1),
    n=st.sampled_from([4, 8, 16]),
    nombre=st.sampled_from(BUILTINS),
)
def test_identidad_de_flujo_gradiente(seed, n, nombre):
    instance = random_instance(seed, n, states=1)
    x = instance.states[0]
    H = potential_service.potential_by_name(nombre, ref=1.0)
    assert metric_service.gradient_identity_residual(instance.laplacian, H, x, float(x.mean())) <= 1e-10


def test_identidad_dos_nodos_exacta(two_node_laplacian):
    residual = metric_service.gradient_identity_residual(
        two_node_laplacian, potential_service.builtin_quadratic(1.0), [2.0, 0.0], 1.0
    )
    assert residual <= 1e-14


def test_identidad_con_alpha_distinto_del_consenso(make_instance):
    instance = make_instance(seed=12, n=6)
    x = instance.states[0]
    residual = metric_service.gradient_identity_residual(
        instance.laplacian, potential_service.builtin_gibbs(), x, 0.7 * float(x.mean())
    )
    assert residual <= 1e-10


# ==================== KIRCHHOFF ====================

def test_factorizacion_kirchhoff(make_instance):
    instance = make_instance(seed=13, n=8)
    x = instance.states[1]
    alpha = float(x.mean())
    H = potential_service.builtin_entropy()
    m, w = metric_service.factorize(instance.laplacian, H, x, alpha)
    G = metric_service.metric_matrix(instance.laplacian, H, x, alpha).entries
    np.testing.assert_allclose(m.entries.T @ w.as_matrix() @ m.entries, G, rtol=0, atol=1e-12 * max(1.0, np.abs(G).max()))
    assert np.all(w.diagonal > 0)


def test_lazo_de_realimentacion_reproduce_la_dinamica(make_instance):
    instance = make_instance(seed=14, n=8)
    x = instance.states[2]
    u = metric_service.output_feedback_rate(instance.laplacian, potential_service.builtin_gibbs(), x, float(x.mean()))
    lx = instance.laplacian.entries @ x
    np.testing.assert_allclose(u, -lx, rtol=0, atol=1e-10 * max(1.0, np.abs(lx).max()))


def test_kirchhoff_identidad_es_laplaciano(cycle_laplacian):
    K = metric_service.kirchhoff_form_matrix(cycle_laplacian, metric_service.identity_function(), np.arange(1.0, 7.0))
    np.testing.assert_array_equal(K.entries, cycle_laplacian.entries)


# ==================== CERTIFICADOS ====================

def test_espectro_de_la_metrica(make_instance):
    instance = make_instance(seed=15, n=8)
    x = instance.states[0]
    G = metric_service.metric_matrix(instance.laplacian, potential_service.builtin_gibbs(), x, float(x.mean()))
    espectro = metric_service.metric_spectrum(G)
    assert espectro.positive_semidefinite
    assert espectro.kernel_dimension == 1
    assert espectro.condition_number >= 1.0
    assert metric_service.metric_violations(G, instance.laplacian) == []
    metric_service.validate_metric(G, instance.laplacian)


def test_metrica_invalida_detectada(cycle_laplacian):
    negada = MetricMatrix(entries=-cycle_laplacian.entries, state=np.ones(6), alpha=1.0)
    problemas = metric_service.metric_violations(negada, cycle_laplacian)
    assert "entradas fuera de la diagonal positivas" in problemas
    assert "no semidefinida positiva" in problemas
    with pytest.raises(VerificationException):
        metric_service.validate_metric(negada, cycle_laplacian)

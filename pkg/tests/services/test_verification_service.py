"""
Tests del servicio de verificación: chequeos individuales, controles negativos y suite
"""
import time

import numpy as np
import pytest

from app.core.exceptions import ConfigurationException, SymmetryRequiredException
from app.models import AdditiveLyapunov, PerronVector, Trajectory
from app.schemas import CheckReport, SuiteSummary
from app.services import flow_service, metric_service, potential_service
from app.services.verification_service import (
    VerificationService,
    format_report_line,
    instance_seed,
    random_instance,
    suite_lyapunov,
)


# ==================== GEOMETRÍA ====================

@pytest.mark.parametrize("nombre", ["quadratic", "entropy", "gibbs"])
def test_theorem2_pasa_en_instancias(verifier, make_instance, nombre):
    instance = make_instance(seed=31, n=8)
    H = potential_service.potential_by_name(nombre, ref=1.0)
    for x in instance.states:
        reporte = verifier.check_theorem2(instance.laplacian, H, x, float(x.mean()), seed=31)
        assert reporte.passed, reporte.context
        assert reporte.seed == 31


def test_metrica_corrupta_falla(verifier, make_instance):
    instance = make_instance(seed=32, n=6)
    L, x = instance.laplacian, instance.states[0]
    alpha = float(x.mean())
    H = potential_service.builtin_gibbs()
    g_inv = metric_service.metric_matrix(L, H, x, alpha).entries.copy()
    i, j, _ = L.edge_arrays()
    g_inv[i[0], j[0]] += 1e-3
    assert not verifier.check_theorem2(L, H, x, alpha, metric=g_inv).passed


def test_control_negativo_detecta_corrupcion(verifier, make_instance, rng):
    instance = make_instance(seed=33, n=8)
    x = instance.states[0]
    reporte = verifier.check_theorem2_negative_control(
        instance.laplacian, potential_service.builtin_entropy(), x, float(x.mean()), rng
    )
    assert reporte.passed
    assert reporte.context["corrupted_residual"] > 1e-6


def test_metrica_cuadratica_y_equivalencia(verifier, make_instance):
    instance = make_instance(seed=34, n=16)
    x = instance.states[0]
    assert verifier.check_quadratic_metric(instance.laplacian, x, float(x.mean())).passed
    assert verifier.check_metric_equivalence(instance.laplacian, x, float(x.mean())).passed


# ==================== POTENCIALES ====================

@pytest.mark.parametrize("nombre", ["quadratic", "entropy", "gibbs", "power"])
def test_gradiente_por_diferencias(verifier, make_instance, nombre):
    instance = make_instance(seed=35, n=8, states=100)
    for x in instance.states:
        V = suite_lyapunov(nombre, instance.perron, float(instance.perron.q @ x))
        reporte = verifier.check_gradient(V, x)
        assert reporte.passed, reporte.residual


def test_disipacion_lineal(verifier, cycle_laplacian):
    x0 = np.array([2.0, 0.5, 1.0, 1.5, 0.8, 1.2])
    tray = flow_service.integrate_linear(cycle_laplacian, x0, 0.5, 1e-3, stop_early=False)
    V = potential_service.normalized_lyapunov(potential_service.builtin_gibbs(), float(x0.mean()), 6)
    reporte = verifier.check_dissipation(cycle_laplacian, V, tray)
    assert reporte.passed, reporte.residual
    assert reporte.context["interior_samples"] == len(tray) - 2


def test_disipacion_requisitos(verifier, directed_laplacian, two_node_laplacian):
    V = potential_service.sum_of_squares_lyapunov(1.0, 3)
    tray = flow_service.integrate_linear(directed_laplacian, [3.0, 1.0, 0.5], 0.1, 0.01)
    with pytest.raises(SymmetryRequiredException):
        verifier.check_dissipation(directed_laplacian, V, tray)
    corta = flow_service.integrate_linear(two_node_laplacian, [2.0, 0.0], 0.01, 0.01)
    with pytest.raises(ConfigurationException):
        verifier.check_dissipation(two_node_laplacian, potential_service.sum_of_squares_lyapunov(1.0, 2), corta)


@pytest.mark.parametrize("nombre", ["quadratic", "entropy", "gibbs"])
def test_monotonia_dirigida(verifier, directed_laplacian, nombre):
    q = PerronVector(np.array([0.5, 1 / 3, 1 / 6]))
    x0 = np.array([3.0, 1.0, 0.5])
    tray = flow_service.integrate_linear(directed_laplacian, x0, 10.0, 0.01)
    reporte = verifier.check_monotone(suite_lyapunov(nombre, q, tray.consensus_level), tray)
    assert reporte.passed, reporte.context
    assert reporte.context["compared_segments"] > 0


def test_monotonia_falla_con_potencial_concavo(verifier, two_node_laplacian):
    tray = flow_service.integrate_linear(two_node_laplacian, [2.0, 0.0], 1.0, 0.01)
    V = AdditiveLyapunov(beta=1.0, c=1.0, q=PerronVector.uniform(2), potential=potential_service.concave_counterexample())
    reporte = verifier.check_monotone(V, tray)
    assert not reporte.passed
    assert reporte.context["first_violation"] == 0


def test_monotonia_requiere_dos_muestras(verifier):
    tray = Trajectory(times=[0.0], states=[[1.0, 1.0]], conserved=2.0, weights=[1.0, 1.0])
    with pytest.raises(ConfigurationException):
        verifier.check_monotone(potential_service.sum_of_squares_lyapunov(1.0, 2), tray)


def test_necesidad_de_convexidad(verifier, directed_laplacian):
    reporte = verifier.check_theorem1_necessity(directed_laplacian, [3.0, 1.0, 0.5])
    assert reporte.passed
    assert reporte.context["increasing_segments"] > 0
    assert reporte.context["degenerate"] is False


def test_necesidad_con_consenso_es_degenerado(verifier, two_node_laplacian):
    reporte = verifier.check_theorem1_necessity(two_node_laplacian, [1.0, 1.0])
    assert not reporte.passed
    assert reporte.context["degenerate"] is True


def test_decaimiento_del_desacuerdo_es_informativo(verifier, cycle_laplacian):
    x0 = np.array([2.0, 0.5, 1.0, 1.5, 0.8, 1.2])
    tray = flow_service.integrate_linear(cycle_laplacian, x0, 5.0, 0.01)
    V = potential_service.normalized_lyapunov(potential_service.builtin_gibbs(), float(x0.mean()), 6)
    reporte = verifier.check_disagreement_decay(cycle_laplacian, V, tray)
    assert reporte.informational
    assert not reporte.counts_as_failure


def test_reporte_informativo_fallido_no_cuenta():
    reporte = CheckReport.from_residual("disagreement_decay", 3.0, 0.5, informational=True)
    assert not reporte.passed
    assert not reporte.counts_as_failure
    resumen = SuiteSummary.from_reports([reporte, CheckReport.from_residual("gradient", 0.0, 1e-6)])
    assert (resumen.total, resumen.passed, resumen.failed, resumen.informational_failed) == (2, 1, 0, 1)


# ==================== DINÁMICA ====================

def test_chequeos_de_flujo(verifier, directed_laplacian):
    assert verifier.check_stochastic_flow(directed_laplacian).passed
    assert verifier.check_semigroup(directed_laplacian).passed
    assert verifier.check_markov_dual(directed_laplacian, [1.0, 0.0, 0.0], 30.0, 0.1).passed
    assert verifier.check_markov_stationary(directed_laplacian, 10.0, 0.1).passed


def test_conservacion_detecta_deriva(verifier):
    tray = Trajectory(times=[0.0, 1.0], states=[[1.0, 1.0], [1.0, 1.1]], conserved=2.0, weights=[1.0, 1.0])
    reporte = verifier.check_conservation(tray)
    assert not reporte.passed
    assert reporte.residual == pytest.approx(0.05)


def test_flujo_no_lineal_y_equivalencia(verifier, cycle_laplacian):
    x0 = np.array([2.0, 0.5, 1.0, 1.5, 0.8, 1.2])
    assert verifier.check_nonlinear_flow(cycle_laplacian, x0, 60.0, 0.05).passed
    assert verifier.check_flow_equivalence(cycle_laplacian, potential_service.builtin_gibbs(), x0, 1.0, 0.01).passed


# ==================== TOLERANCIAS ====================

def test_escala_de_tolerancias(two_node_laplacian):
    estricto = VerificationService(0.1)
    laxo = VerificationService(10.0)
    x = np.array([1.0, 2.0])
    V = potential_service.sum_of_squares_lyapunov(1.5, 2)
    assert estricto.check_gradient(V, x).tolerance == pytest.approx(1e-7)
    assert laxo.check_gradient(V, x).tolerance == pytest.approx(1e-5)
    tray = flow_service.integrate_linear(two_node_laplacian, [2.0, 0.0], 1.0, 0.01)
    assert estricto.check_monotone(V, tray).tolerance == laxo.check_monotone(V, tray).tolerance == 0.5



@pytest.mark.parametrize("escala", [0.0, -1.0])
def test_escala_invalida(escala):
    with pytest.raises(ConfigurationException):
        VerificationService(escala)


# ==================== SUITE ====================

def test_instancias_reproducibles():
    a = random_instance(7, 8)
    b = random_instance(7, 8)
    assert a.graph == b.graph
    for x, y in zip(a.states, b.states):
        np.testing.assert_array_equal(x, y)
    assert instance_seed(42, 4, 0) == instance_seed(42, 4, 0)
    assert instance_seed(42, 4, 0) != instance_seed(42, 4, 1)
    assert instance_seed(42, 4, 0, symmetric=True) != instance_seed(42, 4, 0, symmetric=False)


def test_suite_minima_pasa(verifier):
    reports = verifier.run_suite(42, 1, [4])
    fallidos = [format_report_line(r) for r in reports if r.counts_as_failure]
    assert fallidos == []
    nombres = {r.name for r in reports}
    assert {"theorem2", "theorem2_negative_control", "markov_dual", "nonlinear_flow", "dissipation"} <= nombres


def test_suite_determinista(verifier):
    primera = [format_report_line(r) for r in verifier.run_suite(42, 1, [4])]
    segunda = [format_report_line(r) for r in VerificationService().run_suite(42, 1, [4], max_workers=2)]
    assert primera == segunda


@pytest.mark.parametrize("count, sizes", [(0, [4]), (1, []), (1, [1, 4])])
def test_suite_parametros_invalidos(verifier, count, sizes):
    with pytest.raises(ConfigurationException):
        verifier.run_suite(42, count, sizes)


def test_suite_estricta_es_subconjunto_de_la_laxa():
    estricta = VerificationService(0.1).run_suite(3, 1, [4])
    laxa = VerificationService(10.0).run_suite(3, 1, [4])
    assert len(estricta) == len(laxa)
    for r_estricta, r_laxa in zip(estricta, laxa):
        assert r_estricta.name == r_laxa.name
        if r_estricta.passed:
            assert r_laxa.passed


@pytest.mark.slow
def test_suite_completa(verifier):
    inicio = time.perf_counter()
    reports = verifier.run_suite(42, 10, [4, 8, 16], max_workers=4)
    assert time.perf_counter() - inicio < 10.0
    fallidos = [format_report_line(r) for r in reports if r.counts_as_failure]
    assert fallidos == []


def test_formato_de_linea():
    reporte = CheckReport.from_residual("semigroup", 0.25, 0.5, seed=7, context={"s": 0.3, "n": 4})
    linea = format_report_line(reporte)
    assert linea == 'semigroup PASS residual=0.25 tolerance=0.5 seed=7 context={"n": 4, "s": 0.3}'
    informativo = CheckReport.from_residual("disagreement_decay", 2.0, 0.5, informational=True)
    assert format_report_line(informativo).startswith("disagreement_decay FAIL(info) residual=2 ")

"""
Tests del manejo de excepciones y códigos de salida
"""
import pytest
from pydantic import ValidationError

from app.core.exceptions import (
    EXIT_CONFIG,
    EXIT_DOMAIN,
    EXIT_GRAPH,
    EXIT_INTEGRATION,
    EXIT_UNEXPECTED,
    EXIT_VERIFICATION,
    ConfigurationException,
    DomainException,
    IntegrationException,
    InvalidProbabilityException,
    ReducibleGraphException,
    SymmetryRequiredException,
    VerificationException,
    handle_exception,
)
from app.schemas_models.scenario import IntegrationConfig


@pytest.mark.parametrize("exc, codigo", [
    (ConfigurationException("x"), EXIT_CONFIG),
    (DomainException("entropy", 1, 0.0), EXIT_DOMAIN),
    (InvalidProbabilityException("p"), EXIT_DOMAIN),
    (VerificationException("v"), EXIT_VERIFICATION),
    (ReducibleGraphException(3), EXIT_GRAPH),
    (SymmetryRequiredException("metric_matrix"), EXIT_GRAPH),
    (IntegrationException("dt"), EXIT_INTEGRATION),
])
def test_handle_exception_codigos_por_tipo(exc, codigo):
    assert handle_exception(exc) == codigo


def test_handle_exception_validation_error_es_configuracion():
    with pytest.raises(ValidationError) as info:
        IntegrationConfig(t_end=-1.0, dt=0.1)
    assert handle_exception(info.value) == EXIT_CONFIG


def test_handle_exception_inesperada():
    assert handle_exception(RuntimeError("boom")) == EXIT_UNEXPECTED


def test_domain_exception_nombra_el_indice():
    exc = DomainException("entropy", 4, -1.0, "(0, inf)")
    assert exc.index == 4
    assert "4" in exc.message
    assert exc.details["potencial"] == "entropy"


def test_reducible_graph_mensaje():
    exc = ReducibleGraphException(5, {"metodo": "solve"})
    assert "Perron vector not unique/positive" in exc.message
    assert exc.details == {"n": 5, "metodo": "solve"}


def test_exit_code_override():
    assert ConfigurationException("x", exit_code=9).exit_code == 9


def test_domain_exception_de_parametro_escalar():
    exc = DomainException("rt", None, 0.0, "(0, inf)")
    assert exc.index is None
    assert exc.message == "Parámetro 'rt' fuera del dominio (0, inf): 0.0"
    assert "Componente" not in exc.message

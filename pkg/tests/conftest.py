"""
Fixtures globales de testing - Consensus Lyapunov
Grafos de referencia, instancias aleatorias y fábricas de escenarios
"""
import json
import math
from pathlib import Path

import numpy as np
import pytest

from app.models import LaplacianMatrix, WeightedDigraph
from app.services import graph_service
from app.services.verification_service import VerificationService, random_instance

EXAMPLES_DIR = Path(__file__).resolve().parent.parent / "examples_configs"


# ==================== GRAFOS ====================

@pytest.fixture
def two_node_laplacian() -> LaplacianMatrix:
    """Dos nodos con arista unitaria: L = [[1, -1], [-1, 1]]"""
    return graph_service.build_laplacian(WeightedDigraph.from_edges(2, [(0, 1, 1.0), (1, 0, 1.0)]))


@pytest.fixture
def cycle_laplacian() -> LaplacianMatrix:
    """Ciclo no dirigido de 6 nodos con peso 1 (λ₂ = 1)"""
    return graph_service.build_laplacian(graph_service.named_graph("cycle", 6))


@pytest.fixture
def directed_laplacian() -> LaplacianMatrix:
    """Digrafo fuertemente conexo y no balanceado de 3 nodos"""
    g = WeightedDigraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 2.0), (1, 0, 0.5)])
    return graph_service.build_laplacian(g)


@pytest.fixture
def reducible_laplacian() -> LaplacianMatrix:
    """0 → 1 sin camino de vuelta"""
    return graph_service.build_laplacian(WeightedDigraph.from_edges(2, [(0, 1, 1.0)]))


# ==================== INSTANCIAS ALEATORIAS ====================

@pytest.fixture
def make_instance():
    """Factory de instancias aleatorias reproducibles"""
    def _make(seed: int = 0, n: int = 8, symmetric: bool = True, states: int = 5):
        return random_instance(seed, n, symmetric=symmetric, states=states)
    return _make


@pytest.fixture
def verifier() -> VerificationService:
    return VerificationService()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


# ==================== ESCENARIOS ====================

@pytest.fixture
def two_node_edges() -> Path:
    return EXAMPLES_DIR / "two_node.edges"


@pytest.fixture
def two_node_config_path() -> Path:
    return EXAMPLES_DIR / "two_node_demo.json"


@pytest.fixture
def paired_config_path() -> Path:
    return EXAMPLES_DIR / "gibbs_linear_vs_log.json"


@pytest.fixture
def directed_config_path() -> Path:
    return EXAMPLES_DIR / "directed_random_entropy.json"


@pytest.fixture
def write_scenario(tmp_path):
    """
    Factory que escribe un escenario JSON en tmp_path

    Parte de un escenario lineal sobre un camino de 4 nodos y aplica overrides
    de primer nivel.
    """
    def _write(name: str = "escenario_test", **overrides) -> Path:
        data = {
            "name": name,
            "graph": {"generator": "path", "n": 4},
            "initial_state": {"values": [1.0, 2.0, 3.0, 4.0]},
            "potential": {"name": "gibbs"},
            "dynamics": {"kind": "linear"},
            "integration": {"t_end": 2.0, "dt": 0.01},
        }
        data.update(overrides)
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        return path
    return _write


@pytest.fixture
def ln2() -> float:
    return math.log(2.0)

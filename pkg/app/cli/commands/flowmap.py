"""
Comando flowmap - Consensus Lyapunov
Imprime P^(t) = e^{-Lt} de un grafo en CSV
"""
import argparse
import logging
from pathlib import Path

from app.core.exceptions import EXIT_OK
from app.services import flow_service, graph_service
from app.services.export_service import format_float

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("flowmap", help="Mapa de flujo e^{-Lt} de un grafo")
    parser.add_argument("graph", type=Path, help="Archivo de lista de aristas")
    parser.add_argument("--t", type=float, required=True, help="Tiempo t >= 0")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    L = graph_service.build_laplacian(graph_service.load_edge_list(args.graph))
    mapa = flow_service.flow_map(L, args.t)
    for fila in mapa.matrix:
        print(",".join(format_float(v) for v in fila))
    logger.info(f"Mapa de flujo n={L.n}, t={args.t}")
    return EXIT_OK

"""
Comando report - Consensus Lyapunov
Resumen de un run_report.json existente
"""
import argparse
from pathlib import Path

from app.core.exceptions import EXIT_OK
from app.schemas import RunReport
from app.services import harness_service
from app.services.verification_service import format_report_line


def register(subparsers) -> None:
    parser = subparsers.add_parser("report", help="Resume un directorio de corrida")
    parser.add_argument("run_dir", type=Path, help="Directorio con run_report.json")
    parser.set_defaults(handler=run)


def _print_run(report: RunReport, sangria: str = "") -> None:
    estado = "PASS" if report.passed else "FAIL"
    print(f"{sangria}{report.name} [{report.dynamics}] {estado}")
    print(f"{sangria}  consensus_value={report.consensus_value!r} alpha={report.alpha!r}")
    print(f"{sangria}  terminal_distance={report.terminal_distance:.3e} samples={report.samples} stopped_early={report.stopped_early}")
    for check in report.checks:
        print(f"{sangria}  {format_report_line(check)}")
    for nombre, ruta in sorted(report.files.items()):
        print(f"{sangria}  file {nombre}: {ruta}")


def run(args: argparse.Namespace) -> int:
    report = harness_service.load_run_report(args.run_dir)
    _print_run(report)
    if report.compare is not None:
        print("compare:")
        _print_run(report.compare, sangria="  ")
    return EXIT_OK

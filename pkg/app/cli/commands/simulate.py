"""
Comando simulate - Consensus Lyapunov
Corre uno o más escenarios JSON en paralelo
"""
import argparse
import logging
from pathlib import Path

from app.cli.deps import get_settings
from app.core.exceptions import EXIT_OK, EXIT_VERIFICATION
from app.services import harness_service
from app.services.verification_service import format_report_line

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("simulate", help="Corre escenarios de simulación")
    parser.add_argument("configs", nargs="+", type=Path, help="Archivos de escenario JSON")
    parser.add_argument("--output-dir", type=Path, default=None, help="Directorio base de corridas")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    settings = get_settings()
    output_dir = args.output_dir or settings.OUTPUT_DIR
    configs = [harness_service.load_scenario(path) for path in args.configs]
    reports = harness_service.run_batch(
        configs, output_dir, settings.MAX_WORKERS, tolerance_scale=settings.TOLERANCE_SCALE
    )

    for report in reports:
        for corrida in (report, report.compare):
            if corrida is None:
                continue
            estado = "PASS" if corrida.passed else "FAIL"
            print(
                f"{corrida.name} [{corrida.dynamics}] {estado} a={corrida.consensus_value!r} "
                f"terminal_distance={corrida.terminal_distance:.3e} samples={corrida.samples}"
            )
            for check in corrida.checks:
                print(f"  {format_report_line(check)}")
        print(f"  -> {output_dir / report.name}")

    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFICATION

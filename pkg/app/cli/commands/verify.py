"""
Comando verify - Consensus Lyapunov
Suite de verificación sobre instancias aleatorias con semilla
"""
import argparse

from app.cli.deps import get_settings, parse_sizes
from app.core.exceptions import EXIT_OK, EXIT_VERIFICATION
from app.schemas import SuiteSummary
from app.services import harness_service
from app.services.verification_service import format_report_line

TOLERANCE_SCALES = {"strict": 0.1, "lenient": 10.0}


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="Corre la suite de verificación")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--count", type=int, default=10, help="Instancias por tamaño")
    parser.add_argument("--sizes", type=str, default="4,8,16", help="Tamaños separados por coma")
    modo = parser.add_mutually_exclusive_group()
    modo.add_argument("--strict", action="store_const", dest="mode", const="strict", help="Tolerancias x0.1")
    modo.add_argument("--lenient", action="store_const", dest="mode", const="lenient", help="Tolerancias x10")
    parser.add_argument("--failures-only", action="store_true", help="Imprimir solo los chequeos fallidos")
    parser.set_defaults(handler=run, mode=None)


def run(args: argparse.Namespace) -> int:
    settings = get_settings()
    escala = TOLERANCE_SCALES[args.mode] if args.mode else settings.TOLERANCE_SCALE
    reports = harness_service.run_verification_suite(
        args.seed, args.count, parse_sizes(args.sizes), tolerance_scale=escala, max_workers=settings.MAX_WORKERS
    )

    for report in reports:
        if args.failures_only and report.passed:
            continue
        print(format_report_line(report))

    resumen = SuiteSummary.from_reports(reports)
    print(
        f"summary total={resumen.total} passed={resumen.passed} failed={resumen.failed} "
        f"informational_failed={resumen.informational_failed} tolerance_scale={escala}"
    )
    return EXIT_OK if resumen.failed == 0 else EXIT_VERIFICATION

"""
fiberlab - numerical laboratory for spin-boson fiber Hamiltonians
Run with: python main.py <command> <config>
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from config.settings import get_runtime_settings
from harness.config_loader import load_config
from harness.storage import to_json
from harness.sweep import analyze, emit_figure_data, run_convergence, run_sweep
from utils import configure_logging
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2
EXIT_INTERNAL = 3


class CliParser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; here usage errors exit with 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        prog='fiberlab',
        description='Truncated-Fock spin-boson laboratory',
        epilog='Examples:\n'
               '  python main.py validate configs/quartic_eta_sweep.cfg\n'
               '  python main.py analyze configs/van_hove.cfg\n'
               '  python main.py sweep configs/quartic_eta_sweep.cfg -o results/\n'
               '  python main.py figure configs/quartic_eta_sweep.cfg -o figure.csv\n'
               '  python main.py convergence configs/quartic_eta_sweep.cfg -o convergence.csv\n'
               'Exit codes: 0 ok, 1 usage/config error, 2 check failures, 3 internal error',
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('--workers', type=int, default=None,
                        help='Worker processes (overrides FIBERLAB_WORKERS and the config)')
    parser.add_argument('--log-level', default=None, help='Log level (default: FIBERLAB_LOG_LEVEL or INFO)')

    subparsers = parser.add_subparsers(dest='command', help='Command to execute', parser_class=CliParser)

    validate_parser = subparsers.add_parser('validate', help='Parse and validate a config')
    validate_parser.add_argument('config', type=Path)

    analyze_parser = subparsers.add_parser('analyze', help='Full report for one point as JSON on stdout')
    analyze_parser.add_argument('config', type=Path)

    sweep_parser = subparsers.add_parser('sweep', help='Run every grid point and write CSV + JSON')
    sweep_parser.add_argument('config', type=Path)
    sweep_parser.add_argument('-o', '--output', type=Path, default=None,
                              help='Output directory (default: the config output key)')

    figure_parser = subparsers.add_parser('figure', help='Emit eta, E_minus, E_plus, threshold')
    figure_parser.add_argument('config', type=Path)
    figure_parser.add_argument('-o', '--output', type=Path, required=True)

    convergence_parser = subparsers.add_parser('convergence', help='Cutoff convergence table')
    convergence_parser.add_argument('config', type=Path)
    convergence_parser.add_argument('-o', '--output', type=Path, required=True)
    return parser


def run_command(args: argparse.Namespace) -> int:
    config = load_config(args.config)

    if args.command == 'validate':
        logger.info(f"Config {args.config} is valid: {len(config.grid())} grid points, "
                    f"checks {config.checks}")
        return EXIT_OK

    if args.command == 'analyze':
        report = analyze(config)
        sys.stdout.write(to_json(report) + "\n")
        return EXIT_CHECK_FAILED if report['summary']['reason_codes'] else EXIT_OK

    if args.command == 'sweep':
        outcome = run_sweep(config, output_dir=args.output, workers=args.workers)
        progress = outcome.progress
        logger.info(f"Sweep complete: {progress['done']} points, {progress['failed']} failed "
                    f"({progress['elapsed_seconds']:.1f}s) -> {outcome.csv_path}")
        return EXIT_CHECK_FAILED if outcome.failed else EXIT_OK

    if args.command == 'figure':
        _, rows = emit_figure_data(config, args.output, workers=args.workers)
        return EXIT_CHECK_FAILED if any(row.failed for row in rows) else EXIT_OK

    if args.command == 'convergence':
        table, _ = run_convergence(config, args.output)
        return EXIT_CHECK_FAILED if table.non_cauchy else EXIT_OK

    raise ValueError(f"unknown command {args.command}")


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI interface"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE

    settings = get_runtime_settings()
    configure_logging(args.log_level or settings.log_level, json_path=settings.log_json)

    try:
        return run_command(args)
    except ConfigError as e:
        logger.error(f"Config error: {e}")
        return EXIT_USAGE
    except KeyboardInterrupt:
        logger.warning("Interrupted by user")
        return EXIT_INTERNAL
    except Exception as e:
        logger.error(f"Internal error: {e}", exc_info=True)
        return EXIT_INTERNAL


if __name__ == '__main__':
    sys.exit(main())

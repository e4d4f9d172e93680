import argparse
import json
import sys
from typing import Any, Dict, List, Optional

from config import get_config
from models.run_config import SUBCOMMANDS, RunConfig
from services.report_store import ReportStore
from services.verification_service import VerificationService
from utils.errors import UsageError
from utils.logger import logger

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
REPORTS_COMMAND = 'reports'

HELP = {
    'verify-symfun': 'symmetric-function and Newton-tensor oracle on random spectra',
    'verify-minkowski': 'Minkowski-type formulas on caps, with convergence orders',
    'verify-boundary': 'horosphere boundary flux identities and the constant-sigma identity',
    'verify-jacobi': 'Jacobi identities and Robin boundary relations',
    'verify-ambient': 'Killing, conformal and Hessian identities of the ambient models',
    'stability': 'lowest admissible eigenvalue, test functions and cap reduction',
    'rigidity-gaps': 'gap quantities of the rigidity argument on caps and perturbed caps',
    'first-variation': 'first variation of the capillary energies, wetting rate and flow ledger',
    'convergence': 'every surface identity of a scenario over nested resolutions',
    'all': 'the full verification matrix',
}


def _tolerance_pair(text: str) -> Dict[str, float]:
    key, sep, value = text.partition('=')
    if not sep:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return {key.strip(): float(value)}
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {key} needs a number, got {value!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON file with the same schema as the flags')
    common.add_argument('--output', help='report path (default REPORT_DIR/<subcommand>.json)')
    common.add_argument('--scenario', action='append', default=None,
                        help='surface or flow scenario, e.g. euclid-cap:n=2,lambda=1,theta=1.0472 or flow:scale')
    common.add_argument('--model', help='comma-separated models: euclid, horoball')
    common.add_argument('--n', help='comma-separated dimensions (2, 3)')
    common.add_argument('--r', help='comma-separated orders r')
    common.add_argument('--theta', help='comma-separated contact angles in radians')
    common.add_argument('--res', help='comma-separated, strictly increasing resolutions')
    common.add_argument('--lambda', dest='curvature', type=float, help='cap curvature Lambda')
    common.add_argument('--basis-size', type=int, help='admissible Galerkin basis size')
    common.add_argument('--tolerance', action='append', type=_tolerance_pair, default=None,
                        metavar='KEY=VALUE', help='override one tolerance')

    parser = argparse.ArgumentParser(
        prog='cli',
        description='Numerical verification of capillary hypersurface identities',
    )
    subparsers = parser.add_subparsers(dest='subcommand', required=True)
    for name in SUBCOMMANDS:
        subparsers.add_parser(name, parents=[common], help=HELP[name])

    reports = subparsers.add_parser(REPORTS_COMMAND, help='list or clear stored run reports')
    reports.add_argument('action', choices=('list', 'clear'))
    reports.add_argument('--name', help='single report to clear (default: every report)')
    reports.add_argument('--report-dir', help='report directory (default REPORT_DIR)')
    return parser


def _read_config_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            values = json.load(f)
    except (OSError, ValueError) as e:
        raise UsageError(f"Cannot read config file {path}: {e}")
    if not isinstance(values, dict):
        raise UsageError(f"Config file {path} must hold a JSON object")
    return values


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """
    Defaults, then the config file, then the flags

    Raises:
        UsageError: on schema violations
    """
    values: Dict[str, Any] = _read_config_file(args.config) if args.config else {}
    flags = {
        'model': args.model,
        'n': args.n,
        'r': args.r,
        'theta': args.theta,
        'res': args.res,
        'lambda': args.curvature,
        'basis_size': args.basis_size,
        'scenario': args.scenario,
        'output': args.output,
    }
    for key, value in flags.items():
        if value is not None:
            values[key] = value
    if args.tolerance:
        merged = dict(values.get('tolerance', values.get('tolerances', {})) or {})
        for pair in args.tolerance:
            merged.update(pair)
        values.pop('tolerances', None)
        values['tolerance'] = merged
    return RunConfig.from_mapping(args.subcommand, values)


def _failing_names(document: Dict[str, Any]) -> List[str]:
    names = [record['metadata'].get('job', record['identity'])
             for record in document['records'] if record['verdict'] != 'pass']
    names += [failure['name'] for failure in document['errors']]
    return names


def run(run_config: RunConfig, store: Optional[ReportStore] = None) -> int:
    """
    Run a subcommand and write its report

    Returns:
        0 if every verdict passes, 1 otherwise
    """
    store = store or ReportStore()
    service = VerificationService(run_config)
    reports, failures = service.run()
    document = store.build_document(run_config.subcommand, run_config.to_dict(), reports, failures)
    path = store.save_report(run_config.output or run_config.subcommand, document)

    summary = document['summary']
    print(f"{run_config.subcommand}: {summary['passed']}/{summary['total']} passed"
          + (f" - report {path}" if path else ''))
    failing = _failing_names(document)
    for name in failing:
        print(f"FAILED: {name}", file=sys.stderr)
    if path is None:
        return EXIT_FAIL
    return EXIT_FAIL if failing else EXIT_PASS


def manage_reports(args: argparse.Namespace, store: Optional[ReportStore] = None) -> int:
    """
    List or clear the stored run reports

    Returns:
        0, or 1 when a listed report holds failing records
    """
    store = store or ReportStore(args.report_dir)
    if args.action == 'clear':
        removed = store.clear_reports(args.name)
        print(f"cleared {removed} report(s) from {store.report_dir}")
        return EXIT_PASS
    stats = store.get_report_stats()
    for detail in stats['report_details']:
        print(f"{detail['file']}: {detail['subcommand']} - "
              f"{detail['records'] - detail['failed']}/{detail['records']} passed")
    print(f"{stats['report_files']} report(s), {stats['passed_records']}/{stats['total_records']} records passed")
    return EXIT_FAIL if stats['failed_records'] else EXIT_PASS


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_PASS
    if args.subcommand == REPORTS_COMMAND:
        return manage_reports(args)
    try:
        run_config = build_run_config(args)
    except UsageError as e:
        logger.error(f"Usage error: {e}")
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    logger.info(f"Starting {run_config.subcommand} ({get_config().__name__})")
    return run(run_config)


if __name__ == '__main__':
    sys.exit(main())

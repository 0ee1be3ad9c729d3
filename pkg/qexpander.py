#!/usr/bin/env python3
"""
Quantum expander toolkit - command-line frontend

Generates base ensembles, composes them (square, tensor, zig-zag), estimates
lambda, runs the recursive construction and verifies stored ensembles.

Exit status: 0 success, 1 verification failure, 2 usage or I/O error.
"""

import argparse
import logging
import shlex
import sys
import time
from typing import Any, Dict, List, Optional

import numpy as np

from channels import MixedUnitaryEnsemble, square, tensor_channels
from checks import generate_report, verify_ensemble
from construction import (
    GENERATOR_SETS,
    MATERIALIZE_CAP,
    SEARCH_BUDGET,
    build_family,
    build_net,
    cert_bound,
    discretize,
    net_search,
    random_base,
    replacement_distance,
)
from ensemble_io import ENCODINGS, deserialize, serialize
from errors import QExpanderError
from linalg_core import DIMENSION_CAP
from run_report import RunReport
from spectral import EXACT_CAP, POWER_MAX_ITER, POWER_RESTARTS, POWER_TOL, SpectralEstimate, estimate_lambda
from zigzag import zigzag

logger = logging.getLogger("qexpander")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _common_parser() -> argparse.ArgumentParser:
    """Flags shared by every command"""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--seed', type=int, default=None, help='Seed for every random draw (auto-generated and recorded if omitted)')
    parser.add_argument('--report', default=None, help='Write a machine-readable JSON report to this path')
    parser.add_argument('--debug', action='store_true', help='Enable debug logging')
    parser.add_argument('--method', choices=['exact', 'power'], default=None, help='Lambda estimator (default: exact up to --exact-cap, power above)')
    parser.add_argument('--exact-cap', type=int, default=EXACT_CAP, help='Largest dimension for the exact estimator')
    parser.add_argument('--tol', type=float, default=POWER_TOL, help='Power iteration stagnation tolerance')
    parser.add_argument('--max-iter', type=int, default=POWER_MAX_ITER, help='Power iteration limit per restart')
    parser.add_argument('--restarts', type=int, default=POWER_RESTARTS, help='Power iteration restarts')
    parser.add_argument('--no-lambda', action='store_true', help='Skip lambda estimates in the report (faster)')
    return parser


def _output_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--out', default=None, help='Write the resulting ensemble to this path')
    parser.add_argument('--encoding', choices=list(ENCODINGS), default=None, help='Ensemble file encoding (default: from the file suffix)')
    return parser


def _net_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--gens', choices=sorted(GENERATOR_SETS), default='ht', help='Generator set of the unitary net')
    parser.add_argument('--max-word-length', type=int, default=6, help='Longest generator word in the net')
    parser.add_argument('--accuracy', type=float, default=1e-3, help='Net accuracy; members are more than accuracy/2 apart')
    return parser


def create_argparser() -> argparse.ArgumentParser:
    """Create the argument parser with one subcommand per operation"""
    common, output, net = _common_parser(), _output_parser(), _net_parser()
    parser = argparse.ArgumentParser(prog='qexpander', description='Explicit constant-degree quantum expanders')
    commands = parser.add_subparsers(dest='command', required=True)

    p = commands.add_parser('gen-base', parents=[common, output], help='Random Haar base ensemble')
    p.add_argument('--n', type=int, required=True, help='Dimension')
    p.add_argument('--d', type=int, required=True, help='Degree')

    p = commands.add_parser('net-search', parents=[common, output, net], help='Best base ensemble over a unitary net')
    p.add_argument('--n', type=int, required=True, help='Dimension (must match the generator set)')
    p.add_argument('--d', type=int, required=True, help='Degree')
    p.add_argument('--mode', choices=['exhaustive', 'sample'], default='exhaustive', help='Search mode')
    p.add_argument('--samples', type=int, default=1000, help='Tuples drawn in sample mode')
    p.add_argument('--budget', type=int, default=SEARCH_BUDGET, help='Largest exhaustive search')

    p = commands.add_parser('square', parents=[common, output], help='G^2')
    p.add_argument('--in', dest='input', required=True, help='Input ensemble')

    for name, help_text in (('tensor', 'G1 (x) G2'), ('zigzag', 'G1 (z) G2')):
        p = commands.add_parser(name, parents=[common, output], help=help_text)
        p.add_argument('--g1', required=True, help='First ensemble')
        p.add_argument('--g2', required=True, help='Second ensemble')
        p.add_argument('--cap', type=int, default=DIMENSION_CAP, help='Largest dimension to materialize')

    p = commands.add_parser('lambda', parents=[common], help='Estimate lambda of a stored ensemble')
    p.add_argument('--in', dest='input', required=True, help='Input ensemble')

    p = commands.add_parser('discretize', parents=[common, output, net], help='Round every unitary to its nearest net member')
    p.add_argument('--in', dest='input', required=True, help='Input ensemble')

    p = commands.add_parser('construct', parents=[common, output], help='Recursive family G_1 .. G_t over a base H')
    p.add_argument('--base', required=True, help='Base ensemble H with dim = degree^8')
    p.add_argument('--t', type=int, required=True, help='Last member of the family')
    p.add_argument('--cap', type=int, default=MATERIALIZE_CAP, help='Largest dimension to materialize')
    p.add_argument('--base-lambda', type=float, default=None, help='Use this lambda bound for H instead of estimating it')

    p = commands.add_parser('verify', parents=[common], help='Run the invariant suite on a stored ensemble')
    p.add_argument('--in', dest='input', required=True, help='Input ensemble')
    p.add_argument('--samples', type=int, default=10, help='Random operators per check')
    p.add_argument('--max-lambda', type=float, default=None, help='Also require lambda below this value')
    p.add_argument('--report-text', default=None, help='Write the text report to this path')
    return parser


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    seed = int(np.random.SeedSequence().entropy) & (2 ** 63 - 1)
    print(f"Auto-generated seed: {seed}")
    return seed


def _power_options(args: argparse.Namespace, seed: int) -> Dict[str, Any]:
    return {'tol': args.tol, 'max_iter': args.max_iter, 'restarts': args.restarts, 'seed': seed}


def _estimate(G: MixedUnitaryEnsemble, args: argparse.Namespace, seed: int) -> SpectralEstimate:
    estimate = estimate_lambda(G, method=args.method, exact_cap=args.exact_cap, **_power_options(args, seed))
    if not estimate.converged:
        print(f"Warning: power iteration did not converge for {G.label} (residual {estimate.residual:.2e})")
    return estimate


def _add_ensemble_row(report: RunReport, operation: str, G: MixedUnitaryEnsemble, args: argparse.Namespace,
                      seed: int) -> Optional[SpectralEstimate]:
    if args.no_lambda:
        report.add(operation, G.dim, G.degree, note=G.label)
        return None
    estimate = _estimate(G, args, seed)
    report.add(operation, G.dim, G.degree, estimate.lam, estimate.method_tag, G.label)
    return estimate


def _save(G: MixedUnitaryEnsemble, args: argparse.Namespace) -> None:
    if args.out:
        path = serialize(G, args.out, args.encoding)
        print(f"✓ Saved ensemble (dim {G.dim}, degree {G.degree}) to {path}")


def cmd_gen_base(args, report: RunReport, seed: int) -> int:
    G = random_base(args.n, args.d, seed)
    _add_ensemble_row(report, 'random_base', G, args, seed)
    _save(G, args)
    return EXIT_OK


def cmd_net_search(args, report: RunReport, seed: int) -> int:
    net = build_net(args.n, args.gens, args.max_word_length, args.accuracy)
    report.add('build_net', net.dim, len(net), note=f"{args.gens}, words <= {args.max_word_length}")
    G, estimate = net_search(args.n, args.d, net, args.mode, args.samples, seed, args.budget)
    report.add('net_search', G.dim, G.degree, estimate.lam, estimate.method_tag, G.label)
    _save(G, args)
    return EXIT_OK


def cmd_square(args, report: RunReport, seed: int) -> int:
    G = deserialize(args.input)
    before = _add_ensemble_row(report, 'input', G, args, seed)
    G2 = square(G)
    _add_ensemble_row(report, 'square', G2, args, seed)
    if before is not None:
        report.add('square bound', G2.dim, G2.degree, cert_bound('square', [min(1.0, before.lam)]), 'cert')
    _save(G2, args)
    return EXIT_OK


def cmd_tensor(args, report: RunReport, seed: int) -> int:
    G1, G2 = deserialize(args.g1), deserialize(args.g2)
    lam1 = _add_ensemble_row(report, 'g1', G1, args, seed)
    lam2 = _add_ensemble_row(report, 'g2', G2, args, seed)
    G = tensor_channels(G1, G2, cap=args.cap)
    _add_ensemble_row(report, 'tensor', G, args, seed)
    if lam1 is not None and lam2 is not None:
        bound = cert_bound('tensor', [min(1.0, lam1.lam), min(1.0, lam2.lam)])
        report.add('tensor bound', G.dim, G.degree, bound, 'cert')
    _save(G, args)
    return EXIT_OK


def cmd_zigzag(args, report: RunReport, seed: int) -> int:
    G1, G2 = deserialize(args.g1), deserialize(args.g2)
    lam1 = _add_ensemble_row(report, 'g1', G1, args, seed)
    lam2 = _add_ensemble_row(report, 'g2', G2, args, seed)
    G = zigzag(G1, G2, cap=args.cap)
    _add_ensemble_row(report, 'zigzag', G, args, seed)
    if lam1 is not None and lam2 is not None:
        bound = cert_bound('zigzag', [min(1.0, lam1.lam), min(1.0, lam2.lam)])
        report.add('zigzag bound', G.dim, G.degree, bound, 'cert')
    _save(G, args)
    return EXIT_OK


def cmd_lambda(args, report: RunReport, seed: int) -> int:
    G = deserialize(args.input)
    estimate = _estimate(G, args, seed)
    note = G.label if estimate.method_tag == 'exact' else (
        f"{G.label}; {estimate.iterations} iterations, residual {estimate.residual:.1e}")
    report.add('lambda', G.dim, G.degree, estimate.lam, estimate.method_tag, note)
    return EXIT_OK


def cmd_discretize(args, report: RunReport, seed: int) -> int:
    G = deserialize(args.input)
    net = build_net(G.dim, args.gens, args.max_word_length, args.accuracy)
    report.add('build_net', net.dim, len(net), note=f"{args.gens}, words <= {args.max_word_length}")
    _add_ensemble_row(report, 'input', G, args, seed)
    G_net = discretize(G, net)
    slack = replacement_distance(G, net)
    _add_ensemble_row(report, 'discretize', G_net, args, seed)
    report.extra['max_replacement_distance'] = slack
    print(f"Max replacement distance: {slack:.6e}")
    _save(G_net, args)
    return EXIT_OK


def cmd_construct(args, report: RunReport, seed: int) -> int:
    H = deserialize(args.base)
    base_lambda = args.base_lambda
    if base_lambda is None:
        estimate = _estimate(H, args, seed)
        base_lambda = estimate.lam
        report.add('base', H.dim, H.degree, estimate.lam, estimate.method_tag, H.label)
    else:
        report.add('base', H.dim, H.degree, base_lambda, 'cert', f"{H.label} (given)")
    family = build_family(H, args.t, materialize_cap=args.cap, base_lambda=min(1.0, base_lambda))
    for s, member in family.items():
        note = "materialized" if member.ensemble is not None else "certificate only"
        report.add(f"G{s}", member.cert.dim, member.cert.degree, member.cert.lambda_bound, 'cert', note)
        if member.ensemble is not None and not args.no_lambda:
            _add_ensemble_row(report, f"G{s}", member.ensemble, args, seed)
    report.extra['certificate'] = family[args.t].cert.to_dict()
    last = family[args.t].ensemble
    if last is not None:
        _save(last, args)
    elif args.out:
        print(f"Warning: G{args.t} was not materialized (dimension {family[args.t].cert.dim} > --cap {args.cap}); nothing saved")
    return EXIT_OK


def cmd_verify(args, report: RunReport, seed: int) -> int:
    G = deserialize(args.input, validate=False)
    results = verify_ensemble(G, seed=seed, samples=args.samples, method=args.method,
                              max_lambda=args.max_lambda, exact_cap=args.exact_cap,
                              tol=args.tol, max_iter=args.max_iter, restarts=args.restarts)
    print(generate_report(G, results, args.report_text))
    for result in results:
        report.add(result.name, G.dim, G.degree, note=f"{'pass' if result.passed else 'FAIL'} ({result.value:.3e})")
    report.extra['checks'] = {r.name: r.passed for r in results}
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


COMMANDS = {
    'gen-base': cmd_gen_base,
    'net-search': cmd_net_search,
    'square': cmd_square,
    'tensor': cmd_tensor,
    'zigzag': cmd_zigzag,
    'lambda': cmd_lambda,
    'discretize': cmd_discretize,
    'construct': cmd_construct,
    'verify': cmd_verify,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Standard entry point; returns the exit status."""
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = create_argparser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    logging.basicConfig(level=logging.DEBUG if args.debug else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')

    seed = _resolve_seed(args)
    report = RunReport(command='qexpander ' + shlex.join(argv), seed=seed)
    start = time.perf_counter()
    try:
        status = COMMANDS[args.command](args, report, seed)
    except (QExpanderError, ValueError, OSError) as e:
        print(f"❌ {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    report.wall_time = time.perf_counter() - start

    print(report.to_table())
    print(f"Wall time: {report.wall_time:.2f}s, seed {seed}")
    if args.report:
        report.save(args.report)
        print(f"✓ Saved report to {args.report}")
    return status


if __name__ == '__main__':
    sys.exit(main())

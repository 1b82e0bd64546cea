"""Channel commands: simulate (collective U⊗U noise) and scan (random-state sweep)."""

import argparse
import logging

from commands.files import emit, load_basis, load_state, manifest, write_trials_csv
from errors import OutOfRange
from models import ChannelStatsOut, ScanReportOut
from services.channel import ChannelConfig, scan_random_states, simulate
from settings import Settings

SCAN_DIMS = range(2, 9)


def cmd_simulate(args) -> int:
    rho, digests = load_state(args.input, args.state, args.seed, args.config.psd_tolerance)
    basis = load_basis(args.basis, rho.local_dim, digests)
    stats = simulate(ChannelConfig(rho, args.trials, basis, seed=args.seed, noise=args.noise,
                                   workers=args.workers))
    logging.info(f"Mean success {stats.mean:.6f} ± {stats.std_error:.1e}, min {stats.min:.6f}")
    run = manifest("simulate", args.argv, args.seed, digests)
    if args.csv:
        write_trials_csv(args.csv, stats.per_trial_success, run)
    emit(ChannelStatsOut.build(stats, args.noise), args.out, run)
    return 0


def cmd_scan(args) -> int:
    if args.dim not in SCAN_DIMS:
        raise OutOfRange("--dim must lie in [2, 8]", {"dim": args.dim})
    report = scan_random_states(args.dim, args.count, args.probes, seed=args.seed,
                                refine=args.refine, workers=args.workers)
    if report.mismatches:
        logging.info(f"{report.mismatches} of {report.count} states showed a signature mismatch")
    emit(ScanReportOut.build(report), args.out, manifest("scan", args.argv, args.seed, {}))
    return 0


def register(sub: argparse._SubParsersAction, with_state, common, config: Settings) -> None:
    p = sub.add_parser("simulate", parents=[with_state], help="collective unitary noise Monte Carlo")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--basis", default=None,
                   help="measurement basis: JSON path, 'computational' or 'fourier' (default: computational)")
    p.add_argument("--noise", choices=["haar", "spin"], default="haar",
                   help="U drawn from U(d) Haar measure or the spin-j image of SU(2)")
    p.add_argument("--csv", metavar="PATH", help="write per-trial success probabilities")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("scan", parents=[common], help="minimum invariance defect over random states")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--probes", type=int, default=config.probes, help="random bases per state")
    p.add_argument("--refine", action="store_true")
    p.set_defaults(handler=cmd_scan)

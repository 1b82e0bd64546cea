"""State analysis commands: decompose, classify, falsify."""

import argparse
import logging

from commands.files import emit, load_basis, load_state, manifest
from models import DecompositionOut, InvarianceReportOut, VerdictOut
from services.graph import classify
from services.invariance import CERTIFIED, FALSIFIED, falsify
from services.pauli import decompose
from services.qudit import OrthonormalBasis, joint_distribution
from settings import Settings

EXIT_CODES = {CERTIFIED: 0, FALSIFIED: 1}
EXIT_INCONCLUSIVE = 3


def cmd_decompose(args) -> int:
    rho, digests = load_state(args.input, args.state, args.seed, args.config.psd_tolerance)
    decomp = decompose(rho)
    violations = decomp.bound_violations()
    if violations:
        logging.warning(f"Decomposition outside physical bounds: {violations}")
    emit(DecompositionOut.build(decomp), args.out, manifest("decompose", args.argv, args.seed, digests))
    return 0


def cmd_classify(args) -> int:
    rho, digests = load_state(args.input, args.state, args.seed, args.config.psd_tolerance)
    basis = load_basis(args.basis, rho.local_dim, digests) or OrthonormalBasis.computational(rho.local_dim)
    verdict = classify(joint_distribution(rho, basis), args.tol)
    logging.info(f"Verdict: {verdict.status}, leakage {verdict.leakage:.3e}, signature {verdict.signature}")
    emit(VerdictOut.build(verdict), args.out, manifest("classify", args.argv, args.seed, digests))
    return 0


def cmd_falsify(args) -> int:
    rho, digests = load_state(args.input, args.state, args.seed, args.config.psd_tolerance)
    report = falsify(rho, seed=args.seed, budget=args.probes, tol=args.config.perfection_tolerance,
                     workers=args.workers, refine=args.refine)
    logging.info(f"Invariance verdict: {report.verdict} after {report.probes} probed bases")
    emit(InvarianceReportOut.build(report), args.out, manifest("falsify", args.argv, args.seed, digests))
    return EXIT_CODES.get(report.verdict, EXIT_INCONCLUSIVE)


def register(sub: argparse._SubParsersAction, with_state, common, config: Settings) -> None:
    p = sub.add_parser("decompose", parents=[with_state], help="Bloch vectors and correlation tensor of a 2x2 state")
    p.set_defaults(handler=cmd_decompose)

    p = sub.add_parser("classify", parents=[with_state], help="perfect-correlation verdict in one basis")
    p.add_argument("--basis", default="computational",
                   help="basis JSON path, 'computational' or 'fourier' (default: computational)")
    p.add_argument("--tol", type=float, default=config.perfection_tolerance,
                   help="leakage tolerance, 0 < tol < 1/d")
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("falsify", parents=[with_state],
                       help="certify the singlet or find a witness against invariant correlation")
    p.add_argument("--probes", type=int, default=config.max_witness_probes,
                   help="budget of probed bases")
    p.add_argument("--refine", action="store_true", help="locally maximize the leakage of the witness basis")
    p.set_defaults(handler=cmd_falsify)

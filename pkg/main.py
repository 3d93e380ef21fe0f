import argparse
import sys

from configs import settings
from src.core.orchestrator import ReconstructionOrchestrator
from src.core.run_config import RunConfig
from src.utils.log_utils import configure_logging


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Reconstruct a manifold from pairwise distances with a sliver-free weighted witness complex."
    )
    source = parser.add_argument_group("input")
    source.add_argument("--input", help="Distance matrix (csv or binary) or point cloud csv.")
    source.add_argument("--format", choices=("csv", "binary", "cloud"), default="csv", help="Format of --input.")
    source.add_argument("--synth", help="Synthetic sample, e.g. 'circle:n=400' or 'torus3:n=8000,R=2,r=0.7'.")
    source.add_argument("--strict", action="store_true", help="Reject matrices that violate the triangle inequality.")
    source.add_argument("--save-matrix", help="Also write the ingested matrix (.bin for binary, csv otherwise).")

    params = parser.add_argument_group("reconstruction")
    params.add_argument("--m", type=int, required=True, help="Intrinsic dimension of the manifold.")
    stop = params.add_mutually_exclusive_group(required=True)
    stop.add_argument("--landmarks", type=int, help="Number of farthest-point landmarks.")
    stop.add_argument("--lambda", dest="lambda_stop", type=float, help="Stop sampling at this covering radius.")
    params.add_argument("--gamma0", type=float, help="Sliver threshold Gamma0 (default 0.1/(m+1)).")
    params.add_argument("--delta0", type=float, help="Perturbation bound delta0 (default 0.1*alpha0).")
    params.add_argument("--alpha0", type=float, default=settings.DEFAULT_ALPHA0, help="Weight amplitude bound, < 1/2.")
    params.add_argument("--eta", type=float, default=settings.DEFAULT_ETA_STAR,
                        help="Practical forbidden-interval width, in units of lambda^2.")
    params.add_argument("--cap", type=int, help="Neighborhood size N1 (default 2(m+2)^2, or 66^m with --theoretical).")
    params.add_argument("--theoretical", action="store_true", help="Use the proof constants and check feasibility.")
    params.add_argument("--seed", type=int, default=0, help="Index of the first landmark.")
    params.add_argument("--reach", type=float, help="Known reach, for sampling diagnostics only.")

    output = parser.add_argument_group("output")
    output.add_argument("--out", help="Output directory (default: a new directory under results/).")
    output.add_argument("--off", help="Write the complex as an OFF file (dimension <= 2).")
    output.add_argument("--render", help="Render the complex to an image (png/svg).")
    output.add_argument("--oracle", action="store_true", help="Add brute-force Delaunay checks (clouds in d <= 3).")
    output.add_argument("--no-ledger", action="store_true", help="Do not record the run in the run ledger.")
    output.add_argument("--threads", type=int, default=settings.DEFAULT_THREADS)
    return parser


def config_from_args(args) -> RunConfig:
    return RunConfig(
        m=args.m,
        input_path=args.input,
        input_format=args.format,
        synth=args.synth,
        landmarks=args.landmarks,
        lambda_stop=args.lambda_stop,
        gamma0=args.gamma0,
        delta0=args.delta0,
        alpha0=args.alpha0,
        eta_star=args.eta,
        cap=args.cap,
        theoretical=args.theoretical,
        oracle=args.oracle,
        strict=args.strict,
        off_path=args.off,
        render_path=args.render,
        save_matrix=args.save_matrix,
        reach=args.reach,
        threads=args.threads,
        seed=args.seed,
        out_dir=args.out,
        ledger_path=None if args.no_ledger else settings.LEDGER_DB_PATH,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging()
    result = ReconstructionOrchestrator(config_from_args(args)).run()
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())

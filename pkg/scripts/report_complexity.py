import argparse
import os
import sys

# --- Setup Project Path ---
sys.path.append(os.path.join(os.path.dirname(__file__), ".."))

from configs import settings  # noqa: E402
from src.core.complexity import report_complexity  # noqa: E402
from src.core.orchestrator import ReconstructionOrchestrator  # noqa: E402
from src.core.run_config import RunConfig  # noqa: E402
from src.db.run_ledger import RunLedger  # noqa: E402
from src.utils.log_utils import configure_logging  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description="Run a witness-count ladder and print the scaling table.")
    parser.add_argument("--shape", default="circle", help="Synthetic shape for the ladder.")
    parser.add_argument("--sizes", type=int, nargs="+", default=[400, 1600], help="Witness counts to run.")
    parser.add_argument("--landmarks", type=int, default=20)
    parser.add_argument("--m", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--ledger", default=settings.LEDGER_DB_PATH)
    parser.add_argument("--label", default=None, help="Ledger label; defaults to '<shape>-ladder'.")
    args = parser.parse_args()
    configure_logging()

    label = args.label or f"{args.shape}-ladder"
    print(f"--- Complexity ladder: {args.shape}, #L={args.landmarks}, #W in {args.sizes} ---")
    for n in args.sizes:
        config = RunConfig(m=args.m, synth=f"{args.shape}:n={n},seed={args.seed}", landmarks=args.landmarks,
                           ledger_path=None)
        result = ReconstructionOrchestrator(config).run()
        if result.exit_code != 0:
            print(f"🔴 Run at #W={n} failed with exit {result.exit_code}; see {result.results_dir}")
            return result.exit_code
        record = {
            "run_id": result.report["run_id"],
            "label": label,
            "n_witnesses": n,
            "n_landmarks": result.report["net"]["n_landmarks"],
            "m": args.m,
            "status": "ok",
            "candidates": result.report["weights"]["candidates"],
            **{f"t_{stage}": t for stage, t in result.report["timings"].items()},
        }
        RunLedger(args.ledger).add_run(record)

    table = report_complexity(RunLedger(args.ledger).runs(label))
    print(table.to_markdown())
    return 0


if __name__ == "__main__":
    sys.exit(main())

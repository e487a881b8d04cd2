"""SER vs SNR for the LDLC network scheme and its coupled single-user baseline.

    python3 scripts/ldlc_ser_sweep.py --codewords 100 --out ldlc.csv
"""
import argparse
import json

from latnc.cli_harness import parse_config, run_experiment, write_results


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--snr-a", type=float, nargs="+", default=[19.0, 19.5, 20.0, 20.5, 21.0])
    ap.add_argument("--snr-b", type=float, nargs="+", default=[13.0, 13.5, 14.0, 14.5, 15.0])
    ap.add_argument("--codewords", type=int, default=100)
    ap.add_argument("--iterations", type=int, default=100)
    ap.add_argument("--patience", type=int, default=5, help="0 disables early stopping")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    cfg = parse_config(json.dumps({
        "scheme": "ldlc-rdwnc",
        "snr_sweep_db": {"A": args.snr_a, "B": args.snr_b},
        "trials": args.codewords,
        "min_errors": None,
        "bp_iterations": args.iterations,
        "bp_patience": args.patience or None,
        "seed": args.seed,
    }))
    write_results(run_experiment(cfg, threads=args.threads), args.out)


if __name__ == "__main__":
    main()

"""BER vs Eb/N0 for XOR network-coded BICM with RA codes, next to single-user BICM.

    python3 scripts/bicm_ber_sweep.py --constellation 16qam --packet-bits 10000 --out bicm.csv
"""
import argparse
import json

from latnc.cli_harness import parse_config, run_experiment, write_results


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--constellation", choices=["qpsk", "16qam"], default="qpsk")
    ap.add_argument("--ebn0", type=float, nargs="+", default=[0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0])
    ap.add_argument("--packet-bits", type=int, default=1000, help="source bits of the higher-rate user")
    ap.add_argument("--packets", type=int, default=500)
    ap.add_argument("--q-a", type=int, default=2)
    ap.add_argument("--q-b", type=int, default=4)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    per_trial = min(50, args.packets)
    cfg = parse_config(json.dumps({
        "scheme": "bicm-rdwnc",
        "constellation": args.constellation,
        "snr_sweep_db": args.ebn0,
        "q_A": args.q_a,
        "q_B": args.q_b,
        "packet_bits": args.packet_bits,
        "packets_per_trial": per_trial,
        "trials": -(-args.packets // per_trial),
        "min_errors": None,
        "seed": args.seed,
    }))
    write_results(run_experiment(cfg, threads=args.threads), args.out)


if __name__ == "__main__":
    main()

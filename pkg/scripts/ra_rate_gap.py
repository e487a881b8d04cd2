"""Eb/N0 gap between rate-1/2 and rate-1/4 RA codes on QPSK at a target BER."""
import argparse
import json
import math

import numpy as np

from latnc.cli_harness import parse_config, run_experiment


def crossing(snrs, bers, target):
    logs = np.log10(np.maximum(bers, 1e-12))
    lt = math.log10(target)
    for i in range(len(snrs) - 1):
        if logs[i] >= lt > logs[i + 1]:
            return snrs[i] + (logs[i] - lt) / (logs[i] - logs[i + 1]) * (snrs[i + 1] - snrs[i])
    return float("nan")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--packet-bits", type=int, default=1000)
    ap.add_argument("--packets", type=int, default=1000)
    ap.add_argument("--target", type=float, default=1e-3)
    ap.add_argument("--step", type=float, default=0.25)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    grid_a = list(np.round(np.arange(2.0, 4.5 + 1e-9, args.step), 3))
    grid_b = list(np.round(np.arange(0.0, 2.5 + 1e-9, args.step), 3))
    cfg = parse_config(json.dumps({
        "scheme": "bicm-p2p",
        "snr_sweep_db": {"A": grid_a, "B": grid_b},
        "packet_bits": args.packet_bits,
        "packets_per_trial": 100,
        "trials": max(1, args.packets // 100),
        "min_errors": None,
        "seed": args.seed,
    }))
    rows = run_experiment(cfg)
    cross = {}
    for user, grid in (("A", grid_a), ("B", grid_b)):
        bers = [r.error_rate for r in rows if r.user == user and r.scheme == "bicm-p2p"]
        for s, b in zip(grid, bers):
            print(f"{user} Eb/N0 {s:5.2f} dB  BER {b:.3e}")
        cross[user] = crossing(grid, np.array(bers), args.target)
    print(f"rate 1/2 at {cross['A']:.3f} dB, rate 1/4 at {cross['B']:.3f} dB, gap {cross['A'] - cross['B']:.3f} dB")


if __name__ == "__main__":
    main()

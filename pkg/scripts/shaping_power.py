"""Shaped vs unshaped transmit power for the degree-7 LDLC, and the 1-D extra gain table."""
import argparse
import math

import numpy as np

from latnc import nested_nc
from latnc.ldlc import build_mapping, build_parity, degree7_sequence, network_encode_shape, unshaped


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--pairs", type=int, default=200)
    ap.add_argument("--m-width", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    code = build_parity(degree7_sequence(), args.n, seed=args.seed)
    mp = build_mapping(4, 2, n=args.n)
    rng = np.random.default_rng(args.seed)
    shaped, plain = [], []
    for _ in range(args.pairs):
        b_a, b_b = rng.integers(-4, 4, args.n), rng.integers(-2, 2, args.n)
        shaped.append(network_encode_shape(code, mp, b_a, b_b, args.m_width).power)
        plain.append(unshaped(code, mp, mp.M_A * b_a + mp.M_B * b_b).power)
    print(f"shaped {np.mean(shaped):.3f}  unshaped {np.mean(plain):.3f}  "
          f"reduction {10 * math.log10(np.mean(plain) / np.mean(shaped)):.2f} dB")
    print("L   P_A      P_B      extra gain (dB)")
    for L in (2, 4, 8, 16, 32, 64):
        r = nested_nc.shaping_gain_1d(L)
        print(f"{L:<3d} {float(r.p_a):<8.2f} {float(r.p_b):<8.2f} {r.gain_db:.4f}")


if __name__ == "__main__":
    main()

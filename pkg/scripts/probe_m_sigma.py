"""Tabulate the numerical minimum of J at fixed charge against the plateau witness.

    python scripts/probe_m_sigma.py --sigma2 0.5 1 2 4 8.5 --width 64
"""

import argparse

from solcomp.field import LatticeParams, internal_energy, make_nonlinearity_cubic_like
from solcomp.variational import ground_state, hylomorphy_witness


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sigma2", type=float, nargs="+", default=[0.25, 0.5, 1.0, 2.0, 4.0, 8.5])
    ap.add_argument("--s0", type=float, default=0.25)
    ap.add_argument("--width", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    nl = make_nonlinearity_cubic_like(args.s0)
    params = LatticeParams(lo=0, hi=args.width - 1)
    print(f"{'sigma2':>8} {'m_sigma (upper)':>22} {'witness J':>22} {'omega':>14} {'peak':>8}")
    for s2 in args.sigma2:
        gs = ground_state(s2, nl, params=params, seed=args.seed)
        w = hylomorphy_witness(s2, nl, params)
        wj = "none" if w is None else f"{internal_energy(w, nl):.15g}"
        print(f"{s2:8.4g} {gs.J_value:22.15g} {wj:>22} {gs.lagrange_omega:14.6g} "
              f"{gs.u.values.max():8.4f}")


if __name__ == "__main__":
    main()

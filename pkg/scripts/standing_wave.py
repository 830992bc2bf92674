"""Evolve the numerical ground state and report how much its coded complexity moves.

The minimiser is a standing wave, so the shape (and therefore the coding and
the complexity) should stay fixed while the phase rotates at rate -omega.

    python scripts/standing_wave.py --sigma2 8.5 --t-end 2
"""

import argparse
import math

import numpy as np

from solcomp.coding import CodingParams, encode
from solcomp.complexity import lz78_complexity
from solcomp.evolution import IntegratorConfig, evolve
from solcomp.field import ComplexField, LatticeParams, make_nonlinearity_cubic_like, polar_decompose
from solcomp.variational import ground_state


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sigma2", type=float, default=8.5)
    ap.add_argument("--width", type=int, default=32)
    ap.add_argument("--t-end", type=float, default=1.0)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--N", type=int, default=64)
    args = ap.parse_args()

    nl = make_nonlinearity_cubic_like(0.25)
    params = LatticeParams(lo=0, hi=args.width - 1)
    gs = ground_state(args.sigma2, nl, params=params)
    psi0 = ComplexField(params, gs.u.values.astype(complex))
    cp = CodingParams(math.sqrt(args.sigma2), args.N)
    samples = evolve(psi0, nl, IntegratorConfig(args.dt, "strang_split", 100), args.t_end)

    print(f"ground state J = {gs.J_value!r}, omega = {gs.lagrange_omega:.6g}")
    print(f"{'t':>6} {'I_N':>4} {'max |u - u0|':>14} {'charge drift':>14}")
    for s in samples:
        u, _ = polar_decompose(s.psi)
        i_n = lz78_complexity(encode(u, cp).s_string)
        dev = float(np.max(np.abs(u.values - gs.u.values)))
        print(f"{s.t:6.2f} {i_n:4d} {dev:14.3e} {s.drift_charge:14.3e}")


if __name__ == "__main__":
    main()

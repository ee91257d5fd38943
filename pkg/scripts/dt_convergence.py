"""Time-step convergence of a relaxation curve.

Runs the same relaxation at dt and dt/2 and reports the largest pointwise
difference on the common grid. Use it to justify the step used for a sweep.

    python scripts/dt_convergence.py --g 0.6 --n-modes 20 --dt 0.1
"""
import argparse

import numpy as np

from oqrm.bath import BathParams
from oqrm.model import ModelParams
from oqrm.protocols import Numerics, RelaxationConfig, run_relaxation


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--g", type=float, default=0.6)
    p.add_argument("--n-modes", type=int, default=20)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--max-bond", type=int, default=32)
    p.add_argument("--engine", choices=("mps", "ed"), default="mps")
    args = p.parse_args()

    num = Numerics(max_bond=args.max_bond)
    runs = []
    for dt, stride in ((args.dt, 1), (args.dt / 2, 2)):
        cfg = RelaxationConfig(ModelParams(g=args.g, epsilon=0.01), BathParams(0.2, 10.0, args.n_modes),
                               t_max=args.t_max, dt=dt, sample_stride=stride, engine=args.engine, numerics=num)
        runs.append(run_relaxation(cfg))
    coarse, fine = runs
    n = min(coarse.times.size, fine.times.size)
    assert np.allclose(coarse.times[:n], fine.times[:n])
    diff = np.abs(coarse.values[:n] - fine.values[:n])
    print(f"dt={args.dt}: max |Sz(dt) - Sz(dt/2)| = {diff.max():.3e} at t={coarse.times[np.argmax(diff)]:.2f}")


if __name__ == "__main__":
    main()

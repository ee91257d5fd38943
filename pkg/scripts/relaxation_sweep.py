"""Relaxation of the spin polarization for a sweep of couplings.

Runs ``run_relaxation`` for each g, writes one CSV per g and prints the
number of sign changes and the stretched-exponential fit of each curve.

    python scripts/relaxation_sweep.py --g 0.4 0.6 0.75 --n-modes 60 --out runs/relax
"""
import argparse
import time
from pathlib import Path

import numpy as np

from oqrm import io
from oqrm.analysis import relaxation_time
from oqrm.bath import BathParams
from oqrm.errors import OqrmError
from oqrm.model import ModelParams
from oqrm.protocols import Numerics, RelaxationConfig, run_relaxation


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--g", type=float, nargs="+", default=[0.4, 0.6, 0.75])
    p.add_argument("--n-modes", type=int, default=60)
    p.add_argument("--t-max", type=float, default=20.0)
    p.add_argument("--dt", type=float, default=0.1)
    p.add_argument("--max-bond", type=int, default=64)
    p.add_argument("--engine", choices=("mps", "ed"), default="mps")
    p.add_argument("--out", default="runs/relax")
    args = p.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    num = Numerics(max_bond=args.max_bond)
    for g in args.g:
        cfg = RelaxationConfig(ModelParams(g=g, epsilon=0.01), BathParams(0.2, 10.0, args.n_modes),
                               t_max=args.t_max, dt=args.dt, engine=args.engine, numerics=num)
        t0 = time.time()
        series = run_relaxation(cfg)
        io.write_columns(out / f"relax_g{g:.4f}.csv", io.RELAX_COLUMNS, series.times, series.values)
        crossings = int(np.sum(np.diff(np.sign(series.values)) != 0))
        try:
            fit = relaxation_time(series)
            fit_txt = f"tau={fit.tau:.4g} beta={fit.beta:.3g} window={fit.fit_window}"
        except OqrmError as exc:
            fit_txt = f"fit failed: {exc}"
        print(f"g={g:.3f}  sign changes={crossings}  {fit_txt}  "
              f"max_bond={series.metadata.get('max_bond')}  {time.time() - t0:.0f}s", flush=True)


if __name__ == "__main__":
    main()

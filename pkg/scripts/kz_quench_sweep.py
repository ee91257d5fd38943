"""Kibble-Zurek pipeline at desk scale.

1. freeze-out times from BKT parameters for each t_Q,
2. linear quenches sampled at the freeze-out point,
3. power-law fits of E_exc and P_exc against t_f.

Thin wrapper over the ``oqrm quench`` and ``oqrm fit powerlaw`` commands.

    python scripts/kz_quench_sweep.py --config scripts/configs/quench_small.json --out runs/kz
"""
import argparse
from pathlib import Path

from oqrm import io
from oqrm.cli import main as oqrm_main


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", default=str(Path(__file__).parent / "configs" / "quench_small.json"))
    p.add_argument("--out", default="runs/kz")
    p.add_argument("--engine", choices=("mps", "ed"))
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()

    cmd = ["quench", "--config", args.config, "--out", args.out, "--workers", str(args.workers)]
    if args.engine:
        cmd += ["--engine", args.engine]
    code = oqrm_main(cmd)
    if code:
        raise SystemExit(code)
    summary = Path(args.out) / "summary.csv"
    for column in ("e_exc", "p_exc"):
        report = Path(args.out) / f"powerlaw_{column}.json"
        code = oqrm_main(["fit", "powerlaw", str(summary), "--column", column, "--out", str(report)])
        if code == 0:
            doc = io.read_json(report)
            print(f"{column}: mu = {doc['parameters']['mu']:.4f} +- {doc['mu_stderr']:.4f} "
                  f"over t_f in [{doc['window']['t_f_min']:.3g}, {doc['window']['t_f_max']:.3g}]")


if __name__ == "__main__":
    main()

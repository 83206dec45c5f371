"""Compare atomwise total variation with the brute-force partition supremum.

    python3 scripts/oracle_sweep.py --instances 500 --max-atoms 8
"""

import argparse
import time
from dataclasses import dataclass

import numpy as np

from transfunctions import BanachSpaceSpec, MeasurableSpace, VectorMeasure, total_variation
from transfunctions.partitions import MAX_ORACLE_ATOMS, variation_oracle_table


@dataclass
class SweepConfig:
    instances: int = 500
    max_atoms: int = 8
    seed: int = 0


def run(cfg: SweepConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    rows = []
    start = time.perf_counter()
    for k in range(cfg.instances):
        m = int(rng.integers(1, cfg.max_atoms + 1))
        d = 1 + k % 3
        norm = ("L1", "L2", "Linf")[(k // 3) % 3]
        values = rng.normal(size=(m, d)) * (rng.random((m, 1)) > 0.3)
        omega = VectorMeasure(MeasurableSpace.atomic(m), BanachSpaceSpec(d, norm), values)
        var = total_variation(omega)
        gap = max(abs(v - var.of(sorted(s))) for s, v in variation_oracle_table(omega).items())
        rows.append((m, norm, gap))
    elapsed = time.perf_counter() - start
    return {"rows": rows, "elapsed": elapsed, "max_gap": max(r[2] for r in rows)}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--instances", type=int, default=SweepConfig.instances)
    p.add_argument("--max-atoms", type=int, default=SweepConfig.max_atoms, choices=range(1, MAX_ORACLE_ATOMS + 1))
    p.add_argument("--seed", type=int, default=SweepConfig.seed)
    a = p.parse_args()
    out = run(SweepConfig(a.instances, a.max_atoms, a.seed))
    print(f"{'atoms':>5} {'norm':>5} {'count':>6} {'max gap':>10}")
    by = {}
    for m, norm, gap in out["rows"]:
        n, g = by.get((m, norm), (0, 0.0))
        by[(m, norm)] = (n + 1, max(g, gap))
    for (m, norm), (n, g) in sorted(by.items()):
        print(f"{m:>5} {norm:>5} {n:>6} {g:>10.1e}")
    print(f"overall max gap {out['max_gap']:.2e} in {out['elapsed']:.2f} s")


if __name__ == "__main__":
    main()

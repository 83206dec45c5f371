"""How tight is the remainder bound of the partition approximation?

Reports, per (n, N, eps), the mean and worst ratio of the achieved remainder
mass to eps and the number of partition classes.

    python3 scripts/lemma1_sweep.py --repeats 20
"""

import argparse
import itertools
from dataclasses import dataclass

import numpy as np

from transfunctions import MeasurableSpace, PositiveMeasure, lemma1_partition


@dataclass
class Lemma1Config:
    counts: tuple[int, ...] = (1, 2, 3, 5)
    cells: tuple[int, ...] = (16, 64, 256)
    eps: tuple[float, ...] = (0.1, 0.01, 0.001)
    repeats: int = 10
    seed: int = 0


def run(cfg: Lemma1Config) -> list[tuple]:
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for n, N, eps in itertools.product(cfg.counts, cfg.cells, cfg.eps):
        G = MeasurableSpace.grid(N)
        ratios, classes, recon = [], [], 0.0
        for _ in range(cfg.repeats):
            ms = [PositiveMeasure(G, rng.exponential(size=N) * (rng.random(N) < 0.8)) for _ in range(n)]
            approx = lemma1_partition(ms, eps)
            ratios.append(approx.remainder_total / eps)
            classes.append(len(approx.classes))
            recon = max(recon, approx.reconstruction_error())
        rows.append((n, N, eps, float(np.mean(ratios)), float(np.max(ratios)), float(np.mean(classes)), recon))
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeats", type=int, default=Lemma1Config.repeats)
    p.add_argument("--seed", type=int, default=Lemma1Config.seed)
    a = p.parse_args()
    rows = run(Lemma1Config(repeats=a.repeats, seed=a.seed))
    print(f"{'n':>2} {'N':>4} {'eps':>6} {'mean k/eps':>10} {'max k/eps':>10} {'classes':>8} {'recon err':>10}")
    for n, N, eps, mean, worst, k, rec in rows:
        print(f"{n:>2} {N:>4} {eps:>6g} {mean:>10.3f} {worst:>10.3f} {k:>8.1f} {rec:>10.1e}")


if __name__ == "__main__":
    main()

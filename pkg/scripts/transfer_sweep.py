"""Audit the signed extension of random transfunctions, clause by clause.

Writes one canonical JSON line per instance and prints a verdict table.

    python3 scripts/transfer_sweep.py --kernels 50 --trials 200 --out sweep.jsonl
"""

import argparse
import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from transfunctions import (
    ClampSpread,
    Kernel,
    MeasurableSpace,
    Pushforward,
    SamplerConfig,
    SquareMassSpread,
    Transfunction,
    UniformSpread,
    verify_extension_properties,
)
from transfunctions.extension import CLAUSES


@dataclass
class TransferConfig:
    kernels: int = 50
    trials: int = 200
    seed: int = 0
    out: Path | None = None


def instances(cfg: TransferConfig, rng):
    for k in range(cfg.kernels):
        m, j = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        raw = rng.random((m, j)) + 1e-3
        yield f"kernel-{k}", Transfunction(MeasurableSpace.atomic(m), MeasurableSpace.atomic(j), Kernel.of(raw / raw.sum(1, keepdims=True)))
    G = MeasurableSpace.grid(4)
    yield "pushforward-injective", Transfunction(G, G, Pushforward((3, 1, 0, 2)))
    yield "pushforward-collapsing", Transfunction(G, G, Pushforward((0, 0, 1, 1)))
    for rule in (UniformSpread(), SquareMassSpread(), ClampSpread()):
        yield rule.type, Transfunction(G, G, rule)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--kernels", type=int, default=TransferConfig.kernels)
    p.add_argument("--trials", type=int, default=TransferConfig.trials)
    p.add_argument("--seed", type=int, default=TransferConfig.seed)
    p.add_argument("--out", type=Path)
    a = p.parse_args()
    cfg = TransferConfig(a.kernels, a.trials, a.seed, a.out)
    rng = np.random.default_rng(cfg.seed)
    config = SamplerConfig(trials=cfg.trials, seed=cfg.seed)
    tally: dict[str, Counter] = {c: Counter() for c in CLAUSES}
    lines = []
    named = []
    for name, phi in instances(cfg, rng):
        report = verify_extension_properties(phi, config)
        verdicts = {c: r.verdict for c, r in report.clauses.items()}
        if name.startswith("kernel-"):
            for c, v in verdicts.items():
                tally[c][v] += 1
        else:
            named.append((name, verdicts))
        lines.append(json.dumps({"instance": name, "verdicts": verdicts, "findings": report.findings}, sort_keys=True))
    if cfg.out:
        cfg.out.write_text("\n".join(lines) + "\n")
    print(f"{cfg.kernels} row-stochastic kernels, {cfg.trials} trials per clause")
    for c, counts in tally.items():
        print(f"  {c:>13}: " + ", ".join(f"{v}={n}" for v, n in sorted(counts.items())))
    short = {"holds_on_sample": "ok", "violated": "FAIL", "not_tested": "-"}
    print(f"{'instance':>24} " + " ".join(f"{c[:4]:>5}" for c in CLAUSES))
    for name, verdicts in named:
        print(f"{name:>24} " + " ".join(f"{short[verdicts[c]]:>5}" for c in CLAUSES))


if __name__ == "__main__":
    main()

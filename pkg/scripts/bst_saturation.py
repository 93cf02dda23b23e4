"""Saturation level of random binary search trees over ln n, and P(constant).

The ratio approaches its limit very slowly, so the table is mostly useful for
seeing the trend.
"""

import argparse
import math
from dataclasses import dataclass, field

from andor.boolfn import BoolFn
from andor.limitdist import mc_dist
from andor.rng import StreamFactory
from andor.treegen import BSTModel, min_leaf_depth


@dataclass
class BSTConfig:
    sizes: list = field(default_factory=lambda: [10**2, 10**3, 10**4, 10**5])
    trees: int = 200
    k: int = 2
    trials: int = 20_000
    seed: int = 42


def run(cfg: BSTConfig) -> None:
    print("n        sat/ln n   P(constant)")
    for n in cfg.sizes:
        model = BSTModel(n)
        fac = StreamFactory((cfg.seed, "sat", n))
        depths = [min_leaf_depth(model, fac(i)) for i in range(cfg.trees)]
        ratio = sum(depths) / len(depths) / math.log(n)
        const = ""
        if n <= 10**4:
            est = mc_dist(model, cfg.k, cfg.trials, (cfg.seed, "const", n))
            const = f"{est.p(BoolFn.true(cfg.k)) + est.p(BoolFn.false(cfg.k)):.4f}"
        print(f"{n:<8d} {ratio:.4f}     {const}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trees", type=int, default=BSTConfig.trees)
    ap.add_argument("--trials", type=int, default=BSTConfig.trials)
    ap.add_argument("--seed", type=int, default=BSTConfig.seed)
    a = ap.parse_args()
    run(BSTConfig(trees=a.trees, trials=a.trials, seed=a.seed))


if __name__ == "__main__":
    main()

"""Log-log fits of P_k(f) on a spine for a few small functions.

    python3 scripts/scaling.py --trials 200000 --out results/scaling.json
"""

import argparse
import json
from dataclasses import asdict, dataclass, field

from andor.boolfn import decode
from andor.limitdist import scaling_exponent
from andor.treegen import make_spine


@dataclass
class ScalingConfig:
    model: str = "spine:catalan"
    targets: dict = field(default_factory=lambda: {
        "1:3": [2, 4, 8, 16],     # True
        "1:2": [2, 4, 8, 16],     # x1
        "2:8": [3, 4, 6, 8],      # x1 & x2
    })
    trials: int = 200_000
    seed: int = 42
    threads: int | None = None


def run(cfg: ScalingConfig) -> dict:
    model = make_spine(cfg.model)
    out = {"config": asdict(cfg), "fits": {}}
    for fn, ks in cfg.targets.items():
        rep = scaling_exponent(model, decode(fn), ks, cfg.trials, (cfg.seed, fn), cfg.threads)
        out["fits"][fn] = rep.to_json()
        print(f"{fn:>5}  slope={rep.slope:+.3f}  r2={rep.r2:.4f}  "
              + "  ".join(f"k={k}:{p:.3g}" for k, p, *_ in rep.rows))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", default=ScalingConfig.model)
    ap.add_argument("--trials", type=int, default=ScalingConfig.trials)
    ap.add_argument("--seed", type=int, default=ScalingConfig.seed)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out", default=None)
    a = ap.parse_args()
    res = run(ScalingConfig(model=a.model, trials=a.trials, seed=a.seed, threads=a.threads))
    if a.out:
        with open(a.out, "w") as fh:
            json.dump(res, fh, indent=2)


if __name__ == "__main__":
    main()

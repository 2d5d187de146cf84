"""Random sheaves on CM local posets: how often they are CM, by generic type.

Also reports whether the criterion route agreed with the duality route.

    python3 scripts/cm_sheaf_census.py --samples 300 --seed 1
"""
import argparse
import json
import random
from collections import Counter
from dataclasses import dataclass

from posetsheaves.cm import cm_sheaf_criterion, cm_sheaf_duality, generic_type, is_cm_space
from posetsheaves.families import local_posets_up_to, random_sheaf


@dataclass
class CensusConfig:
    samples: int = 300
    seed: int = 1
    max_size: int = 6
    json: bool = False


def census(cfg: CensusConfig) -> dict:
    spaces = [X for X in local_posets_up_to(cfg.max_size) if is_cm_space(X).is_cm]
    rng = random.Random(cfg.seed)
    seen, cm, disagree = Counter(), Counter(), 0
    for k in range(cfg.samples):
        X = spaces[k % len(spaces)]
        F = random_sheaf(X, rng, rng.choice(["free", "torsion", "any"]))
        kind, _ = generic_type(X, F)
        d = cm_sheaf_duality(X, F)
        c = cm_sheaf_criterion(X, F)
        seen[kind] += 1
        cm[kind] += d.is_cm
        if c is not None and c.is_cm != d.is_cm:
            disagree += 1
    return {"spaces": len(spaces), "by_type": {k: {"samples": seen[k], "cm": cm[k]} for k in sorted(seen)},
            "disagreements": disagree}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--samples", type=int, default=CensusConfig.samples)
    p.add_argument("--seed", type=int, default=CensusConfig.seed)
    p.add_argument("--max-size", type=int, default=CensusConfig.max_size)
    p.add_argument("--json", action="store_true")
    cfg = CensusConfig(**vars(p.parse_args()))
    out = census(cfg)
    if cfg.json:
        print(json.dumps(out, indent=2))
        return
    print(f"CM local posets used: {out['spaces']}")
    for k, v in out["by_type"].items():
        print(f"  {k:8} {v['cm']:4} CM of {v['samples']}")
    print(f"route disagreements: {out['disagreements']}")


if __name__ == "__main__":
    main()

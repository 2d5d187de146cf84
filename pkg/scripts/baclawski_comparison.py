"""Compare the dualizing-complex CM verdict with Baclawski CM and ACM.

Runs the named fixtures and then every poset up to a given size, and
tallies how the three verdicts combine.

    python3 scripts/baclawski_comparison.py --max-size 5
"""
import argparse
import json
from collections import Counter
from dataclasses import dataclass

from posetsheaves import poset as ps
from posetsheaves.cm import baclawski_report
from posetsheaves.families import all_posets_up_to
from posetsheaves.simplicial import RP2_6, from_facets, simplex_boundary


@dataclass
class ComparisonConfig:
    max_size: int = 5
    json: bool = False


def fixtures() -> dict[str, ps.FinPoset]:
    return {
        "boundary2 (projective)": from_facets(simplex_boundary(3), projective=True)[1],
        "rp2_6 (projective)": from_facets(RP2_6, projective=True)[1],
        "rp2_6 (with empty face)": from_facets(RP2_6)[1],
        "chain of 2": ps.chain_poset(2),
        "chain of 3": ps.chain_poset(3),
        "E11": ps.e11_poset(),
    }


def tally(max_size: int) -> Counter:
    c = Counter()
    for X in all_posets_up_to(max_size):
        r = baclawski_report(X)
        c[(r.ours, r.is_cm_baclawski, r.is_acm)] += 1
    return c


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--max-size", type=int, default=ComparisonConfig.max_size)
    p.add_argument("--json", action="store_true")
    cfg = ComparisonConfig(**vars(p.parse_args()))
    named = {k: baclawski_report(X) for k, X in fixtures().items()}
    counts = tally(cfg.max_size)
    if cfg.json:
        out = {"fixtures": {k: r.to_json() for k, r in named.items()},
               "tally": [{"ours": o, "baclawski": b, "acm": a, "count": n}
                         for (o, b, a), n in sorted(counts.items())]}
        print(json.dumps(out, indent=2, ensure_ascii=False))
        return
    for k, r in named.items():
        print(f"{k:26} ours={r.ours!s:5} baclawski={r.is_cm_baclawski!s:5} acm={r.is_acm!s:5} "
              f"a'={r.a!s:5} b'={r.b!s:5} c'={r.c!s:5} d'={r.d!s:5}")
    print(f"\nall posets with at most {cfg.max_size} elements:")
    print(f"{'ours':>6} {'baclawski':>10} {'acm':>6} {'count':>6}")
    for (o, b, a), n in sorted(counts.items()):
        print(f"{o!s:>6} {b!s:>10} {a!s:>6} {n:>6}")


if __name__ == "__main__":
    main()

"""Compare the deduction engine with naive saturation on random knowledge bases."""
import argparse
import pathlib
import random
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "tests"))

from strategies import random_instance  # noqa: E402

from privlens.deduction import deducer  # noqa: E402
from privlens.oracle import Saturation  # noqa: E402
from privlens.terms import format_term  # noqa: E402


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("-n", type=int, default=1000, help="number of knowledge bases")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--cap", type=int, default=3000, help="oracle universe bound")
    args = p.parse_args()
    t0 = time.perf_counter()
    done, seed, skipped, queries, bad = 0, args.seed, 0, 0, 0
    while done < args.n:
        inst = random_instance(random.Random(seed))
        try:
            sat = Saturation(inst.model, inst.kb.items, max_universe=args.cap)
        except OverflowError:
            skipped += 1
            seed += 1
            continue
        d = deducer(inst.kb)
        for q in sorted(sat.universe):
            queries += 1
            if d.derivable(q) != sat.derivable(q):
                bad += 1
                print(f"seed {seed}: engine {d.derivable(q)} oracle {sat.derivable(q)} for {format_term(q)}")
        done += 1
        seed += 1
    print(f"{done} knowledge bases ({skipped} redrawn), {queries} queries, {bad} disagreements, "
          f"{time.perf_counter() - t0:.0f}s")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())

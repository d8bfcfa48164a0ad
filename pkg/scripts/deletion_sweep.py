"""Remove each initial knowledge item in turn and report the first invalid step."""
import argparse
import dataclasses
import pathlib

from privlens.dsl import parse_scenario
from privlens.terms import format_term
from privlens.traces import evolve

ROOT = pathlib.Path(__file__).resolve().parent.parent


def sweep(path):
    b = parse_scenario(path)
    for actor, items in sorted(b.knowledge.items()):
        for x in sorted(items):
            knowledge = dict(b.knowledge)
            knowledge[actor] = items - {x}
            smaller = dataclasses.replace(b, knowledge=knowledge)
            _, steps = evolve(smaller.initial, smaller.trace)
            bad = [r.index for r in steps if not r.ok]
            yield actor, x, bad[0] if bad else None


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("scenario", help="scenario directory or file, e.g. corpus/smartcard")
    p.add_argument("--all", action="store_true", help="also list deletions that keep the trace valid")
    args = p.parse_args()
    for actor, x, step in sweep(args.scenario):
        if step is not None or args.all:
            print(f"{actor}\t{format_term(x)}\t{'-' if step is None else step}")

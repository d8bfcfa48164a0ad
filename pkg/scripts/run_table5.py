"""Print the verdict table for the four corpus systems and diff it against golden/."""
import argparse
import io
import pathlib
import sys
import time

from privlens.cli import main

ROOT = pathlib.Path(__file__).resolve().parent.parent
SYSTEMS = ("smart-certificates", "linking-service", "identity-mixer", "smartcard")


def run(fmt="table"):
    out = io.StringIO()
    main(["compare", "--format", fmt, *(str(ROOT / "corpus" / s) for s in SYSTEMS)], out)
    return out.getvalue()


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--update", action="store_true", help="rewrite the golden file")
    args = p.parse_args()
    t0 = time.perf_counter()
    text = run()
    sys.stdout.write(text)
    golden = ROOT / "golden" / "table5.txt"
    if args.update:
        golden.write_text(text, encoding="utf-8")
    same = golden.read_text(encoding="utf-8") == text
    print(f"\n{'matches' if same else 'DIFFERS FROM'} {golden.relative_to(ROOT)} ({time.perf_counter() - t0:.1f}s)")
    sys.exit(0 if same else 1)

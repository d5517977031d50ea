"""Regenerate the synthetic input set used by the CLI examples and tests."""
from __future__ import annotations

import argparse
from pathlib import Path

from cfia.synthetic import write_fixture_set


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "examples_data")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    for kind, path in write_fixture_set(args.out, args.seed).items():
        print(f"{kind:16s} {path}")


if __name__ == "__main__":
    main()

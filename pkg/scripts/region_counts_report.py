"""Print the region-combination count table: raw, unique under each rule, published."""
from __future__ import annotations

import argparse
import logging

from cfia.regions import DEDUP_RULES, INDEX_SIZES, compare_unique_counts, dedup, enumerate_all


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rule", choices=sorted(DEDUP_RULES), default="fixture")
    args = ap.parse_args()
    logging.basicConfig(level=logging.ERROR)

    report = compare_unique_counts(dedup(enumerate_all(), args.rule))
    print(f"{'index':>5} {'k,m':>5} {'raw':>5} {'unique':>7} {'published':>10}")
    for r in report["rows"]:
        k, m = INDEX_SIZES[r["index"]]
        flag = "" if r["match"] else "  *"
        print(f"{r['index']:>5} {f'{k},{m}':>5} {r['raw']:>5} {r['unique']:>7} {r['published_unique']:>10}{flag}")
    print(f"{'total':>5} {'':>5} {report['raw_total']:>5} {sum(r['unique'] for r in report['rows']):>7} "
          f"{report['published_unique_column_sum']:>10}")
    for f in report["findings"]:
        print(f"finding: {f}")


if __name__ == "__main__":
    main()

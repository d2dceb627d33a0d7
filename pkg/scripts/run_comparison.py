"""Algorithm comparison on random coverage instances (GT, RT, GM, GM2, GM3, LGmatching, Lmatching).

    python scripts/run_comparison.py --config configs/comparison.json --out results/comparison
"""

import argparse
import json
import logging
from pathlib import Path

from maxtour import ExperimentConfig, emit, run_comparison


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", type=Path, default=Path(__file__).parent.parent / "configs" / "comparison.json")
    ap.add_argument("--out", type=Path, default=Path("results/comparison"))
    ap.add_argument("--timings", action="store_true", help="also write wall times")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    cfg = ExperimentConfig.from_dict(json.loads(args.config.read_text()))
    results = run_comparison(cfg)
    formats = ("csv", "text", "timings") if args.timings else ("csv", "text")
    for path in emit(results, args.out, formats):
        logging.info("wrote %s", path)
    print(results.text)


if __name__ == "__main__":
    main()

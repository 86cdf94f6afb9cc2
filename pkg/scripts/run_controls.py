"""Decay scans for the positive control, the negative control and 1 + cos.

Writes <name>.csv and <name>.json per config into the output directory
(default results/) and prints the verdict with the headline numbers.

    python3 scripts/run_controls.py [--out results]
"""
import argparse
import json
from pathlib import Path

from mopuc.cli import ExperimentConfig, cmd_scan

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ("positive_control", "negative_control", "fejer")


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--out", default=str(ROOT / "results"))
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in CONFIGS:
        cfg = ExperimentConfig.load(ROOT / "configs" / f"{name}.json")
        cmd_scan(cfg, out / f"{name}.csv")
        rep = json.loads((out / f"{name}.json").read_text())
        h = [r["hn_norm"] for r in rep["rows"]]
        sup = [r["nevai_sup"] for r in rep["rows"]]
        print(
            f"{name:17s} verdict={rep['metadata']['verdict']:13s} "
            f"|H_1|={h[0]:.4f} |H_N|={h[-1]:.4f} min|H_n|(n>=N/2)={min(h[len(h) // 2:]):.4f} "
            f"nevai_sup: first={sup[0]:.4f} last={sup[-1]:.4f}"
        )


if __name__ == "__main__":
    main()

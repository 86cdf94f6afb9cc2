"""Pin regression values for the scalar fixtures from 8192-point runs.

Writes tests/data/pinned.json and prints the gap to the independent
oracles (exact fractions for 1 + cos, 60-digit Levinson for the arc).

    python3 scripts/pin_fixtures.py
"""
import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from oracles import arc_reflections, fejer_reflections  # noqa: E402

from mopuc import ArcIndicator, MatMeasure, TrigPoly, build_system  # noqa: E402

QUAD = 8192
N = 20


def main():
    fejer = MatMeasure(1, TrigPoly([[[1.0]], [[0.5]]]), quad_points=QUAD)
    arc = MatMeasure(1, ArcIndicator(0.0, np.pi), quad_points=QUAD)
    hf = [float(abs(h)) for h in build_system(fejer, N).H[:, 0, 0]]
    ha = [float(abs(h)) for h in build_system(arc, N).H[:, 0, 0]]
    of = [abs(x) for x in fejer_reflections(N)]
    oa = arc_reflections(N)
    print(f"1+cos: max |pinned - exact| = {max(abs(a - b) for a, b in zip(hf, of)):.3e}")
    print(f"arc:   max |pinned - 60-digit| = {max(abs(a - b) for a, b in zip(ha, oa)):.3e}")
    floor = min(ha[9:20])
    print(f"arc floor min_(10<=n<=20) |H_n| = {floor!r}")
    data = {
        "quad_points": QUAD,
        "fejer_abs_H": hf,
        "arc_abs_H": ha,
        "arc_abs_H_oracle": oa,
        "arc_floor_n10_20": floor,
    }
    out = ROOT / "tests" / "data" / "pinned.json"
    out.write_text(json.dumps(data, indent=2) + "\n")
    print(f"wrote {out.relative_to(ROOT)}")


if __name__ == "__main__":
    main()

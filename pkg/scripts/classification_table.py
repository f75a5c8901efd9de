"""Print the type, fiber shape and pencil discriminant of the sample systems."""

import argparse
import json

from eds.jetclassify import SolvedSystem, build_chart, classification_report

SYSTEMS = [
    ("Cartan", {"r": "t^3/3", "s": "t^2/2"}, "t"),
    ("z_xx = z_yy = 0", {"r": "0", "t": "0"}, "s"),
    ("z_xx = z_yy, z_xy = 0", {"r": "t", "s": "0"}, "t"),
    ("z_xx = -z_yy, z_xy = 0", {"r": "-t", "s": "0"}, "t"),
    ("z_xx = z_y, z_xy = 0", {"r": "q", "s": "0"}, "t"),
    ("z_xx = z_xy = 0", {"r": "0", "s": "0"}, "t"),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--value", default="1", help="value of the parameter coordinate at the sample point")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    rows = []
    for name, solved, m in SYSTEMS:
        R = build_chart(SolvedSystem.create(solved, m))
        pt = {"x": 0, "y": 0, "z": 0, "p": 0, "q": 0, m: args.value}
        rep = classification_report(R, pt)
        rows.append({"system": name, "type": rep["type"], "kernel_dim": rep["kernel_dim"],
                     "transversal_fiber": rep["transversal_fiber"], "delta": rep["delta"],
                     "cauchy_rank": rep["cauchy_rank"]})
    if args.json:
        print(json.dumps(rows, indent=2, sort_keys=True))
        return
    print(f"{'system':26} {'type':10} {'ker':>3}  {'R1 fiber':9} {'Ch':>2}  delta")
    for r in rows:
        print(f"{r['system']:26} {r['type']:10} {r['kernel_dim']:>3}  {r['transversal_fiber']:9} "
              f"{r['cauchy_rank']:>2}  {r['delta']}")


if __name__ == "__main__":
    main()

"""Singular solutions of the Cartan system from a list of free functions y0(t)."""

import argparse

from eds.cartan import compare_solutions, solve_i, verify_solution


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("y0", nargs="*", default=["0", "t^2", "t^3+2*t^2", "t^4", "t"])
    args = ap.parse_args()
    for text in args.y0:
        S = solve_i(text)
        rep = verify_solution(S)
        print(f"y0 = {text}")
        for name, comp in S.components().items():
            print(f"    {name} = {comp}")
        print(f"    integral: {rep['pullbacks_zero']}   nonimmersion locus: {rep['nonimmersion_locus']} = 0"
              f"   through origin: {rep['through_origin']}   matches sweep: {compare_solutions(text)}")
        for w in S.warnings:
            print(f"    warning: {w}")


if __name__ == "__main__":
    main()

"""Symbol algebra bracket tables of the rank 2 prolongation on both strata."""

import argparse

from eds.cartan import cartan_prolongation
from eds.prolong import NONTRANSVERSAL, TRANSVERSAL, good_points
from eds.symbolalg import chart_symbol, match_model


def show(label, chart, pt):
    g = chart_symbol(chart, pt)
    m = match_model(g)
    print(f"{label}: chart {chart.path} at {dict((k, str(v)) for k, v in pt.items())}")
    print(f"    dims {g.dims}   model {m.model}   k = {m.k}   generating {m.generating}")
    for a, b, res in g.table():
        rhs = " + ".join(f"{v}*X_{k}" for k, v in res.items())
        print(f"    [X_{a}, X_{b}] = {rhs}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    P = cartan_prolongation()
    T, N = P.chart(TRANSVERSAL), P.chart(NONTRANSVERSAL)
    for pt in good_points(T, args.samples, seed=args.seed):
        show("Σ0", T, pt)
    for pt in good_points(N, args.samples, seed=args.seed, fixed={"b": 0}):
        show("Σ1", N, pt)


if __name__ == "__main__":
    main()

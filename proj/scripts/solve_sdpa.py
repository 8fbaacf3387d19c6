#!/usr/bin/env python3
"""Solve an exported sparse-SDPA lower-bound program and emit a certificate.

The impurity-kit exporter writes the dual program

    minimize -y0   subject to   y0 * F1 + sum_a y_a * F_{1+a} - F0 >= 0

as a single-block sparse SDPA (.dat-s) file. This script parses that file,
solves the program with CVXPY, then shifts y0 down by N * slack where slack
is the residual infeasibility max(0, -lambda_min) of the solved multipliers.
Every basis operator C_p obeys C_p^dag C_p = I, so a ground-state moment
matrix has trace exactly N and the shifted y0 is a rigorous lower bound on
the ground energy even with an approximately feasible y. The output JSON
{y0, y} is accepted by `impurity-kit bound sdp verify`.

Usage:
    python3 scripts/solve_sdpa.py program.dat-s --out certificate.json
"""

import argparse
import json
import sys

import numpy as np


def parse_sdpa(path):
    """Return (nvars, dim, cost, mats) from a single-block sparse SDPA file."""
    nvars = None
    dim = None
    cost = None
    entries = []
    with open(path, "r", encoding="ascii") as handle:
        stage = 0
        for raw in handle:
            line = raw.strip()
            if not line or line[0] in "*\"":
                continue
            if stage == 0:
                nvars = int(line.split()[0])
                stage = 1
            elif stage == 1:
                nblocks = int(line.split()[0])
                if nblocks != 1:
                    raise ValueError(f"expected one block, found {nblocks}")
                stage = 2
            elif stage == 2:
                dim = abs(int(line.replace("(", " ").replace(")", " ")
                          .replace(",", " ").split()[0]))
                stage = 3
            elif stage == 3:
                cost = [float(tok) for tok in
                        line.replace(",", " ").split()]
                if len(cost) != nvars:
                    raise ValueError("cost vector length mismatch")
                stage = 4
            else:
                mat_no, blk, i, j, value = line.split()
                if int(blk) != 1:
                    raise ValueError("entry outside block 1")
                entries.append((int(mat_no), int(i), int(j), float(value)))
    if stage != 4:
        raise ValueError("truncated SDPA file")
    mats = [np.zeros((dim, dim)) for _ in range(nvars + 1)]
    for mat_no, i, j, value in entries:
        mats[mat_no][i - 1, j - 1] = value
        mats[mat_no][j - 1, i - 1] = value
    return nvars, dim, np.asarray(cost), mats


def lambda_min(nvars, mats, x):
    """Smallest eigenvalue of sum_i x_i F_i - F0."""
    acc = -mats[0].copy()
    for i in range(nvars):
        acc += x[i] * mats[i + 1]
    return float(np.linalg.eigvalsh(acc)[0])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("program", help="sparse SDPA file from `bound sdp build`")
    ap.add_argument("--out", required=True, help="certificate JSON output path")
    ap.add_argument("--solver", default="SCS", choices=["SCS", "CVXOPT"],
                    help="CVXPY backend (default SCS at eps 1e-9)")
    args = ap.parse_args()

    import cvxpy as cp

    nvars, dim, cost, mats = parse_sdpa(args.program)
    x = cp.Variable(nvars)
    constraint = sum(x[i] * mats[i + 1] for i in range(nvars)) - mats[0]
    problem = cp.Problem(cp.Minimize(cost @ x), [constraint >> 0])
    solver_opts = {"eps": 1e-9, "max_iters": 200000} if args.solver == "SCS" else {}
    problem.solve(solver=getattr(cp, args.solver), **solver_opts)
    if x.value is None:
        print(f"solver failed: status {problem.status}", file=sys.stderr)
        return 1

    solved_y0 = float(x.value[0])
    repaired = np.array(x.value, dtype=float)
    slack = max(0.0, -lambda_min(nvars, mats, repaired))
    # The complex program has dim/2 basis operators, each with C^dag C = I.
    repaired[0] -= slack * (dim // 2)
    margin = lambda_min(nvars, mats, repaired)
    print(f"status={problem.status} solver_y0={solved_y0:.12g} "
          f"certified_y0={repaired[0]:.12g} slack={slack:.3e} margin={margin:.3e}")

    cert = {"y0": repaired[0], "y": [float(v) for v in repaired[1:]]}
    with open(args.out, "w", encoding="ascii") as handle:
        json.dump(cert, handle, indent=2)
        handle.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())

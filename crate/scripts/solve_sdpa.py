#!/usr/bin/env python3
"""Solve an SDPA sparse (.dat-s) problem with cvxpy and print the optimum.

Reads: minimize c.x subject to sum_i x_i F_i - F_0 >= 0 (blockwise PSD,
negative block sizes are diagonal LP blocks). Prints a JSON object with the
primal optimum and the negated optimum, which is the game value for files
written by `qns export-sdpa`.

usage: solve_sdpa.py FILE [--solver NAME]
"""
import argparse
import json
import re
import sys

import cvxpy as cp
import numpy as np


def parse(text):
    lines = [l.strip() for l in text.splitlines()]
    lines = [l for l in lines if l and l[0] not in '*"']
    clean = [re.sub(r"[{}(),]", " ", l).split() for l in lines]
    m = int(clean[0][0])
    nb = int(clean[1][0])
    blocks = [int(t) for t in clean[2][:nb]]
    c = np.array([float(t) for t in clean[3]])
    entries = [(int(a), int(b), int(i), int(j), float(v)) for a, b, i, j, v in clean[4:]]
    return m, blocks, c, entries


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("file")
    ap.add_argument("--solver", default="CLARABEL")
    args = ap.parse_args()
    with open(args.file) as f:
        m, blocks, c, entries = parse(f.read())
    x = cp.Variable(m)
    mats = [[np.zeros((abs(s), abs(s))) for _ in range(m + 1)] for s in blocks]
    for mat, blk, i, j, v in entries:
        a = mats[blk - 1][mat]
        a[i - 1, j - 1] += v
        if i != j:
            a[j - 1, i - 1] += v
    cons = []
    for k, s in enumerate(blocks):
        expr = sum(x[i] * mats[k][i + 1] for i in range(m) if np.any(mats[k][i + 1])) - mats[k][0]
        if s > 0:
            cons.append((expr + expr.T) / 2 >> 0)
        else:
            cons.append(cp.diag(expr) >= 0)
    prob = cp.Problem(cp.Minimize(c @ x), cons)
    prob.solve(solver=args.solver)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        print(json.dumps({"status": prob.status}))
        sys.exit(1)
    print(json.dumps({"status": prob.status, "primal": prob.value, "value": -prob.value}))


if __name__ == "__main__":
    main()

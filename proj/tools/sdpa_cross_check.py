#!/usr/bin/env python3
"""Solve an SDPA sparse (.dat-s) file with cvxopt and print a JSON verdict.

The file encodes  max <F0, Y>  s.t.  <Fi, Y> = c_i,  Y >= 0 block-diagonal,
whose dual is the LMI form  min c'x  s.t.  sum_i x_i Fi - F0 >= 0  that cvxopt
solves directly. At optimality both share the objective value, so the printed
objective is directly comparable with the in-process solver's maximum.
"""

import json
import sys

from cvxopt import matrix, solvers


def parse_sdpa(path):
    entries = []
    header = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line[0] in "*\"":
                continue
            if len(header) < 3:
                header.append(line)
                continue
            if len(header) == 3:
                header.append(line)  # cost line
                continue
            parts = line.replace(",", " ").split()
            entries.append((int(parts[0]), int(parts[1]), int(parts[2]), int(parts[3]),
                            float(parts[4])))
    m = int(header[0].split()[0])
    nblocks = int(header[1].split()[0])
    sizes = [int(tok) for tok in header[2].replace(",", " ").replace("(", " ")
             .replace(")", " ").replace("{", " ").replace("}", " ").split()][:nblocks]
    cost = [float(tok) for tok in header[3].replace(",", " ").split()][:m]
    return m, sizes, cost, entries


def main():
    if len(sys.argv) != 2:
        print("usage: sdpa_cross_check.py problem.dat-s", file=sys.stderr)
        return 1
    m, sizes, cost, entries = parse_sdpa(sys.argv[1])

    # Split semidefinite and diagonal blocks.
    sdp_blocks = [(k, s) for k, s in enumerate(sizes) if s > 0]
    diag_blocks = [(k, -s) for k, s in enumerate(sizes) if s < 0]
    diag_offset = {}
    nl = 0
    for k, s in diag_blocks:
        diag_offset[k] = nl
        nl += s

    c = matrix(cost)
    Gl = matrix(0.0, (max(nl, 0), m)) if nl > 0 else None
    hl = matrix(0.0, (max(nl, 0), 1)) if nl > 0 else None
    Gs = [matrix(0.0, (s * s, m)) for _, s in sdp_blocks]
    hs = [matrix(0.0, (s, s)) for _, s in sdp_blocks]
    sdp_index = {k: i for i, (k, _) in enumerate(sdp_blocks)}

    for matno, blk, i, j, value in entries:
        k = blk - 1
        if k in sdp_index:
            bi = sdp_index[k]
            s = sdp_blocks[bi][1]
            r, col = i - 1, j - 1
            if matno == 0:
                hs[bi][r, col] = -value
                hs[bi][col, r] = -value
            else:
                Gs[bi][r * s + col, matno - 1] = -value
                Gs[bi][col * s + r, matno - 1] = -value
        else:
            if i != j:
                raise ValueError("off-diagonal entry in a diagonal block")
            row = diag_offset[k] + i - 1
            if matno == 0:
                hl[row] = -value
            else:
                Gl[row, matno - 1] = -value

    solvers.options["show_progress"] = False
    solvers.options["maxiters"] = 200
    if nl > 0:
        sol = solvers.sdp(c, Gl=Gl, hl=hl, Gs=Gs, hs=hs)
    else:
        sol = solvers.sdp(c, Gs=Gs, hs=hs)

    status = sol["status"]
    mapped = {
        "optimal": "optimal",
        "primal infeasible": "unbounded",   # LMI infeasible -> our max unbounded
        "dual infeasible": "infeasible",    # LMI unbounded  -> our problem infeasible
    }.get(status, "numerical_failure")
    objective = None
    if status == "optimal":
        objective = sol["primal objective"]
    print(json.dumps({"solver": "cvxopt", "sdpa_status": status, "status": mapped,
                      "objective": objective}))
    return 0


if __name__ == "__main__":
    sys.exit(main())

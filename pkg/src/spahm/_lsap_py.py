"""Pure-Python (numpy) shortest augmenting path solver.

Mirrors ``_lsap_ext.pyx`` operation for operation so that both backends
return bit-identical assignments, including the tie-breaking order.
"""
import numpy as np


def solve_transposed(cost):
    """Assign every row of ``cost`` (n_rows <= n_cols) to a distinct column.

    Returns ``col4row`` as an int64 array of length n_rows.
    """
    nr, nc = cost.shape
    u = np.zeros(nr)
    v = np.zeros(nc)
    path = np.full(nc, -1, dtype=np.int64)
    col4row = np.full(nr, -1, dtype=np.int64)
    row4col = np.full(nc, -1, dtype=np.int64)

    for cur_row in range(nr):
        spc = np.full(nc, np.inf)
        sr = np.zeros(nr, dtype=bool)
        sc = np.zeros(nc, dtype=bool)
        # columns are scanned in this order; the order fixes tie-breaking
        remaining = list(range(nc - 1, -1, -1))
        min_val = 0.0
        i = cur_row
        sink = -1
        while sink == -1:
            sr[i] = True
            rem = np.asarray(remaining, dtype=np.int64)
            r = min_val + cost[i, rem] - u[i] - v[rem]
            better = r < spc[rem]
            upd = rem[better]
            path[upd] = i
            spc[upd] = r[better]

            vals = spc[rem]
            lowest = vals.min()
            if not np.isfinite(lowest):
                raise ValueError("cost matrix admits no finite assignment")
            ties = np.flatnonzero(vals == lowest)
            free = ties[row4col[rem[ties]] == -1]
            index = int(free[-1]) if free.size else int(ties[0])
            min_val = lowest

            j = remaining[index]
            if row4col[j] == -1:
                sink = j
            else:
                i = int(row4col[j])
            sc[j] = True
            remaining[index] = remaining[-1]
            remaining.pop()

        u[cur_row] += min_val
        for k in np.flatnonzero(sr):
            if k != cur_row:
                u[k] += min_val - spc[col4row[k]]
        for k in np.flatnonzero(sc):
            v[k] -= min_val - spc[k]

        j = sink
        while True:
            i = int(path[j])
            row4col[j] = i
            col4row[i], j = j, int(col4row[i])
            if i == cur_row:
                break
    return col4row

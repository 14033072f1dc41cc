"""Hot numerical loops, compiled with numba when available.

Everything here is plain scalar-loop code so it runs identically (only
slower) if numba is missing: the decorator degrades to a no-op. Keep
these functions free of Python objects; inputs are contiguous numpy
arrays and scalars only.
"""

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


@njit(cache=True)
def sphere_min(yr, r, points, allowed):
    """Depth-first best-first search for argmin ||yr - R s||^2.

    yr: length-n reduced observation (Q^H y), r: n x n upper triangular
    with positive real diagonal, points: candidate scalar constellation,
    allowed: (n, n_points) uint8 mask restricting the alphabet per level
    (used for the per-bit constrained searches).

    Candidates at each level are expanded nearest-first, so the first
    leaf is the Babai point and pruning with the current best radius is
    exact: the returned minimum equals the exhaustive one. Returns
    (metric_in_reduced_domain, index_vector).
    """
    n = r.shape[0]
    npts = points.shape[0]
    order = np.empty((n, npts), np.int64)
    incs = np.empty((n, npts), np.float64)
    ncand = np.zeros(n, np.int64)
    ptr = np.zeros(n, np.int64)
    above = np.zeros(n, np.float64)  # accumulated distance of levels > k
    chosen = np.zeros(n, np.int64)
    best_idx = np.zeros(n, np.int64)
    best = np.inf

    k = n - 1
    need_enter = True
    while True:
        if need_enter:
            resid = yr[k]
            for j in range(k + 1, n):
                resid = resid - r[k, j] * points[chosen[j]]
            cnt = 0
            for p in range(npts):
                if allowed[k, p] != 0:
                    d = resid - r[k, k] * points[p]
                    incs[k, cnt] = d.real * d.real + d.imag * d.imag
                    order[k, cnt] = p
                    cnt += 1
            # insertion sort, nearest candidate first
            for a in range(1, cnt):
                key_inc = incs[k, a]
                key_ord = order[k, a]
                b = a - 1
                while b >= 0 and incs[k, b] > key_inc:
                    incs[k, b + 1] = incs[k, b]
                    order[k, b + 1] = order[k, b]
                    b -= 1
                incs[k, b + 1] = key_inc
                order[k, b + 1] = key_ord
            ncand[k] = cnt
            ptr[k] = 0
            need_enter = False
        if ptr[k] < ncand[k]:
            t = above[k] + incs[k, ptr[k]]
            if t < best:
                cand = order[k, ptr[k]]
                if k == 0:
                    best = t
                    chosen[0] = cand
                    for j in range(n):
                        best_idx[j] = chosen[j]
                    ptr[k] += 1
                else:
                    chosen[k] = cand
                    ptr[k] += 1
                    k -= 1
                    above[k] = t
                    need_enter = True
            else:
                # candidates are sorted: every remaining sibling is at
                # least as far, cut the whole list
                ncand[k] = ptr[k]
        else:
            if k == n - 1:
                break
            k += 1
    return best, best_idx


@njit(cache=True)
def viterbi_acs(l0, l1, sgn0, sgn1):
    """Add-compare-select over the 64-state rate-1/2 trellis.

    l0/l1 are the per-step metrics of the two coded bits (positive means
    bit 0); sgn0/sgn1 map a 7-bit register value to +-1 according to the
    encoder output for that transition. Starts in state 0, accumulates
    correlation metrics, and tracebacks from state 0 (zero-tail
    termination). Returns the decided input bits for every trellis step.
    """
    steps = l0.shape[0]
    metric = np.full(64, -np.inf)
    metric[0] = 0.0
    new = np.empty(64, np.float64)
    decisions = np.zeros((steps, 64), np.uint8)
    for t in range(steps):
        a = l0[t]
        b = l1[t]
        for sp in range(64):
            r0 = 2 * sp
            r1 = 2 * sp + 1
            m0 = metric[r0 & 63] + sgn0[r0] * a + sgn1[r0] * b
            m1 = metric[r1 & 63] + sgn0[r1] * a + sgn1[r1] * b
            if m1 > m0:
                new[sp] = m1
                decisions[t, sp] = 1
            else:
                new[sp] = m0
                decisions[t, sp] = 0
        for sp in range(64):
            metric[sp] = new[sp]

    bits = np.empty(steps, np.uint8)
    s = 0
    for t in range(steps - 1, -1, -1):
        reg = 2 * s + decisions[t, s]
        bits[t] = reg >> 6
        s = reg & 63
    return bits

"""Compiled inner loops for the swap search."""

import numpy as np
from numba import njit


@njit(cache=True)
def swapped_autocorr_into(x, ax, i, j, out):
    """Write the autocorrelation of ``x`` with ``i``/``j`` swapped into ``out``.

    Only lag products with one end at ``i`` or ``j`` change. The product
    ``x_i * x_j`` itself (lag ``|i - j|``) is symmetric under the swap and
    drops out, so no other correction is needed.
    """
    n = x.size
    m = ax.size
    if i > j:
        i, j = j, i
    d = x[j] - x[i]
    out[0] = ax[0]
    inv_n = 1.0 / n
    for k in range(1, m):
        s = 0.0
        a = i - k
        if a >= 0:
            s += x[a]
        b = i + k
        if b < n and b != j:
            s += x[b]
        a = j - k
        if a >= 0 and a != i:
            s -= x[a]
        b = j + k
        if b < n:
            s -= x[b]
        out[k] = ax[k] + d * s * inv_n


@njit(cache=True)
def weighted_sq_error(target, est, w):
    total = 0.0
    for k in range(target.size):
        r = target[k] - est[k]
        total += w[k] * r * r
    return total


@njit(cache=True)
def interchange_batch(x, ax, target, w, ii, jj, d, trace_d):
    """Run proposals ``(ii[p], jj[p])`` in order, greedily keeping improvements.

    ``x`` and ``ax`` are updated in place. When ``trace_d`` is non-empty the
    current metric after each proposal is stored in it. Returns the final
    metric and the number of accepted swaps.
    """
    m = ax.size
    buf = np.empty(m)
    accepted = 0
    record = trace_d.size > 0
    for p in range(ii.size):
        i = ii[p]
        j = jj[p]
        if x[i] != x[j]:
            swapped_autocorr_into(x, ax, i, j, buf)
            dn = weighted_sq_error(target, buf, w)
            if dn < d:
                tmp = x[i]
                x[i] = x[j]
                x[j] = tmp
                for k in range(m):
                    ax[k] = buf[k]
                d = dn
                accepted += 1
        if record:
            trace_d[p] = d
    return d, accepted

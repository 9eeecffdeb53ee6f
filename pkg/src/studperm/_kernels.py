"""Compiled inner loops for the long-run variance sums.

All sums run sequentially left to right. Row kernels take a single series;
``*_rows`` variants loop over the rows of a 2-D array (one series per row).
"""
import numpy as np
from numba import njit

RHO = 0
RHO_STUDENTIZED = 1
COV_STUDENTIZED = 2


@njit(cache=True)
def components(x, k, b):
    """Return ``(var, c, K2, T2, nu)`` for the series ``x`` at lag ``k``, truncation ``b``."""
    n = x.shape[0]
    nk = n - k
    mu = 0.0
    for i in range(n):
        mu += x[i]
    mu /= n
    d = np.empty(n)
    z = np.empty(n)
    var = 0.0
    for i in range(n):
        d[i] = x[i] - mu
        z[i] = d[i] * d[i]
        var += z[i]
    var /= n
    y = np.empty(nk)
    c = 0.0
    for i in range(nk):
        y[i] = d[i] * d[i + k]
        c += y[i]
    c /= nk
    for i in range(nk):
        y[i] -= c
    for i in range(n):
        z[i] -= var

    K2 = 0.0
    for i in range(n):
        K2 += z[i] * z[i]
    T2 = 0.0
    nu = 0.0
    for i in range(nk):
        T2 += y[i] * y[i]
        nu += y[i] * z[i]
    for j in range(1, b + 1):
        s = 0.0
        for i in range(n - j):
            s += z[i] * z[i + j]
        K2 += 2.0 * s
        s_yy = 0.0
        s_zy = 0.0
        for i in range(nk - j):
            s_yy += y[i] * y[i + j]
            s_zy += z[i] * y[i + j]
        T2 += 2.0 * s_yy
        nu += s_zy
        m = min(n - j, nk)
        s = 0.0
        for i in range(m):
            s += y[i] * z[i + j]
        nu += s
    return var, c, K2 / n, T2 / n, nu / n


@njit(cache=True)
def statistic(x, k, b, eps, kind):
    n = x.shape[0]
    if kind == RHO:
        nk = n - k
        mu = 0.0
        for i in range(n):
            mu += x[i]
        mu /= n
        var = 0.0
        for i in range(n):
            var += (x[i] - mu) * (x[i] - mu)
        var /= n
        c = 0.0
        for i in range(nk):
            c += (x[i] - mu) * (x[i + k] - mu)
        c /= nk
        if var == 0.0:
            return np.nan
        return np.sqrt(n) * c / var
    var, c, K2, T2, nu = components(x, k, b)
    if var == 0.0:
        return np.nan
    if kind == COV_STUDENTIZED:
        return np.sqrt(n) * c / np.sqrt(max(eps, T2))
    rho = c / var
    g2 = (T2 - 2.0 * rho * nu + rho * rho * K2) / (var * var)
    return np.sqrt(n) * rho / np.sqrt(max(eps, g2))


@njit(cache=True)
def statistic_rows(X, k, b, eps, kind):
    out = np.empty(X.shape[0])
    for r in range(X.shape[0]):
        out[r] = statistic(X[r], k, b, eps, kind)
    return out


@njit(cache=True)
def statistic_permuted(x, perms, k, b, eps, kind):
    """Statistic on ``x[perms[r]]`` for every row ``r`` of the index matrix."""
    n = x.shape[0]
    out = np.empty(perms.shape[0])
    buf = np.empty(n)
    for r in range(perms.shape[0]):
        for i in range(n):
            buf[i] = x[perms[r, i]]
        out[r] = statistic(buf, k, b, eps, kind)
    return out

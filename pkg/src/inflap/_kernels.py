"""Compiled inner loops. All arrays are 2-D; 1-D lattices use a trailing axis of length 1."""

import numpy as np
from numba import njit


@njit(cache=True)
def gauss_seidel_sweep(u, inner, offsets):
    n0, n1 = u.shape
    k = offsets.shape[0]
    change = 0.0
    for i in range(n0):
        for j in range(n1):
            if not inner[i, j]:
                continue
            mx = -np.inf
            mn = np.inf
            for q in range(k):
                val = u[i + offsets[q, 0], j + offsets[q, 1]]
                if val > mx:
                    mx = val
                if val < mn:
                    mn = val
            new = 0.5 * (mx + mn)
            c = abs(new - u[i, j])
            if c > change:
                change = c
            u[i, j] = new
    return change


@njit(cache=True)
def cone_battery(u_shell, d_shell, u_int, d_int, slopes):
    """Worst excess of interior values over boundary-fitted cones.

    For every vertex row ``v`` and slope ``b`` the cone offset is fitted as
    ``a = max_s u_shell[s] - b * d_shell[v, s]``; the excess at interior
    node ``i`` is ``u_int[i] - a - b * d_int[v, i]``.
    Returns ``(worst, v, k, i)``.
    """
    nv = d_shell.shape[0]
    ns = d_shell.shape[1]
    ni = d_int.shape[1]
    worst = -np.inf
    wv = -1
    wk = -1
    wi = -1
    for v in range(nv):
        for k in range(slopes.shape[0]):
            b = slopes[k]
            a = -np.inf
            for s in range(ns):
                t = u_shell[s] - b * d_shell[v, s]
                if t > a:
                    a = t
            for i in range(ni):
                ex = u_int[i] - a - b * d_int[v, i]
                if ex > worst:
                    worst = ex
                    wv = v
                    wk = k
                    wi = i
    return worst, wv, wk, wi

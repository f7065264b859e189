"""Brute-force steering oracle, deliberately independent of cvsteer.

Uses mpmath at high precision: the steering block is inverted by plain
LU inversion and the symplectic spectrum comes from a generic
(non-symmetric) eigensolver. Nothing here imports the package.
"""

import mpmath as mp
import numpy as np


def _sub(sigma, rows, cols):
    return mp.matrix([[mp.mpf(float(sigma[i, j])) for j in cols] for i in rows])


def _quads(modes):
    out = []
    for m in modes:
        out += [2 * m, 2 * m + 1]
    return out


def oracle_symplectic_eigenvalues(matrix, dps=40):
    with mp.workdps(dps):
        n = matrix.rows // 2
        omega = mp.zeros(2 * n, 2 * n)
        for k in range(n):
            omega[2 * k, 2 * k + 1] = 1
            omega[2 * k + 1, 2 * k] = -1
        evals = mp.eig(omega * matrix, left=False, right=False)
        mods = sorted(abs(e) for e in evals)
        return [(mods[2 * k] + mods[2 * k + 1]) / 2 for k in range(n)]


def oracle_steering(sigma, steering, steered, dps=40):
    """G = -sum ln(nu) over nu < 1 of the Schur complement of the steering block."""
    sigma = np.asarray(sigma, dtype=float)
    ia, ib = _quads(steering), _quads(steered)
    with mp.workdps(dps):
        A = _sub(sigma, ia, ia)
        B = _sub(sigma, ib, ib)
        C = _sub(sigma, ia, ib)
        schur = B - C.T * mp.inverse(A) * C
        nus = oracle_symplectic_eigenvalues(schur, dps)
        total = mp.mpf(0)
        for nu in nus:
            if nu < 1 - mp.mpf("1e-10"):
                total -= mp.log(nu)
        return float(total)

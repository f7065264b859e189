"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time. Set ``CVSTEER_DISABLE_NUMBA=1``
to force the numpy implementations (also used automatically when numba is
not importable). Both paths consume the random stream identically, so they
agree up to floating-point summation order.
"""

import os

import numpy as np

_DISABLE = os.environ.get("CVSTEER_DISABLE_NUMBA", "").strip().lower() in {
    "1", "true", "yes", "on",
}

try:
    if _DISABLE:
        raise ImportError("numba disabled by CVSTEER_DISABLE_NUMBA")
    import numba
except ImportError:
    numba = None


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------

def sampled_second_moment_numpy(rng, factor, weights, n_samples):
    """Mean of (w . xi)^2 over ``n_samples`` draws of xi = factor @ z."""
    coeffs = factor.T @ weights
    z = rng.standard_normal((n_samples, factor.shape[1]))
    y = z @ coeffs
    return float(y @ y) / n_samples


def quadratic_forms_numpy(matrix, weights):
    """Row-wise w^T M w for a stack of weight vectors."""
    return np.einsum("ij,jk,ik->i", weights, matrix, weights)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def _sampled_second_moment_nb(rng, factor, weights, n_samples):
        d = factor.shape[1]
        coeffs = factor.T @ weights
        acc = 0.0
        # draws are consumed row-major, matching rng.standard_normal((n, d))
        for _ in range(n_samples):
            s = 0.0
            for k in range(d):
                s += rng.standard_normal() * coeffs[k]
            acc += s * s
        return acc / n_samples

    @numba.njit(cache=True, nogil=True)
    def _quadratic_forms_nb(matrix, weights):
        m, d = weights.shape
        out = np.empty(m)
        for i in range(m):
            acc = 0.0
            for j in range(d):
                wj = weights[i, j]
                if wj == 0.0:
                    continue
                for k in range(d):
                    acc += wj * matrix[j, k] * weights[i, k]
            out[i] = acc
        return out

    def sampled_second_moment_numba(rng, factor, weights, n_samples):
        return float(_sampled_second_moment_nb(
            rng,
            np.ascontiguousarray(factor, dtype=np.float64),
            np.ascontiguousarray(weights, dtype=np.float64),
            int(n_samples),
        ))

    def quadratic_forms_numba(matrix, weights):
        return _quadratic_forms_nb(
            np.ascontiguousarray(matrix, dtype=np.float64),
            np.ascontiguousarray(weights, dtype=np.float64),
        )

    BACKEND = "numba"
    sampled_second_moment = sampled_second_moment_numba
    quadratic_forms = quadratic_forms_numba
else:
    BACKEND = "numpy"
    sampled_second_moment = sampled_second_moment_numpy
    quadratic_forms = quadratic_forms_numpy

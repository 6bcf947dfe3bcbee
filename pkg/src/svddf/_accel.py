"""Hot numeric kernels, JIT-compiled with numba when available.

Every kernel exists in two functionally identical flavours: a numba
``@njit`` version and a pure-numpy fallback.  Setting the environment
variable ``SVDDF_PURE_NUMPY=1`` (before import) forces the numpy path;
otherwise numba is used when it can be imported.  ``USING_NUMBA`` reports
which path is active.  Accumulation order is kept identical between the
two flavours so results agree to the last few ulps.
"""

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("SVDDF_PURE_NUMPY", "").strip() not in ("", "0", "false", "False")

try:
    if _FORCE_NUMPY:
        raise ImportError("numpy path forced via SVDDF_PURE_NUMPY")
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):  # no-op decorator stand-in
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


# ---------------------------------------------------------------------------
# CSR matrix-vector product
# ---------------------------------------------------------------------------

def _csr_matvec_numpy(indptr, indices, data, x):
    # reduceat sums each row segment left-to-right, matching the jit loop
    return np.add.reduceat(data * x[indices], indptr[:-1])


@njit(cache=True)
def _csr_matvec_numba(indptr, indices, data, x):
    n = indptr.shape[0] - 1
    y = np.empty(n, dtype=np.float64)
    for q in range(n):
        acc = 0.0
        for t in range(indptr[q], indptr[q + 1]):
            acc += data[t] * x[indices[t]]
        y[q] = acc
    return y


# ---------------------------------------------------------------------------
# Separable correlation (1-D tap vectors applied along each axis)
# ---------------------------------------------------------------------------

def _pad_symmetric(img, r0, r1):
    return np.pad(img, ((r0, r0), (r1, r1)), mode="symmetric")


def _sep_correlate_same_numpy(img, k0, k1):
    r0 = (k0.shape[0] - 1) // 2
    r1 = (k1.shape[0] - 1) // 2
    m, n = img.shape
    pad = _pad_symmetric(img, r0, r1)
    tmp = np.zeros((m, n + 2 * r1))
    for t in range(k0.shape[0]):
        tmp += k0[t] * pad[t : t + m, :]
    out = np.zeros((m, n))
    for t in range(k1.shape[0]):
        out += k1[t] * tmp[:, t : t + n]
    return out


@njit(cache=True)
def _sep_correlate_same_core(pad, k0, k1, m, n, r1):
    tmp = np.zeros((m, n + 2 * r1))
    for t in range(k0.shape[0]):
        for i in range(m):
            for j in range(n + 2 * r1):
                tmp[i, j] += k0[t] * pad[t + i, j]
    out = np.zeros((m, n))
    for t in range(k1.shape[0]):
        for i in range(m):
            for j in range(n):
                out[i, j] += k1[t] * tmp[i, t + j]
    return out


def _sep_correlate_same_numba(img, k0, k1):
    r0 = (k0.shape[0] - 1) // 2
    r1 = (k1.shape[0] - 1) // 2
    m, n = img.shape
    pad = _pad_symmetric(img, r0, r1)
    return _sep_correlate_same_core(np.ascontiguousarray(pad), k0, k1, m, n, r1)


def _sep_correlate_valid_numpy(img, k0, k1):
    m = img.shape[0] - k0.shape[0] + 1
    n = img.shape[1] - k1.shape[0] + 1
    tmp = np.zeros((m, img.shape[1]))
    for t in range(k0.shape[0]):
        tmp += k0[t] * img[t : t + m, :]
    out = np.zeros((m, n))
    for t in range(k1.shape[0]):
        out += k1[t] * tmp[:, t : t + n]
    return out


@njit(cache=True)
def _sep_correlate_valid_numba(img, k0, k1):
    m = img.shape[0] - k0.shape[0] + 1
    n = img.shape[1] - k1.shape[0] + 1
    tmp = np.zeros((m, img.shape[1]))
    for t in range(k0.shape[0]):
        for i in range(m):
            for j in range(img.shape[1]):
                tmp[i, j] += k0[t] * img[t + i, j]
    out = np.zeros((m, n))
    for t in range(k1.shape[0]):
        for i in range(m):
            for j in range(n):
                out[i, j] += k1[t] * tmp[i, t + j]
    return out


IMPLEMENTATIONS = {
    "numpy": {
        "csr_matvec": _csr_matvec_numpy,
        "sep_correlate_same": _sep_correlate_same_numpy,
        "sep_correlate_valid": _sep_correlate_valid_numpy,
    },
}
if NUMBA_AVAILABLE:
    IMPLEMENTATIONS["numba"] = {
        "csr_matvec": _csr_matvec_numba,
        "sep_correlate_same": _sep_correlate_same_numba,
        "sep_correlate_valid": _sep_correlate_valid_numba,
    }

USING_NUMBA = NUMBA_AVAILABLE
_active = IMPLEMENTATIONS["numba" if USING_NUMBA else "numpy"]

csr_matvec = _active["csr_matvec"]
sep_correlate_same = _active["sep_correlate_same"]
sep_correlate_valid = _active["sep_correlate_valid"]

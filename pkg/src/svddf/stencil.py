"""Five-point conservative stencil matrix and its spectral bound.

The divergence-form operator div(a grad u) with zero-flux boundaries is
discretised on the column-stacked grid as a symmetric MN x MN matrix with
non-negative off-diagonal couplings a/h^2 and row sums that vanish by
construction (couplings across the boundary are dropped from both the
off-diagonal and the diagonal).  All eigenvalues are therefore real and
non-positive.
"""

import io
from dataclasses import dataclass

import numpy as np

from ._accel import csr_matvec
from .diffusivity import DiffusivityField
from .errors import DimensionError, ParameterError

_PI_SEED = 20240915


@dataclass(frozen=True)
class SparseOperator:
    """Symmetric stencil matrix in CSR form with sorted column indices."""

    dim: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    diagonal: np.ndarray
    symmetric: bool = True

    def nnz(self) -> int:
        return int(self.data.shape[0])


@dataclass(frozen=True)
class SpectralBound:
    """Upper estimate of the largest eigenvalue of -F."""

    lambda_max: float
    method: str  # "power-iteration" | "gershgorin"
    iterations: int
    residual: float


def assemble(field: DiffusivityField, spacing: float) -> SparseOperator:
    """Build F from midpoint coefficients; diagonal = -(sum of kept couplings)."""
    if not (spacing > 0):
        raise ParameterError(f"spacing must be positive, got {spacing}")
    m, n = field.rows, field.cols
    inv_h2 = 1.0 / spacing**2
    cw = field.west * inv_h2
    ce = field.east * inv_h2
    cn = field.north * inv_h2
    cs = field.south * inv_h2

    ii, jj = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    q = (jj * m + ii).ravel(order="F")

    rows_l, cols_l, vals_l = [], [], []
    diag = np.zeros((m, n))
    for coup, di, dj in ((cw, -1, 0), (ce, 1, 0), (cn, 0, -1), (cs, 0, 1)):
        keep = (
            (ii + di >= 0) & (ii + di < m) & (jj + dj >= 0) & (jj + dj < n)
        )
        diag -= np.where(keep, coup, 0.0)
        kq = q[keep.ravel(order="F")]
        rows_l.append(kq)
        cols_l.append(kq + dj * m + di)
        vals_l.append(coup.ravel(order="F")[keep.ravel(order="F")])
    rows_l.append(q)
    cols_l.append(q)
    vals_l.append(diag.ravel(order="F"))

    rows_a = np.concatenate(rows_l)
    cols_a = np.concatenate(cols_l)
    vals_a = np.concatenate(vals_l)
    order = np.lexsort((cols_a, rows_a))
    rows_a, cols_a, vals_a = rows_a[order], cols_a[order], vals_a[order]

    dim = m * n
    indptr = np.zeros(dim + 1, dtype=np.int64)
    np.add.at(indptr, rows_a + 1, 1)
    np.cumsum(indptr, out=indptr)
    return SparseOperator(
        dim=dim,
        indptr=indptr,
        indices=cols_a.astype(np.int64),
        data=vals_a,
        diagonal=diag.ravel(order="F"),
    )


def apply(op: SparseOperator, x: np.ndarray) -> np.ndarray:
    """Exact sparse matrix-vector product F @ x."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (op.dim,):
        raise DimensionError(f"vector of shape {x.shape} does not match operator dim {op.dim}")
    return csr_matvec(op.indptr, op.indices, op.data, x)


def gershgorin_bound(op: SparseOperator) -> float:
    """Always-valid bound on lambda_max(-F): zero row sums give 2*max|diag|."""
    return float(2.0 * np.max(np.abs(op.diagonal)))


def lambda_max(
    op: SparseOperator,
    tol: float = 1e-6,
    max_iter: int = 200,
    start: np.ndarray | None = None,
    return_vector: bool = False,
):
    """Largest eigenvalue of -F via power iteration with a Gershgorin fallback.

    -F is positive semidefinite, so plain power iteration from a fixed
    seeded start converges to the top of the spectrum; the run stops when
    the Rayleigh quotient settles to relative tolerance ``tol``.  If it
    fails to settle within ``max_iter`` iterations the (larger, always
    safe) Gershgorin estimate is returned instead.  With ``return_vector``
    the final iterate comes back too, useful as a warm start on a nearby
    operator.
    """
    if start is None:
        x = np.random.default_rng(_PI_SEED).standard_normal(op.dim)
    else:
        x = np.asarray(start, dtype=np.float64).copy()
    norm = np.linalg.norm(x)
    if norm == 0.0:
        x = np.ones(op.dim)
        norm = np.sqrt(op.dim)
    x /= norm

    bound = None
    lam = 0.0
    for it in range(1, max_iter + 1):
        y = -apply(op, x)
        ynorm = np.linalg.norm(y)
        if ynorm == 0.0:
            # x lies in the kernel of F: spectrum seen so far is exactly 0
            bound = SpectralBound(0.0, "power-iteration", it, 0.0)
            break
        lam_new = float(x @ y)
        x = y / ynorm
        rel = abs(lam_new - lam) / max(abs(lam_new), 1e-30)
        lam = lam_new
        if rel < tol:
            bound = SpectralBound(max(lam, 0.0), "power-iteration", it, rel)
            break
    if bound is None:
        bound = SpectralBound(gershgorin_bound(op), "gershgorin", max_iter, float("nan"))
    return (bound, x) if return_vector else bound


@dataclass(frozen=True)
class SpectrumReport:
    max_eigenvalue: float
    min_eigenvalue: float
    passed: bool


def spectrum_check(op: SparseOperator, dense_limit: int = 4096) -> SpectrumReport:
    """Dense symmetric eigensolve; passes iff every eigenvalue of F <= 1e-10."""
    if op.dim > dense_limit:
        raise DimensionError(f"dense diagnostic refused for dim {op.dim} > {dense_limit}")
    w = np.linalg.eigvalsh(to_dense(op))
    return SpectrumReport(float(w[-1]), float(w[0]), bool(w[-1] <= 1e-10))


def to_dense(op: SparseOperator) -> np.ndarray:
    dense = np.zeros((op.dim, op.dim))
    for q in range(op.dim):
        sl = slice(op.indptr[q], op.indptr[q + 1])
        dense[q, op.indices[sl]] = op.data[sl]
    return dense


def dump_coo(op: SparseOperator, target) -> None:
    """Write one "row col value" line per stored entry (0-based indices)."""

    def _write(fh):
        for q in range(op.dim):
            for t in range(op.indptr[q], op.indptr[q + 1]):
                fh.write(f"{q} {op.indices[t]} {op.data[t]:.17g}\n")

    if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
        with open(target, "w", encoding="ascii") as fh:
            _write(fh)
    else:
        _write(target)


def matrix_market_like(op: SparseOperator) -> str:
    buf = io.StringIO()
    dump_coo(op, buf)
    return buf.getvalue()

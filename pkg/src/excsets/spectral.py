"""Perron root of nonnegative matrices by deterministic power iteration.

Spectral radii of transition structures (0/1 adjacency or exp-weighted)
drive every entropy and pressure computation in this package, so the
routine here is deliberately boring: fixed all-ones start vector, a
diagonal shift to kill periodicity, and Collatz-Wielandt bounds as the
stopping certificate.  The matrix is first split into strongly connected
components; the spectral radius is the maximum over components, and on
an irreducible component the bounds converge geometrically.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

DEFAULT_RTOL = 1e-12
MAX_ITERATIONS = 10**6


class ConvergenceError(RuntimeError):
    """Power iteration failed to converge; carries the last two estimates."""

    def __init__(self, message: str, estimates: tuple[float, float]):
        super().__init__(f"{message} (last two Rayleigh estimates: "
                         f"{estimates[0]!r}, {estimates[1]!r})")
        self.estimates = estimates


def _component_radius(mat: sp.csr_matrix, rtol: float, max_iterations: int) -> float:
    """Perron root of an irreducible nonnegative matrix.

    Iterates x -> (A + cI) x with c the maximal row sum.  For positive x
    the Collatz-Wielandt ratios min_i (Ax)_i/x_i and max_i (Ax)_i/x_i
    enclose the Perron root, which gives a rigorous relative stopping
    test rather than a heuristic successive-difference one.
    """
    n = mat.shape[0]
    row_sums = np.asarray(mat.sum(axis=1)).ravel()
    shift = float(row_sums.max())
    if shift == 0.0:
        return 0.0
    x = np.full(n, 1.0 / np.sqrt(n))
    previous = np.inf
    estimate = np.inf
    for _ in range(max_iterations):
        y = mat @ x + shift * x
        ratios = y / x
        lo = float(ratios.min())
        hi = float(ratios.max())
        previous = estimate
        estimate = 0.5 * (lo + hi) - shift
        # hi - shift >= rho, so this is a relative test on the unshifted root
        if hi - lo <= rtol * max(hi - shift, 1e-300):
            return estimate
        x = y / np.linalg.norm(y)
    raise ConvergenceError(
        f"power iteration did not converge within {max_iterations} iterations",
        (previous, estimate),
    )


def spectral_radius(
    matrix: sp.spmatrix | np.ndarray,
    rtol: float = DEFAULT_RTOL,
    max_iterations: int = MAX_ITERATIONS,
) -> float:
    """Spectral radius of a nonnegative matrix.

    Returns 0.0 for matrices with no cycles (e.g. strictly triangular
    structures); callers treating log(0) should handle that themselves.
    """
    mat = sp.csr_matrix(matrix, dtype=float)
    if mat.shape[0] == 0:
        return 0.0
    if mat.nnz == 0:
        return 0.0
    if (mat.data < 0).any():
        raise ValueError("spectral_radius requires a nonnegative matrix")
    n_comp, labels = connected_components(mat, directed=True, connection="strong")
    best = 0.0
    for comp in range(n_comp):
        idx = np.flatnonzero(labels == comp)
        sub = mat[np.ix_(idx, idx)].tocsr()
        if sub.nnz == 0:
            continue
        best = max(best, _component_radius(sub, rtol, max_iterations))
    return best

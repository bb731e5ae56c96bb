"""Fixed-shape dense kernels for 4x4 and 6x6 work.

All products follow the textbook triple loop: each output entry is seeded
with its first product and then accumulates the remaining ``m - 1`` terms.
That is exactly the operation count used by :mod:`kckf.flops`, and the
loops stay plain enough to run on object arrays when numba is disabled
(the FLOP-counting tests rely on this).
"""

from __future__ import annotations

from math import isinf, sqrt

from numba import njit


@njit(cache=True)
def matmul_into(A, B, C):
    """C = A @ B for A (l, m) and B (m, n)."""
    l, m = A.shape
    n = B.shape[1]
    for i in range(l):
        for j in range(n):
            acc = A[i, 0] * B[0, j]
            for k in range(1, m):
                acc = acc + A[i, k] * B[k, j]
            C[i, j] = acc


@njit(cache=True)
def matmul_abt_into(A, B, C):
    """C = A @ B.T for A (l, m) and B (n, m)."""
    l, m = A.shape
    n = B.shape[0]
    for i in range(l):
        for j in range(n):
            acc = A[i, 0] * B[j, 0]
            for k in range(1, m):
                acc = acc + A[i, k] * B[j, k]
            C[i, j] = acc


@njit(cache=True)
def matvec_into(A, x, y):
    """y = A @ x."""
    l, m = A.shape
    for i in range(l):
        acc = A[i, 0] * x[0]
        for k in range(1, m):
            acc = acc + A[i, k] * x[k]
        y[i] = acc


@njit(cache=True)
def symmetrize(P):
    n = P.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            v = 0.5 * (P[i, j] + P[j, i])
            P[i, j] = v
            P[j, i] = v


@njit(cache=True)
def cholesky_into(A, L):
    """Lower Cholesky factor of the lower triangle of ``A``.

    Returns False (leaving ``L`` partially written) when a pivot is not
    strictly positive or not finite.
    """
    n = A.shape[0]
    for j in range(n):
        s = A[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if not (s > 0.0) or isinf(s):
            return False
        d = sqrt(s)
        L[j, j] = d
        for i in range(j):
            L[i, j] = 0.0
        for i in range(j + 1, n):
            s = A[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            L[i, j] = s / d
    return True


@njit(cache=True)
def cholesky_jitter_into(A, L, work):
    """Cholesky with a single diagonal-jitter retry.

    The retry adds ``1e-12 * trace(A) / n`` to the diagonal.
    """
    if cholesky_into(A, L):
        return True
    n = A.shape[0]
    tr = 0.0
    for i in range(n):
        tr += A[i, i]
    eps = 1e-12 * tr / n
    if not (eps > 0.0):
        return False
    for i in range(n):
        for j in range(n):
            work[i, j] = A[i, j]
        work[i, i] += eps
    return cholesky_into(work, L)


@njit(cache=True)
def cho_solve_t_into(L, Bt, X):
    """Solve (L L^T) X = Bt^T; Bt is (k, n) and X is (n, k)."""
    n = L.shape[0]
    k = Bt.shape[0]
    for i in range(n):
        d = 1.0 / L[i, i]
        for c in range(k):
            s = Bt[c, i]
            for j in range(i):
                s -= L[i, j] * X[j, c]
            X[i, c] = s * d
    for i in range(n - 1, -1, -1):
        d = 1.0 / L[i, i]
        for c in range(k):
            s = X[i, c]
            for j in range(i + 1, n):
                s -= L[j, i] * X[j, c]
            X[i, c] = s * d

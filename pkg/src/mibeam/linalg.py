"""
Dense complex linear algebra for small matrices.

The matrices handled here are at most a few tens of rows (three transmitter
coils plus a handful of receivers), so the routines favour clarity and
robustness over speed: partially pivoted LU for solves and inverses and
cyclic Jacobi rotations for Hermitian eigenproblems. Internally the work is
done on nested Python lists of complex numbers, which is considerably faster
than NumPy for 3x3 to 8x8 operands. Inputs and outputs are NumPy arrays.
"""

import cmath
import math

import numpy as np

from .errors import NotHermitian, SingularMatrix

__all__ = [
    "as_cmatrix",
    "as_cvector",
    "identity",
    "zeros",
    "diag",
    "lu_factor",
    "lu_solve",
    "solve",
    "invert",
    "hermitian_eig",
    "hermitian_max_eigpair",
    "generalized_max_eigvec",
    "fix_phase",
]

PIVOT_RTOL = 1e-13
HERMITIAN_RTOL = 1e-9
_JACOBI_MAX_SWEEPS = 100


def as_cmatrix(a, square=False):
    """Return ``a`` as a finite 2-D complex array (a copy)."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def as_cvector(b):
    """Return ``b`` as a finite 1-D complex array (a copy)."""
    v = np.array(b, dtype=complex)
    if v.ndim != 1 or v.shape[0] < 1:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def identity(n):
    return np.eye(n, dtype=complex)


def zeros(rows, cols):
    return np.zeros((rows, cols), dtype=complex)


def diag(values):
    return np.diag(np.asarray(values, dtype=complex))


# -- LU ---------------------------------------------------------------------

def lu_factor(a):
    """Partially pivoted LU factorization.

    Parameters
    ----------
    a : array_like, shape (n, n)

    Returns
    -------
    lu : list of lists of complex
        Packed factors; unit-diagonal ``L`` below the diagonal, ``U`` on and
        above it.
    perm : list of int
        Row permutation, ``perm[i]`` is the original row now at position i.

    Raises
    ------
    SingularMatrix
        If a pivot falls below ``PIVOT_RTOL`` times the largest row 2-norm
        of ``a``.
    """
    m = as_cmatrix(a, square=True)
    n = m.shape[0]
    lu = m.tolist()
    scale = max(math.sqrt(sum(abs(x) ** 2 for x in row)) for row in lu)
    threshold = PIVOT_RTOL * scale
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    perm = list(range(n))
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(lu[i][k]))
        if abs(lu[p][k]) < threshold:
            raise SingularMatrix(
                f"pivot {abs(lu[p][k]):.3e} in column {k} below {threshold:.3e}")
        if p != k:
            lu[k], lu[p] = lu[p], lu[k]
            perm[k], perm[p] = perm[p], perm[k]
        rowk = lu[k]
        pivot = rowk[k]
        for i in range(k + 1, n):
            rowi = lu[i]
            factor = rowi[k] / pivot
            rowi[k] = factor
            if factor != 0:
                for j in range(k + 1, n):
                    rowi[j] -= factor * rowk[j]
    return lu, perm


def lu_solve(factors, b):
    """Solve ``A x = b`` given ``factors = lu_factor(A)``; ``b`` is a vector."""
    lu, perm = factors
    n = len(lu)
    y = [complex(b[perm[i]]) for i in range(n)]
    for i in range(n):
        row = lu[i]
        s = y[i]
        for j in range(i):
            s -= row[j] * y[j]
        y[i] = s
    for i in range(n - 1, -1, -1):
        row = lu[i]
        s = y[i]
        for j in range(i + 1, n):
            s -= row[j] * y[j]
        y[i] = s / row[i]
    return y


def solve(a, b):
    """Solve the square system ``a @ x = b``.

    Raises
    ------
    SingularMatrix
        When ``a`` is numerically singular.
    ValueError
        On shape mismatch or non-finite input.
    """
    vec = as_cvector(b)
    factors = lu_factor(a)
    if len(factors[0]) != vec.shape[0]:
        raise ValueError(
            f"dimension mismatch: matrix is {len(factors[0])}x{len(factors[0])}, "
            f"right-hand side has length {vec.shape[0]}")
    return np.array(lu_solve(factors, vec.tolist()), dtype=complex)


def invert(a):
    """Inverse of a nonsingular square matrix."""
    lu, perm = lu_factor(a)
    n = len(lu)
    cols = []
    for j in range(n):
        e = [0j] * n
        e[j] = 1.0 + 0j
        cols.append(lu_solve((lu, perm), e))
    return np.array(cols, dtype=complex).T


# -- Hermitian eigenproblems ------------------------------------------------

def _check_hermitian(h):
    m = as_cmatrix(h, square=True)
    norm = np.linalg.norm(m)
    asym = np.linalg.norm(m - m.conj().T)
    if asym > HERMITIAN_RTOL * norm:
        raise NotHermitian(
            f"||H - H^H||_F = {asym:.3e} exceeds {HERMITIAN_RTOL:g} * ||H||_F")
    return 0.5 * (m + m.conj().T)


def _jacobi(a):
    """Cyclic complex Jacobi on a Hermitian matrix held as a list of lists.

    Returns (eigenvalues, eigenvector columns as list of lists ``v[i][k]``).
    """
    n = len(a)
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    total = math.sqrt(sum(abs(x) ** 2 for row in a for x in row))
    if total == 0.0:
        return [0.0] * n, v
    tol = (1e-16 * total) ** 2
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(n) if i != j)
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                r = abs(apq)
                if r == 0.0:
                    continue
                # G = [[c, s], [-s e^{-ia}, c e^{-ia}]] zeroes a[p][q]
                ph = apq / r
                theta = (a[q][q].real - a[p][p].real) / (2.0 * r)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                phc = ph.conjugate()
                g_pp, g_pq = c, s
                g_qp, g_qq = -s * phc, c * phc
                for k in range(n):
                    akp, akq = a[k][p], a[k][q]
                    a[k][p] = akp * g_pp + akq * g_qp
                    a[k][q] = akp * g_pq + akq * g_qq
                for k in range(n):
                    apk, aqk = a[p][k], a[q][k]
                    a[p][k] = g_pp * apk + g_qp.conjugate() * aqk
                    a[q][k] = g_pq * apk + g_qq.conjugate() * aqk
                a[p][q] = 0j
                a[q][p] = 0j
                a[p][p] = complex(a[p][p].real, 0.0)
                a[q][q] = complex(a[q][q].real, 0.0)
                for k in range(n):
                    vkp, vkq = v[k][p], v[k][q]
                    v[k][p] = vkp * g_pp + vkq * g_qp
                    v[k][q] = vkp * g_pq + vkq * g_qq
    return [a[i][i].real for i in range(n)], v


def fix_phase(v):
    """Rotate ``v`` so its first largest-magnitude entry is real and >= 0."""
    v = np.asarray(v, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    if v[k] == 0:
        return v.copy()
    out = v * (abs(v[k]) / v[k])
    out[k] = abs(v[k])
    return out


def hermitian_eig(h):
    """Full eigendecomposition of a Hermitian matrix.

    Returns
    -------
    w : ndarray of float, shape (n,)
        Eigenvalues in descending order; ties keep the order in which Jacobi
        left them on the diagonal.
    v : ndarray of complex, shape (n, n)
        Unit-norm eigenvectors as columns, each with ``fix_phase`` applied.
    """
    m = _check_hermitian(h)
    w, v = _jacobi(m.tolist())
    w = np.array(w)
    vecs = np.array(v, dtype=complex)
    order = sorted(range(len(w)), key=lambda i: (-w[i], i))
    vecs = vecs[:, order]
    vecs /= np.linalg.norm(vecs, axis=0)
    for j in range(vecs.shape[1]):
        vecs[:, j] = fix_phase(vecs[:, j])
    return w[order], vecs


def hermitian_max_eigpair(h):
    """Largest eigenvalue of a Hermitian matrix and its unit eigenvector.

    The input is symmetrized before decomposition; it must be Hermitian to
    within ``HERMITIAN_RTOL`` relative Frobenius norm, otherwise
    :class:`NotHermitian` is raised.
    """
    w, v = hermitian_eig(h)
    return float(w[0]), v[:, 0]


def generalized_max_eigvec(d, m):
    """Maximize ``u^H d u / u^H (m^H m) u`` over complex ``u``.

    Substitutes ``x = m u``, takes the dominant eigenvector of
    ``m^{-H} d m^{-1}`` and maps back with ``u = m^{-1} x``.

    Parameters
    ----------
    d : array_like, shape (n, n)
        Hermitian positive semidefinite numerator matrix.
    m : array_like, shape (n, n)
        Nonsingular matrix defining the denominator quadratic form.

    Returns
    -------
    ndarray of complex, shape (n,)
        Unit 2-norm maximizer with ``fix_phase`` applied.
    """
    minv = invert(m)
    h = minv.conj().T @ as_cmatrix(d, square=True) @ minv
    # products of exactly Hermitian factors pick up rounding asymmetry only
    h = 0.5 * (h + h.conj().T)
    _, x = hermitian_max_eigpair(h)
    u = minv @ x
    return fix_phase(u / np.linalg.norm(u))

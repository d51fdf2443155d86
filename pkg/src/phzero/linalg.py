"""Deterministic dense linear-algebra kernels.

Everything operates on plain numpy arrays (row-major, float64 or
complex128) at desk scale (n up to a few hundred).  All tie-breaking is
by lowest index so repeated runs are bit-identical.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SingularMatrixError

#: Default relative threshold for rank decisions.  The systems this package
#: targets have small-integer boundary matrices, so rank gaps are far from
#: the threshold; override per call where needed.
DEFAULT_TOL = 1e-10

#: Condition-number limit above which a matrix is treated as numerically
#: singular when an inverse is required.
COND_LIMIT = 1e8


def as_matrix(a, dtype=None):
    """Coerce ``a`` to a 2-D ndarray (float64 unless complex input)."""
    arr = np.asarray(a)
    if dtype is None:
        dtype = complex if np.iscomplexobj(arr) else float
    arr = np.atleast_2d(np.asarray(arr, dtype=dtype))
    return arr


def two_norm(a) -> float:
    a = as_matrix(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def cond2(a) -> float:
    """2-norm condition number; ``inf`` for singular or non-square input."""
    a = as_matrix(a)
    if a.size == 0:
        return 1.0
    if a.shape[0] != a.shape[1]:
        return np.inf
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])


def is_invertible(a, cond_limit: float = COND_LIMIT) -> bool:
    return cond2(a) < cond_limit


def solve(a, b):
    """Solve ``a x = b`` after an explicit conditioning check."""
    a = as_matrix(a)
    if not is_invertible(a):
        raise SingularMatrixError(
            f"matrix of shape {a.shape} is numerically singular "
            f"(condition >= {COND_LIMIT:g})"
        )
    return np.linalg.solve(a, np.asarray(b))


@dataclass(frozen=True)
class LUFactors:
    """Row-pivoted triangular factorization ``M[perm] = lower @ upper``.

    ``perm`` maps factored row positions to input row positions, ``lower``
    is unit lower triangular and ``upper`` is upper triangular (echelon on
    rank-deficient input, with zero rows collected at the bottom whenever
    the dependent rows are exact).
    """

    perm: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """Return ``lower @ upper`` in the original row order."""
        out = np.empty_like(self.upper)
        out[self.perm] = self.lower @ self.upper
        return out


def lu_decompose(mat) -> LUFactors:
    """Factor a square or wide matrix as ``P M = L U`` with partial pivoting.

    The pivot is the largest-magnitude entry of the active column, ties
    broken by lowest row index.  An exactly zero active column is skipped
    (the elimination advances to the next column without consuming a row),
    so rank deficiency surfaces as zero pivots rather than an error and the
    dependent rows of ``U`` end up at the bottom.
    """
    a = as_matrix(mat).copy()
    m, n = a.shape
    if m > n:
        raise ValueError(f"expected a square or wide matrix, got shape {a.shape}")
    perm = np.arange(m)
    lower = np.eye(m, dtype=a.dtype)
    row = 0
    for col in range(n):
        if row >= m:
            break
        mags = np.abs(a[row:, col])
        piv = row + int(np.argmax(mags))
        if mags[piv - row] == 0.0:
            continue
        if piv != row:
            a[[row, piv], :] = a[[piv, row], :]
            perm[[row, piv]] = perm[[piv, row]]
            lower[[row, piv], :row] = lower[[piv, row], :row]
        mult = a[row + 1 :, col] / a[row, col]
        lower[row + 1 :, row] = mult
        a[row + 1 :, col:] -= np.outer(mult, a[row, col:])
        a[row + 1 :, col] = 0.0
        row += 1
    return LUFactors(perm=perm, lower=lower, upper=a)


def rank(mat, tol: float = DEFAULT_TOL) -> int:
    """Numerical rank via column-pivoted QR.

    Diagonal magnitudes of R below ``tol`` times the largest diagonal
    magnitude count as zero.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = as_matrix(mat)
    if a.size == 0:
        return 0
    r = scipy.linalg.qr(a, mode="r", pivoting=True)[0]
    d = np.abs(np.diag(r))
    if d.size == 0 or d.max() == 0.0:
        return 0
    return int(np.count_nonzero(d > tol * d.max()))


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of n-space held as an orthonormal column basis."""

    basis: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.basis))
        if not np.iscomplexobj(b):
            b = b.astype(float)
        object.__setattr__(self, "basis", b)
        if b.shape[1] > 0:
            gram = b.conj().T @ b
            if not np.allclose(gram, np.eye(b.shape[1]), atol=1e-12):
                raise ValueError("basis columns are not orthonormal")
        if b.shape[1] > b.shape[0]:
            raise ValueError("more basis columns than ambient dimensions")

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def full(cls, n: int, tol: float = DEFAULT_TOL) -> "Subspace":
        return cls(np.eye(n), tol)

    @classmethod
    def zero(cls, n: int, tol: float = DEFAULT_TOL) -> "Subspace":
        return cls(np.zeros((n, 0)), tol)

    @classmethod
    def from_span(cls, cols, tol: float = DEFAULT_TOL, anchor: float | None = None) -> "Subspace":
        """Orthonormalize a spanning set (rank decided at ``tol``).

        ``anchor`` fixes the absolute scale against which singular values
        are judged; without it the largest singular value of ``cols`` is
        used, which is only appropriate when the spanning set is known not
        to consist entirely of noise.
        """
        a = as_matrix(cols)
        if a.size == 0:
            return cls(np.zeros((a.shape[0], 0)), tol)
        u, s, _ = np.linalg.svd(a, full_matrices=False)
        scale = s[0] if s.size else 0.0
        if anchor is not None:
            scale = anchor
        if s.size == 0 or scale <= 0.0:
            return cls(np.zeros((a.shape[0], 0)), tol)
        r = int(np.count_nonzero(s > tol * scale))
        return cls(u[:, :r], tol)

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def project(self, vecs) -> np.ndarray:
        v = np.asarray(vecs)
        return self.basis @ (self.basis.conj().T @ v)

    def distance(self, vecs) -> float:
        """Largest projection residual over the given vectors (columns)."""
        v = np.atleast_2d(np.asarray(vecs, dtype=float))
        if v.shape[0] != self.ambient_dim:
            v = v.T
        res = v - self.project(v)
        return float(np.abs(res).max()) if res.size else 0.0

    def contains(self, vecs, tol: float | None = None) -> bool:
        v = np.atleast_2d(np.asarray(vecs, dtype=float))
        if v.shape[0] != self.ambient_dim:
            v = v.T
        scale = max(1.0, float(np.abs(v).max()) if v.size else 0.0)
        return self.distance(v) <= (self.tol if tol is None else tol) * scale

    def same_as(self, other: "Subspace", tol: float = 1e-9) -> bool:
        """Mutual containment of two subspaces at the given tolerance."""
        if self.ambient_dim != other.ambient_dim or self.dim != other.dim:
            return False
        if self.dim == 0:
            return True
        return (
            two_norm(self.basis - other.project(self.basis)) <= tol
            and two_norm(other.basis - self.project(other.basis)) <= tol
        )


def nullspace(mat, tol: float = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the (right) null space of ``mat``.

    The dimension is ``cols - rank(mat, tol)``; the basis vectors are the
    trailing right singular vectors.
    """
    a = as_matrix(mat)
    n = a.shape[1]
    if a.shape[0] == 0 or a.size == 0 or not np.any(a):
        return Subspace(np.eye(n), tol)
    r = rank(a, tol)
    vh = np.linalg.svd(a)[2]
    return Subspace(vh[r:, :].conj().T, tol)


def subspace_intersect(v: Subspace, w: Subspace) -> Subspace:
    """Intersection of two subspaces of the same ambient space."""
    if v.ambient_dim != w.ambient_dim:
        raise ValueError(
            f"ambient dimension mismatch: {v.ambient_dim} vs {w.ambient_dim}"
        )
    tol = min(v.tol, w.tol)
    if v.dim == 0 or w.dim == 0:
        return Subspace.zero(v.ambient_dim, tol)
    if v.dim == v.ambient_dim:
        return Subspace(w.basis, tol)
    if w.dim == w.ambient_dim:
        return Subspace(v.basis, tol)
    # (a, b) with V a = W b <=> [V | -W] (a; b) = 0; the V a part spans V ∩ W.
    pairs = nullspace(np.hstack([v.basis, -w.basis]), tol)
    vecs = v.basis @ pairs.basis[: v.dim, :]
    return Subspace.from_span(vecs, tol)


def preimage(f, w: Subspace) -> Subspace:
    """The set ``{v : f v in w}``, via the null space of ``(I - P_w) f``.

    Membership is judged against the scale of ``f`` itself,
    ``norm((I - P_w) f v) <= tol * norm(f) * norm(v)``: the residual map can
    be pure rounding noise (when ``f`` maps everything into ``w``) and must
    not set the threshold.
    """
    fm = as_matrix(f)
    if fm.shape[0] != w.ambient_dim:
        raise ValueError(
            f"map has {fm.shape[0]} rows but target lives in "
            f"{w.ambient_dim} dimensions"
        )
    residual_map = fm - w.project(fm)
    anchor = two_norm(fm)
    if anchor == 0.0:
        return Subspace.full(fm.shape[1], w.tol)
    s, vh = np.linalg.svd(residual_map)[1:]
    r = int(np.count_nonzero(s > w.tol * anchor))
    return Subspace(vh[r:, :].conj().T, w.tol)


def spectral_radius(mat) -> float:
    """Largest eigenvalue magnitude (balanced Hessenberg QR iteration).

    Raises ``numpy.linalg.LinAlgError`` if the eigenvalue iteration fails
    to converge, which signals pathological input.
    """
    a = as_matrix(mat)
    if a.shape[0] != a.shape[1]:
        raise ValueError("spectral radius requires a square matrix")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def schur_block_inverse(t, split: int) -> tuple[np.ndarray, np.ndarray]:
    """The two left blocks of ``inv(T)`` for a 2x2 block partition.

    With ``T = [[T1, T2], [T3, T4]]`` (``T1`` of order ``split``) and the
    complement ``S = T4 - T3 inv(T1) T2``::

        X11 = inv(T1) (I + T2 inv(S) T3 inv(T1))
        X21 = -inv(S) T3 inv(T1)

    Raises :class:`SingularMatrixError` when ``T1`` or ``S`` is singular.
    """
    tm = as_matrix(t)
    d = tm.shape[0]
    if tm.shape[0] != tm.shape[1]:
        raise ValueError("block inversion requires a square matrix")
    if not 0 <= split <= d:
        raise ValueError(f"split {split} out of range for order {d}")
    t1 = tm[:split, :split]
    t2 = tm[:split, split:]
    t3 = tm[split:, :split]
    t4 = tm[split:, split:]
    if split and not is_invertible(t1):
        raise SingularMatrixError("leading block T1 is numerically singular")
    if split == d:
        return np.linalg.solve(t1, np.eye(split, dtype=tm.dtype)), np.zeros((0, split), dtype=tm.dtype)
    if split == 0:
        if not is_invertible(t4):
            raise SingularMatrixError("Schur complement is numerically singular")
        return np.zeros((0, 0), dtype=tm.dtype), np.zeros((d, 0), dtype=tm.dtype)
    x = np.linalg.solve(t1.T, t3.T).T  # T3 inv(T1)
    s = t4 - x @ t2
    if not is_invertible(s):
        raise SingularMatrixError("Schur complement is numerically singular")
    y = np.linalg.solve(s, x)  # inv(S) T3 inv(T1)
    x11 = np.linalg.solve(t1, np.eye(split, dtype=tm.dtype) + t2 @ y)
    x21 = -y
    return x11, x21

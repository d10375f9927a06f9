"""Dense real linear algebra and a one-sided Jacobi SVD.

Matrices are plain 2-D ``float64`` numpy arrays. The SVD is computed from
scratch (Hestenes one-sided Jacobi with a round-robin pair ordering) so that
the factor signs and column order are fully determined by this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InvalidMatrix, RankError, ShapeError

Matrix = np.ndarray

JACOBI_TOL = 1e-14
MAX_SWEEPS = 60


def as_matrix(a) -> Matrix:
    """Validate and copy ``a`` into a finite 2-D float64 array."""
    m = np.array(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise InvalidMatrix(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidMatrix("matrix contains NaN or Inf")
    return m


def matmul(a: Matrix, b: Matrix) -> Matrix:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def transpose(a: Matrix) -> Matrix:
    return np.ascontiguousarray(np.asarray(a, dtype=np.float64).T)


def frobenius_norm(a: Matrix) -> float:
    return float(np.sqrt(np.sum(np.square(np.asarray(a, dtype=np.float64)))))


@dataclass(frozen=True)
class SvdFactors:
    """``u`` (m x r), ``s`` (r,), ``v`` (n x r) with ``w ~= u @ diag(s) @ v.T``."""

    u: Matrix
    s: np.ndarray
    v: Matrix
    source_rows: int
    source_cols: int

    @property
    def rank(self) -> int:
        return len(self.s)


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings for one sweep; each round holds disjoint column pairs."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        left, right = [], []
        for i in range(size // 2):
            a, b = players[i], players[size - 1 - i]
            if a >= 0 and b >= 0:
                left.append(min(a, b))
                right.append(max(a, b))
        rounds.append((np.asarray(left, dtype=np.int64), np.asarray(right, dtype=np.int64)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _orthonormal_columns(b: Matrix, s: np.ndarray) -> Matrix:
    """Normalise the columns of ``b`` into an orthonormal set.

    Columns are processed in order (largest singular value first) with two
    passes of modified Gram-Schmidt. A column with a zero singular value, or
    one that collapses under projection, is replaced by the first standard
    basis vector that survives projection, which completes the basis
    deterministically. Directions of
    tiny singular values are noisy but they are scaled by that tiny value in
    the product, so only orthonormality matters for them.
    """
    m, r = b.shape
    u = np.zeros((m, r))
    for i in range(r):
        col = b[:, i] / s[i] if s[i] > 0 else None
        if col is not None:
            for _ in range(2):
                col = col - u[:, :i] @ (u[:, :i].T @ col)
            norm = np.linalg.norm(col)
            if norm < 0.5:
                col = None
            else:
                col = col / norm
        if col is None:
            for e in range(m):
                cand = np.zeros(m)
                cand[e] = 1.0
                for _ in range(2):
                    cand = cand - u[:, :i] @ (u[:, :i].T @ cand)
                norm = np.linalg.norm(cand)
                if norm > 0.5:
                    col = cand / norm
                    break
        u[:, i] = col
    return u


def _fix_signs(u: Matrix, v: Matrix) -> None:
    for i in range(u.shape[1]):
        j = int(np.argmax(np.abs(u[:, i])))  # argmax returns the lowest index on ties
        if u[j, i] < 0:
            u[:, i] = -u[:, i]
            v[:, i] = -v[:, i]


def _jacobi_tall(a: Matrix) -> tuple[Matrix, np.ndarray, Matrix]:
    """One-sided Jacobi for m >= n; returns (u, s, v) sorted by s descending."""
    b = a.copy()
    m, n = b.shape
    v = np.eye(n)
    scale = frobenius_norm(a)
    if n > 1 and scale > 0:
        rounds = _round_robin(n)
        negligible = (JACOBI_TOL * scale) ** 2
        for sweep in range(MAX_SWEEPS + 1):
            rotated = False
            for p, q in rounds:
                bp = b[:, p]
                bq = b[:, q]
                alpha = np.einsum("ij,ij->j", bp, bp)
                beta = np.einsum("ij,ij->j", bq, bq)
                gamma = np.einsum("ij,ij->j", bp, bq)
                active = (np.abs(gamma) > JACOBI_TOL * np.sqrt(alpha * beta)) & (
                    np.minimum(alpha, beta) > negligible
                )
                if not np.any(active):
                    continue
                if sweep == MAX_SWEEPS:
                    raise ConvergenceError(f"Jacobi SVD did not converge in {MAX_SWEEPS} sweeps")
                rotated = True
                p, q = p[active], q[active]
                alpha, beta, gamma = alpha[active], beta[active], gamma[active]
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                sn = c * t
                bp, bq = b[:, p], b[:, q]
                b[:, p] = c * bp - sn * bq
                b[:, q] = sn * bp + c * bq
                vp, vq = v[:, p], v[:, q]
                v[:, p] = c * vp - sn * vq
                v[:, q] = sn * vp + c * vq
            if not rotated:
                break
    s = np.sqrt(np.einsum("ij,ij->j", b, b))
    order = np.argsort(-s, kind="stable")
    s = s[order]
    b = b[:, order]
    v = v[:, order]
    u = _orthonormal_columns(b, s)
    return u, s, v


def svd(w: Matrix) -> SvdFactors:
    """Thin SVD ``w = u diag(s) v^T`` with r = min(rows, cols).

    Singular values are sorted non-increasing. In every column of ``u`` the
    entry of largest magnitude (lowest row on ties) is non-negative.
    """
    a = as_matrix(w)
    m, n = a.shape
    if m >= n:
        u, s, v = _jacobi_tall(a)
    else:
        v, s, u = _jacobi_tall(a.T.copy())
    _fix_signs(u, v)
    return SvdFactors(u=u, s=s, v=v, source_rows=m, source_cols=n)


def truncate(f: SvdFactors, k: int) -> SvdFactors:
    """Keep the leading ``k`` singular triplets."""
    if not isinstance(k, (int, np.integer)) or k < 1 or k > f.rank:
        raise RankError(f"k={k} outside 1..{f.rank}")
    k = int(k)
    return SvdFactors(
        u=f.u[:, :k].copy(),
        s=f.s[:k].copy(),
        v=f.v[:, :k].copy(),
        source_rows=f.source_rows,
        source_cols=f.source_cols,
    )


def reconstruct(f: SvdFactors) -> Matrix:
    return (f.u * f.s) @ f.v.T

"""Arnoldi bases for Krylov subspaces, with breakdown detection.

The basis vectors are generated by the Arnoldi recursion (each new candidate
is the operator applied to the previous basis vector, never a raw power of
the operator applied to the datum) and orthonormalized by modified
Gram-Schmidt with one full reorthogonalization pass per step.  Near-monomial
Krylov vectors, as produced by smoothing operators, lose orthogonality
catastrophically under single-pass Gram-Schmidt; the second pass keeps the
orthonormality defect at roundoff level.

All inner products are taken in the space of the datum, so the same code
serves sequence spaces and quadrature-weighted function spaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import LinearOperatorHandle
from .spaces import CoefficientVector, Space

DEFAULT_BREAKDOWN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class KrylovBasis:
    """Orthonormal basis Q of a Krylov subspace plus the extended Hessenberg
    matrix coupling it to the operator.

    ``Q`` has one column per basis vector, orthonormal in the inner product of
    ``space``; ``H`` has shape (n+1, n) and satisfies the Arnoldi relation
    A q_j = sum_{i <= j+1} H[i, j] q_i for every column j that has a
    successor.  ``grade_reached`` is set when the recursion broke down
    because the subspace became invariant, and equals its dimension.
    """

    space: Space
    Q: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)
    g_norm: float
    grade_reached: int | None = None

    @property
    def n_columns(self) -> int:
        return self.Q.shape[1]

    def column(self, j: int) -> CoefficientVector:
        return CoefficientVector(values=self.Q[:, j].copy(), space=self.space)


class ArnoldiProcess:
    """Incremental Arnoldi iteration.

    Drives the recursion one step at a time so that a solver can interleave
    basis growth with its own per-iteration work.  ``step()`` appends one
    Hessenberg column and, unless breakdown occurred, one new basis vector.
    """

    def __init__(self, operator: LinearOperatorHandle, g: CoefficientVector,
                 max_steps: int, breakdown_tol: float = DEFAULT_BREAKDOWN_TOL):
        if not operator.space.compatible(g.space):
            raise ValueError("datum does not live in the operator's space")
        if max_steps < 1:
            raise ValueError(f"need at least one step, got {max_steps}")
        if max_steps > operator.ambient_dim:
            raise ValueError(
                f"cannot take {max_steps} steps in dimension {operator.ambient_dim}"
            )
        space = operator.space
        beta = g.norm()
        if beta == 0.0:
            raise ValueError("datum must be nonzero")
        self.operator = operator
        self.space = space
        self.g_norm = beta
        self.breakdown_tol = breakdown_tol
        self.max_steps = max_steps
        self._Q = np.zeros((space.dim, max_steps + 1), dtype=complex)
        self._H = np.zeros((max_steps + 1, max_steps), dtype=complex)
        self._Q[:, 0] = g.values / beta
        self.n_steps = 0          # completed Hessenberg columns
        self.grade_reached: int | None = None
        self._column_scale = 0.0

    @property
    def n_basis_vectors(self) -> int:
        if self.grade_reached is not None:
            return self.n_steps
        return self.n_steps + 1

    def basis_matrix(self, n_columns: int) -> np.ndarray:
        return self._Q[:, :n_columns]

    def hessenberg_column(self, j: int) -> np.ndarray:
        """Entries H[0 .. j+1, j] of a completed column."""
        return self._H[: j + 2, j]

    def step(self) -> bool:
        """Advance one step.  Returns False when breakdown ends the recursion."""
        if self.grade_reached is not None or self.n_steps >= self.max_steps:
            raise RuntimeError("Arnoldi recursion already finished")
        j = self.n_steps
        space = self.space
        Q = self._Q
        v = self.operator.apply_values(Q[:, j])
        for i in range(j + 1):
            h = space.inner(Q[:, i], v)
            v -= h * Q[:, i]
            self._H[i, j] = h
        for i in range(j + 1):
            c = space.inner(Q[:, i], v)
            v -= c * Q[:, i]
            self._H[i, j] += c
        hnext = space.norm(v)
        self._H[j + 1, j] = hnext
        self._column_scale = max(
            self._column_scale, float(np.linalg.norm(self._H[: j + 2, j]))
        )
        self.n_steps = j + 1
        if hnext <= self.breakdown_tol * self._column_scale:
            # lucky breakdown: the Krylov subspace is invariant at this size
            self.grade_reached = j + 1
            return False
        Q[:, j + 1] = v / hnext
        return True

    def to_basis(self) -> KrylovBasis:
        if self.grade_reached is None and self.n_steps < self.max_steps:
            raise RuntimeError("recursion not finished; cannot freeze the basis yet")
        n = self.n_steps
        return KrylovBasis(
            space=self.space,
            Q=self._Q[:, :n].copy(),
            H=self._H[: n + 1, :n].copy(),
            g_norm=self.g_norm,
            grade_reached=self.grade_reached,
        )


def arnoldi(operator: LinearOperatorHandle, g: CoefficientVector, n_steps: int,
            breakdown_tol: float = DEFAULT_BREAKDOWN_TOL) -> KrylovBasis:
    """Build an orthonormal Krylov basis of order ``n_steps``.

    Parameters
    ----------
    operator, g:
        The operator and the datum spanning the subspace; the first basis
        vector is g normalized.
    n_steps:
        Requested subspace dimension, at most the ambient dimension.
    breakdown_tol:
        Relative breakdown threshold, measured against the running maximum
        of the Hessenberg column norms.

    Returns
    -------
    KrylovBasis
        With ``n_steps`` columns, or fewer if the recursion found an
        invariant subspace first (``grade_reached`` is then set).
    """
    proc = ArnoldiProcess(operator, g, max_steps=n_steps, breakdown_tol=breakdown_tol)
    while proc.n_steps < n_steps:
        if not proc.step():
            break
    return proc.to_basis()


def project_onto_columns(space: Space, Q: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Orthogonal projection of x onto the span of orthonormal columns Q.

    Projects twice so the residual against the span stays at roundoff even
    for x nearly inside it.
    """
    if Q.shape[1] == 0:
        return np.zeros_like(x)
    if space.weights is None:
        coeff = Q.conj().T @ x
        p = Q @ coeff
        p += Q @ (Q.conj().T @ (x - p))
    else:
        wQ = space.weights[:, None] * Q
        p = Q @ (wQ.conj().T @ x)
        p += Q @ (wQ.conj().T @ (x - p))
    return p


def distance_to_subspace(v: CoefficientVector, basis: KrylovBasis,
                         n_columns: int | None = None) -> float:
    """Distance from v to the span of the leading basis columns.

    Returns the norm of v minus its orthogonal projection, a value between 0
    and the norm of v.
    """
    if v.space.dim != basis.space.dim:
        raise ValueError("vector and basis dimensions do not match")
    n = basis.n_columns if n_columns is None else n_columns
    if not 0 <= n <= basis.n_columns:
        raise ValueError(f"basis has {basis.n_columns} columns, asked for {n}")
    x = v.values
    r = x - project_onto_columns(basis.space, basis.Q[:, :n], x)
    return basis.space.norm(r)


def complement_basis(basis: KrylovBasis, ambient_dim: int | None = None) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(Q).

    Returns a matrix with ``dim - n`` columns, orthonormal in the space inner
    product; together with the basis columns they span the whole truncation.
    """
    space = basis.space
    if ambient_dim is None:
        ambient_dim = space.dim
    if ambient_dim != space.dim:
        raise ValueError(
            f"ambient dimension {ambient_dim} does not match the space ({space.dim})"
        )
    n = basis.n_columns
    if n >= ambient_dim:
        raise ValueError("no complement: basis already spans the truncation")
    eucl = space.to_euclidean(basis.Q) if space.weights is not None else basis.Q
    full, _ = np.linalg.qr(eucl, mode="complete")
    comp = full[:, n:]
    if space.weights is not None:
        comp = space.from_euclidean(comp)
    return comp

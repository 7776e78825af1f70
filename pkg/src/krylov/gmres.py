"""GMRES over an Arnoldi basis, with a full per-iteration convergence record.

The solver tracks two residual quantities per iteration: the cheap recurrence
estimate from the Givens rotations, and the residual recomputed in the
ambient space from the assembled iterate.  The recorded ``residual_norm`` is
always the recomputed one, since the recurrence estimate can drift once
reorthogonalization is involved and the quantity of interest lives in the
ambient truncation, not in the Hessenberg system.

On a lucky Arnoldi breakdown the Krylov subspace is invariant; the least
squares problem is then solved exactly, the corresponding final row is
recorded, and the iteration stops.  There is no restarting, no
preconditioning, and no residual-based stopping test: runs proceed to
``n_max`` or to the breakdown, whichever comes first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .arnoldi import DEFAULT_BREAKDOWN_TOL, ArnoldiProcess, KrylovBasis
from .errors import NumericalFailureError
from .operators import LinearOperatorHandle
from .spaces import CoefficientVector

__all__ = ["TraceRow", "SolveTrace", "gmres_solve", "residual_and_error"]


@dataclass(frozen=True)
class TraceRow:
    """Convergence indicators recorded after one GMRES iteration.

    ``error_norm`` is present exactly when an exact solution was supplied.
    ``residual_estimate`` is the Givens recurrence value, kept for
    cross-checking against the recomputed ``residual_norm``.
    """

    iteration: int
    residual_norm: float
    error_norm: float | None
    solution_norm: float
    residual_estimate: float


@dataclass(frozen=True, eq=False)
class SolveTrace:
    """Per-iteration history of a GMRES run plus its final iterate."""

    rows: tuple[TraceRow, ...]
    final_solution: CoefficientVector
    grade_reached: int | None = None
    basis: KrylovBasis | None = field(default=None, repr=False)

    def residual_norms(self) -> np.ndarray:
        return np.array([r.residual_norm for r in self.rows])

    def error_norms(self) -> np.ndarray | None:
        if self.rows and self.rows[0].error_norm is None:
            return None
        return np.array([r.error_norm for r in self.rows])

    def solution_norms(self) -> np.ndarray:
        return np.array([r.solution_norm for r in self.rows])


def _apply_rotation(cs, sn, a, b):
    return np.conj(cs) * a + np.conj(sn) * b, -sn * a + cs * b


def gmres_solve(operator: LinearOperatorHandle, g: CoefficientVector,
                n_max: int, exact: CoefficientVector | None = None,
                breakdown_tol: float = DEFAULT_BREAKDOWN_TOL,
                keep_basis: bool = False) -> SolveTrace:
    """Solve the truncated inverse problem by GMRES.

    At iteration N the iterate minimizes the residual norm over the N-th
    Krylov subspace of (operator, g); the Hessenberg least squares problem is
    maintained by progressive Givens rotations and re-solved by triangular
    back substitution each step.

    Parameters
    ----------
    operator, g:
        Problem data; g must be nonzero.
    n_max:
        Iteration budget, at most the ambient dimension.
    exact:
        Optional a-priori solution; when given, every row also records the
        ambient-space error norm against it.
    breakdown_tol:
        Passed to the Arnoldi recursion.
    keep_basis:
        Store the final Krylov basis on the returned trace (used by the
        diagnostics pipeline to avoid a second Arnoldi pass).

    Raises
    ------
    NumericalFailureError
        If the triangular factor becomes singular, which means the least
        squares problem degenerated beyond the documented breakdown handling.
    """
    if exact is not None and exact.space.dim != operator.space.dim:
        raise ValueError("exact solution does not live in the operator's space")
    space = operator.space
    proc = ArnoldiProcess(operator, g, max_steps=n_max, breakdown_tol=breakdown_tol)
    beta = proc.g_norm

    R = np.zeros((n_max + 1, n_max), dtype=complex)
    cs = np.zeros(n_max, dtype=complex)
    sn = np.zeros(n_max, dtype=complex)
    t = np.zeros(n_max + 1, dtype=complex)
    t[0] = beta

    rows: list[TraceRow] = []
    fhat = np.zeros(space.dim, dtype=complex)
    gv = g.values

    for j in range(n_max):
        growing = proc.step()
        col = proc.hessenberg_column(j).copy()
        for i in range(j):
            col[i], col[i + 1] = _apply_rotation(cs[i], sn[i], col[i], col[i + 1])
        a, b = col[j], col[j + 1]
        denom = np.hypot(abs(a), abs(b))
        if denom == 0.0:
            cs[j], sn[j] = 1.0, 0.0
        else:
            cs[j], sn[j] = a / denom, b / denom
        col[j] = denom
        col[j + 1] = 0.0
        R[: j + 2, j] = col
        t[j], t[j + 1] = _apply_rotation(cs[j], sn[j], t[j], 0.0)

        diag = np.abs(np.diag(R[: j + 1, : j + 1]))
        if np.min(diag) <= 1e-14 * max(np.max(diag), 1e-300):
            raise NumericalFailureError(
                f"Hessenberg least squares became rank deficient at step {j + 1}"
            )
        y = scipy.linalg.solve_triangular(R[: j + 1, : j + 1], t[: j + 1])
        fhat = proc.basis_matrix(j + 1) @ y
        residual = gv - operator.apply_values(fhat)
        err = None
        if exact is not None:
            err = space.norm(exact.values - fhat)
        rows.append(TraceRow(
            iteration=j + 1,
            residual_norm=space.norm(residual),
            error_norm=err,
            solution_norm=space.norm(fhat),
            residual_estimate=float(abs(t[j + 1])),
        ))
        if not growing:
            break

    return SolveTrace(
        rows=tuple(rows),
        final_solution=CoefficientVector(values=fhat, space=space),
        grade_reached=proc.grade_reached,
        basis=proc.to_basis() if keep_basis else None,
    )


@dataclass(frozen=True)
class ResidualError:
    residual_norm: float
    error_norm: float | None


def residual_and_error(operator: LinearOperatorHandle, fhat: CoefficientVector,
                       g: CoefficientVector,
                       exact: CoefficientVector | None = None) -> ResidualError:
    """Ambient-space residual and error norms of a candidate solution."""
    space = operator.space
    for v in (fhat, g) + (() if exact is None else (exact,)):
        if v.space.dim != space.dim:
            raise ValueError("dimension mismatch")
    residual = g.values - operator.apply_values(fhat.values)
    err = None if exact is None else space.norm(exact.values - fhat.values)
    return ResidualError(residual_norm=space.norm(residual), error_norm=err)

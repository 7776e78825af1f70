"""Numerical indicators for the structure of a truncated inverse problem.

Three questions are probed, none of which is decidable at finite truncation;
each indicator is therefore reported as a number whose behaviour under a
growing truncation is the actual evidence.

* Does the adjoint map the datum back into the Krylov subspace?  For normal
  operators this is an exact reducibility criterion, measured here as the
  distance of the adjoint-applied datum from growing Krylov sections
  (``reducibility_defect``).  The raw distance ladder is also available
  without the normality gate, since it is a well-defined quantity for any
  operator, just not a reducibility certificate.

* Does the image of the orthogonal complement of the Krylov subspace lean
  into the subspace?  Measured as the largest principal cosine between the
  two (``intersection_indicator``); values near one signal a nontrivial
  intersection, values bounded away from one signal triviality.

* Where does the final solve error live relative to the operator's kernel
  support (``kernel_error_profile``)?
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .arnoldi import KrylovBasis, arnoldi, complement_basis, project_onto_columns
from .errors import UnsupportedOperatorError
from .operators import LinearOperatorHandle
from .spaces import CoefficientVector

logger = logging.getLogger(__name__)

__all__ = [
    "DiagnosticsReport",
    "KernelErrorProfile",
    "adjoint_defect_ladder",
    "defect_ladder_from_basis",
    "reducibility_defect",
    "intersection_indicator",
    "kernel_error_profile",
    "krylov_solution_projection",
]


@dataclass(frozen=True)
class KernelErrorProfile:
    """Error magnitudes split by kernel support.

    ``on_kernel`` lists (basis label, magnitude) for the kernel indices;
    ``off_kernel_max`` is the largest magnitude over all other entries.
    """

    on_kernel: tuple
    off_kernel_max: float
    tol: float

    @property
    def off_kernel_within_tol(self) -> bool:
        return self.off_kernel_max <= self.tol


@dataclass(frozen=True)
class DiagnosticsReport:
    """Bundle of the indicators computed for one solved problem.

    Fields are ``None`` when the corresponding indicator does not apply to
    the operator at hand (see the module docstring).
    """

    reducibility_defect: tuple | None = None
    intersection_max_cosine: float | None = None
    kernel_error_profile: KernelErrorProfile | None = None
    notes: str = ""


def defect_ladder_from_basis(operator: LinearOperatorHandle, g: CoefficientVector,
                             basis: KrylovBasis) -> tuple:
    """Distances of the adjoint-applied datum from growing Krylov sections.

    Returns ((1, d_1), ..., (n, d_n)) with d_k the distance of A*g from the
    span of the first k basis columns.  Computed by sequentially projecting
    out one orthonormal column at a time, so the ladder is nonincreasing by
    construction.
    """
    space = operator.space
    w = operator.adjoint_values(g.values)
    r = w.copy()
    out = []
    for k in range(basis.n_columns):
        q = basis.Q[:, k]
        r = r - q * space.inner(q, r)
        out.append((k + 1, space.norm(r)))
    return tuple(out)


def adjoint_defect_ladder(operator: LinearOperatorHandle, g: CoefficientVector,
                          n_max: int) -> tuple:
    """Defect ladder computed from a fresh Arnoldi basis of order ``n_max``."""
    basis = arnoldi(operator, g, n_max)
    return defect_ladder_from_basis(operator, g, basis)


def reducibility_defect(operator: LinearOperatorHandle, g: CoefficientVector,
                        n_max: int) -> tuple:
    """Reducibility criterion ladder for a normal operator.

    A vanishing ladder indicates that the adjoint-applied datum lies in the
    closure of the Krylov subspace, which for normal operators is equivalent
    to the subspace reducing the operator.  A ladder bounded away from zero
    indicates non-reducibility.

    Raises
    ------
    UnsupportedOperatorError
        If the operator is not flagged normal; the equivalence underlying
        the interpretation fails then.  Use :func:`adjoint_defect_ladder`
        for the raw distances.
    """
    if not operator.metadata.is_normal:
        raise UnsupportedOperatorError(
            f"reducibility criterion needs a normal operator, got {operator.name!r}"
        )
    return adjoint_defect_ladder(operator, g, n_max)


def _orthonormal_image(operator: LinearOperatorHandle, columns: np.ndarray,
                       drop_rtol: float = 1e-12):
    """Image of the given columns under the operator, orthonormalized.

    Directions whose singular value falls below ``drop_rtol`` of the largest
    are dropped; the number dropped is returned alongside.
    """
    space = operator.space
    img = np.column_stack([operator.apply_values(columns[:, k])
                           for k in range(columns.shape[1])])
    eucl = space.to_euclidean(img) if space.weights is not None else img
    u, s, _ = np.linalg.svd(eucl, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((space.dim, 0)), columns.shape[1]
    keep = s > drop_rtol * s[0]
    dropped = int(np.count_nonzero(~keep))
    w = u[:, keep]
    if space.weights is not None:
        w = space.from_euclidean(w)
    return w, dropped


def intersection_indicator(operator: LinearOperatorHandle, basis: KrylovBasis,
                           ambient_dim: int | None = None,
                           complement: np.ndarray | None = None) -> float:
    """Largest principal cosine between the Krylov section and the image of
    its orthogonal complement.

    A value near one means some direction of A applied to the complement is
    nearly contained in the Krylov section (nontrivial intersection at this
    truncation); a value bounded away from one across growing truncations is
    evidence of triviality.  The orthonormalized image may lose directions
    when the operator nearly annihilates parts of the complement; that is
    logged, not raised.

    ``complement`` overrides the computed orthonormal complement basis, e.g.
    to check invariance under a different choice of that basis.
    """
    space = operator.space
    if ambient_dim is not None and ambient_dim != space.dim:
        raise ValueError(
            f"ambient dimension {ambient_dim} does not match the space ({space.dim})"
        )
    if basis.n_columns >= space.dim:
        raise ValueError("basis already spans the truncation; no complement")
    if complement is None:
        complement = complement_basis(basis)
    w, dropped = _orthonormal_image(operator, complement)
    if dropped:
        logger.warning(
            "operator nearly annihilates %d complement direction(s); "
            "principal cosines taken over the surviving image", dropped,
        )
    if w.shape[1] == 0:
        return 0.0
    if space.weights is None:
        overlap = basis.Q.conj().T @ w
    else:
        overlap = (space.weights[:, None] * basis.Q).conj().T @ w
    cos = float(np.linalg.svd(overlap, compute_uv=False)[0])
    return min(max(cos, 0.0), 1.0)


def kernel_error_profile(error_vec: CoefficientVector, kernel_indices,
                         tol: float = 1e-6) -> KernelErrorProfile:
    """Split error magnitudes into kernel-index entries and the rest."""
    space = error_vec.space
    mags = np.abs(error_vec.values)
    labels = sorted(int(i) for i in kernel_indices)
    slots = [space.slot_of(i) for i in labels]
    on_kernel = tuple((label, float(mags[slot])) for label, slot in zip(labels, slots))
    mask = np.ones(space.dim, dtype=bool)
    mask[slots] = False
    off_max = float(mags[mask].max()) if mask.any() else 0.0
    return KernelErrorProfile(on_kernel=on_kernel, off_kernel_max=off_max, tol=tol)


def krylov_solution_projection(f_any: CoefficientVector,
                               basis: KrylovBasis) -> CoefficientVector:
    """Orthogonal projection of an arbitrary solution onto the Krylov section.

    When the subspace reduces the operator, this extracts the Krylov solution
    from any solution of the inverse problem.
    """
    if f_any.space.dim != basis.space.dim:
        raise ValueError("vector and basis dimensions do not match")
    p = project_onto_columns(basis.space, basis.Q, f_any.values)
    return CoefficientVector(values=p, space=basis.space)

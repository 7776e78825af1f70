"""Polynomial approximation of an operator inverse.

For an operator whose spectrum sits inside a disk around a nonzero center c
with radius r < |c|, the truncated Taylor series of 1/z about c converges to
the inverse geometrically at rate r/|c|, uniformly on the disk.  Applying the
polynomial to the datum produces approximants that by construction live in
the Krylov subspace, so the GMRES residual is dominated by the polynomial
error at matching degree.

The disk parameters are caller-supplied; estimating the spectrum is a
separate problem and out of scope here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import LinearOperatorHandle
from .spaces import CoefficientVector

__all__ = ["PolySeries", "inverse_poly", "apply_poly"]


@dataclass(frozen=True, eq=False)
class PolySeries:
    """Truncated Taylor series of 1/z about a nonzero center.

    ``coefficients[k]`` multiplies (z - center)^k and equals
    (-1)^k / center^(k+1).
    """

    center: complex
    degree: int
    coefficients: np.ndarray = field(repr=False)

    def __call__(self, z):
        """Evaluate by Horner in (z - center); accepts scalars or arrays."""
        z = np.asarray(z, dtype=complex)
        acc = np.full_like(z, self.coefficients[self.degree])
        for k in range(self.degree - 1, -1, -1):
            acc = acc * (z - self.center) + self.coefficients[k]
        return acc if acc.ndim else complex(acc)

    def remainder(self, z):
        """Closed form of 1/z minus the series: the untruncated tail."""
        z = np.asarray(z, dtype=complex)
        n = self.degree
        out = (-1.0) ** (n + 1) * (z - self.center) ** (n + 1) / (
            self.center ** (n + 1) * z
        )
        return out if out.ndim else complex(out)


def inverse_poly(center: complex, degree: int) -> PolySeries:
    """Degree-n Taylor polynomial of 1/z about ``center``.

    Valid as an inverse approximation on any disk about the center that
    excludes the origin; the sup-norm error on the disk of radius r is
    (r/|center|)^(n+1) / (|center| - r) at worst, and exactly
    |z-center|^(n+1) / (|center|^(n+1) |z|) pointwise.
    """
    c = complex(center)
    if c == 0:
        raise ValueError("center must be nonzero")
    if degree < 0:
        raise ValueError(f"degree must be nonnegative, got {degree}")
    k = np.arange(degree + 1)
    coeff = (-1.0 + 0.0j) ** k / c ** (k + 1)
    return PolySeries(center=c, degree=degree, coefficients=coeff)


def apply_poly(operator: LinearOperatorHandle, p: PolySeries,
               g: CoefficientVector) -> CoefficientVector:
    """Evaluate p(A) applied to g by Horner recursion in (A - center).

    Uses ``p.degree`` operator applications; the result lies in the Krylov
    subspace of (A, g) of order degree + 1.
    """
    if g.space.dim != operator.space.dim:
        raise ValueError("datum does not live in the operator's space")
    gv = g.values
    acc = p.coefficients[p.degree] * gv
    for k in range(p.degree - 1, -1, -1):
        acc = operator.apply_values(acc) - p.center * acc + p.coefficients[k] * gv
    return CoefficientVector(values=acc, space=operator.space)

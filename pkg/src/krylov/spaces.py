"""Truncated Hilbert spaces and coefficient vectors.

Two kinds of ambient space are supported: a sequence space (coefficients with
respect to a canonical orthonormal basis, counting-measure inner product) and
a function space (samples of an L2[0,1] function on a uniform grid, trapezoid
quadrature inner product).  Sequence spaces optionally carry a two-sided
index line, stored interleaved as 0, 1, -1, 2, -2, ...
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def zindex_to_slot(n: int) -> int:
    """Storage slot (0-based) of the two-sided index n."""
    if n == 0:
        return 0
    return 2 * n - 1 if n > 0 else -2 * n


def slot_to_zindex(slot: int) -> int:
    """Two-sided index stored at the given 0-based slot."""
    if slot < 0:
        raise ValueError(f"slot must be nonnegative, got {slot}")
    if slot == 0:
        return 0
    half = (slot + 1) // 2
    return half if slot % 2 == 1 else -half


@dataclass(frozen=True, eq=False)
class Space:
    """A finite truncation of the ambient Hilbert space.

    ``weights`` are the quadrature weights of the inner product (``None``
    means unit weights), ``grid`` holds the sample nodes of a function space,
    and ``two_sided`` marks sequence spaces indexed over the integers.
    """

    dim: int
    weights: np.ndarray | None = field(default=None, repr=False)
    grid: np.ndarray | None = field(default=None, repr=False)
    two_sided: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"space dimension must be positive, got {self.dim}")
        if self.two_sided and self.dim % 2 == 0:
            raise ValueError("a two-sided sequence space needs odd dimension")

    @property
    def is_function_space(self) -> bool:
        return self.grid is not None

    def compatible(self, other: "Space") -> bool:
        return (
            self.dim == other.dim
            and self.two_sided == other.two_sided
            and self.is_function_space == other.is_function_space
        )

    # -- inner product -----------------------------------------------------

    def inner(self, u: np.ndarray, v: np.ndarray) -> complex:
        """Inner product, antilinear in the first argument."""
        if self.weights is None:
            return complex(np.vdot(u, v))
        return complex(np.vdot(u, self.weights * v))

    def norm(self, v: np.ndarray) -> float:
        if self.weights is None:
            return float(np.linalg.norm(v))
        return float(np.sqrt(np.real(np.vdot(v, self.weights * v))))

    def to_euclidean(self, v: np.ndarray) -> np.ndarray:
        """Coordinates in which the inner product becomes the plain dot.

        Accepts a vector or a matrix of column vectors.
        """
        if self.weights is None:
            return v
        s = np.sqrt(self.weights)
        return s[:, None] * v if v.ndim == 2 else s * v

    def from_euclidean(self, v: np.ndarray) -> np.ndarray:
        if self.weights is None:
            return v
        s = np.sqrt(self.weights)
        return v / s[:, None] if v.ndim == 2 else v / s

    # -- index labels --------------------------------------------------------

    def slot_of(self, label: int) -> int:
        """Storage slot of a basis label (1-based index, or a two-sided one)."""
        if self.two_sided:
            slot = zindex_to_slot(label)
        else:
            slot = label - 1
        if not 0 <= slot < self.dim:
            raise ValueError(f"basis label {label} outside the truncation")
        return slot

    def labels(self) -> np.ndarray:
        """Basis label of every storage slot, in storage order."""
        if self.two_sided:
            return np.array([slot_to_zindex(s) for s in range(self.dim)])
        return np.arange(1, self.dim + 1)


def sequence_space(dim: int, two_sided: bool = False) -> Space:
    return Space(dim=dim, two_sided=two_sided)


def unit_interval_space(grid_points: int) -> Space:
    """Uniform grid on [0,1] with composite-trapezoid quadrature weights."""
    if grid_points < 2:
        raise ValueError(f"need at least 2 grid points, got {grid_points}")
    grid = np.linspace(0.0, 1.0, grid_points)
    h = grid[1] - grid[0]
    weights = np.full(grid_points, h)
    weights[0] = weights[-1] = h / 2
    return Space(dim=grid_points, weights=weights, grid=grid)


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """A truncated Hilbert-space element: complex coefficients plus its space."""

    values: np.ndarray = field(repr=False)
    space: Space

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.space.dim,):
            raise ValueError(
                f"expected {self.space.dim} coefficients, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values.view(float))):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "values", values)

    def norm(self) -> float:
        return self.space.norm(self.values)

    def inner(self, other: "CoefficientVector") -> complex:
        return self.space.inner(self.values, other.values)


def vector(space: Space, values: np.ndarray) -> CoefficientVector:
    return CoefficientVector(values=np.array(values, dtype=complex), space=space)


def zero_vector(space: Space) -> CoefficientVector:
    return CoefficientVector(values=np.zeros(space.dim, dtype=complex), space=space)


def basis_vector(space: Space, label: int) -> CoefficientVector:
    """Canonical basis vector for a 1-based (or two-sided) index label."""
    values = np.zeros(space.dim, dtype=complex)
    values[space.slot_of(label)] = 1.0
    return CoefficientVector(values=values, space=space)

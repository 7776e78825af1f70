"""Matrix-free model operators on truncated sequence and function spaces.

Every constructor returns a :class:`LinearOperatorHandle` wrapping the forward
and adjoint actions as closures over precomputed coefficient arrays, together
with exact analytic metadata (operator norm, kernel support, symmetry flags).
The handles are immutable and safe for concurrent read-only use; ``apply``
and ``adjoint_apply`` are pure functions of their input vector.

Truncation edge policy for shifts: a coefficient shifted past the last storage
slot is dropped.  The reference problems keep all iterates well inside the
truncation window, so the drop never activates there (asserted in the tests).
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .spaces import (
    CoefficientVector,
    Space,
    sequence_space,
    slot_to_zindex,
    unit_interval_space,
)

__all__ = [
    "WeightSequence",
    "OperatorMetadata",
    "LinearOperatorHandle",
    "make_multiplication",
    "make_masked_multiplication",
    "make_right_shift",
    "make_left_shift",
    "make_weighted_right_shift",
    "make_bilateral_weighted_shift",
    "make_volterra",
    "make_fourier_convolution",
    "make_dense_operator",
    "convolution_coefficient",
]


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """A positive weight sequence w_1, w_2, ... feeding the diagonal and
    shift constructors.

    Generators: ``explicit`` wraps a finite list, ``reciprocal`` produces
    w_n = 1 / (scale * n).
    """

    generator: str
    scale: float | None = None
    explicit_values: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def reciprocal(cls, scale: float) -> "WeightSequence":
        if scale <= 0:
            raise ValueError(f"reciprocal scale must be positive, got {scale}")
        return cls(generator="reciprocal", scale=float(scale))

    @classmethod
    def explicit(cls, values) -> "WeightSequence":
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("explicit weights must be a nonempty 1-d array")
        if np.any(arr <= 0):
            raise ValueError("weights must be positive")
        return cls(generator="explicit", explicit_values=arr)

    def first(self, count: int) -> np.ndarray:
        """The leading weights w_1 .. w_count."""
        if count < 0:
            raise ValueError(f"count must be nonnegative, got {count}")
        if self.generator == "reciprocal":
            return 1.0 / (self.scale * np.arange(1, count + 1))
        if count > len(self.explicit_values):
            raise ValueError(
                f"asked for {count} weights, only {len(self.explicit_values)} supplied"
            )
        return self.explicit_values[:count].copy()

    def require_strictly_decreasing(self, count: int) -> np.ndarray:
        w = self.first(count)
        if np.any(np.diff(w) >= 0):
            raise ValueError("weight sequence must be strictly decreasing")
        return w


@dataclass(frozen=True)
class OperatorMetadata:
    """Analytic facts about an operator, recorded at construction time.

    ``kernel_indices`` uses basis labels (1-based for one-sided sequence
    spaces, signed mode numbers for two-sided ones).
    """

    operator_norm: float | None = None
    kernel_indices: frozenset = frozenset()
    is_self_adjoint: bool = False
    is_normal: bool = False


@dataclass(frozen=True, eq=False)
class LinearOperatorHandle:
    """Matrix-free bounded operator: forward action, adjoint action, metadata."""

    space: Space
    forward: Callable[[np.ndarray], np.ndarray]
    adjoint: Callable[[np.ndarray], np.ndarray]
    metadata: OperatorMetadata = OperatorMetadata()
    name: str = "operator"

    @property
    def ambient_dim(self) -> int:
        return self.space.dim

    def apply_values(self, values: np.ndarray) -> np.ndarray:
        return self.forward(values)

    def adjoint_values(self, values: np.ndarray) -> np.ndarray:
        return self.adjoint(values)

    def apply(self, v: CoefficientVector) -> CoefficientVector:
        self._check_space(v)
        return CoefficientVector(values=self.forward(v.values), space=self.space)

    def adjoint_apply(self, v: CoefficientVector) -> CoefficientVector:
        self._check_space(v)
        return CoefficientVector(values=self.adjoint(v.values), space=self.space)

    def _check_space(self, v: CoefficientVector):
        if v.space.dim != self.space.dim:
            raise ValueError(
                f"vector dimension {v.space.dim} does not match operator "
                f"dimension {self.space.dim}"
            )


def _check_dim(dim: int, minimum: int = 1):
    if dim < minimum:
        raise ValueError(f"dimension must be >= {minimum}, got {dim}")


# ---------------------------------------------------------------------------
# diagonal operators on the one-sided sequence space
# ---------------------------------------------------------------------------

def _diagonal_handle(diag: np.ndarray, name: str,
                     kernel_indices: frozenset = frozenset()) -> LinearOperatorHandle:
    space = sequence_space(len(diag))
    diag = diag.astype(complex)
    conj = np.conj(diag)
    real_diag = bool(np.all(diag.imag == 0))
    meta = OperatorMetadata(
        operator_norm=float(np.max(np.abs(diag))),
        kernel_indices=kernel_indices,
        is_self_adjoint=real_diag,
        is_normal=True,
    )
    return LinearOperatorHandle(
        space=space,
        forward=lambda v: diag * v,
        adjoint=lambda v: conj * v,
        metadata=meta,
        name=name,
    )


def make_multiplication(weights: WeightSequence, dim: int) -> LinearOperatorHandle:
    """Multiplication operator: the n-th coefficient is scaled by w_n.

    Self-adjoint for real weights; the operator norm is sup_n w_n.
    """
    _check_dim(dim)
    return _diagonal_handle(weights.first(dim), name="mult")


def make_masked_multiplication(weights: WeightSequence, zero_set, dim: int) -> LinearOperatorHandle:
    """Multiplication with the weights on ``zero_set`` (1-based) forced to zero.

    The resulting operator has kernel spanned by the masked basis vectors,
    recorded in ``metadata.kernel_indices``.
    """
    _check_dim(dim)
    zero_set = frozenset(int(i) for i in zero_set)
    for idx in zero_set:
        if not 1 <= idx <= dim:
            raise ValueError(f"masked index {idx} outside 1..{dim}")
    diag = weights.first(dim).astype(complex)
    if zero_set:
        diag[np.array(sorted(zero_set)) - 1] = 0.0
    return _diagonal_handle(diag, name="mult-masked", kernel_indices=zero_set)


# ---------------------------------------------------------------------------
# shifts
# ---------------------------------------------------------------------------

def make_right_shift(dim: int) -> LinearOperatorHandle:
    """Unweighted right shift: e_n -> e_{n+1}, last coefficient dropped."""
    _check_dim(dim, minimum=2)
    space = sequence_space(dim)

    def forward(v):
        out = np.zeros_like(v)
        out[1:] = v[:-1]
        return out

    def adjoint(v):
        out = np.zeros_like(v)
        out[:-1] = v[1:]
        return out

    meta = OperatorMetadata(operator_norm=1.0)
    return LinearOperatorHandle(space, forward, adjoint, meta, name="rshift")


def make_left_shift(dim: int) -> LinearOperatorHandle:
    """Unweighted left shift, the adjoint of the right shift.  Kernel: e_1."""
    rs = make_right_shift(dim)
    meta = OperatorMetadata(operator_norm=1.0, kernel_indices=frozenset({1}))
    return LinearOperatorHandle(rs.space, rs.adjoint, rs.forward, meta, name="lshift")


def make_weighted_right_shift(weights: WeightSequence, dim: int) -> LinearOperatorHandle:
    """Weighted right shift: e_n -> w_n e_{n+1} with strictly decreasing w.

    The adjoint is the weighted left shift; composing adjoint after forward
    acts as multiplication by w_n^2 away from the truncation edge.
    """
    _check_dim(dim, minimum=2)
    w = weights.require_strictly_decreasing(dim - 1).astype(complex)

    def forward(v):
        out = np.zeros_like(v)
        out[1:] = w * v[:-1]
        return out

    def adjoint(v):
        out = np.zeros_like(v)
        out[:-1] = w * v[1:]
        return out

    meta = OperatorMetadata(operator_norm=float(np.abs(w[0])))
    return LinearOperatorHandle(sequence_space(dim), forward, adjoint, meta,
                                name="wrshift")


def make_bilateral_weighted_shift(weights: WeightSequence, dim: int) -> LinearOperatorHandle:
    """Weighted right shift on the two-sided sequence space.

    Mode n is mapped to w_{|n|} times mode n+1, where w_0 is the first weight
    of the sequence.  ``dim`` must be odd (symmetric window of modes).  The
    topmost mode shifts out of the window and is dropped.
    """
    if dim % 2 == 0 or dim < 3:
        raise ValueError(f"bilateral shift needs an odd dimension >= 3, got {dim}")
    space = sequence_space(dim, two_sided=True)
    half = (dim - 1) // 2
    wseq = weights.require_strictly_decreasing(half + 1)

    # src[k], dst[k], amp[k]: slot-level arrows dst <- amp * src for modes
    # n = -half .. half-1; mode 'half' has no destination inside the window.
    modes = np.arange(-half, half)
    src = np.array([space.slot_of(int(n)) for n in modes])
    dst = np.array([space.slot_of(int(n) + 1) for n in modes])
    amp = wseq[np.abs(modes)].astype(complex)

    def forward(v):
        out = np.zeros_like(v)
        out[dst] = amp * v[src]
        return out

    def adjoint(v):
        out = np.zeros_like(v)
        out[src] = amp * v[dst]
        return out

    meta = OperatorMetadata(operator_norm=float(wseq[0]))
    return LinearOperatorHandle(space, forward, adjoint, meta, name="bilateral")


# ---------------------------------------------------------------------------
# Volterra operator on L2[0,1]
# ---------------------------------------------------------------------------

def make_volterra(grid_points: int) -> LinearOperatorHandle:
    """Volterra integration operator on a uniform grid over [0,1].

    The forward action is the cumulative composite-trapezoid quadrature of
    the integral from 0 to x.  The adjoint is the exact discrete adjoint
    with respect to the trapezoid inner product: it coincides with the
    reversed cumulative trapezoid (integral from x to 1) at every interior
    node and differs from it only by half-weight corrections in the two
    endpoint rows, which keeps the adjoint pairing exact at machine
    precision.  Operator norm of the continuum operator: 2/pi.
    """
    if grid_points < 16:
        raise ValueError(f"need at least 16 grid points, got {grid_points}")
    space = unit_interval_space(grid_points)
    h = space.grid[1] - space.grid[0]
    w = space.weights

    def forward(v):
        out = np.empty_like(v)
        out[0] = 0.0
        out[1:] = np.cumsum((h / 2.0) * (v[:-1] + v[1:]))
        return out

    def adjoint(v):
        wv = w * v
        tail = np.empty_like(v)
        tail[-1] = 0.0
        tail[:-1] = np.cumsum(wv[:0:-1])[::-1]
        out = (h / 2.0) * v + tail
        out[0] -= (h / 2.0) * v[0]
        return out

    meta = OperatorMetadata(operator_norm=2.0 / np.pi)
    return LinearOperatorHandle(space, forward, adjoint, meta, name="volterra")


# ---------------------------------------------------------------------------
# diagonal convolution operator in Fourier coefficients
# ---------------------------------------------------------------------------

def convolution_coefficient(n: int) -> complex:
    """Fourier multiplier of the model circular-convolution kernel.

    Zero at n = 0; for n != 0 the multiplier is
    1 / (1 + 4*i*pi*n + (1 - 4 n^2) pi^2).  The moduli are even in n while
    the phases are not, which makes the operator normal but not self-adjoint.
    """
    if n == 0:
        return 0.0 + 0.0j
    return 1.0 / (1.0 + 4j * np.pi * n + (1.0 - 4.0 * n * n) * np.pi**2)


def make_fourier_convolution(n_modes: int) -> LinearOperatorHandle:
    """Convolution acting diagonally on stored Fourier coefficients.

    Modes n = -n_modes .. n_modes are stored interleaved.  Mode 0 spans the
    kernel; all other multipliers are distinct and nonzero.
    """
    if n_modes < 1:
        raise ValueError(f"need at least 1 mode, got {n_modes}")
    dim = 2 * n_modes + 1
    space = sequence_space(dim, two_sided=True)
    diag = np.array(
        [convolution_coefficient(slot_to_zindex(s)) for s in range(dim)],
        dtype=complex,
    )
    conj = np.conj(diag)
    meta = OperatorMetadata(
        operator_norm=float(np.max(np.abs(diag))),
        kernel_indices=frozenset({0}),
        is_self_adjoint=False,
        is_normal=True,
    )
    return LinearOperatorHandle(
        space=space,
        forward=lambda v: diag * v,
        adjoint=lambda v: conj * v,
        metadata=meta,
        name="fourier-conv",
    )


# ---------------------------------------------------------------------------
# dense matrices, for small explicit examples
# ---------------------------------------------------------------------------

def make_dense_operator(matrix, metadata: OperatorMetadata | None = None,
                        name: str = "dense") -> LinearOperatorHandle:
    """Wrap a small square matrix as an operator handle.

    Intended for low-dimensional explicit examples; the large model operators
    all have dedicated matrix-free constructors.
    """
    mat = np.asarray(matrix, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    if metadata is None:
        herm = bool(np.allclose(mat, mat.conj().T, atol=1e-14))
        normal = herm or bool(
            np.allclose(mat @ mat.conj().T, mat.conj().T @ mat, atol=1e-14)
        )
        metadata = OperatorMetadata(
            operator_norm=float(np.linalg.norm(mat, ord=2)),
            is_self_adjoint=herm,
            is_normal=normal,
        )
    madj = mat.conj().T
    return LinearOperatorHandle(
        space=sequence_space(mat.shape[0]),
        forward=lambda v: mat @ v,
        adjoint=lambda v: madj @ v,
        metadata=metadata,
        name=name,
    )

"""Dense operators on small truncated tensor-product Hilbert spaces.

Everything here is deliberately dense and eager: the spaces this library
targets (a qubit or Kerr mode times a truncated oscillator) have dimension
of order 10 to 100, where numpy matmul beats any sparse bookkeeping.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

__all__ = [
    "HilbertSpace",
    "Operator",
    "DegenerateLevelWarning",
    "build_ladder",
    "build_number",
    "commutator",
    "pinch",
    "off_diag",
]

# Relative tolerance used to decide whether two H0 levels are degenerate
# when splitting an operator into its block-diagonal (pinch) and
# block-off-diagonal parts.
DEGENERACY_RTOL = 1e-9


class DegenerateLevelWarning(UserWarning):
    """Emitted when a pinch/off_diag split encounters degenerate H0 levels."""


@dataclass(frozen=True)
class HilbertSpace:
    """Tensor product of finite-dimensional subsystems.

    Parameters
    ----------
    dims : tuple of int
        Dimension of each subsystem factor, in tensor-product order.
        The first factor is conventionally the nonlinear element (qubit
        or Kerr mode) and the last the readout resonator, but nothing
        here depends on that.
    """

    dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.dims) == 0:
            raise ValueError("need at least one subsystem")
        if any(int(d) != d or d < 2 for d in self.dims):
            raise ValueError(f"subsystem dims must be integers >= 2, got {self.dims}")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def basis_labels(self) -> list[tuple[int, ...]]:
        """Occupation-number label of every basis state, in matrix order."""
        return [tuple(idx) for idx in np.ndindex(*self.dims)]

    def index_of(self, label: tuple[int, ...]) -> int:
        """Flat basis index of an occupation-number label."""
        if len(label) != len(self.dims):
            raise ValueError(f"label {label} has wrong length for dims {self.dims}")
        return int(np.ravel_multi_index(label, self.dims))

    def number_vector(self, subsystem: int) -> np.ndarray:
        """Occupation of `subsystem` for each basis state, as a flat vector."""
        n = np.arange(self.dims[subsystem])
        full = reduce(np.add.outer, [
            n if k == subsystem else np.zeros(d)
            for k, d in enumerate(self.dims)
        ])
        return full.ravel()


@dataclass(frozen=True)
class Operator:
    """A dense operator tied to a HilbertSpace.

    Thin wrapper over a complex ndarray; arithmetic checks that both
    operands live on the same space, which catches most wiring mistakes
    in model-building code.
    """

    space: HilbertSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.space.dim
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match space dim {d}")
        object.__setattr__(self, "matrix", m)

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "Operator"):
        if self.space != other.space:
            raise ValueError("operators live on different Hilbert spaces")

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.matrix)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.space, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.space, self.matrix @ other.matrix)

    def dagger(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    # -- predicates and norms ---------------------------------------------

    def max_abs(self) -> float:
        """Largest element magnitude (the norm used throughout this library)."""
        return float(np.abs(self.matrix).max()) if self.matrix.size else 0.0

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        scale = max(self.max_abs(), 1.0)
        return bool(np.abs(self.matrix - self.matrix.conj().T).max() <= tol * scale)

    def is_antihermitian(self, tol: float = 1e-12) -> bool:
        scale = max(self.max_abs(), 1.0)
        return bool(np.abs(self.matrix + self.matrix.conj().T).max() <= tol * scale)

    def is_diagonal(self) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.all(off == 0))

    def diagonal(self) -> np.ndarray:
        return np.diag(self.matrix).copy()


def identity(space: HilbertSpace) -> Operator:
    return Operator(space, np.eye(space.dim, dtype=complex))


def zero(space: HilbertSpace) -> Operator:
    return Operator(space, np.zeros((space.dim, space.dim), dtype=complex))


def _embed(space: HilbertSpace, subsystem: int, local: np.ndarray) -> np.ndarray:
    mats = [np.eye(d, dtype=complex) for d in space.dims]
    mats[subsystem] = local
    return reduce(np.kron, mats)


def build_ladder(space: HilbertSpace, subsystem: int) -> Operator:
    """Annihilation operator of one subsystem, embedded in the full space.

    Matrix elements <n-1|a|n> = sqrt(n) in the truncated number basis of
    the chosen factor, identity on every other factor.  For a dim-2
    factor this is the qubit lowering operator |g><e| in the convention
    where index 0 is the ground state.
    """
    d = space.dims[subsystem]
    local = np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1).astype(complex)
    return Operator(space, _embed(space, subsystem, local))


def build_number(space: HilbertSpace, subsystem: int) -> Operator:
    """Number operator of one subsystem, embedded in the full space."""
    d = space.dims[subsystem]
    local = np.diag(np.arange(d, dtype=complex))
    return Operator(space, _embed(space, subsystem, local))


def commutator(a: Operator, b: Operator) -> Operator:
    a._check(b)
    return Operator(a.space, a.matrix @ b.matrix - b.matrix @ a.matrix)


def _degeneracy_mask(h0: Operator, warn: bool = True) -> np.ndarray:
    """Boolean mask of index pairs (j, k) with degenerate H0 energies.

    H0 must be strictly diagonal.  Levels are compared with relative
    tolerance DEGENERACY_RTOL against the overall spectral scale.
    """
    if not h0.is_diagonal():
        raise ValueError("H0 must be diagonal in the working basis")
    energies = h0.diagonal()
    if np.abs(energies.imag).max(initial=0.0) > 1e-12 * max(np.abs(energies).max(initial=0.0), 1.0):
        raise ValueError("H0 has non-real diagonal entries")
    e = energies.real
    scale = max(float(e.max() - e.min()), 1.0) if e.size > 1 else 1.0
    mask = np.abs(e[:, None] - e[None, :]) <= DEGENERACY_RTOL * scale
    if warn and np.any(mask & ~np.eye(len(e), dtype=bool)):
        warnings.warn(
            "H0 has degenerate levels; pinch keeps full degenerate blocks",
            DegenerateLevelWarning,
            stacklevel=3,
        )
    return mask


def pinch(h0: Operator, a: Operator, warn: bool = True) -> Operator:
    """Block-diagonal part of `a` with respect to the eigenbasis of `h0`.

    Keeps every element a[j, k] whose bare energies satisfy
    E_j = E_k within relative tolerance, i.e. the full degenerate blocks,
    not just the literal diagonal.  Degeneracy triggers a
    DegenerateLevelWarning once per call site.
    """
    h0._check(a)
    mask = _degeneracy_mask(h0, warn=warn)
    return Operator(a.space, np.where(mask, a.matrix, 0.0))


def off_diag(h0: Operator, a: Operator, warn: bool = True) -> Operator:
    """Complement of pinch: the part of `a` connecting distinct H0 levels."""
    h0._check(a)
    mask = _degeneracy_mask(h0, warn=warn)
    return Operator(a.space, np.where(mask, 0.0, a.matrix))
